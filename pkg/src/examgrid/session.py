"""Exam lifecycle.

Student side: an explicit state machine from awaiting-paper through
passkey unlock, environment check, the timed exam, submission or expiry,
and upload of the return container. Sessions are immutable snapshots;
every event returns a new one. The transition relation is exactly

    IDLE -> AWAITING_PAPER -> [PASSKEY_REQUIRED ->] ENV_CHECK -> IN_EXAM
         -> {SUBMITTED | EXPIRED} -> UPLOADED

plus -> FAILED from any pre-exam state; anything else raises
InvalidTransition.

Lecturer side: publish a designed paper as an encrypted EXAM container to
drop-boxes, and collect/verify the returns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Protocol, Sequence

from . import envcheck, rts, transport, vqp
from .gesture import frameset


class Phase(enum.Enum):
    IDLE = "IDLE"
    AWAITING_PAPER = "AWAITING_PAPER"
    PASSKEY_REQUIRED = "PASSKEY_REQUIRED"
    ENV_CHECK = "ENV_CHECK"
    IN_EXAM = "IN_EXAM"
    SUBMITTED = "SUBMITTED"
    EXPIRED = "EXPIRED"
    UPLOADED = "UPLOADED"
    FAILED = "FAILED"


PRE_EXAM_PHASES = (Phase.IDLE, Phase.AWAITING_PAPER, Phase.PASSKEY_REQUIRED, Phase.ENV_CHECK)

VQP_ENTRY = "paper.vqp"
MEDIA_ENTRY = "recording.frs"
ENVREC_ENTRY = "environment.txt"


class InvalidTransition(Exception):
    def __init__(self, phase: Phase, event: str):
        self.phase = phase
        self.event = event
        super().__init__(f"event {event!r} not allowed in {phase.value}")


class Denied(Exception):
    """LMS materials access is gated during an active exam."""


@dataclass(frozen=True)
class StudentSession:
    student_id: str
    phase: Phase = Phase.IDLE
    paper: vqp.QuestionPaper | None = None          # EXAM variant once decoded
    pending_blob: bytes | None = None               # container awaiting passkey
    passkey: str | None = None
    unlock_attempts: int = 0
    answers: Mapping[int, str] = field(default_factory=dict)
    attestation: envcheck.AttestationRecord | None = None
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()
    deadline: float | None = None                   # epoch seconds, fixed at start
    frameset_bytes: bytes | None = None
    return_blob: bytes | None = None
    failure_reason: str | None = None
    last_error: str | None = None


def _require(session: StudentSession, event: str, *phases: Phase) -> None:
    if session.phase not in phases:
        raise InvalidTransition(session.phase, event)


def new_session(student_id: str) -> StudentSession:
    return StudentSession(student_id=student_id)


def begin_watch(session: StudentSession) -> StudentSession:
    _require(session, "begin_watch", Phase.IDLE)
    return replace(session, phase=Phase.AWAITING_PAPER)


def fail(session: StudentSession, reason: str) -> StudentSession:
    """Abort; only legal before the exam starts."""
    _require(session, "fail", *PRE_EXAM_PHASES)
    return replace(session, phase=Phase.FAILED, failure_reason=reason)


def _decode_exam(blob: bytes, passkey: str | None) -> vqp.QuestionPaper:
    entries = rts.unpack(blob, passkey)
    paper = vqp.parse_vqp(rts.entry_by_tag(entries, rts.TypeTag.VQP).data.decode("utf-8"))
    if paper.variant is not vqp.Variant.EXAM:
        raise vqp.WrongVariant(vqp.Variant.EXAM, paper.variant)
    return paper


def on_paper_appeared(session: StudentSession, blob: bytes) -> StudentSession:
    """Encrypted container -> PASSKEY_REQUIRED; plain -> ENV_CHECK directly.
    A structurally broken container fails here, before any passkey prompt."""
    _require(session, "on_paper_appeared", Phase.AWAITING_PAPER)
    try:
        if rts.check_structure(blob):
            return replace(session, phase=Phase.PASSKEY_REQUIRED, pending_blob=blob)
        paper = _decode_exam(blob, None)
    except vqp.WrongVariant as exc:
        return fail(session, f"WrongVariant: {exc}")
    except (rts.RtsError, vqp.VqpError, UnicodeDecodeError) as exc:
        return fail(session, f"BadContainer: {exc}")
    return replace(session, phase=Phase.ENV_CHECK, paper=paper)


def unlock(session: StudentSession, passkey: str) -> StudentSession:
    """Wrong passkey keeps the session in PASSKEY_REQUIRED with the attempt
    counted; errors are state data, not exceptions."""
    _require(session, "unlock", Phase.PASSKEY_REQUIRED)
    assert session.pending_blob is not None
    try:
        paper = _decode_exam(session.pending_blob, passkey)
    except (rts.TagMismatch, rts.EmptyPasskey) as exc:
        return replace(session, unlock_attempts=session.unlock_attempts + 1,
                       last_error=type(exc).__name__)
    except vqp.WrongVariant as exc:
        return fail(session, f"WrongVariant: {exc}")
    except (rts.RtsError, vqp.VqpError, UnicodeDecodeError) as exc:
        return fail(session, f"BadContainer: {exc}")
    return replace(session, phase=Phase.ENV_CHECK, paper=paper, passkey=passkey,
                   pending_blob=None, last_error=None)


def start_exam(session: StudentSession, attestation: envcheck.AttestationRecord,
               now: float) -> StudentSession:
    """Policy violations keep the session in ENV_CHECK, exposing them; a
    clean check starts the clock."""
    _require(session, "start_exam", Phase.ENV_CHECK)
    assert session.paper is not None
    check = envcheck.check_policy(attestation)
    if check.violations:
        return replace(session, attestation=attestation,
                       violations=check.violations, warnings=check.warnings)
    deadline = now + session.paper.duration_minutes * 60.0
    return replace(session, phase=Phase.IN_EXAM, attestation=attestation,
                   violations=(), warnings=check.warnings, deadline=deadline)


def answer(session: StudentSession, question: int, response: str) -> StudentSession:
    _require(session, "answer", Phase.IN_EXAM)
    assert session.paper is not None
    by_number = {q.number: q for q in session.paper.questions}
    q = by_number.get(question)
    if q is None:
        raise vqp.UnknownQuestion(question)
    if q.kind is vqp.Kind.MCQ and response not in [lab for lab, _ in q.options]:
        raise vqp.InvalidOption(question, response)
    answers = dict(session.answers)
    answers[question] = response
    return replace(session, answers=answers)


def attach_recording(session: StudentSession, frameset_bytes: bytes) -> StudentSession:
    _require(session, "attach_recording", Phase.IN_EXAM)
    return replace(session, frameset_bytes=frameset_bytes)


def _build_return(session: StudentSession) -> bytes:
    assert session.paper is not None
    answered = vqp.merge_answers(session.paper, dict(session.answers))
    media = session.frameset_bytes if session.frameset_bytes is not None else frameset.write_frs([])
    record = session.attestation if session.attestation is not None else envcheck.AttestationRecord()
    entries = [
        rts.RtsEntry.auto(VQP_ENTRY, rts.TypeTag.VQP, vqp.serialize_vqp(answered).encode("utf-8")),
        rts.RtsEntry.auto(MEDIA_ENTRY, rts.TypeTag.MEDIA, media),
        rts.RtsEntry.auto(ENVREC_ENTRY, rts.TypeTag.ENVREC, envcheck.serialize_envrec(record).encode("utf-8")),
    ]
    return rts.pack(entries, session.passkey)


def submit(session: StudentSession) -> StudentSession:
    _require(session, "submit", Phase.IN_EXAM)
    out = replace(session, phase=Phase.SUBMITTED)
    return replace(out, return_blob=_build_return(out))


def tick(session: StudentSession, now: float) -> StudentSession:
    """Past the deadline the session expires and the return container is
    built exactly as submit would, partial answers included."""
    _require(session, "tick", Phase.IN_EXAM)
    assert session.deadline is not None
    if now < session.deadline:
        return session
    out = replace(session, phase=Phase.EXPIRED)
    return replace(out, return_blob=_build_return(out))


def with_recording(session: StudentSession, frameset_bytes: bytes) -> StudentSession:
    """Attach (or swap) the recording after submission/expiry and rebuild
    the return container around it. For a recording pipeline that is still
    flushing when the deadline fires."""
    _require(session, "with_recording", Phase.SUBMITTED, Phase.EXPIRED)
    out = replace(session, frameset_bytes=frameset_bytes)
    return replace(out, return_blob=_build_return(out))


def return_name(session: StudentSession) -> str:
    assert session.paper is not None
    return f"{session.paper.id}.{session.student_id}.rts"


def upload_return(session: StudentSession, locator: transport.DropboxLocator) -> StudentSession:
    """Transport errors propagate; the caller still holds the old snapshot,
    so retrying is just calling again."""
    _require(session, "upload_return", Phase.SUBMITTED, Phase.EXPIRED)
    assert session.return_blob is not None
    transport.put(locator, return_name(session), session.return_blob)
    return replace(session, phase=Phase.UPLOADED)


def remaining_seconds(session: StudentSession, now: float) -> float:
    if session.phase is not Phase.IN_EXAM or session.deadline is None:
        return 0.0
    return max(0.0, session.deadline - now)


# --- LMS materials gate ---------------------------------------------------

class MaterialsPlugin(Protocol):
    name: str

    def list_materials(self) -> list[tuple[str, str]]: ...


@dataclass
class DirMaterialsPlugin:
    """Fixture plugin: every file in a directory is a material, addressed
    by a dir: locator."""

    path: str
    name: str = "shelf"

    def list_materials(self) -> list[tuple[str, str]]:
        import os

        try:
            names = sorted(os.listdir(self.path))
        except OSError:
            return []
        return [(n, f"dir:{self.path}") for n in names]


def lms_access_allowed(phase: Phase) -> bool:
    return phase is not Phase.IN_EXAM


def list_materials(plugin: MaterialsPlugin, phase: Phase) -> list[tuple[str, str]]:
    if not lms_access_allowed(phase):
        raise Denied("materials shelf is closed during an active exam")
    return plugin.list_materials()


# --- lecturer workflow -------------------------------------------------------

@dataclass(frozen=True)
class LecturerWorkflow:
    design: vqp.QuestionPaper
    passkey: str | None
    published_name: str


@dataclass(frozen=True)
class CollectedReturn:
    student_id: str
    entries: tuple[rts.RtsEntry, ...]
    answered: vqp.QuestionPaper


@dataclass(frozen=True)
class CollectResult:
    accepted: tuple[CollectedReturn, ...]
    issues: tuple[tuple[str, str], ...]  # (file name, problem)


def publish_paper(design: vqp.QuestionPaper, passkey: str | None,
                  locators: Sequence[transport.DropboxLocator]) -> tuple[LecturerWorkflow, bytes]:
    """DESIGN -> EXAM, packed (encrypted when a passkey is given) and put
    to every named drop-box."""
    exam = vqp.to_exam(design)
    blob = rts.pack(
        [rts.RtsEntry.auto(VQP_ENTRY, rts.TypeTag.VQP, vqp.serialize_vqp(exam).encode("utf-8"))],
        passkey)
    name = f"{design.id}.rts"
    for locator in locators:
        transport.put(locator, name, blob)
    return LecturerWorkflow(design=design, passkey=passkey, published_name=name), blob


def collect_returns(workflow: LecturerWorkflow, locator: transport.DropboxLocator,
                    seen_students: set[str] | None = None) -> CollectResult:
    """One sweep of the return drop-box. Per-file problems (tampering, the
    wrong paper, duplicates) are recorded and collection continues; the
    first arrival per student id wins. Pass the accumulated seen_students
    set when sweeping repeatedly (or across fan-out boxes) so later
    arrivals for an already-collected student are recorded, not accepted."""
    paper_id = workflow.design.id
    prefix = paper_id + "."
    accepted: list[CollectedReturn] = []
    issues: list[tuple[str, str]] = []
    seen_students = set() if seen_students is None else seen_students
    for name in transport.list_names(locator):
        if not (name.startswith(prefix) and name.endswith(".rts")):
            continue
        student_id = name[len(prefix):-4]
        if not student_id:
            continue
        if student_id in seen_students:
            issues.append((name, "DuplicateStudent"))
            continue
        try:
            blob = transport.get(locator, name)
            entries = rts.unpack(blob, workflow.passkey)
            answered = vqp.parse_vqp(rts.entry_by_tag(entries, rts.TypeTag.VQP).data.decode("utf-8"))
        except (transport.TransportError, rts.RtsError, vqp.VqpError, UnicodeDecodeError) as exc:
            issues.append((name, f"{type(exc).__name__}: {exc}"))
            continue
        if answered.id != paper_id:
            issues.append((name, f"PaperMismatch: container holds {answered.id!r}"))
            continue
        if answered.variant is not vqp.Variant.ANSWERED:
            issues.append((name, f"WrongVariant: {answered.variant.value}"))
            continue
        seen_students.add(student_id)
        accepted.append(CollectedReturn(student_id=student_id, entries=tuple(entries),
                                        answered=answered))
    return CollectResult(accepted=tuple(accepted), issues=tuple(issues))
