"""HTTP+JSON service: one multi-role API over the exam modules.

The service layer is a thin adapter: every state-mutating endpoint calls
the owning module operation and serializes its result; business rules live
in the modules. Role checks come from a static endpoint table, so each
route has exactly one allowed role.

Status mapping: 400 malformed body, 401 unknown token, 403 wrong role or
gated access, 404 unknown path/id, 409 InvalidTransition, 422 domain
validation failures.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

from .. import envcheck, marking, rts, session, transport, vqp
from ..gesture import (EnergyConfig, GestureEvent, SessionReport,
                       default_recognizers, read_frs, record_session)
from ..gesture.recording import FrameSourceFailed
from .accounts import ApiPrincipal, Role
from .jsonmap import (BadBody, attestation_to_json, event_to_json,
                      gesture_report_to_json, paper_from_json, paper_to_json,
                      report_to_json)


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class LiveFeed:
    """Event buffer a recording thread pushes into and feed readers drain."""

    def __init__(self):
        self.events: list[GestureEvent] = []
        self.done = False
        self.cond = threading.Condition()

    def push(self, event: GestureEvent) -> None:
        with self.cond:
            self.events.append(event)
            self.cond.notify_all()

    def finish(self) -> None:
        with self.cond:
            self.done = True
            self.cond.notify_all()

    def stream(self) -> Iterator[GestureEvent]:
        index = 0
        while True:
            with self.cond:
                while index >= len(self.events) and not self.done:
                    self.cond.wait(0.1)
                if index < len(self.events):
                    event = self.events[index]
                    index += 1
                elif self.done:
                    return
                else:
                    continue
            yield event


@dataclass
class PaperRecord:
    design: vqp.QuestionPaper
    owner: str
    workflow: session.LecturerWorkflow | None = None
    locators: tuple[str, ...] = ()


@dataclass
class ReturnRecord:
    return_id: str
    student_id: str
    paper_id: str
    entries: tuple[rts.RtsEntry, ...]
    answered: vqp.QuestionPaper
    mark_report: marking.MarkReport | None = None
    gesture_report: SessionReport | None = None


@dataclass
class Recording:
    feed: LiveFeed
    thread: threading.Thread
    frameset: bytes | None = None
    report: SessionReport | None = None
    error: str | None = None


class ExamService:
    """All server state behind one lock; HTTP handlers call into here."""

    def __init__(self, accounts: dict[str, ApiPrincipal],
                 inbox: transport.DropboxLocator,
                 returns_box: transport.DropboxLocator,
                 probes: list[envcheck.Probe] | None = None,
                 frames_factory: Callable[[], Iterable] | None = None,
                 materials: session.MaterialsPlugin | None = None,
                 energy_config: EnergyConfig | None = None,
                 clock: Callable[[], float] = time.time):
        self.accounts = accounts
        self.inbox = inbox
        self.returns_box = returns_box
        self.probes = probes if probes is not None else envcheck.default_probes()
        self.frames_factory = frames_factory
        self.materials = materials
        self.energy_config = energy_config or EnergyConfig()
        self.clock = clock
        self.lock = threading.RLock()
        self.papers: dict[str, PaperRecord] = {}
        self.sessions: dict[str, session.StudentSession] = {}
        self.recordings: dict[str, Recording] = {}  # keyed by student account
        self.returns: dict[str, ReturnRecord] = {}
        self.collected_students: dict[str, set[str]] = {}  # paper id -> student ids

    # -- lecturer ----------------------------------------------------------

    def create_paper(self, principal: ApiPrincipal, body: Any) -> dict:
        paper = paper_from_json(body)
        self._validate_design(paper)
        with self.lock:
            if paper.id in self.papers:
                raise ApiError(422, f"paper {paper.id!r} already exists")
            self.papers[paper.id] = PaperRecord(design=paper, owner=principal.account_id)
        return {"id": paper.id}

    def get_paper(self, principal: ApiPrincipal, paper_id: str) -> dict:
        record = self._own_paper(principal, paper_id)
        return paper_to_json(record.design)

    def put_paper(self, principal: ApiPrincipal, paper_id: str, body: Any) -> dict:
        paper = paper_from_json(body)
        if paper.id != paper_id:
            raise ApiError(422, "paper id in body disagrees with the path")
        self._validate_design(paper)
        with self.lock:
            existing = self.papers.get(paper_id)
            if existing is None:
                self.papers[paper_id] = PaperRecord(design=paper, owner=principal.account_id)
            else:
                if existing.owner != principal.account_id:
                    raise ApiError(403, "not your paper")
                existing.design = paper
        return {"id": paper_id}

    def publish_paper(self, principal: ApiPrincipal, paper_id: str, body: Any) -> dict:
        record = self._own_paper(principal, paper_id)
        if not isinstance(body, dict) or not isinstance(body.get("locators"), list):
            raise BadBody("publish takes {passkey?, locators: [text]}")
        passkey = body.get("passkey")
        locators = [transport.parse_locator(text) for text in body["locators"]]
        workflow, _ = session.publish_paper(record.design, passkey, locators)
        with self.lock:
            record.workflow = workflow
            record.locators = tuple(body["locators"])
        return {"name": workflow.published_name, "locators": list(record.locators)}

    def list_returns(self, principal: ApiPrincipal) -> dict:
        self._sweep_returns(principal)
        with self.lock:
            items = [
                {"id": r.return_id, "student": r.student_id, "paper": r.paper_id,
                 "marked": r.mark_report is not None}
                for r in self.returns.values()
                if self.papers[r.paper_id].owner == principal.account_id
            ]
        return {"returns": sorted(items, key=lambda item: item["id"])}

    def mark_return(self, principal: ApiPrincipal, return_id: str) -> dict:
        record = self._own_return(principal, return_id)
        design = self.papers[record.paper_id].design
        report = marking.auto_mark(design, record.answered)
        with self.lock:
            record.mark_report = report
        return report_to_json(report)

    def manual_mark(self, principal: ApiPrincipal, return_id: str, body: Any) -> dict:
        record = self._own_return(principal, return_id)
        if not isinstance(body, dict) or "q" not in body or "score" not in body:
            raise BadBody("manual mark takes {q, score}")
        with self.lock:
            if record.mark_report is None:
                raise ApiError(422, "auto-mark the return first")
            record.mark_report = marking.apply_manual(
                record.mark_report, int(body["q"]), float(body["score"]))
            return report_to_json(record.mark_report)

    def return_report(self, principal: ApiPrincipal, return_id: str) -> dict:
        record = self._own_return(principal, return_id)
        envrec = envcheck.parse_envrec(
            rts.entry_by_tag(list(record.entries), rts.TypeTag.ENVREC).data.decode("utf-8"))
        gesture = self._gesture_report(record)
        return {
            "mark": report_to_json(record.mark_report) if record.mark_report else None,
            "attestation": attestation_to_json(envrec),
            "gesture": gesture_report_to_json(gesture),
        }

    def event_feed(self, principal: ApiPrincipal, return_id: str) -> Iterator[GestureEvent]:
        """History first, then live events until the session ends."""
        with self.lock:
            live = self._live_for(principal, return_id)
            if live is not None:
                return live.feed.stream()
        record = self._own_return(principal, return_id)
        return iter(self._gesture_report(record).events)

    # -- student -------------------------------------------------------------

    def student_inbox(self, principal: ApiPrincipal) -> dict:
        names = [n for n in transport.list_names(self.inbox) if n.endswith(".rts")]
        return {"names": names}

    def session_start(self, principal: ApiPrincipal, body: Any) -> dict:
        if not isinstance(body, dict):
            raise BadBody("start takes {paper, passkey?}")
        passkey = body.get("passkey")
        with self.lock:
            sess = self.sessions.get(principal.account_id)
            if sess is None:
                sess = session.new_session(principal.account_id)
            if sess.phase is session.Phase.IDLE:
                sess = session.begin_watch(sess)
            if sess.phase is session.Phase.AWAITING_PAPER:
                name = body.get("paper")
                if not isinstance(name, str):
                    raise BadBody("start needs the paper name while awaiting one")
                blob = transport.get(self.inbox, name)
                sess = session.on_paper_appeared(sess, blob)
            if sess.phase is session.Phase.PASSKEY_REQUIRED and passkey is not None:
                sess = session.unlock(sess, str(passkey))
            if sess.phase is session.Phase.ENV_CHECK:
                record = envcheck.run_probes(self.probes)
                sess = session.start_exam(sess, record, self.clock())
                if sess.phase is session.Phase.IN_EXAM:
                    self._start_recording(principal.account_id)
            self.sessions[principal.account_id] = sess
            return self._state_json(sess)

    def session_state(self, principal: ApiPrincipal) -> dict:
        with self.lock:
            sess = self._ticked(principal.account_id)
            return self._state_json(sess)

    def session_answer(self, principal: ApiPrincipal, body: Any) -> dict:
        if not isinstance(body, dict) or "q" not in body or "response" not in body:
            raise BadBody("answer takes {q, response}")
        with self.lock:
            sess = self._ticked(principal.account_id)
            sess = session.answer(sess, int(body["q"]), str(body["response"]))
            self.sessions[principal.account_id] = sess
            return self._state_json(sess)

    def session_submit(self, principal: ApiPrincipal) -> dict:
        with self.lock:
            sess = self._ticked(principal.account_id)
            sess = self._finish_recording(principal.account_id, sess)
            sess = session.submit(sess)
            sess = session.upload_return(sess, self.returns_box)
            self.sessions[principal.account_id] = sess
            return self._state_json(sess)

    def student_materials(self, principal: ApiPrincipal) -> dict:
        if self.materials is None:
            return {"materials": []}
        with self.lock:
            sess = self.sessions.get(principal.account_id)
            phase = sess.phase if sess is not None else session.Phase.IDLE
        items = session.list_materials(self.materials, phase)
        return {"materials": [{"title": t, "locator": loc} for t, loc in items]}

    # -- internals -----------------------------------------------------------

    def _validate_design(self, paper: vqp.QuestionPaper) -> None:
        if paper.variant is not vqp.Variant.DESIGN:
            raise ApiError(422, "papers are authored in the DESIGN variant")
        violations = vqp.validate(paper)
        if violations:
            raise ApiError(422, "; ".join(
                f"{v.rule}(q{v.question})" if v.question else v.rule for v in violations))

    def _own_paper(self, principal: ApiPrincipal, paper_id: str) -> PaperRecord:
        with self.lock:
            record = self.papers.get(paper_id)
        if record is None:
            raise ApiError(404, f"no paper {paper_id!r}")
        if record.owner != principal.account_id:
            raise ApiError(403, "not your paper")
        return record

    def _own_return(self, principal: ApiPrincipal, return_id: str) -> ReturnRecord:
        with self.lock:
            record = self.returns.get(return_id)
            if record is None:
                raise ApiError(404, f"no return {return_id!r}")
            if self.papers[record.paper_id].owner != principal.account_id:
                raise ApiError(403, "not your paper")
        return record

    def _live_for(self, principal: ApiPrincipal, return_id: str) -> Recording | None:
        for student, recording in self.recordings.items():
            sess = self.sessions.get(student)
            if sess is None or sess.paper is None:
                continue
            if f"{sess.paper.id}.{student}" == return_id:
                record = self.papers.get(sess.paper.id)
                if record is None or record.owner != principal.account_id:
                    raise ApiError(403, "not your paper")
                return recording
        return None

    def _sweep_returns(self, principal: ApiPrincipal) -> None:
        with self.lock:
            workflows = [(pid, rec.workflow) for pid, rec in self.papers.items()
                         if rec.owner == principal.account_id and rec.workflow is not None]
        for paper_id, workflow in workflows:
            seen = self.collected_students.setdefault(paper_id, set())
            result = session.collect_returns(workflow, self.returns_box, seen)
            with self.lock:
                for collected in result.accepted:
                    return_id = f"{paper_id}.{collected.student_id}"
                    self.returns[return_id] = ReturnRecord(
                        return_id=return_id, student_id=collected.student_id,
                        paper_id=paper_id, entries=collected.entries,
                        answered=collected.answered)

    def _gesture_report(self, record: ReturnRecord) -> SessionReport:
        with self.lock:
            if record.gesture_report is not None:
                return record.gesture_report
            # reuse the live recording's report when this service ran it
            recording = self.recordings.get(record.student_id)
            if recording is not None and recording.report is not None:
                record.gesture_report = recording.report
                return record.gesture_report
        frs = rts.entry_by_tag(list(record.entries), rts.TypeTag.MEDIA).data
        frames = read_frs(frs)
        if frames:
            _, report = record_session(frames, self.energy_config,
                                       default_recognizers(frames[0].height))
        else:
            report = SessionReport(frame_count=0, present_frames=0, start_ms=0, end_ms=0)
        with self.lock:
            record.gesture_report = report
        return report

    def _ticked(self, account_id: str) -> session.StudentSession:
        sess = self.sessions.get(account_id)
        if sess is None:
            raise ApiError(404, "no active session")
        if sess.phase is session.Phase.IN_EXAM:
            ticked = session.tick(sess, self.clock())
            if ticked.phase is session.Phase.EXPIRED:
                ticked = self._expire_upload(account_id, ticked)
            if ticked is not sess:
                self.sessions[account_id] = ticked
            return ticked
        return sess

    def _expire_upload(self, account_id: str, sess: session.StudentSession) -> session.StudentSession:
        # rebuild the return with the recording attached, then upload
        recording = self._join_recording(account_id)
        if recording is not None:
            sess = session.with_recording(sess, recording)
        try:
            return session.upload_return(sess, self.returns_box)
        except transport.TransportError:
            return sess  # stay EXPIRED; the next request retries

    def _start_recording(self, account_id: str) -> None:
        if self.frames_factory is None:
            return
        feed = LiveFeed()
        recording = Recording(feed=feed, thread=None)  # type: ignore[arg-type]

        def run():
            try:
                blob, report = record_session(
                    self.frames_factory(), self.energy_config,
                    default_recognizers(120), on_event=feed.push)
                recording.frameset = blob
                recording.report = report
            except FrameSourceFailed as exc:
                recording.frameset = exc.frameset_bytes
                recording.report = exc.report
                recording.error = str(exc)
            finally:
                feed.finish()

        recording.thread = threading.Thread(target=run, daemon=True)
        self.recordings[account_id] = recording
        recording.thread.start()

    def _join_recording(self, account_id: str) -> bytes | None:
        recording = self.recordings.get(account_id)
        if recording is None:
            return None
        recording.thread.join(timeout=60.0)
        recording.feed.finish()
        return recording.frameset

    def _finish_recording(self, account_id: str, sess: session.StudentSession) -> session.StudentSession:
        frameset = self._join_recording(account_id)
        if frameset is None:
            return sess
        return session.attach_recording(sess, frameset)

    def _state_json(self, sess: session.StudentSession) -> dict:
        now = self.clock()
        return {
            "phase": sess.phase.value,
            "attempts": sess.unlock_attempts,
            "violations": list(sess.violations),
            "warnings": list(sess.warnings),
            "remaining_seconds": session.remaining_seconds(sess, now),
            "answers": {str(k): v for k, v in sorted(sess.answers.items())},
            "paper": paper_to_json(sess.paper) if sess.paper is not None else None,
            "error": sess.last_error,
            "failure": sess.failure_reason,
        }


# --- HTTP layer ---------------------------------------------------------------

ROUTES: list[tuple[str, re.Pattern, Role, str]] = [
    ("POST", re.compile(r"^/api/papers$"), Role.LECTURER, "r_create_paper"),
    ("GET", re.compile(r"^/api/papers/(?P<pid>[^/]+)$"), Role.LECTURER, "r_get_paper"),
    ("PUT", re.compile(r"^/api/papers/(?P<pid>[^/]+)$"), Role.LECTURER, "r_put_paper"),
    ("POST", re.compile(r"^/api/papers/(?P<pid>[^/]+)/publish$"), Role.LECTURER, "r_publish"),
    ("GET", re.compile(r"^/api/returns$"), Role.LECTURER, "r_list_returns"),
    ("POST", re.compile(r"^/api/returns/(?P<rid>[^/]+)/mark$"), Role.LECTURER, "r_mark"),
    ("POST", re.compile(r"^/api/returns/(?P<rid>[^/]+)/manual$"), Role.LECTURER, "r_manual"),
    ("GET", re.compile(r"^/api/returns/(?P<rid>[^/]+)/report$"), Role.LECTURER, "r_report"),
    ("GET", re.compile(r"^/api/returns/(?P<rid>[^/]+)/events$"), Role.LECTURER, "r_events"),
    ("GET", re.compile(r"^/api/inbox$"), Role.STUDENT, "r_inbox"),
    ("POST", re.compile(r"^/api/session/start$"), Role.STUDENT, "r_start"),
    ("GET", re.compile(r"^/api/session/state$"), Role.STUDENT, "r_state"),
    ("POST", re.compile(r"^/api/session/answer$"), Role.STUDENT, "r_answer"),
    ("POST", re.compile(r"^/api/session/submit$"), Role.STUDENT, "r_submit"),
    ("GET", re.compile(r"^/api/materials$"), Role.STUDENT, "r_materials"),
]

_DOMAIN_422 = (vqp.VqpError, marking.MarkingError, envcheck.EnvrecSyntaxError,
               rts.RtsError, transport.TransportError)


class _Handler(BaseHTTPRequestHandler):
    service: ExamService
    assets: Path | None
    protocol_version = "HTTP/1.1"

    # -- helpers -----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _principal(self) -> ApiPrincipal:
        header = self.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise ApiError(401, "missing bearer token")
        principal = self.service.accounts.get(header[7:].strip())
        if principal is None:
            raise ApiError(401, "unknown token")
        return principal

    def _body(self) -> Any:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return None
        raw = self.rfile.read(length)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ApiError(400, f"body is not JSON: {exc}") from exc

    def _send_json(self, status: int, obj: Any) -> None:
        blob = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)

    def _dispatch(self, method: str) -> None:
        path = self.path.split("?", 1)[0]
        try:
            for route_method, pattern, role, name in ROUTES:
                match = pattern.match(path)
                if match and route_method == method:
                    principal = self._principal()
                    if principal.role is not role:
                        raise ApiError(403, f"{role.value} role required")
                    getattr(self, name)(principal, match)
                    return
                if match and route_method != method:
                    continue
            if method == "GET" and not path.startswith("/api/"):
                self._serve_asset(path)
                return
            raise ApiError(404, f"no route {method} {path}")
        except ApiError as exc:
            self._send_json(exc.status, {"error": exc.message})
        except BadBody as exc:
            self._send_json(400, {"error": str(exc)})
        except session.InvalidTransition as exc:
            self._send_json(409, {"error": str(exc)})
        except session.Denied as exc:
            self._send_json(403, {"error": str(exc)})
        except _DOMAIN_422 as exc:
            self._send_json(422, {"error": f"{type(exc).__name__}: {exc}"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    # -- routes ----------------------------------------------------------

    def r_create_paper(self, principal, match):
        self._send_json(201, self.service.create_paper(principal, self._body()))

    def r_get_paper(self, principal, match):
        self._send_json(200, self.service.get_paper(principal, match.group("pid")))

    def r_put_paper(self, principal, match):
        self._send_json(200, self.service.put_paper(principal, match.group("pid"), self._body()))

    def r_publish(self, principal, match):
        self._send_json(200, self.service.publish_paper(principal, match.group("pid"), self._body()))

    def r_list_returns(self, principal, match):
        self._send_json(200, self.service.list_returns(principal))

    def r_mark(self, principal, match):
        self._send_json(200, self.service.mark_return(principal, match.group("rid")))

    def r_manual(self, principal, match):
        self._send_json(200, self.service.manual_mark(principal, match.group("rid"), self._body()))

    def r_report(self, principal, match):
        self._send_json(200, self.service.return_report(principal, match.group("rid")))

    def r_events(self, principal, match):
        events = self.service.event_feed(principal, match.group("rid"))
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Connection", "close")
        self.end_headers()
        for event in events:
            self.wfile.write((json.dumps(event_to_json(event)) + "\n").encode("utf-8"))
            self.wfile.flush()
        self.close_connection = True

    def r_inbox(self, principal, match):
        self._send_json(200, self.service.student_inbox(principal))

    def r_start(self, principal, match):
        self._send_json(200, self.service.session_start(principal, self._body()))

    def r_state(self, principal, match):
        self._send_json(200, self.service.session_state(principal))

    def r_answer(self, principal, match):
        self._send_json(200, self.service.session_answer(principal, self._body()))

    def r_submit(self, principal, match):
        self._send_json(200, self.service.session_submit(principal))

    def r_materials(self, principal, match):
        self._send_json(200, self.service.student_materials(principal))

    # -- static assets ------------------------------------------------------

    def _serve_asset(self, path: str) -> None:
        if self.assets is None:
            raise ApiError(404, "no UI assets configured")
        rel = path.lstrip("/") or "index.html"
        target = (self.assets / rel).resolve()
        if not str(target).startswith(str(self.assets.resolve())) or not target.is_file():
            raise ApiError(404, f"no asset {path!r}")
        blob = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(blob)))
        self.end_headers()
        self.wfile.write(blob)


def make_server(service: ExamService, host: str = "127.0.0.1", port: int = 0,
                assets: Path | None = None) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service, "assets": assets})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(service: ExamService, host: str, port: int,
                  assets: Path | None = None) -> None:
    server = make_server(service, host, port, assets)
    print(f"examgrid service on http://{host}:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
