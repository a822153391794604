import itertools

import pytest

from examgrid import envcheck, rts, session, transport, vqp
from examgrid.gesture import frameset
from examgrid.session import Phase

from test_envcheck import all_good_record


@pytest.fixture
def published(design_paper, tmp_path):
    loc = transport.parse_locator(f"dir:{tmp_path / 'inbox'}")
    workflow, blob = session.publish_paper(design_paper, "s3cret", [loc])
    return workflow, blob, loc


@pytest.fixture
def plain_blob(design_paper):
    _, blob = session.publish_paper(design_paper, None, [])
    return blob


def to_env_check(blob, passkey="s3cret", student="alice"):
    s = session.begin_watch(session.new_session(student))
    s = session.on_paper_appeared(s, blob)
    if s.phase is Phase.PASSKEY_REQUIRED:
        s = session.unlock(s, passkey)
    return s


def to_in_exam(blob, passkey="s3cret", now=1000.0, student="alice"):
    s = to_env_check(blob, passkey, student)
    return session.start_exam(s, all_good_record(), now)


# --- arrival and unlock -----------------------------------------------------

def test_encrypted_arrival_requires_passkey(published):
    _, blob, _ = published
    s = session.begin_watch(session.new_session("alice"))
    s = session.on_paper_appeared(s, blob)
    assert s.phase is Phase.PASSKEY_REQUIRED


def test_plain_arrival_goes_straight_to_env_check(plain_blob):
    s = session.begin_watch(session.new_session("alice"))
    s = session.on_paper_appeared(s, plain_blob)
    assert s.phase is Phase.ENV_CHECK
    assert s.paper.variant is vqp.Variant.EXAM


def test_truncated_blob_fails(published):
    _, blob, _ = published
    s = session.begin_watch(session.new_session("alice"))
    s = session.on_paper_appeared(s, blob[:10])
    assert s.phase is Phase.FAILED
    assert "BadContainer" in s.failure_reason


def test_unlock_correct_key(published):
    _, blob, _ = published
    s = to_env_check(blob)
    assert s.phase is Phase.ENV_CHECK
    assert s.passkey == "s3cret"
    assert s.paper.id == "phys101"


def test_unlock_wrong_key_counts_attempts(published):
    _, blob, _ = published
    s = session.on_paper_appeared(session.begin_watch(session.new_session("a")), blob)
    for i in range(3):
        s = session.unlock(s, "nope")
        assert s.phase is Phase.PASSKEY_REQUIRED
        assert s.unlock_attempts == i + 1
        assert s.last_error == "TagMismatch"
    s = session.unlock(s, "s3cret")
    assert s.phase is Phase.ENV_CHECK


def test_unlock_answered_paper_fails(design_paper):
    exam = vqp.to_exam(design_paper)
    answered = vqp.merge_answers(exam, {1: "A"})
    blob = rts.pack([rts.RtsEntry.auto("paper.vqp", rts.TypeTag.VQP,
                                       vqp.serialize_vqp(answered).encode())], "k")
    s = session.on_paper_appeared(session.begin_watch(session.new_session("a")), blob)
    s = session.unlock(s, "k")
    assert s.phase is Phase.FAILED
    assert "WrongVariant" in s.failure_reason


# --- env check and start ------------------------------------------------------

def test_start_exam_clean(published):
    _, blob, _ = published
    s = to_in_exam(blob, now=1000.0)
    assert s.phase is Phase.IN_EXAM
    assert s.deadline == 1000.0 + 45 * 60


def test_start_exam_blocked_by_violation(published):
    _, blob, _ = published
    s = to_env_check(blob)
    s2 = session.start_exam(s, all_good_record(camera_active=False), 0.0)
    assert s2.phase is Phase.ENV_CHECK
    assert s2.violations == ("CameraInactive",)
    # fixing the camera lets it start
    s3 = session.start_exam(s2, all_good_record(), 0.0)
    assert s3.phase is Phase.IN_EXAM


def test_start_exam_twice_rejected(published):
    _, blob, _ = published
    s = to_in_exam(blob)
    with pytest.raises(session.InvalidTransition):
        session.start_exam(s, all_good_record(), 0.0)


def test_mic_warning_does_not_block(published):
    _, blob, _ = published
    s = to_env_check(blob)
    s = session.start_exam(s, all_good_record(mic_active=False), 0.0)
    assert s.phase is Phase.IN_EXAM
    assert s.warnings == ("MicInactive",)


# --- answering, submit, expiry ---------------------------------------------

def test_answer_and_submit_roundtrip(published):
    _, blob, _ = published
    s = to_in_exam(blob)
    s = session.answer(s, 1, "B")
    s = session.answer(s, 3, "by linearity")
    s = session.submit(s)
    assert s.phase is Phase.SUBMITTED
    entries = rts.unpack(s.return_blob, "s3cret")
    answered = vqp.parse_vqp(rts.entry_by_tag(entries, rts.TypeTag.VQP).data.decode())
    assert answered.variant is vqp.Variant.ANSWERED
    assert answered.questions[0].response == "B"
    assert answered.questions[1].response is None
    assert answered.questions[2].response == "by linearity"


def test_answer_overwrites(published):
    _, blob, _ = published
    s = to_in_exam(blob)
    s = session.answer(s, 1, "A")
    s = session.answer(s, 1, "C")
    assert s.answers[1] == "C"


def test_answer_validates_option(published):
    _, blob, _ = published
    s = to_in_exam(blob)
    with pytest.raises(vqp.InvalidOption):
        session.answer(s, 1, "Z")
    with pytest.raises(vqp.UnknownQuestion):
        session.answer(s, 9, "A")


def test_tick_before_deadline_keeps_state(published):
    _, blob, _ = published
    s = to_in_exam(blob, now=1000.0)
    assert session.tick(s, 1000.0 + 60) is s


def test_tick_past_deadline_expires_with_partial_answers(published):
    _, blob, _ = published
    s = to_in_exam(blob, now=1000.0)
    s = session.answer(s, 1, "B")
    s = session.tick(s, s.deadline + 1.0)
    assert s.phase is Phase.EXPIRED
    entries = rts.unpack(s.return_blob, "s3cret")
    answered = vqp.parse_vqp(rts.entry_by_tag(entries, rts.TypeTag.VQP).data.decode())
    assert answered.questions[0].response == "B"
    assert answered.questions[1].response is None


def test_answer_after_expiry_rejected(published):
    _, blob, _ = published
    s = to_in_exam(blob, now=0.0)
    s = session.tick(s, s.deadline)
    assert s.phase is Phase.EXPIRED
    with pytest.raises(session.InvalidTransition):
        session.answer(s, 1, "A")


def test_return_container_has_exactly_three_typed_entries(published):
    _, blob, _ = published
    s = session.submit(to_in_exam(blob))
    entries = rts.unpack(s.return_blob, "s3cret")
    assert [e.type_tag for e in entries] == [rts.TypeTag.VQP, rts.TypeTag.MEDIA, rts.TypeTag.ENVREC]


def test_attached_recording_rides_in_return(published):
    _, blob, _ = published
    s = to_in_exam(blob)
    frs = frameset.write_frs([])
    s = session.attach_recording(s, frs)
    s = session.submit(s)
    entries = rts.unpack(s.return_blob, "s3cret")
    assert rts.entry_by_tag(entries, rts.TypeTag.MEDIA).data == frs


# --- upload -------------------------------------------------------------------

def test_upload_return(published, tmp_path):
    workflow, blob, _ = published
    returns = transport.parse_locator(f"dir:{tmp_path / 'returns'}")
    s = session.submit(to_in_exam(blob))
    s = session.upload_return(s, returns)
    assert s.phase is Phase.UPLOADED
    assert transport.list_names(returns) == ["phys101.alice.rts"]


def test_upload_failure_keeps_state_and_retry_succeeds(published, tmp_path):
    _, blob, _ = published
    target = tmp_path / "locked"
    target.write_bytes(b"")  # a file where the drop-box dir should be
    returns = transport.parse_locator(f"dir:{target}")
    s = session.submit(to_in_exam(blob))
    with pytest.raises(transport.TransportError):
        session.upload_return(s, returns)
    assert s.phase is Phase.SUBMITTED  # old snapshot untouched
    target.unlink()
    s = session.upload_return(s, returns)
    assert s.phase is Phase.UPLOADED


def test_upload_from_in_exam_rejected(published, tmp_path):
    _, blob, _ = published
    s = to_in_exam(blob)
    with pytest.raises(session.InvalidTransition):
        session.upload_return(s, transport.parse_locator(f"dir:{tmp_path}"))


# --- LMS gate -----------------------------------------------------------------

def test_lms_gate_closed_exactly_in_exam(published, tmp_path):
    _, blob, _ = published
    for phase in Phase:
        assert session.lms_access_allowed(phase) is (phase is not Phase.IN_EXAM)
    shelf = tmp_path / "shelf"
    shelf.mkdir()
    (shelf / "notes.pdf").write_bytes(b"notes")
    plugin = session.DirMaterialsPlugin(str(shelf))
    assert session.list_materials(plugin, Phase.IDLE) == [("notes.pdf", f"dir:{shelf}")]
    assert session.list_materials(plugin, Phase.SUBMITTED) == [("notes.pdf", f"dir:{shelf}")]
    with pytest.raises(session.Denied):
        session.list_materials(plugin, Phase.IN_EXAM)


# --- exhaustive state/event drive ----------------------------------------------

def make_in_phase(phase, published_blob, returns_loc):
    s = session.new_session("alice")
    if phase is Phase.IDLE:
        return s
    s = session.begin_watch(s)
    if phase is Phase.AWAITING_PAPER:
        return s
    s = session.on_paper_appeared(s, published_blob)
    if phase is Phase.PASSKEY_REQUIRED:
        return s
    s = session.unlock(s, "s3cret")
    if phase is Phase.ENV_CHECK:
        return s
    s = session.start_exam(s, all_good_record(), 1000.0)
    if phase is Phase.IN_EXAM:
        return s
    if phase is Phase.EXPIRED:
        return session.tick(s, s.deadline + 1)
    s = session.submit(s)
    if phase is Phase.SUBMITTED:
        return s
    if phase is Phase.UPLOADED:
        return session.upload_return(s, returns_loc)
    return session.fail(session.begin_watch(session.new_session("alice")), "boom")


def test_exhaustive_state_event_matrix(published, tmp_path):
    _, blob, _ = published
    returns_loc = transport.parse_locator(f"dir:{tmp_path / 'r'}")

    events = {
        "begin_watch": lambda s: session.begin_watch(s),
        "on_paper_appeared": lambda s: session.on_paper_appeared(s, blob),
        "unlock": lambda s: session.unlock(s, "s3cret"),
        "start_exam": lambda s: session.start_exam(s, all_good_record(), 1000.0),
        "answer": lambda s: session.answer(s, 1, "B"),
        "submit": lambda s: session.submit(s),
        "tick": lambda s: session.tick(s, 0.0),
        "upload_return": lambda s: session.upload_return(s, returns_loc),
        "fail": lambda s: session.fail(s, "x"),
    }
    allowed = {
        Phase.IDLE: {"begin_watch", "fail"},
        Phase.AWAITING_PAPER: {"on_paper_appeared", "fail"},
        Phase.PASSKEY_REQUIRED: {"unlock", "fail"},
        Phase.ENV_CHECK: {"start_exam", "fail"},
        Phase.IN_EXAM: {"answer", "submit", "tick"},
        Phase.SUBMITTED: {"upload_return"},
        Phase.EXPIRED: {"upload_return"},
        Phase.UPLOADED: set(),
        Phase.FAILED: set(),
    }
    for phase, (name, event) in itertools.product(Phase, events.items()):
        s = make_in_phase(phase, blob, returns_loc)
        assert s.phase is phase
        if name in allowed[phase]:
            event(s)  # must not raise
        else:
            with pytest.raises(session.InvalidTransition):
                event(s)


# --- lecturer collect ---------------------------------------------------------

def make_return(published, student_id, responses):
    _, blob, _ = published
    s = to_in_exam(blob, student=student_id)
    for q, r in responses.items():
        s = session.answer(s, q, r)
    return session.submit(s)


def test_collect_single_valid_return(published, tmp_path):
    workflow, blob, _ = published
    returns_loc = transport.parse_locator(f"dir:{tmp_path / 'returns'}")
    s = session.upload_return(make_return(published, "alice", {1: "B"}), returns_loc)
    result = session.collect_returns(workflow, returns_loc)
    assert len(result.accepted) == 1
    assert result.accepted[0].student_id == "alice"
    assert result.accepted[0].answered.questions[0].response == "B"
    assert result.issues == ()


def test_collect_skips_tampered_return_and_continues(published, tmp_path):
    workflow, blob, _ = published
    returns_loc = transport.parse_locator(f"dir:{tmp_path / 'returns'}")
    for student in ("alice", "bob", "cara"):
        session.upload_return(make_return(published, student, {1: "B"}), returns_loc)
    victim = tmp_path / "returns" / "phys101.bob.rts"
    raw = bytearray(victim.read_bytes())
    raw[len(raw) // 2] ^= 0x40
    victim.write_bytes(bytes(raw))
    result = session.collect_returns(workflow, returns_loc)
    assert sorted(r.student_id for r in result.accepted) == ["alice", "cara"]
    assert len(result.issues) == 1
    assert result.issues[0][0] == "phys101.bob.rts"
    assert "TagMismatch" in result.issues[0][1]


def test_collect_keeps_first_arrival_per_student(published, tmp_path):
    # first arrival wins across sweeps / fan-out boxes: the accumulated
    # seen-set turns a later arrival for the same student into an issue
    workflow, blob, _ = published
    box_a = transport.parse_locator(f"dir:{tmp_path / 'ra'}")
    box_b = transport.parse_locator(f"dir:{tmp_path / 'rb'}")
    session.upload_return(make_return(published, "alice", {1: "B"}), box_a)
    session.upload_return(make_return(published, "alice", {1: "C"}), box_b)
    seen = set()
    first = session.collect_returns(workflow, box_a, seen)
    second = session.collect_returns(workflow, box_b, seen)
    assert [r.student_id for r in first.accepted] == ["alice"]
    assert first.accepted[0].answered.questions[0].response == "B"
    assert second.accepted == ()
    assert second.issues == (("phys101.alice.rts", "DuplicateStudent"),)


def test_collect_ignores_other_papers(published, tmp_path):
    workflow, _, _ = published
    returns_loc = transport.parse_locator(f"dir:{tmp_path / 'returns'}")
    transport.put(returns_loc, "other999.alice.rts", b"junk")
    transport.put(returns_loc, "unrelated.bin", b"junk")
    result = session.collect_returns(workflow, returns_loc)
    assert result.accepted == () and result.issues == ()
