"""JSON mirrors of the module types crossing the API boundary."""

from __future__ import annotations

from typing import Any

from .. import marking, vqp
from ..envcheck import AttestationRecord
from ..gesture import GestureEvent, SessionReport


class BadBody(ValueError):
    """Request body is structurally not what the endpoint takes (-> 400)."""


def paper_to_json(paper: vqp.QuestionPaper) -> dict[str, Any]:
    questions = []
    for q in paper.questions:
        questions.append({
            "number": q.number,
            "kind": q.kind.value,
            "stem": q.stem,
            "options": [{"label": lab, "text": text} for lab, text in q.options],
            "key": q.key,
            "answer_lines": q.answer_lines,
            "model": q.model,
            "response": q.response,
        })
    return {
        "id": paper.id,
        "title": paper.title,
        "duration_minutes": paper.duration_minutes,
        "variant": paper.variant.value,
        "author": paper.author,
        "questions": questions,
    }


def paper_from_json(obj: Any) -> vqp.QuestionPaper:
    if not isinstance(obj, dict):
        raise BadBody("paper body must be an object")
    if "vqp" in obj:
        if not isinstance(obj["vqp"], str):
            raise BadBody("'vqp' must be the document text")
        return vqp.parse_vqp(obj["vqp"])
    try:
        questions = []
        for q in obj.get("questions", []):
            questions.append(vqp.Question(
                number=int(q["number"]),
                kind=vqp.Kind(q["kind"]),
                stem=str(q["stem"]),
                options=tuple((str(o["label"]), str(o["text"])) for o in q.get("options", [])),
                key=q.get("key"),
                answer_lines=q.get("answer_lines"),
                model=q.get("model"),
                response=q.get("response"),
            ))
        return vqp.QuestionPaper(
            id=str(obj["id"]),
            title=str(obj.get("title", "")),
            duration_minutes=int(obj["duration_minutes"]),
            variant=vqp.Variant(obj.get("variant", "DESIGN")),
            author=str(obj.get("author", "")),
            questions=tuple(questions),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise BadBody(f"malformed paper mirror: {exc}") from exc


def report_to_json(report: marking.MarkReport) -> dict[str, Any]:
    return {
        "paper": report.paper_id,
        "rows": [
            {
                "number": r.number,
                "kind": r.kind.value,
                "awarded": r.awarded,
                "max": r.max_mark,
                "response": r.response,
            }
            for r in report.rows
        ],
        "totals": {
            "auto": report.auto_subtotal,
            "manual": report.manual_subtotal,
            "pending": report.pending_count,
            "total": report.total,
            "max": report.max_total,
        },
        "summary": marking.summarize(report),
    }


def event_to_json(event: GestureEvent) -> dict[str, Any]:
    return {
        "kind": event.kind.value,
        "start_ms": event.start_ms,
        "end_ms": event.end_ms,
        "severity": event.severity,
        "comment": event.comment,
    }


def gesture_report_to_json(report: SessionReport) -> dict[str, Any]:
    return {
        "frame_count": report.frame_count,
        "present_frames": report.present_frames,
        "present_ratio": report.present_ratio,
        "start_ms": report.start_ms,
        "end_ms": report.end_ms,
        "events": [event_to_json(ev) for ev in report.events],
    }


def attestation_to_json(record: AttestationRecord) -> dict[str, Any]:
    return {
        "camera_present": record.camera_present,
        "camera_active": record.camera_active,
        "mic_present": record.mic_present,
        "mic_active": record.mic_active,
        "recording_tamper": record.recording_tamper,
        "probe_time": record.probe_time.isoformat(),
        "host": record.host_descriptor,
        "notes": list(record.notes),
    }
