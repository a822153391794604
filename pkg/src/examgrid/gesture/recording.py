"""Session recording: fit every incoming frame, stream it into an FRS
frameset, run the recognizers, and report."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from . import frameset
from .fitting import fit
from .model import (TAU_ABSENT, EnergyConfig, FitResult, Frame, GestureEvent,
                    SessionReport)
from .recognizers import NonMonotonicTimestamps, Recognizer


class FrameSourceFailed(Exception):
    """The frame source died mid-session; partial results are attached."""

    def __init__(self, cause: Exception, frameset_bytes: bytes, report: SessionReport):
        self.cause = cause
        self.frameset_bytes = frameset_bytes
        self.report = report
        super().__init__(f"frame source failed after {report.frame_count} frames: {cause}")


def record_session(
    frames: Iterable[Frame],
    config: EnergyConfig,
    recognizers: Sequence[Recognizer],
    tau_absent: float = TAU_ABSENT,
    on_event: Callable[[GestureEvent], None] | None = None,
) -> tuple[bytes, SessionReport]:
    """Consume a frame source; return (FRS bytes, SessionReport).

    The fit is warm-started from the previous frame's parameters whenever
    that frame's energy was below the absence threshold, so tracking skips
    the coarse search while the face stays in view. Recognizers are fed
    incrementally; on_event (when given) sees each event as it closes.
    """
    kept: list[Frame] = []
    events: list[GestureEvent] = []
    present = 0
    last_good: FitResult | None = None
    last_t: int | None = None
    failure: Exception | None = None

    def emit(batch: Iterable[GestureEvent]) -> None:
        for ev in batch:
            events.append(ev)
            if on_event is not None:
                on_event(ev)

    iterator = iter(frames)
    while True:
        try:
            frame = next(iterator)
        except StopIteration:
            break
        except Exception as exc:  # noqa: BLE001 - partial results are the contract
            failure = exc
            break
        if last_t is not None and frame.t_ms <= last_t:
            failure = NonMonotonicTimestamps(f"timestamp {frame.t_ms} after {last_t}")
            break
        last_t = frame.t_ms
        warm = last_good.params if last_good is not None else None
        result = fit(frame, config, warm_start=warm)
        last_good = result if result.energy < tau_absent else None
        if result.energy < tau_absent:
            present += 1
        kept.append(frame)
        for rec in recognizers:
            emit(rec.update(result, frame.t_ms))
    for rec in recognizers:
        emit(rec.finish())
    events.sort(key=lambda ev: (ev.start_ms, ev.end_ms, ev.kind.value))

    report = SessionReport(
        frame_count=len(kept),
        present_frames=present,
        start_ms=kept[0].t_ms if kept else 0,
        end_ms=kept[-1].t_ms if kept else 0,
        events=tuple(events),
    )
    blob = frameset.write_frs(kept)
    if failure is not None:
        raise FrameSourceFailed(failure, blob, report)
    return blob, report
