"""Pluggable gesture recognizers over the per-frame fit stream.

A recognizer is a deterministic automaton: it is fed every (FitResult,
timestamp) pair in order, may emit zero or more GestureEvents per frame,
and flushes any open episode in finish(). Episode events are debounced:
a condition must hold for `debounce` consecutive frames before an event
exists at all, and recovery needs the same confirmation. The episode
event starts at the frame where the debounce threshold was crossed and
ends at the last frame that still satisfied the condition; recovery
markers (FACE_PRESENT / LOOK_BACK) are point events.

Gaze and Motion ignore frames whose fit energy is above the absence
threshold: a frame with no face has an arbitrary best-seed pose, and
letting it drive position deltas would fire spurious events inside every
FACE_ABSENT gap.
"""

from __future__ import annotations

import math
import statistics
from collections import deque
from typing import Iterable, Mapping, Sequence

from .model import (DEBOUNCE_FRAMES, GAZE_WINDOW, PHI_MAX, TAU_ABSENT, V_MAX,
                    EventKind, FitResult, GestureEvent, TemplateParams)


class NonMonotonicTimestamps(ValueError):
    pass


class Recognizer:
    """Base recognizer; subclasses override update/finish."""

    name = "recognizer"

    def configure(self, options: Mapping[str, str]) -> None:
        for key, value in options.items():
            attr = key.replace(".", "_")
            if hasattr(self, attr):
                current = getattr(self, attr)
                setattr(self, attr, type(current)(float(value)) if isinstance(current, (int, float)) else value)

    def update(self, fit: FitResult, t_ms: int) -> Iterable[GestureEvent]:
        return ()

    def finish(self) -> Iterable[GestureEvent]:
        return ()


class PresenceRecognizer(Recognizer):
    """FACE_ABSENT / FACE_PRESENT from the fit energy level."""

    name = "presence"

    def __init__(self, tau: float = TAU_ABSENT, debounce: int = DEBOUNCE_FRAMES):
        self.tau = tau
        self.debounce = debounce
        self._present = True
        self._bad_run = 0
        self._good_run = 0
        self._absent_start = 0
        self._last_bad = 0

    def update(self, fit: FitResult, t_ms: int) -> Iterable[GestureEvent]:
        bad = fit.energy > self.tau
        if self._present:
            if bad:
                self._bad_run += 1
                if self._bad_run >= self.debounce:
                    self._present = False
                    self._absent_start = t_ms
                    self._last_bad = t_ms
                    self._good_run = 0
            else:
                self._bad_run = 0
            return ()
        if bad:
            self._last_bad = t_ms
            self._good_run = 0
            return ()
        self._good_run += 1
        if self._good_run < self.debounce:
            return ()
        self._present = True
        self._bad_run = 0
        return (
            GestureEvent(EventKind.FACE_ABSENT, self._absent_start, self._last_bad, "warn",
                         f"face not detected from {self._absent_start} ms to {self._last_bad} ms"),
            GestureEvent(EventKind.FACE_PRESENT, t_ms, t_ms, "info",
                         f"face re-acquired at {t_ms} ms"),
        )

    def finish(self) -> Iterable[GestureEvent]:
        if self._present:
            return ()
        return (GestureEvent(EventKind.FACE_ABSENT, self._absent_start, self._last_bad, "warn",
                             f"face not detected from {self._absent_start} ms to {self._last_bad} ms"),)


class GazeRecognizer(Recognizer):
    """LOOK_AWAY / LOOK_BACK from tilt or drift off the rolling-median position."""

    name = "gaze"

    def __init__(self, phi_max: float = PHI_MAX, delta_px: float = 14.4,
                 debounce: int = DEBOUNCE_FRAMES, tau: float = TAU_ABSENT,
                 window: int = GAZE_WINDOW):
        self.phi_max = phi_max
        self.delta_px = delta_px
        self.debounce = debounce
        self.tau = tau
        self._window: deque[tuple[float, float]] = deque(maxlen=window)
        self._away = False
        self._away_run = 0
        self._back_run = 0
        self._away_start = 0
        self._last_away = 0

    def update(self, fit: FitResult, t_ms: int) -> Iterable[GestureEvent]:
        if fit.energy > self.tau:
            self._away_run = 0
            self._back_run = 0
            return ()
        p = fit.params
        if self._window:
            mx = statistics.median(x for x, _ in self._window)
            my = statistics.median(y for _, y in self._window)
            deviation = math.hypot(p.cx - mx, p.cy - my)
        else:
            deviation = 0.0
        self._window.append((p.cx, p.cy))
        looking_away = abs(p.phi) > self.phi_max or deviation > self.delta_px

        if not self._away:
            if looking_away:
                self._away_run += 1
                if self._away_run >= self.debounce:
                    self._away = True
                    self._away_start = t_ms
                    self._last_away = t_ms
                    self._back_run = 0
            else:
                self._away_run = 0
            return ()
        if looking_away:
            self._last_away = t_ms
            self._back_run = 0
            return ()
        self._back_run += 1
        if self._back_run < self.debounce:
            return ()
        self._away = False
        self._away_run = 0
        return (
            GestureEvent(EventKind.LOOK_AWAY, self._away_start, self._last_away, "warn",
                         f"attention away from screen from {self._away_start} ms to {self._last_away} ms"),
            GestureEvent(EventKind.LOOK_BACK, t_ms, t_ms, "info",
                         f"attention returned at {t_ms} ms"),
        )

    def finish(self) -> Iterable[GestureEvent]:
        if not self._away:
            return ()
        return (GestureEvent(EventKind.LOOK_AWAY, self._away_start, self._last_away, "warn",
                             f"attention away from screen from {self._away_start} ms to {self._last_away} ms"),)


class MotionRecognizer(Recognizer):
    """MOVEMENT_BURST when the px-equivalent parameter velocity stays high."""

    name = "motion"

    def __init__(self, v_max: float = V_MAX, debounce: int = DEBOUNCE_FRAMES,
                 tau: float = TAU_ABSENT):
        self.v_max = v_max
        self.debounce = debounce
        self.tau = tau
        self._prev: TemplateParams | None = None
        self._run = 0
        self._burst_start = 0
        self._last_high = 0

    def _flush(self) -> Iterable[GestureEvent]:
        if self._run >= self.debounce:
            event = GestureEvent(EventKind.MOVEMENT_BURST, self._burst_start, self._last_high, "warn",
                                 f"rapid movement between {self._burst_start} ms and {self._last_high} ms")
            self._run = 0
            return (event,)
        self._run = 0
        return ()

    def update(self, fit: FitResult, t_ms: int) -> Iterable[GestureEvent]:
        if fit.energy > self.tau:
            out = self._flush()
            self._prev = None
            return out
        p = fit.params
        if self._prev is None:
            self._prev = p
            return self._flush()
        q = self._prev
        norm = math.sqrt(
            (p.cx - q.cx) ** 2 + (p.cy - q.cy) ** 2 + (p.s - q.s) ** 2
            + (q.s * (p.phi - q.phi)) ** 2 + (q.s * (p.e - q.e)) ** 2 + (q.s * (p.m - q.m)) ** 2)
        self._prev = p
        if norm > self.v_max:
            if self._run == 0:
                self._burst_start = t_ms
            self._run += 1
            self._last_high = t_ms
            return ()
        return self._flush()

    def finish(self) -> Iterable[GestureEvent]:
        return self._flush()


def default_recognizers(frame_height: int) -> list[Recognizer]:
    return [
        PresenceRecognizer(),
        GazeRecognizer(delta_px=0.12 * frame_height),
        MotionRecognizer(),
    ]


def run_recognizers(fits: Sequence[tuple[FitResult, int]],
                    recognizers: Sequence[Recognizer]) -> list[GestureEvent]:
    """Feed every fit to every recognizer in order, finish, and merge."""
    last_t = None
    events: list[GestureEvent] = []
    for fit, t_ms in fits:
        if last_t is not None and t_ms <= last_t:
            raise NonMonotonicTimestamps(f"timestamp {t_ms} after {last_t}")
        last_t = t_ms
        for rec in recognizers:
            events.extend(rec.update(fit, t_ms))
    for rec in recognizers:
        events.extend(rec.finish())
    return sorted(events, key=lambda ev: (ev.start_ms, ev.end_ms, ev.kind.value))
