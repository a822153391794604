"""Asynchronous drop-box watcher.

Polls list_names() on a background thread and delivers one Appeared event
per distinct matching name, including names already present at the first
poll (they are new to this subscription). Transient backend failures are
retried; after three consecutive failures one Degraded notice is emitted
for the episode. Event-sink callbacks arrive on the poller thread.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from typing import Callable

MIN_INTERVAL_MS = 100
FAILURES_BEFORE_DEGRADED = 3


@dataclass(frozen=True)
class Appeared:
    name: str


@dataclass(frozen=True)
class Degraded:
    detail: str


def _glob_to_regex(pattern: str) -> re.Pattern:
    # '*' is the only wildcard the drop-box supports
    return re.compile("^" + ".*".join(re.escape(part) for part in pattern.split("*")) + "$")


class WatchSubscription:
    def __init__(self, locator, pattern: str, interval_ms: int,
                 sink: Callable[[object], None]):
        from . import list_names

        self._list_names = list_names
        self.locator = locator
        self.regex = _glob_to_regex(pattern)
        self.interval_ms = interval_ms
        self.sink = sink
        self._seen: set[str] = set()
        self._failures = 0
        self._degraded_notified = False
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _start(self) -> "WatchSubscription":
        self._thread.start()
        return self

    def _poll_once(self) -> None:
        from . import TransportError

        try:
            names = self._list_names(self.locator)
        except TransportError as exc:
            self._failures += 1
            if self._failures >= FAILURES_BEFORE_DEGRADED and not self._degraded_notified:
                self._degraded_notified = True
                self.sink(Degraded(f"{self._failures} consecutive poll failures: {exc}"))
            return
        self._failures = 0
        self._degraded_notified = False
        for name in names:
            if name not in self._seen and self.regex.match(name):
                self._seen.add(name)
                self.sink(Appeared(name))

    def _run(self) -> None:
        while not self._stop.is_set():
            self._poll_once()
            self._stop.wait(self.interval_ms / 1000.0)

    def cancel(self) -> None:
        """Idempotent; blocks until the poller has stopped. No events are
        delivered after cancel returns."""
        self._stop.set()
        if self._thread.is_alive():
            self._thread.join()


def watch(locator, pattern: str, interval_ms: int,
          sink: Callable[[object], None]) -> WatchSubscription:
    if interval_ms < MIN_INTERVAL_MS:
        raise ValueError(f"poll interval must be >= {MIN_INTERVAL_MS} ms")
    return WatchSubscription(locator, pattern, interval_ms, sink)._start()
