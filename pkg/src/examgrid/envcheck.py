"""Environment attestation: probe the student machine (simulated at desk
scale), enforce the start-of-exam policy, and serialize the record that
rides back to the lecturer inside the return container.

ENVREC text form: first line "ENVREC 1", then fixed-order key=value lines
(camera.present, camera.active, mic.present, mic.active, recording.tamper,
probe.time, host) followed by zero or more note= lines.
"""

from __future__ import annotations

import platform
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

PROBE_TIMEOUT_S = 5.0


class EnvrecSyntaxError(Exception):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


@dataclass(frozen=True)
class AttestationRecord:
    camera_present: bool = False
    camera_active: bool = False
    mic_present: bool = False
    mic_active: bool = False
    recording_tamper: bool = False
    probe_time: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    host_descriptor: str = ""
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProbeResult:
    present: bool
    active: bool
    tamper: bool = False
    notes: tuple[str, ...] = ()


class Probe:
    """A device probe. run() must finish within the timeout budget or the
    sweep records it as failed."""

    name = "probe"

    def run(self) -> ProbeResult:
        raise NotImplementedError


class SimulatedProbe(Probe):
    def __init__(self, name: str, present: bool = True, active: bool = True,
                 tamper: bool = False, delay_s: float = 0.0,
                 notes: tuple[str, ...] = (), fail: bool = False):
        self.name = name
        self.present = present
        self.active = active
        self.tamper = tamper
        self.delay_s = delay_s
        self.notes = notes
        self.fail = fail

    def run(self) -> ProbeResult:
        if self.delay_s:
            import time

            time.sleep(self.delay_s)
        if self.fail:
            raise RuntimeError(f"simulated {self.name} failure")
        return ProbeResult(self.present, self.active, self.tamper, self.notes)


def load_probe_fixture(path: Path) -> list[Probe]:
    """Fixture format: `<probe>.<field>=<value>` lines; fields are
    present/active/tamper/fail (booleans), delay_s (float)."""
    settings: dict[str, dict[str, str]] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        probe_name, _, fieldname = key.strip().partition(".")
        settings.setdefault(probe_name, {})[fieldname] = value.strip()
    probes: list[Probe] = []
    for name, fields in settings.items():
        probes.append(SimulatedProbe(
            name=name,
            present=fields.get("present", "true") == "true",
            active=fields.get("active", "true") == "true",
            tamper=fields.get("tamper", "false") == "true",
            fail=fields.get("fail", "false") == "true",
            delay_s=float(fields.get("delay_s", "0")),
        ))
    return probes


def default_probes() -> list[Probe]:
    return [SimulatedProbe("camera"), SimulatedProbe("mic")]


def _run_with_budget(probe: Probe, timeout_s: float) -> tuple[ProbeResult | None, str | None]:
    box: dict[str, object] = {}

    def target():
        try:
            box["result"] = probe.run()
        except Exception as exc:  # noqa: BLE001 - failures are data here
            box["error"] = exc

    t = threading.Thread(target=target, daemon=True)
    t.start()
    t.join(timeout_s)
    if t.is_alive():
        return None, f"probe {probe.name} timed out after {timeout_s:g} s"
    if "error" in box:
        return None, f"probe {probe.name} failed: {box['error']}"
    return box["result"], None  # type: ignore[return-value]


def run_probes(probes: Sequence[Probe], host: str | None = None,
               timeout_s: float = PROBE_TIMEOUT_S,
               probe_time: datetime | None = None) -> AttestationRecord:
    """Run every probe and aggregate into one record. A probe that raises
    or overruns the budget leaves its fields false and appends a note."""
    if not probes:
        raise ValueError("at least one probe is required")
    record = AttestationRecord(
        probe_time=probe_time or datetime.now(timezone.utc),
        host_descriptor=host if host is not None else platform.node() or "unknown-host",
    )
    notes: list[str] = []
    tamper = False
    values: dict[str, tuple[bool, bool]] = {}
    for probe in probes:
        result, failure = _run_with_budget(probe, timeout_s)
        if result is None:
            values[probe.name] = (False, False)
            notes.append(failure or f"probe {probe.name} failed")
            continue
        values[probe.name] = (result.present, result.active)
        notes.extend(result.notes)
        if result.tamper:
            tamper = True
            notes.append(f"tamper reported by probe {probe.name}")
    cam = values.get("camera", (False, False))
    mic = values.get("mic", (False, False))
    return replace(
        record,
        camera_present=cam[0], camera_active=cam[1],
        mic_present=mic[0], mic_active=mic[1],
        recording_tamper=tamper, notes=tuple(notes),
    )


def _bool(value: bool) -> str:
    return "true" if value else "false"


def serialize_envrec(record: AttestationRecord) -> str:
    lines = [
        "ENVREC 1",
        f"camera.present={_bool(record.camera_present)}",
        f"camera.active={_bool(record.camera_active)}",
        f"mic.present={_bool(record.mic_present)}",
        f"mic.active={_bool(record.mic_active)}",
        f"recording.tamper={_bool(record.recording_tamper)}",
        f"probe.time={record.probe_time.isoformat()}",
        f"host={record.host_descriptor}",
    ]
    lines.extend(f"note={n}" for n in record.notes)
    return "\n".join(lines) + "\n"


_BOOL_KEYS = {
    "camera.present": "camera_present",
    "camera.active": "camera_active",
    "mic.present": "mic_present",
    "mic.active": "mic_active",
    "recording.tamper": "recording_tamper",
}


def parse_envrec(text: str) -> AttestationRecord:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ENVREC 1":
        raise EnvrecSyntaxError(1, "document must start with 'ENVREC 1'")
    fields: dict[str, object] = {}
    notes: list[str] = []
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise EnvrecSyntaxError(idx, f"expected key=value, got {line!r}")
        if key in _BOOL_KEYS:
            if value not in ("true", "false"):
                raise EnvrecSyntaxError(idx, f"{key} must be true or false")
            fields[_BOOL_KEYS[key]] = value == "true"
        elif key == "probe.time":
            try:
                fields["probe_time"] = datetime.fromisoformat(value)
            except ValueError:
                raise EnvrecSyntaxError(idx, "probe.time is not ISO-8601") from None
        elif key == "host":
            fields["host_descriptor"] = value
        elif key == "note":
            notes.append(value)
        else:
            # unknown keys ride along as notes for forward compatibility
            notes.append(f"{key}={value}")
    if fields.get("recording_tamper") and not notes:
        notes.append("tamper flagged without explanation")
    return AttestationRecord(notes=tuple(notes), **fields)  # type: ignore[arg-type]


@dataclass(frozen=True)
class PolicyCheck:
    violations: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_policy(record: AttestationRecord) -> PolicyCheck:
    """Camera problems and tampering block the exam; a quiet microphone
    only warns (audio is not recorded by this pipeline)."""
    violations = []
    warnings = []
    if not record.camera_present:
        violations.append("CameraAbsent")
    if not record.camera_active:
        violations.append("CameraInactive")
    if not record.mic_present:
        violations.append("MicAbsent")
    if record.recording_tamper:
        violations.append("RecordingTamper")
    if record.mic_present and not record.mic_active:
        warnings.append("MicInactive")
    return PolicyCheck(tuple(violations), tuple(warnings))
