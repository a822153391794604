"""Gesture pipeline: deformable face-template fitting over potential
fields, pluggable recognizers, and annotated session recording."""

from .fitting import compute_potentials, energy, fit
from .frameset import frames_from_dir, read_frs, read_pgm, write_frs, write_pgm
from .model import (EnergyConfig, EventKind, FitResult, Frame, GestureEvent,
                    PotentialFields, SessionReport, TemplateParams)
from .recognizers import (GazeRecognizer, MotionRecognizer,
                          NonMonotonicTimestamps, PresenceRecognizer,
                          Recognizer, default_recognizers, run_recognizers)
from .recording import FrameSourceFailed, record_session
from .synthetic import OutOfFrame, blank_frame, render_synthetic

__all__ = [
    "EnergyConfig", "EventKind", "FitResult", "Frame", "GestureEvent",
    "PotentialFields", "SessionReport", "TemplateParams",
    "compute_potentials", "energy", "fit",
    "frames_from_dir", "read_frs", "read_pgm", "write_frs", "write_pgm",
    "GazeRecognizer", "MotionRecognizer", "NonMonotonicTimestamps",
    "PresenceRecognizer", "Recognizer", "default_recognizers", "run_recognizers",
    "FrameSourceFailed", "record_session",
    "OutOfFrame", "blank_frame", "render_synthetic",
]
