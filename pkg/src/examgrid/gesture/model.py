"""Domain types for the gesture pipeline.

The face model is a parameterized deformable template: an ellipse for the
face boundary, two eye disks and a mouth bar, posed by center/scale/rotation
plus two internal shape parameters. Fitting minimizes an energy over two
image potential fields: a valley field (smoothed inverted intensity) that
attracts the dark blob landmarks, and an edge field (gradient magnitude of
the smoothed image) that attracts the boundary ellipse.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# Fraction of scale used by the template geometry; shared by the energy
# evaluation, the synthetic renderer and the fit seeding.
ELLIPSE_ASPECT = 0.7      # horizontal semi-axis = 0.7 * s, vertical = s
EYE_HEIGHT = -0.35        # eye row, fraction of s (negative = above center)
EYE_RADIUS = 0.08         # eye disk radius, fraction of s
MOUTH_HALF_WIDTH = 0.3    # mouth bar half-width, fraction of s
MOUTH_SAMPLES = 9

PHI_LIMIT = math.pi / 4
E_RANGE = (0.2, 0.7)
M_RANGE = (0.3, 0.8)

# Recognizer defaults; validated by the acceptance suite on synthetic frames.
TAU_ABSENT = -0.15        # fit energy above this means "no face"
PHI_MAX = 0.2             # radians of tilt counted as looking away
DELTA_FRAC = 0.12         # gaze deviation threshold, fraction of frame height
DEBOUNCE_FRAMES = 3
V_MAX = 6.0               # px-equivalent parameter motion per frame
GAZE_WINDOW = 25          # frames in the rolling-median position baseline


class EventKind(enum.Enum):
    FACE_ABSENT = "FACE_ABSENT"
    FACE_PRESENT = "FACE_PRESENT"
    LOOK_AWAY = "LOOK_AWAY"
    LOOK_BACK = "LOOK_BACK"
    MOVEMENT_BURST = "MOVEMENT_BURST"


@dataclass(frozen=True)
class Frame:
    width: int
    height: int
    intensities: np.ndarray  # (height, width) float64 in [0, 1]
    t_ms: int

    def __post_init__(self):
        if self.width < 32 or self.height < 32:
            raise ValueError("frames must be at least 32x32")
        if self.intensities.shape != (self.height, self.width):
            raise ValueError("intensity grid shape disagrees with width/height")
        lo, hi = float(self.intensities.min()), float(self.intensities.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError("intensities must lie in [0, 1]")


@dataclass(frozen=True)
class TemplateParams:
    cx: float
    cy: float
    s: float
    phi: float = 0.0
    e: float = 0.45
    m: float = 0.55

    def in_bounds(self) -> bool:
        return (
            self.s > 0
            and E_RANGE[0] <= self.e <= E_RANGE[1]
            and M_RANGE[0] <= self.m <= M_RANGE[1]
            and -PHI_LIMIT <= self.phi <= PHI_LIMIT
        )


@dataclass(frozen=True)
class EnergyConfig:
    # The boundary ring is the discriminative feature (64 samples over a
    # large ellipse); weighting it above the eye/mouth blobs suppresses
    # false "sub-face" composites where an eye lands on the mouth bar.
    w1: float = 3.0   # boundary-ring pull
    w2: float = 1.0   # valley pull at the eyes
    w3: float = 1.0   # valley pull on the mouth bar
    w4: float = 0.5   # internal shape prior
    w5: float = 0.5   # rotation prior
    sigma: float = 2.5
    e0: float = 0.45
    m0: float = 0.55
    n_ell: int = 64

    def __post_init__(self):
        if self.n_ell < 16:
            raise ValueError("n_ell must be at least 16")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        for w in (self.w1, self.w2, self.w3, self.w4, self.w5):
            if w < 0:
                raise ValueError("weights must be nonnegative")


@dataclass(frozen=True)
class PotentialFields:
    valley: np.ndarray  # smoothed inverted intensity, values in [0, 1]
    edge: np.ndarray    # gradient magnitude of the smoothed image, >= 0


@dataclass(frozen=True)
class FitResult:
    params: TemplateParams
    energy: float
    converged: bool
    iterations: int
    comment: str = ""


@dataclass(frozen=True)
class GestureEvent:
    kind: EventKind
    start_ms: int
    end_ms: int
    severity: str  # "info" | "warn"
    comment: str = ""


@dataclass(frozen=True)
class SessionReport:
    frame_count: int
    present_frames: int
    start_ms: int
    end_ms: int
    events: tuple[GestureEvent, ...] = field(default_factory=tuple)

    @property
    def present_ratio(self) -> float:
        return self.present_frames / self.frame_count if self.frame_count else 0.0
