import numpy as np
import pytest

from examgrid.gesture import EnergyConfig, TemplateParams, compute_potentials, render_synthetic
from examgrid.gesture.synthetic import DARK, OutOfFrame, landmark_mask


TRUTH = TemplateParams(cx=80.0, cy=60.0, s=30.0, phi=0.0, e=0.5, m=0.6)


def test_noise_free_render_matches_analytic_landmarks():
    frame = render_synthetic(TRUTH, 160, 120, noise_sigma=0.0)
    mask = landmark_mask(TRUTH, 160, 120)
    assert np.array_equal(frame.intensities == DARK, mask)
    assert np.array_equal(frame.intensities == 1.0, ~mask)


def test_known_points_dark_and_light():
    frame = render_synthetic(TRUTH, 160, 120, noise_sigma=0.0)
    img = frame.intensities
    assert img[60, 80] == 1.0                      # face center is white
    assert img[60 + 30, 80] == DARK                # bottom of boundary ellipse
    assert img[60 - 30, 80] == DARK                # top of boundary ellipse
    assert img[60, 80 + 21] == DARK                # right of boundary (0.7 * s)
    eye_y, eye_dx = 60 - int(0.35 * 30), int(0.5 * 30)
    assert img[eye_y, 80 - eye_dx] == DARK and img[eye_y, 80 + eye_dx] == DARK
    assert img[60 + int(0.6 * 30), 80] == DARK     # mouth bar center
    assert img[10, 10] == 1.0                      # far corner


def test_render_determinism_per_seed():
    a = render_synthetic(TRUTH, 160, 120, noise_sigma=0.05, seed=3)
    b = render_synthetic(TRUTH, 160, 120, noise_sigma=0.05, seed=3)
    c = render_synthetic(TRUTH, 160, 120, noise_sigma=0.05, seed=4)
    assert np.array_equal(a.intensities, b.intensities)
    assert not np.array_equal(a.intensities, c.intensities)


def test_out_of_frame_margin_enforced():
    with pytest.raises(OutOfFrame):
        render_synthetic(TemplateParams(cx=20.0, cy=60.0, s=30.0), 160, 120)
    with pytest.raises(OutOfFrame):
        render_synthetic(TemplateParams(cx=80.0, cy=60.0, s=58.0), 160, 120)


def test_eye_disks_are_local_maxima_of_valley_field():
    frame = render_synthetic(TRUTH, 160, 120, noise_sigma=0.0)
    fields = compute_potentials(frame, EnergyConfig().sigma)
    for ex in (80 - 15, 80 + 15):
        ey = 60 - int(0.35 * 30)
        window = fields.valley[ey - 4:ey + 5, ex - 4:ex + 5]
        peak = np.unravel_index(np.argmax(window), window.shape)
        # brute-force scan: the local argmax sits on the eye center, give or
        # take the smoothing pull of the nearby boundary ring
        assert abs(peak[0] - 4) <= 2 and abs(peak[1] - 4) <= 2
