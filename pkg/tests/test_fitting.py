import numpy as np
import pytest

from examgrid.gesture import (EnergyConfig, Frame, TemplateParams,
                              blank_frame, compute_potentials, energy, fit,
                              render_synthetic)
from examgrid.gesture.fitting import GRID_SCALES, _refine


CFG = EnergyConfig()


def random_truth(rng, W=160, H=120):
    # desk-scale faces: 18-35% of frame height
    s = rng.uniform(22, 42)
    reach = s + 2
    return TemplateParams(
        cx=rng.uniform(reach + 6, W - reach - 7),
        cy=rng.uniform(reach + 6, H - reach - 7),
        s=s,
        phi=rng.uniform(-0.15, 0.15),
        e=rng.uniform(0.35, 0.6),
        m=rng.uniform(0.45, 0.7),
    )


def test_white_frame_rest_shape_energy_is_exactly_zero():
    frame = blank_frame(160, 120)
    fields = compute_potentials(frame, CFG.sigma)
    p = TemplateParams(cx=80, cy=60, s=30, phi=0.0, e=CFG.e0, m=CFG.m0)
    assert energy(p, fields, CFG) == 0.0


def test_white_frame_rotation_penalty_only():
    frame = blank_frame(160, 120)
    fields = compute_potentials(frame, CFG.sigma)
    p = TemplateParams(cx=80, cy=60, s=30, phi=0.1, e=CFG.e0, m=CFG.m0)
    assert energy(p, fields, CFG) == CFG.w5 * 0.1 * 0.1


def test_white_frame_shape_prior_term():
    frame = blank_frame(160, 120)
    fields = compute_potentials(frame, CFG.sigma)
    p = TemplateParams(cx=80, cy=60, s=30, phi=0.0, e=CFG.e0 + 0.1, m=CFG.m0)
    assert energy(p, fields, CFG) == pytest.approx(CFG.w4 * 0.01, abs=1e-15)


def test_true_pose_beats_shifted_pose_50_draws():
    rng = np.random.RandomState(17)
    for trial in range(50):
        truth = random_truth(rng)
        frame = render_synthetic(truth, 160, 120, noise_sigma=0.02, seed=trial)
        fields = compute_potentials(frame, CFG.sigma)
        shifted = TemplateParams(cx=truth.cx + 10, cy=truth.cy, s=truth.s,
                                 phi=truth.phi, e=truth.e, m=truth.m)
        assert energy(truth, fields, CFG) < energy(shifted, fields, CFG)


def test_fit_recovers_noise_free_renders():
    rng = np.random.RandomState(5)
    for trial in range(10):
        truth = random_truth(rng)
        frame = render_synthetic(truth, 160, 120, noise_sigma=0.0)
        r = fit(frame, CFG)
        assert abs(r.params.cx - truth.cx) <= 1.0
        assert abs(r.params.cy - truth.cy) <= 1.0
        assert abs(r.params.s - truth.s) / truth.s <= 0.02


def test_translation_equivariance():
    truth = TemplateParams(cx=70.0, cy=60.0, s=28.0, phi=0.05, e=0.5, m=0.6)
    frame = render_synthetic(truth, 160, 120, noise_sigma=0.0)
    dx, dy = 7, -3
    shifted = np.roll(frame.intensities, (dy, dx), axis=(0, 1))
    shifted[dy:, :] = 1.0   # dy < 0: wrapped rows at the bottom
    shifted[:, :dx] = 1.0   # dx > 0: wrapped columns at the left
    shifted_frame = Frame(width=160, height=120, intensities=shifted, t_ms=0)
    r0 = fit(frame, CFG)
    r1 = fit(shifted_frame, CFG)
    assert abs((r1.params.cx - r0.params.cx) - dx) <= 1.0
    assert abs((r1.params.cy - r0.params.cy) - dy) <= 1.0


def test_uniform_frame_degenerate_fit():
    r = fit(blank_frame(160, 120), CFG)
    assert r.converged
    assert r.energy == 0.0
    assert r.comment == "degenerate=true"
    assert r.params.phi == 0.0
    assert r.params.e == CFG.e0 and r.params.m == CFG.m0


def test_fit_determinism():
    truth = TemplateParams(cx=80.0, cy=60.0, s=30.0, phi=0.1, e=0.5, m=0.6)
    frame = render_synthetic(truth, 160, 120, noise_sigma=0.02, seed=9)
    assert fit(frame, CFG) == fit(frame, CFG)


def test_refined_energy_never_above_seed_energy():
    rng = np.random.RandomState(23)
    for trial in range(5):
        truth = random_truth(rng)
        frame = render_synthetic(truth, 160, 120, noise_sigma=0.05, seed=trial)
        fields = compute_potentials(frame, CFG.sigma)
        seed = TemplateParams(cx=truth.cx + 5, cy=truth.cy - 4, s=truth.s + 3,
                              phi=0.0, e=CFG.e0, m=CFG.m0)
        seed_energy = energy(seed, fields, CFG)
        _, refined_energy, _, _ = _refine(seed, fields, CFG, (10.8, 58.8))
        assert refined_energy <= seed_energy


def test_result_energy_matches_params():
    truth = TemplateParams(cx=80.0, cy=60.0, s=30.0, phi=0.1, e=0.5, m=0.6)
    frame = render_synthetic(truth, 160, 120, noise_sigma=0.02, seed=2)
    r = fit(frame, CFG)
    fields = compute_potentials(frame, CFG.sigma)
    assert energy(r.params, fields, CFG) == r.energy


def test_warm_start_tracks_previous_pose():
    truth = TemplateParams(cx=80.0, cy=60.0, s=30.0, phi=0.05, e=0.5, m=0.6)
    frame = render_synthetic(truth, 160, 120, noise_sigma=0.02, seed=3)
    cold = fit(frame, CFG)
    warm = fit(frame, CFG, warm_start=cold.params)
    assert abs(warm.params.cx - cold.params.cx) <= 1.0
    assert abs(warm.params.cy - cold.params.cy) <= 1.0
    assert warm.energy <= cold.energy + 1e-12


def test_scale_stays_inside_search_band():
    # a lone dark blob must not collapse the template to a point
    img = np.ones((120, 160))
    ys, xs = np.mgrid[0:120, 0:160]
    img[(xs - 80) ** 2 + (ys - 60) ** 2 <= 9] = 0.1
    r = fit(Frame(width=160, height=120, intensities=img, t_ms=0), CFG)
    assert r.params.s >= 0.6 * GRID_SCALES[0] * 120
