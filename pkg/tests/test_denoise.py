import numpy as np
import pytest

from geoseg.denoise import TVParams, forward_diff, tv_denoise, tv_objective


def noisy_step(rng, rows=64, cols=64, step=32, sigma=0.05):
    clean = np.where(np.arange(rows)[:, None] < step, 0.3, 0.7) * np.ones((1, cols))
    return clean, np.clip(clean + rng.normal(0, sigma, clean.shape), 0, 1)


def test_constant_unchanged():
    img = np.full((16, 20), 0.4)
    assert np.allclose(tv_denoise(img), img, atol=1e-12)


def test_fidelity_limit(rng):
    img = rng.uniform(0, 1, (32, 32))
    assert np.max(np.abs(tv_denoise(img, TVParams(mu=1e6)) - img)) <= 1e-3


def test_noisy_step(rng):
    clean, noisy = noisy_step(rng)
    out = tv_denoise(noisy)
    for rs in (slice(4, 28), slice(36, 60)):
        assert out[rs, 4:60].var() <= 0.5 * noisy[rs, 4:60].var()
    edge = np.argmax(np.abs(np.diff(out, axis=0)), axis=0)
    assert np.all(np.abs(edge - 31) <= 1)


def test_objective_decreases(rng):
    _, noisy = noisy_step(rng)
    hist = []
    tv_denoise(noisy, TVParams(iterations=10), history=hist)
    assert len(hist) == 10
    assert hist[0] <= tv_objective(noisy, noisy, 15.0)
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))


def test_forward_diff_neumann():
    u = np.arange(12.0).reshape(3, 4)
    ux, uy = forward_diff(u)
    assert np.all(ux[:-1] == 4) and np.all(ux[-1] == 0)
    assert np.all(uy[:, :-1] == 1) and np.all(uy[:, -1] == 0)


def test_output_range(rng):
    out = tv_denoise(rng.uniform(0, 1, (20, 20)), TVParams(mu=0.5))
    assert out.min() >= 0 and out.max() <= 1


def test_params_validated():
    with pytest.raises(ValueError):
        TVParams(mu=0)
    with pytest.raises(ValueError):
        TVParams(iterations=0)
