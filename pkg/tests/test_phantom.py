import numpy as np
import pytest

from geoseg.phantom import PhantomSpec, make_phantom, render_layers
from geoseg.trace import BOUNDARY_IDS


def test_flat_clean_layers():
    spec = PhantomSpec(dip=0, attenuation=0)
    img, truth = make_phantom(spec)
    assert img.shape == (256, 512)
    for i, b in enumerate(BOUNDARY_IDS):
        assert np.all(truth[b] == spec.offsets[i] * 256)
    assert np.all(img == img[:, :1])  # every column identical
    assert img[0, 0] == spec.intensities[0] and img[-1, 0] == spec.intensities[-1]


def test_partial_volume():
    z = np.full((9, 1), 100.0)
    z += np.arange(9)[:, None] * 10.0
    z[0] = 10.25
    img = render_layers(z[:, None, :], np.arange(10) / 10.0, 120)[0]
    # pixel 10 spans [9.5, 10.5]; a quarter lies below the first interface
    assert img[10, 0] == pytest.approx(0.025)
    assert img[9, 0] == 0.0 and img[11, 0] == pytest.approx(0.1)


def test_dip_and_ordering():
    img, truth = make_phantom(PhantomSpec(dip=25))
    depths = np.stack([truth[b] for b in BOUNDARY_IDS])
    assert np.all(np.diff(depths, axis=0) > 0)
    assert truth["B1"].max() - truth["B1"].min() == pytest.approx(25, abs=0.1)
    assert np.ptp(truth["B9"]) == 0


def test_seeded_noise():
    a, _ = make_phantom(PhantomSpec(sigma=0.05, seed=3))
    b, _ = make_phantom(PhantomSpec(sigma=0.05, seed=3))
    c, _ = make_phantom(PhantomSpec(sigma=0.05, seed=4))
    assert a.tobytes() == b.tobytes() and not np.array_equal(a, c)
    assert a.min() >= 0 and a.max() <= 1


def test_volume_shapes():
    vol, truth = make_phantom(PhantomSpec(slices=4, cols=64, dip=10, dip_width=8, dip_slice_width=1.0))
    assert vol.shape == (4, 256, 64) and truth["B1"].shape == (4, 64)
    assert truth["B1"][0].max() < truth["B1"][1].max()


def test_attenuation_below_b9():
    img, truth = make_phantom(PhantomSpec(dip=0))
    r = int(np.ceil(truth["B9"][0])) + 30
    assert img[r, 0] == pytest.approx(PhantomSpec().intensities[-1] * np.exp(-(r - truth["B9"][0]) / 30))


def test_invalid_specs():
    with pytest.raises(ValueError):
        make_phantom(PhantomSpec(intensities=(0.1,) * 9))
    with pytest.raises(ValueError):
        make_phantom(PhantomSpec(dip=200))
