import numpy as np
import pytest

import tubalcast as tc


def test_identity_tnn():
    for n, n3 in [(2, 3), (4, 5), (8, 11)]:
        assert abs(tc.tnn(tc.identity(n, n3)) - n * n3) < 1e-9


def test_tproduct_matches_circular_convolution():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 4, 5))
    b = rng.standard_normal((4, 2, 5))
    ref = np.zeros((3, 2, 5))
    for k in range(5):
        for l in range(5):
            ref[:, :, k] += a[:, :, l] @ b[:, :, (k - l) % 5]
    assert np.max(np.abs(tc.tproduct(a, b) - ref)) < 1e-10


def test_tsvd_reconstructs():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 4, 6))
    u, s, v = tc.tsvd(a)
    back = tc.tproduct(tc.tproduct(u, s), tc.ttranspose(v))
    assert np.max(np.abs(back - a)) < 1e-8


def test_completion_recovers_low_rank():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((12, 12, 11))
    b = rng.standard_normal((12, 12, 11))
    s = np.zeros((12, 12, 11))
    k = np.arange(11)
    for i in range(2):
        s[i, i, :] = 2.0 ** -i * (1 + 0.5 * np.cos(2 * np.pi * k / 11))
    u = tc.tsvd(a)[0]
    v = tc.tsvd(b)[0]
    truth = tc.tproduct(tc.tproduct(u, s), tc.ttranspose(v))
    mask = tc.random_mask(12, 12, 11, 0.5, seed=4)
    out = tc.complete(np.where(mask, truth, 0.0), mask)
    err = np.linalg.norm(out["completed"] - truth) / np.linalg.norm(truth)
    assert err < 0.05
    assert out["iterations"] <= 500


def test_masks_protect_forecast_slices():
    mask = tc.random_mask(12, 12, 11, 0.9, protected_slices=1, seed=1)
    assert mask.dtype == bool
    assert not mask[:, :, -1].any()
    assert 60 < mask.sum() < 240


def test_metrics():
    rng = np.random.default_rng(3)
    t = rng.random((4, 4, 1)) + 0.1
    assert tc.mae(t + 0.5, t) == pytest.approx(0.5)
    assert tc.nrmse(2 * t, t) == pytest.approx(1.0)
    with pytest.raises(tc.TubalcastError):
        tc.nrmse(t, np.zeros_like(t))


def test_errors_are_raised():
    with pytest.raises(tc.TubalcastError, match="ZeroTensor"):
        tc.energy_cdf(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        tc.tnn(np.zeros((2, 2)))


def test_generator_and_inference(tmp_path):
    g = tc.Generator.init("tl", 6, 5, seed=3)
    assert g.latent_length == 30
    out = g(np.zeros(30))
    assert out.shape == (6, 6, 5)
    assert np.all((out > 0) & (out < 1))
    g.save(str(tmp_path / "g.npk"))
    g2 = tc.Generator.load(str(tmp_path / "g.npk"))
    assert g2.fingerprint() == g.fingerprint()

    f = tc.LearnedOptimizer.init(g, seed=1)
    assert f.hidden == 120
    data = tc.synthetic_traffic(6, 5, 2, seed=0)
    data = data / data.max()
    mask = tc.random_mask(6, 6, 5, 0.3, protected_slices=1, seed=2)
    r1 = tc.infer(g, f, np.where(mask, data, 0.0), mask, seed=7)
    r2 = tc.infer(g, f, np.where(mask, data, 0.0), mask, seed=7)
    assert r1["forecast"].shape == (6, 6, 1)
    assert np.array_equal(r1["forecast"], r2["forecast"])
    gd = tc.infer(g, None, np.where(mask, data, 0.0), mask, mode="gd", iters=20)
    assert gd["energy"] >= 0.0
    with pytest.raises(tc.TubalcastError):
        tc.infer(g, None, np.where(mask, data, 0.0), mask, mode="learned")
