import numpy as np
import pytest

from tsdistill import theorems as th


def test_scale_bound_equality_case():
    rng = np.random.default_rng(0)
    y, s = rng.uniform(-1, 1, (2, 50))
    for eta in (0.1, 1.0, 10.0):
        m = th.mixup_scale_margin(y, s, [y, y, y], eta, reduce=False)
        np.testing.assert_allclose(m, eta * (s - y) ** 2, atol=1e-14)


def test_scale_bound_at_mixed_target():
    rng = np.random.default_rng(1)
    y = rng.uniform(-1, 1, 20)
    levels = list(rng.uniform(-1, 1, (3, 20)))
    eta = 2.0
    lam = 1 / (1 + eta)
    s = lam * y + (1 - lam) * np.mean(levels, axis=0)
    m = th.mixup_scale_margin(y, s, levels, eta, reduce=False)
    lhs = (s - y) ** 2 + eta / 3 * sum((s - t) ** 2 for t in levels)
    np.testing.assert_allclose(m, lhs, atol=1e-14)
    assert (m >= 0).all()


def test_scale_bound_rejects_bad_eta():
    with pytest.raises(ValueError):
        th.mixup_scale_margin(0.0, 0.0, [0.0], 0.0)


def test_period_bound_identity_case():
    q = np.array([0.2, 0.3, 0.5])
    assert th.mixup_period_margin(q, q, q, 1.5) == pytest.approx(0.0, abs=1e-15)


def test_period_bound_strict_when_ratios_differ():
    q_t = np.full(8, 1e-6)
    q_t[3] = 1 - 7e-6
    q_s = np.full(8, 1 / 8)
    q_y = np.array([0.1, 0.2, 0.1, 0.1, 0.2, 0.1, 0.1, 0.1])
    assert th.mixup_period_margin(q_y, q_t, q_s, 1.0) > 1e-3


def test_period_bound_rejects_non_distributions():
    good = np.array([0.5, 0.5])
    with pytest.raises(ValueError):
        th.mixup_period_margin(np.array([1.0, 0.0]), good, good, 1.0)
    with pytest.raises(ValueError):
        th.mixup_period_margin(np.array([0.6, 0.6]), good, good, 1.0)
    with pytest.raises(ValueError):
        th.mixup_period_margin(good, good, good, -1.0)


def test_suites_nonnegative():
    s = th.run_scale_suite(900, seed=3)
    p = th.run_period_suite(900, seed=3)
    assert s["n"] >= 900 and p["n"] >= 900
    assert len(s["cases"]) == 9 and len(p["cases"]) == 3
    assert s["min_margin"] >= -th.TOL and p["min_margin"] >= -th.TOL
