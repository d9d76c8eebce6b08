import numpy as np
import pytest

from tsdistill import distill as dl
from tsdistill import student as st
from tsdistill.config import DistillConfig
from tsdistill.dataio import DataError
from tsdistill.teacher import Regressor, TeacherOutputs, regressor_apply
from tsdistill.trainer import full_loss_gradcheck

B, T, S, C, D, DT = 3, 16, 8, 2, 8, 8


def setup(seed=0, **cfg_kw):
    rng = np.random.default_rng(seed)
    cfg = DistillConfig(**{"alpha": 0.7, "beta": 0.4, "tau": 0.5, "M": 2, "D": D, "T": T, "S": S, "kernel": 5, **cfg_kw})
    p = st.init_params(T, S, D, cfg.norm_mode, seed, C, cfg.kernel)
    reg = Regressor.init(D, DT, seed + 1)
    X = rng.standard_normal((B, T, C))
    Y = rng.standard_normal((B, S, C))
    teacher = TeacherOutputs(rng.standard_normal((B, S, C)), rng.standard_normal((B, DT, C)))
    return cfg, p, reg, X, Y, teacher


def test_sup_loss_examples():
    y = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert dl.sup_loss(np.zeros_like(y), y) == 7.5
    assert dl.sup_loss(y, y) == 0.0
    a, b = np.random.default_rng(0).standard_normal((2, 4, 3))
    assert dl.sup_loss(a, b) == dl.sup_loss(b, a)
    with pytest.raises(ValueError):
        dl.sup_loss(np.zeros(3), np.zeros(4))


def test_self_distillation_zeroes_kd_terms():
    cfg, p, _, X, Y, _ = setup()
    out = st.forward(p, X)
    # identity regressor maps the student's own features onto themselves
    reg = Regressor(np.eye(D), np.zeros(D))
    teacher = TeacherOutputs(out.y_hat, out.h)
    bd = dl.total_loss(Y, out, teacher, reg, cfg)
    for k in ("scale_y", "scale_h", "period_y", "period_h"):
        assert abs(getattr(bd, k)) < 1e-12, k
    assert abs(bd.total - bd.sup) < 1e-12


def test_zero_weights_give_supervised_loss():
    cfg, p, reg, X, Y, teacher = setup(alpha=0.0, beta=0.0)
    out = st.forward(p, X)
    bd = dl.total_loss(Y, out, teacher, reg, cfg)
    assert bd.total == bd.sup == dl.sup_loss(out.y_hat, Y)
    assert bd.scale_y > 0 and bd.period_h > 0  # still reported


def test_breakdown_additivity_and_alpha_linearity():
    cfg, p, reg, X, Y, teacher = setup(seed=3)
    out = st.forward(p, X)
    bd = dl.total_loss(Y, out, teacher, reg, cfg)
    expect = bd.sup + cfg.alpha * (bd.scale_y + bd.period_y) + cfg.beta * (bd.scale_h + bd.period_h)
    assert abs(bd.total - expect) < 1e-12
    cfg2 = DistillConfig(**{**cfg.__dict__, "alpha": 2.5})
    bd2 = dl.total_loss(Y, out, teacher, reg, cfg2)
    assert bd2.total - bd.total == pytest.approx((2.5 - cfg.alpha) * (bd.scale_y + bd.period_y), abs=1e-12)
    assert all(v >= 0 for v in bd.as_dict().values())


@pytest.mark.parametrize(
    "flag, zeroed",
    [
        ("use_pred_level", ("scale_y", "period_y")),
        ("use_feat_level", ("scale_h", "period_h")),
        ("use_scale", ("scale_y", "scale_h")),
        ("use_period", ("period_y", "period_h")),
    ],
)
def test_ablation_flags_zero_terms(flag, zeroed):
    cfg, p, reg, X, Y, teacher = setup(seed=4, **{flag: False})
    bd = dl.total_loss(Y, st.forward(p, X), teacher, reg, cfg)
    for k in zeroed:
        assert getattr(bd, k) == 0.0
    expect = bd.sup + cfg.alpha * (bd.scale_y + bd.period_y) + cfg.beta * (bd.scale_h + bd.period_h)
    assert abs(bd.total - expect) < 1e-12


def test_no_sup_drops_supervised_term():
    cfg, p, reg, X, Y, teacher = setup(seed=5, use_sup=False)
    bd = dl.total_loss(Y, st.forward(p, X), teacher, reg, cfg)
    assert bd.sup > 0
    expect = cfg.alpha * (bd.scale_y + bd.period_y) + cfg.beta * (bd.scale_h + bd.period_h)
    assert abs(bd.total - expect) < 1e-12


def test_feature_terms_use_regressed_teacher_features():
    cfg, p, reg, X, Y, teacher = setup(seed=6, use_pred_level=False, use_period=False)
    out = st.forward(p, X)
    bd = dl.total_loss(Y, out, teacher, reg, cfg)
    from tsdistill.multiscale import scale_loss_and_grads

    ref, _, _ = scale_loss_and_grads(regressor_apply(reg, teacher.h_t), out.h, cfg.M, axis=1)
    assert bd.scale_h == pytest.approx(ref, abs=1e-14)


def test_misaligned_teacher_rejected():
    cfg, p, reg, X, Y, teacher = setup()
    short = TeacherOutputs(teacher.y_hat_t[:2], teacher.h_t[:2])
    with pytest.raises(DataError):
        dl.total_loss(Y, st.forward(p, X), short, reg, cfg)


def test_gradients_cover_student_and_regressor_only():
    cfg, p, reg, X, Y, teacher = setup()
    before = teacher.y_hat_t.copy(), teacher.h_t.copy()
    _, grads = dl.loss_and_grads(p, reg, X, Y, teacher, cfg)
    assert set(grads) == set(st.TENSOR_FIELDS[:6]) | {"W_r", "b_r"}
    np.testing.assert_array_equal(teacher.y_hat_t, before[0])
    np.testing.assert_array_equal(teacher.h_t, before[1])


def test_stop_gradient_freezes_regressor():
    cfg, p, reg, X, Y, teacher = setup(regressor_stop_grad=True)
    _, grads = dl.loss_and_grads(p, reg, X, Y, teacher, cfg)
    assert not grads["W_r"].any() and not grads["b_r"].any()
    cfg, p, reg, X, Y, teacher = setup()
    _, grads = dl.loss_and_grads(p, reg, X, Y, teacher, cfg)
    assert grads["W_r"].any()


@pytest.mark.parametrize(
    "kw",
    [
        {},
        {"norm_mode": "revin"},
        {"use_gt_pattern": True},
        {"amp_scale": "raw"},
        {"use_sup": False, "use_pred_level": False},
    ],
)
def test_total_gradient_finite_differences(kw):
    cfg = DistillConfig(alpha=1.0, beta=1.0, tau=0.5, M=2, D=8, T=16, S=8, **kw)
    worst, per = full_loss_gradcheck(cfg=cfg, seed=3)
    assert worst < 1e-4, per


def test_gt_pattern_examples():
    cfg = DistillConfig(M=2, tau=0.5)
    y = np.random.default_rng(7).standard_normal((2, 16, 2))
    assert dl.gt_pattern_loss(y, y, cfg) == 0.0
    a, b = np.full((16, 1), 1.0), np.full((16, 1), 3.5)
    assert dl.gt_pattern_loss(a, b, cfg) == pytest.approx(2.5**2, abs=1e-12)
    with pytest.raises(ValueError):
        dl.gt_pattern_loss(a, np.ones((8, 1)), cfg)


def test_gt_pattern_only_mode():
    # no supervised term and no teacher terms leaves exactly the ground-truth pattern loss
    cfg, p, reg, X, Y, teacher = setup(seed=8, use_gt_pattern=True, use_sup=False, alpha=0.0, beta=0.0)
    out = st.forward(p, X)
    bd = dl.total_loss(Y, out, teacher, reg, cfg)
    assert bd.total == pytest.approx(dl.gt_pattern_loss(out.y_hat, Y, cfg), abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        DistillConfig(alpha=-1)
    with pytest.raises(ValueError):
        DistillConfig(tau=0)
    with pytest.raises(ValueError):
        DistillConfig(M=-1)
    with pytest.raises(ValueError):
        DistillConfig(norm_mode="batch")
