import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfb.channels import RemixParams, bell_state, product_kraus, remix_kraus, rho_q
from qfb.errors import DomainError
from qfb.feedback import AngleCombos, EulerAngles, FeedbackScheme, apply_feedback_channel
from qfb.measures import concurrence_batch, subsystem_purity_batch
from qfb.optimize import (
    NO_IMPROVEMENT_SETS,
    OPTIMAL_SETS,
    SweepConfig,
    angle_grid,
    canonical_states,
    classify_member,
    classify_stationary_sets,
    unit_grid,
    refine,
    remix_concurrence,
    remix_states,
    stationary_residuals,
    sweep_canonical,
    sweep_remix,
)

free = st.floats(-4 * math.pi, 4 * math.pi, allow_nan=False)


def test_default_grid_counts():
    assert len(unit_grid()) == 11 and unit_grid()[3] == 0.3
    g = angle_grid()
    assert len(g) == 61 and g[0] == 0.0 and math.isclose(g[-1], 2 * math.pi)
    assert math.isclose(g[1], math.pi / 30)


def test_residual_examples():
    assert stationary_residuals(AngleCombos(1.234, math.pi, -math.pi)) == (0.0, 0.0, 0.0)
    assert stationary_residuals(AngleCombos(0.0, 0.0, 0.0)) == (0.0, 0.0, 0.0)
    r = stationary_residuals(AngleCombos(math.pi / 2, math.pi / 2, 0.0))
    assert r == (-1.0, -1.0, 0.0)


@given(free)
def test_residuals_vanish_exactly_on_both_families(x):
    for fixed in NO_IMPROVEMENT_SETS + OPTIMAL_SETS:
        (name,) = {"xi", "theta", "phi"} - set(fixed)
        assert stationary_residuals(AngleCombos(**{**fixed, name: x})) == (0.0, 0.0, 0.0)


def test_residuals_match_finite_difference_gradient(rng):
    from qfb.measures import purity_closed_form_fb

    for _ in range(50):
        eta = rng.uniform(0, 0.9)
        xi, th, ph = rng.uniform(-3, 3, 3)
        h = 1e-6
        p = lambda a, b, c: purity_closed_form_fb(eta, AngleCombos(a, b, c))  # noqa: E731
        grad = np.array(
            [
                (p(xi + h, th, ph) - p(xi - h, th, ph)) / (2 * h),
                (p(xi, th + h, ph) - p(xi, th - h, ph)) / (2 * h),
                (p(xi, th, ph + h) - p(xi, th, ph - h)) / (2 * h),
            ]
        )
        # each partial derivative is a fixed multiple of one residual, so the
        # residual zero set is exactly the stationary set
        scale = (1 - eta) ** 2 / 8
        r1, r2, r3 = stationary_residuals(AngleCombos(xi, th, ph))
        assert np.allclose(grad, [scale * r2, scale * r1, -scale * r3], atol=1e-7)


def test_classify_examples():
    assert classify_member({"theta": 0.0, "xi": math.pi}).family == "no-improvement"
    member = classify_member({"theta": math.pi, "phi": math.pi})
    assert member.family == "optimal"
    assert np.allclose(member.purities, 0.5, atol=1e-15)
    assert classify_member({"theta": -math.pi, "phi": -math.pi}).family == "optimal"
    assert classify_member({"theta": 1.0, "phi": 0.5}).family == "other"


def test_classify_families():
    fam = classify_stationary_sets()
    assert len(fam["no-improvement"]) == 4 and len(fam["optimal"]) == 4
    assert all(m.family == "no-improvement" and m.residual == 0.0 for m in fam["no-improvement"])
    assert all(m.family == "optimal" and m.residual == 0.0 for m in fam["optimal"])


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(eta_grid=())
    with pytest.raises(DomainError):
        SweepConfig(eta_grid=(1.5,))
    with pytest.raises(ValueError):
        SweepConfig(objective="fidelity")
    with pytest.raises(ValueError):
        SweepConfig(workers=0)
    with pytest.raises(ValueError):
        sweep_remix(SweepConfig(fixed=False))


def test_batched_states_match_scalar_simulation(rng):
    for _ in range(30):
        eta, r, th, xv = rng.uniform(), rng.uniform(), *rng.uniform(0, 2 * math.pi, 2)
        zeta = math.pi + xv - 2 * th
        s = FeedbackScheme(EulerAngles(zeta, 0.0, 0.0), EulerAngles(xv, math.pi, 0.0))
        k = remix_kraus(product_kraus(eta), RemixParams(r, th, 0.0))
        q = rng.uniform()
        want = apply_feedback_channel(k, s, rho_q(q))
        assert np.allclose(remix_states(eta, q, r, th, xv)[0], want, atol=1e-14)
        bu, bv, xi, gu = rng.uniform(0, 2 * math.pi, 4)
        s = FeedbackScheme(EulerAngles(xi, bu, gu), EulerAngles(0.0, bv, 0.0))
        want = apply_feedback_channel(product_kraus(eta), s, bell_state())
        assert np.allclose(canonical_states(eta, 1.0, bu, bv, xi, gu)[0], want, atol=1e-14)


def test_remix_mixing_rejects_bad_radius():
    with pytest.raises(DomainError):
        remix_concurrence(0.5, 1.2, 0.0, 0.0)


def test_canonical_sweep_examples():
    res = sweep_canonical(SweepConfig(eta_grid=(0.7, 1.0), phase_grid_size=5))
    b07 = res.best_for(0.7)
    assert abs(b07.value - 0.7) < 1e-9
    bu, bv = b07.params[0], b07.params[1]
    assert math.isclose(bu + bv, math.pi, abs_tol=1e-12) and math.isclose(bu - bv, -math.pi, abs_tol=1e-12)
    assert abs(res.best_for(1.0).value - 1.0) < 1e-9
    assert np.all(res.values[res.keys[:, 0] == 0.7] <= 0.7 + 1e-9)


def test_canonical_sweep_purity_minimum():
    res = sweep_canonical(SweepConfig(eta_grid=(0.4,), objective="purity", angle_grid_size=31, phase_grid_size=3))
    assert abs(res.best[0].value - 0.5) < 1e-12
    assert np.all(res.values >= 0.5 - 1e-10)


SMALL = dict(angle_grid_size=13, r_alpha_grid=tuple(unit_grid(6)))


def test_remix_sweep_small_grid():
    etas = (0.0, 0.3, 0.8, 1.0)
    res = sweep_remix(SweepConfig(eta_grid=etas, **SMALL))
    assert len(res) == len(etas) * 6 * 13 * 13
    assert np.all(np.abs(res.values[res.keys[:, 0] == 0.0]) < 1e-12)
    for b in res.best:
        assert abs(b.value - b.key[0]) < 1e-9
        if b.key[0] > 0:
            assert 1.0 in b.tied_values(0)
        # dominance: nothing beats eta
        assert np.all(res.values[res.keys[:, 0] == b.key[0]] <= b.key[0] + 1e-9)


def test_remix_sweep_with_q_grid():
    qs = (0.0, 0.4, 1.0)
    res = sweep_remix(SweepConfig(eta_grid=(0.5, 0.9), q_grid=qs, **SMALL))
    assert res.key_names == ("eta", "q_abs")
    for b in res.best:
        eta, qa = b.key
        assert abs(b.value - qa * eta) < 1e-9


def test_tie_break_is_lexicographic():
    res = sweep_remix(SweepConfig(eta_grid=(0.6,), **SMALL))
    b = res.best[0]
    tied = sorted(map(tuple, b.tied_params))
    assert b.params == tied[0]
    assert b.tie_count == len(tied) > 1


def test_sweep_is_independent_of_worker_count():
    cfg = dict(eta_grid=(0.2, 0.5, 0.9), q_grid=(0.5, 1.0), **SMALL)
    one = sweep_remix(SweepConfig(workers=1, **cfg))
    three = sweep_remix(SweepConfig(workers=3, **cfg))
    assert np.array_equal(one.values, three.values)
    assert np.array_equal(one.params, three.params) and np.array_equal(one.keys, three.keys)
    assert [(b.key, b.params, b.value, b.tie_count) for b in one.best] == [
        (b.key, b.params, b.value, b.tie_count) for b in three.best
    ]


def test_argmax_points_have_minimal_purity():
    res = sweep_remix(SweepConfig(eta_grid=(0.3, 0.7), **SMALL))
    for b in res.best:
        p = b.tied_params
        states = remix_states(b.key[0], 1.0, p[:, 0], p[:, 1], p[:, 2])
        assert np.all(np.abs(subsystem_purity_batch(states) - 0.5) < 1e-9)


def test_selection_mask():
    res = sweep_remix(SweepConfig(eta_grid=(0.5,), **SMALL))
    mask = res.select(theta_ab=math.pi / 2, xi_v=math.pi / 3)
    assert mask.sum() == 6
    assert np.allclose(res.params[mask][:, 1], math.pi / 2)


def test_refine_reaches_known_optimum():
    res = sweep_remix(SweepConfig(eta_grid=(0.7,), angle_grid_size=7, r_alpha_grid=(0.5, 0.8)))
    start = res.best[0].params
    bounds = [(0.0, 1.0), (0.0, 2 * math.pi), (0.0, 2 * math.pi)]
    x, val, trace = refine(lambda p: remix_concurrence(0.7, *p), start, 0.1, 1e-10, bounds)
    assert abs(val - 0.7) < 1e-8
    assert val >= res.best[0].value
    assert all(b >= a for a, b in zip(trace, trace[1:]))


def test_refine_from_perturbed_canonical_point():
    def f(x):
        return float(concurrence_batch(canonical_states(0.7, 1.0, x[0], x[1], 0.0, 0.0))[0])

    x, val, trace = refine(f, [0.3, 2.5], 0.1, 1e-10)
    assert abs(val - 0.7) < 1e-8
    assert trace[0] == f([0.3, 2.5])
    assert all(b > a for a, b in zip(trace, trace[1:]))


def test_refine_at_optimum_returns_start():
    def f(x):
        return float(concurrence_batch(canonical_states(0.7, 1.0, x[0], x[1], 0.0, 0.0))[0])

    start = [0.0, math.pi]
    x, val, trace = refine(f, start)
    assert np.array_equal(x, start)
    assert val == f(start) and len(trace) == 1


def test_refine_on_smooth_quadratic():
    x, val, _ = refine(lambda p: -((p[0] - 0.3) ** 2) - (p[1] + 1.2) ** 2, [2.0, 2.0], 0.5, 1e-12)
    assert np.allclose(x, [0.3, -1.2], atol=1e-6)
    assert val <= 0 and val > -1e-11
