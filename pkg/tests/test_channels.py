import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfb.channels import (
    KrausSet,
    RemixParams,
    apply_channel,
    bell_state,
    closed_form_rho_prime,
    closed_form_rho_q_prime,
    completeness_holds,
    is_canonical,
    local_kraus,
    product_kraus,
    remix_kraus,
    rho_q,
)
from qfb.errors import DomainError, InvalidState
from qfb.linalg import eigenvalues4
from qfb.measures import concurrence, subsystem_purity
from qfb.verify import random_q, random_remix, random_state

unit = st.floats(0.0, 1.0)
angle = st.floats(0.0, 2 * math.pi)


def ket(bits: str) -> np.ndarray:
    # package basis order: |11>, |10>, |01>, |00>
    v = np.zeros(4)
    v[["11", "10", "01", "00"].index(bits)] = 1.0
    return v


def test_local_kraus_identity_channel():
    e1, e2 = local_kraus(1.0)
    assert np.array_equal(e1, np.eye(2))
    assert np.array_equal(e2, np.zeros((2, 2)))


def test_local_kraus_full_decay():
    e1, e2 = local_kraus(0.0)
    # ordering |1>, |0>: |0><0| is the lower-right entry, |0><1| the lower-left
    assert np.array_equal(e1, [[0, 0], [0, 1]])
    assert np.array_equal(e2, [[0, 0], [1, 0]])


def test_local_kraus_quarter():
    e1, e2 = local_kraus(0.25)
    assert np.allclose(e1, np.diag([0.5, 1.0]))
    assert np.count_nonzero(e2) == 1 and math.isclose(e2[1, 0].real, math.sqrt(0.75))


@given(unit)
def test_local_kraus_complete(eta):
    e1, e2 = local_kraus(eta)
    total = e1.conj().T @ e1 + e2.conj().T @ e2
    assert np.max(np.abs(total - np.eye(2))) < 1e-14


@pytest.mark.parametrize("eta", [-0.1, 1.0001, math.nan])
def test_eta_domain(eta):
    with pytest.raises(DomainError):
        local_kraus(eta)


def test_product_kraus_identity_channel():
    k = product_kraus(1.0)
    assert np.array_equal(k[0], np.eye(4))
    assert all(not np.any(k[j]) for j in (1, 2, 3))


def test_product_kraus_completeness_grid():
    for eta in np.linspace(0, 1, 101):
        assert product_kraus(eta).completeness_residual() < 1e-13


def test_product_kraus_double_decay_operator():
    k4 = product_kraus(0.5)[3]
    assert np.count_nonzero(k4) == 1
    assert math.isclose(abs(ket("00") @ k4 @ ket("11")), 0.5)


def test_product_kraus_factors_by_hand():
    eta = 0.36
    a, b = math.sqrt(eta), math.sqrt(1 - eta)
    k = product_kraus(eta)
    assert np.allclose(k[0], np.diag([a * a, a, a, 1.0]))
    # K2 = E1 (x) E2 lowers qubit B only
    assert math.isclose((ket("10") @ k[1] @ ket("11")).real, a * b)
    assert math.isclose((ket("00") @ k[1] @ ket("01")).real, b)
    assert np.count_nonzero(np.round(k[1], 15)) == 2


def test_kraus_set_shape_checked():
    with pytest.raises(ValueError):
        KrausSet(np.zeros((3, 4, 4)))


def test_apply_channel_identity_and_full_decay():
    phi = bell_state()
    assert np.allclose(apply_channel(product_kraus(1.0), phi), phi, atol=1e-15)
    out = apply_channel(product_kraus(0.0), phi)
    assert np.allclose(out, np.outer(ket("00"), ket("00")), atol=1e-15)


def test_apply_channel_matches_closed_form_grid():
    for eta in np.linspace(0, 1, 101):
        out = apply_channel(product_kraus(eta), bell_state())
        assert np.max(np.abs(out - closed_form_rho_prime(eta))) < 1e-12


def test_closed_form_rho_prime_entries():
    eta = 0.3
    r = closed_form_rho_prime(eta)
    assert math.isclose(r[0, 0].real, eta**2 / 2)
    assert math.isclose(r[1, 1].real, eta * (1 - eta) / 2)
    assert math.isclose(r[3, 3].real, (2 + eta**2 - 2 * eta) / 2)
    assert math.isclose(r[0, 3].real, eta / 2)


def test_apply_channel_rejects_non_states():
    with pytest.raises(InvalidState):
        apply_channel(product_kraus(0.5), np.diag([1.0, 1.0, 0.0, -1.0]))


def test_apply_channel_cptp_randomised():
    rng = np.random.default_rng(7)
    for eta in np.linspace(0, 1, 21):
        k = product_kraus(eta)
        for _ in range(50):
            out = apply_channel(k, random_state(rng, rank=int(rng.integers(1, 5))))
            assert abs(np.trace(out) - 1) < 1e-12
            assert np.max(np.abs(out - out.conj().T)) < 1e-12
            assert np.min(np.linalg.eigvalsh(out)) >= -1e-10


def test_bell_state_properties():
    phi = bell_state()
    assert math.isclose(np.trace(phi).real, 1.0)
    assert math.isclose(concurrence(phi).value, 1.0, abs_tol=1e-12)
    assert math.isclose(subsystem_purity(phi), 0.5, abs_tol=1e-15)
    psi = (ket("00") + ket("11")) / math.sqrt(2)
    assert np.allclose(phi, np.outer(psi, psi))


def test_rho_q_examples():
    assert np.array_equal(rho_q(1.0), bell_state())
    mix = rho_q(0.0)
    assert np.array_equal(mix, np.diag([0.5, 0, 0, 0.5]))
    assert concurrence(mix).value < 1e-12
    vals = eigenvalues4(rho_q(0.6j)).values
    assert np.allclose(vals, [0.8, 0.2, 0.0, 0.0], atol=1e-14)


def test_rho_q_domain():
    with pytest.raises(DomainError):
        rho_q(0.8 + 0.7j)


def test_closed_form_rho_q_prime_consistency():
    for eta in np.linspace(0, 1, 11):
        assert np.array_equal(closed_form_rho_q_prime(eta, 1.0), closed_form_rho_prime(eta))
    assert np.array_equal(closed_form_rho_prime(1.0), bell_state())


def test_closed_form_rho_q_prime_matches_simulation(rng):
    for _ in range(200):
        eta, q = rng.uniform(), random_q(rng)
        out = apply_channel(product_kraus(eta), rho_q(q))
        assert np.max(np.abs(out - closed_form_rho_q_prime(eta, q))) < 1e-12


def test_remix_identity_leaves_set_unchanged():
    k = product_kraus(0.4)
    assert np.allclose(remix_kraus(k, RemixParams()).ops, k.ops, atol=0)


def test_remix_rows_written_out():
    # each remixed operator spelled out term by term from V_A (x) V_B
    rng = np.random.default_rng(3)
    p = random_remix(rng)
    a, b, ap, bp = p.alpha, p.beta, p.alpha_p, p.beta_p
    c = np.conj
    K = product_kraus(0.55).ops
    expected = [
        a * ap * K[0] + a * bp * K[1] + ap * b * K[2] + b * bp * K[3],
        -a * c(bp) * K[0] + a * c(ap) * K[1] - b * c(bp) * K[2] + b * c(ap) * K[3],
        -ap * c(b) * K[0] - bp * c(b) * K[1] + ap * c(a) * K[2] + bp * c(a) * K[3],
        c(b) * c(bp) * K[0] - c(b) * c(ap) * K[1] - c(a) * c(bp) * K[2] + c(a) * c(ap) * K[3],
    ]
    got = remix_kraus(product_kraus(0.55), p).ops
    for i in range(4):
        assert np.max(np.abs(got[i] - expected[i])) < 1e-15


def test_remix_params_unit_norm():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = random_remix(rng)
        assert math.isclose(abs(p.alpha) ** 2 + abs(p.beta) ** 2, 1.0, abs_tol=1e-15)
        assert math.isclose(abs(p.alpha_p) ** 2 + abs(p.beta_p) ** 2, 1.0, abs_tol=1e-15)
        assert math.isclose(p.theta_ab, p.theta_alpha - p.theta_beta)
    with pytest.raises(DomainError):
        RemixParams(r_alpha=1.5)


@given(unit, unit, angle, angle, unit, angle, angle)
def test_remix_preserves_completeness(eta, r, ta, tb, rp, tap, tbp):
    kt = remix_kraus(product_kraus(eta), RemixParams(r, ta, tb, rp, tap, tbp))
    assert completeness_holds(kt)


def test_remix_is_the_same_channel():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        k = product_kraus(rng.uniform())
        rho = random_state(rng)
        out = apply_channel(remix_kraus(k, random_remix(rng)), rho)
        assert np.max(np.abs(out - apply_channel(k, rho))) < 1e-12


def gram_by_hand(ops):
    return np.array([[np.trace(a.conj().T @ b) for b in ops] for a in ops])


def test_canonical_product_set():
    assert is_canonical(product_kraus(0.5))
    g = gram_by_hand(product_kraus(0.5).ops)
    assert np.allclose(np.diag(g), [2.25, 0.75, 0.75, 0.25])


def test_generic_remix_is_not_canonical():
    # the product Gram matrix is not proportional to the identity for eta > 0,
    # so a generic unitary mix produces off-diagonal overlaps
    kt = remix_kraus(product_kraus(0.5), RemixParams(0.6, 0.3, 1.1, 0.8, 0.2, 0.5))
    g = gram_by_hand(kt.ops)
    off = np.max(np.abs(g - np.diag(np.diag(g))))
    assert off > 0.1
    assert not is_canonical(kt)
    # at eta = 0 every operator has unit weight and any mix stays canonical
    assert is_canonical(remix_kraus(product_kraus(0.0), RemixParams(0.6, 0.3, 1.1, 0.8, 0.2, 0.5)))


def test_hand_built_combination_follows_gram_oracle():
    k = product_kraus(0.5).ops
    alt = KrausSet(np.stack([k[0] + k[1], k[0] - k[1], math.sqrt(2) * k[2], math.sqrt(2) * k[3]]) / math.sqrt(2))
    assert completeness_holds(alt)
    g = gram_by_hand(alt.ops)
    off = np.max(np.abs(g - np.diag(np.diag(g))))
    assert is_canonical(alt) == (off <= 1e-12)
    assert not is_canonical(alt)


def test_damping_semigroup_on_rho_q_family():
    rng = np.random.default_rng(13)
    for _ in range(200):
        e1, e2, q = rng.uniform(), rng.uniform(), random_q(rng)
        start = apply_channel(product_kraus(rng.uniform()), rho_q(q))
        two = apply_channel(product_kraus(e1), apply_channel(product_kraus(e2), start))
        assert np.max(np.abs(two - apply_channel(product_kraus(e1 * e2), start))) < 1e-12
