"""Subsystem purity and Wootters concurrence, plus closed-form purity expressions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import RemixParams, check_eta
from .errors import InvalidState, NonConvergence, NotXState
from .feedback import AngleCombos, EulerAngles
from .linalg import eigenvalues4_batch, partial_trace_B, validate_state

# eigenvalues of rho * rho_tilde are real and non-negative for a state; larger
# imaginary parts or negative real parts than this signal a bad input
SPECTRUM_TOL = 1e-9
X_STATE_TOL = 1e-12
# eigenvalues of rho * rho_tilde below this are recomputed without a square root
REFINE_BELOW = 1e-8

_SY = np.array([[0, -1j], [1j, 0]])
SIGMA_YY = np.kron(_SY, _SY)


@dataclass(frozen=True)
class ConcurrenceBreakdown:
    lambdas: np.ndarray
    value: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class PurityBreakdown:
    p1: float
    p2: complex
    value: float

    def __float__(self):
        return self.value


def subsystem_purity(rho) -> float:
    """``Tr(rho_A^2)``; lies in [1/2, 1] for two-qubit states."""
    rho = validate_state(rho)
    return float(subsystem_purity_batch(rho[None])[0])


def subsystem_purity_batch(rhos: np.ndarray) -> np.ndarray:
    ra = partial_trace_B(rhos)
    return np.einsum("...ij,...ji->...", ra, ra).real


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """``(sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y)``."""
    return SIGMA_YY @ np.conj(rho) @ SIGMA_YY


def concurrence(rho) -> ConcurrenceBreakdown:
    rho = validate_state(rho)
    lam = _lambdas(rho[None])[0]
    return ConcurrenceBreakdown(lambdas=lam, value=_value(lam[None])[0])


def concurrence_batch(rhos: np.ndarray) -> np.ndarray:
    """Concurrence of a (B, 4, 4) stack of states, without state validation."""
    return _value(_lambdas(np.asarray(rhos, dtype=complex)))


def _lambdas(rhos: np.ndarray) -> np.ndarray:
    vals, _, ok = eigenvalues4_batch(rhos @ spin_flip(rhos))
    if not ok.all():
        raise NonConvergence(f"{np.count_nonzero(~ok)} eigenvalue problem(s) did not converge")
    bad_im = np.abs(vals.imag) >= SPECTRUM_TOL
    bad_re = vals.real <= -SPECTRUM_TOL
    if bad_im.any() or bad_re.any():
        worst = vals[np.nonzero((bad_im | bad_re).any(axis=1))[0][0]]
        raise InvalidState(f"spin-flipped product has spectrum {worst}, not real non-negative")
    lam = np.sqrt(np.abs(vals.real))
    # sqrt turns an absolute eigenvalue error of ~1e-16 into ~1e-8 when an
    # eigenvalue is near zero (nearly pure states); redo those matrices through
    # an embedding whose spectrum is +-lambda, so nothing gets square-rooted
    near = np.abs(vals).min(axis=-1) < REFINE_BELOW
    if near.any():
        lam[near] = _lambdas_embedded(rhos[near])
    return -np.sort(-lam, axis=-1)


def _lambdas_embedded(rhos: np.ndarray) -> np.ndarray:
    """lambdas as the spectrum of ``[[0, A], [A*, 0]]`` with ``A = rho sigma_yy``.

    Its square is ``diag(A A*, A* A)`` and ``A A* = rho rho_tilde``, so the
    eigenvalues come in pairs ``+-lambda_i``.
    """
    a = rhos @ SIGMA_YY
    n = np.zeros(rhos.shape[:-2] + (8, 8), dtype=complex)
    n[..., :4, 4:] = a
    n[..., 4:, :4] = np.conj(a)
    vals, _, ok = eigenvalues4_batch(n)
    if not ok.all():
        raise NonConvergence(f"{np.count_nonzero(~ok)} eigenvalue problem(s) did not converge")
    mags = -np.sort(-np.abs(vals.real), axis=-1)
    return mags[..., ::2]


def _value(lam: np.ndarray) -> np.ndarray:
    c = lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3]
    return np.clip(c, 0.0, 1.0)


def concurrence_x_state(rho) -> float:
    """Closed-form concurrence for states supported on the diagonal and anti-diagonal."""
    rho = np.asarray(rho, dtype=complex)
    mask = np.eye(4, dtype=bool) | np.eye(4, dtype=bool)[::-1]
    if np.max(np.abs(rho[~mask])) > X_STATE_TOL:
        raise NotXState("matrix has entries off the diagonal and anti-diagonal")
    d = rho.diagonal().real
    c1 = abs(rho[0, 3]) - math.sqrt(max(d[1] * d[2], 0.0))
    c2 = abs(rho[1, 2]) - math.sqrt(max(d[0] * d[3], 0.0))
    return 2.0 * max(0.0, c1, c2)


def purity_closed_form_nofb(eta: float) -> float:
    """Purity of the damped Bell state, ``(2 - 2 eta + eta^2)/2``."""
    eta = check_eta(eta)
    return 0.5 * (2 - 2 * eta + eta**2)


def purity_closed_form_fb(eta: float, c: AngleCombos) -> float:
    """Purity after feedback on the damped Bell state; depends on xi, theta, phi only."""
    eta = check_eta(eta)
    bracket = (1 - math.cos(c.xi)) * math.cos(c.theta) + (1 + math.cos(c.xi)) * math.cos(c.phi)
    return 0.25 * (3 - eta * (2 - eta) + 0.5 * (1 - eta) ** 2 * bracket)


def purity_closed_form_remix(
    eta: float, u: EulerAngles, v: EulerAngles, p: RemixParams
) -> PurityBreakdown:
    """Purity after feedback with a remixed Kraus set: ``(4 + P1^2 + |P2|^2)/8``.

    Only ``alpha`` and ``beta`` of the qubit-A mixing factor enter.
    """
    eta = check_eta(eta)
    au, bu, gu = u.alpha, u.beta, u.gamma
    av, bv, gv = v.alpha, v.beta, v.gamma
    ab = p.alpha * np.conj(p.beta)
    ab_c = np.conj(ab)
    k = math.sqrt((1 - eta) * eta)
    p1 = (
        (1 - eta) * (math.cos(bu) + math.cos(bv))
        + 2 * k * math.sin(bu) * (math.sin(gu) * ab.imag - math.cos(gu) * ab.real)
        - 2 * k * math.sin(bv) * (math.sin(gv) * ab.imag - math.cos(gv) * ab.real)
    )
    p2 = (
        (1 - eta) * math.sin(bv)
        + (1 - eta) * np.exp(-1j * (au - av)) * math.sin(bu)
        - ab * k * (1 - math.cos(bu)) * np.exp(-1j * (au - av - gu))
        + ab_c * k * (1 + math.cos(bu)) * np.exp(-1j * (au - av + gu))
        + ab * k * (1 - math.cos(bv)) * np.exp(1j * gv)
        - ab_c * k * (1 + math.cos(bv)) * np.exp(-1j * gv)
    )
    return PurityBreakdown(p1=float(p1), p2=complex(p2), value=float((4 + p1**2 + abs(p2) ** 2) / 8))


def concurrence_rho_prime_radical(eta: float) -> float:
    """``eta^2 sqrt(2 + eta^2 - 2 eta) - eta^2 (1 - eta^2)/2``.

    A closed form circulated for the damped Bell state.  It does not agree with
    the Wootters value ``eta^2`` (0.1858 versus 0.25 at ``eta = 0.5``) and is
    kept only so the verification report can flag the mismatch.
    """
    eta = check_eta(eta)
    return eta**2 * math.sqrt(2 + eta**2 - 2 * eta) - 0.5 * eta**2 * (1 - eta**2)
