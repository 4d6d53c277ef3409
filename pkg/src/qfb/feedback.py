"""Local feedback unitaries conditioned on the damping outcome.

A feedback scheme is a pair of SU(2) elements ``u, v`` in z-y-z Euler form.
Outcome ``j`` of the damping measurement triggers ``U_j``, with
``U_1 = u(x)u``, ``U_2 = u(x)v``, ``U_3 = v(x)u``, ``U_4 = v(x)v``.

The Euler matrices are written in the usual ``|0>, |1>`` single-qubit ordering.
:func:`feedback_unitaries` flips them into the ``|1>, |0>`` ordering used by the
4x4 state basis before taking tensor products.

The entry-wise closed forms below are likewise expressed in the ``|00>``-first
ordering and in terms of the coherence ``<00|rho_q|11>``; both functions convert
to the package basis before returning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import KrausSet, check_eta, check_q, kraus_sum, product_kraus
from .errors import DomainError
from .linalg import reverse_basis, tensor, validate_state

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EulerAngles:
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.alpha, self.beta, self.gamma)):
            raise DomainError("Euler angles must be finite")

    def canonical(self) -> "EulerAngles":
        """Angles reduced to [0, 2pi) for reporting.

        The SU(2) element may change sign; every map built from it is unchanged.
        """
        return EulerAngles(*(x % TWO_PI for x in (self.alpha, self.beta, self.gamma)))


def su2_from_euler(a: EulerAngles) -> np.ndarray:
    """``exp(-i alpha Z/2) exp(-i beta Y/2) exp(-i gamma Z/2)`` in the ``|0>, |1>`` ordering."""
    al, be, ga = a.alpha, a.beta, a.gamma
    c, s = math.cos(be / 2), math.sin(be / 2)
    return np.array(
        [
            [np.exp(-0.5j * (al + ga)) * c, -np.exp(-0.5j * (al - ga)) * s],
            [np.exp(0.5j * (al - ga)) * s, np.exp(0.5j * (al + ga)) * c],
        ]
    )


@dataclass(frozen=True)
class FeedbackScheme:
    u_params: EulerAngles = EulerAngles()
    v_params: EulerAngles = EulerAngles()

    @property
    def u(self) -> np.ndarray:
        return su2_from_euler(self.u_params)

    @property
    def v(self) -> np.ndarray:
        return su2_from_euler(self.v_params)

    @classmethod
    def from_angles(cls, alpha_u, beta_u, gamma_u, alpha_v, beta_v, gamma_v) -> "FeedbackScheme":
        return cls(EulerAngles(alpha_u, beta_u, gamma_u), EulerAngles(alpha_v, beta_v, gamma_v))

    def angles(self) -> tuple[float, ...]:
        u, v = self.u_params, self.v_params
        return (u.alpha, u.beta, u.gamma, v.alpha, v.beta, v.gamma)


@dataclass(frozen=True)
class AngleCombos:
    """Angle combinations the purity and its stationary points depend on."""

    xi: float
    theta: float
    phi: float
    zeta_u: float = 0.0
    xi_v: float = 0.0

    @classmethod
    def from_scheme(cls, s: FeedbackScheme) -> "AngleCombos":
        u, v = s.u_params, s.v_params
        return cls(
            xi=u.alpha - v.alpha,
            theta=u.beta + v.beta,
            phi=u.beta - v.beta,
            zeta_u=u.alpha + u.gamma,
            xi_v=v.alpha - v.gamma,
        )


@dataclass(frozen=True)
class RepeatConfig:
    n: int
    with_feedback: bool = False
    phase: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")


def feedback_unitaries(s: FeedbackScheme) -> np.ndarray:
    """``U_1..U_4`` as a (4, 4, 4) array in the package basis."""
    u = reverse_basis(s.u)
    v = reverse_basis(s.v)
    return np.stack([tensor(u, u), tensor(u, v), tensor(v, u), tensor(v, v)])


def feedback_ops(k: KrausSet, s: FeedbackScheme) -> np.ndarray:
    return feedback_unitaries(s) @ k.ops


def apply_feedback_channel(k: KrausSet, s: FeedbackScheme, rho) -> np.ndarray:
    """``rho -> sum_j (U_j K_j) rho (U_j K_j)^dagger``."""
    rho = validate_state(rho)
    return kraus_sum(feedback_ops(k, s), rho)


def optimal_scheme(phase_u: float = 0.0, phase_v: float = 0.0) -> FeedbackScheme:
    """Scheme with ``beta_u = 0``, ``beta_v = pi``.

    ``u = diag(e^{-i phase_u/2}, e^{i phase_u/2})`` and ``v`` is anti-diagonal
    with entries ``-e^{-i phase_v/2}`` and ``e^{i phase_v/2}``, where
    ``phase_u = alpha_u + gamma_u`` and ``phase_v = alpha_v - gamma_v``.
    """
    return FeedbackScheme(EulerAngles(phase_u, 0.0, 0.0), EulerAngles(phase_v, math.pi, 0.0))


# -- closed forms -------------------------------------------------------------


def _hermitian_from_upper(r: np.ndarray) -> np.ndarray:
    for i in range(4):
        r[i, i] = r[i, i].real
        for j in range(i):
            r[i, j] = np.conj(r[j, i])
    return r


def closed_form_rho_dprime_elements(eta: float, s: FeedbackScheme) -> np.ndarray:
    """Feedback-corrected damped Bell state, entry by entry.

    Entries (1,3), (3,3) and (3,4) repeat (1,2), (2,2) and (2,4); the lower
    triangle follows from Hermiticity.
    """
    eta = check_eta(eta)
    au, bu, gu, av, bv, gv = s.angles()
    cos, sin, exp = math.cos, math.sin, np.exp
    cbu, cbv, sbu, sbv = cos(bu), cos(bv), sin(bu), sin(bv)
    hu2, hv2 = sin(bu / 2) ** 2, sin(bv / 2) ** 2
    cu2, cv2 = cos(bu / 2) ** 2, cos(bv / 2) ** 2
    w = 1 + eta**2 - 2 * eta * cos(2 * gu)
    e = 1 - eta

    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = (
        e**2 * (1 + cbv) ** 2
        + (1 + cbu) ** 2
        + 8 * eta * e * cv2 * hu2
        + 4 * eta**2 * hu2**2
        + 4 * eta * (1 + cbu) * cos(2 * gu) * hu2
    ) / 8
    r[0, 1] = (
        exp(-1j * av) * e * sbv * (e * cbv + 1 - eta * cbu)
        + exp(-1j * au) * sbu * (e * (1 - eta * cbv) + 2j * eta * sin(2 * gu) + cbu * w)
    ) / 8
    r[0, 2] = r[0, 1]
    r[0, 3] = (
        exp(-2j * (au + gu))
        * (
            eta * (1 + cbu) ** 2
            + 4 * eta * exp(4j * gu) * hu2**2
            + 2 * exp(2j * gu) * (1 + eta**2) * (1 + cbu) * hu2
            + 2 * exp(2j * (au - av + gu)) * e**2 * (1 + cbv) * hv2
            - 2 * exp(1j * (au - av + 2 * gu)) * eta * e * sbu * sbv
        )
        / 8
    )
    r[1, 1] = (4 * e * eta * cu2 * cv2 + w * sbu**2 + 2 * e * (1 - eta * cbu + e * cbv) * hv2) / 8
    r[1, 2] = (w * sbu**2 - e * sbv * (2 * eta * cos(au - av) * sbu - e * sbv)) / 8
    r[1, 3] = (
        exp(-1j * au) * sbu * (e * (1 + eta * cbv) - cbu * w - 2j * eta * sin(2 * gu))
        + exp(-1j * av) * e * (1 + eta * cbu - e * cbv) * sbv
    ) / 8
    r[2, 2] = r[1, 1]
    r[2, 3] = r[1, 3]
    r[3, 3] = (
        eta**2 * (1 + cbu) ** 2
        + 4 * e**2 * hv2**2
        + 4 * hu2**2
        + 8 * e * eta * cu2 * hv2
        + 4 * eta * (1 + cbu) * cos(2 * gu) * hu2
    ) / 8
    return reverse_basis(_hermitian_from_upper(r))


def closed_form_rho_q_dprime_elements(eta: float, q: complex, s: FeedbackScheme) -> np.ndarray:
    """Feedback-corrected damped ``rho_q``, entry by entry.

    The expressions use the coherence ``<00|rho_q|11> = conj(q)/2``.
    """
    eta = check_eta(eta)
    qs = np.conj(check_q(q))
    au, bu, gu, av, bv, gv = s.angles()
    cos, sin, exp = math.cos, math.sin, np.exp
    cbu, cbv, sbu, sbv = cos(bu), cos(bv), sin(bu), sin(bv)
    hu2, hv2 = sin(bu / 2) ** 2, sin(bv / 2) ** 2
    cu2, cv2 = cos(bu / 2) ** 2, cos(bv / 2) ** 2
    qg = qs * exp(-2j * gu)
    re_q, im_q = qg.real, qg.imag
    w = 1 + eta**2 - 2 * eta * re_q
    e = 1 - eta

    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = (
        e**2 * cv2**2
        + eta**2 * hu2**2
        + 2 * eta * e * cv2 * hu2
        + cu2**2
        + eta * (1 + cbu) * re_q * hu2
    ) / 2
    r[0, 1] = (
        exp(-1j * av) * e * sbv * (e * cbv + 1 - eta * cbu)
        + exp(-1j * au)
        * sbu
        * (e * (1 - eta * cbv) + (1 + eta**2) * cbu - 2 * eta * cbu * re_q - 2j * eta * im_q)
    ) / 8
    r[0, 2] = r[0, 1]
    r[0, 3] = (
        exp(-2j * (au + gu))
        * (
            eta * qs * (1 + cbu) ** 2
            + 4 * exp(2j * gu) * (np.conj(qs) * eta * exp(2j * gu) * hu2 + (1 + eta**2) * cu2) * hu2
            + 2 * exp(2j * (au - av + gu)) * e**2 * (1 + cbv) * hv2
            - 2 * exp(1j * (au - av + 2 * gu)) * eta * e * sbu * sbv
        )
        / 8
    )
    r[1, 1] = (4 * e * eta * cu2 * cv2 + w * sbu**2 + 2 * e * (1 - eta * cbu + e * cbv) * hv2) / 8
    r[1, 2] = (w * sbu**2 - e * sbv * (2 * eta * cos(au - av) * sbu - e * sbv)) / 8
    r[1, 3] = (
        exp(-1j * au) * sbu * (e * (1 + eta * cbv) - w * cbu + 2j * eta * im_q)
        + exp(-1j * av) * e * (1 + eta * cbu - e * cbv) * sbv
    ) / 8
    r[2, 2] = r[1, 1]
    r[2, 3] = r[1, 3]
    r[3, 3] = (
        eta**2 * (1 + cbu) ** 2
        + 4 * e**2 * hv2**2
        + 4 * hu2**2
        + 8 * e * eta * cu2 * hv2
        + 2 * eta * (1 - cbu**2) * re_q
    ) / 8
    return reverse_basis(_hermitian_from_upper(r))


def closed_form_rho_dprime_optimal(eta: float, phase_u: float = 0.0, q: complex = 1.0) -> np.ndarray:
    """Output of the optimal scheme on ``rho_q``: coherence ``q eta e^{2i phase_u}/2``."""
    return closed_form_repeat_state(eta, 1, True, phase_u, q)


def closed_form_repeat_state(
    eta: float, n: int, with_feedback: bool, phase: float = 0.0, q: complex = 1.0
) -> np.ndarray:
    """``n`` applications of the bare map, or of the optimal feedback map, to ``rho_q``."""
    eta = check_eta(eta)
    q = check_q(q)
    RepeatConfig(n)
    x = eta**n
    r = np.zeros((4, 4), dtype=complex)
    if with_feedback:
        r[0, 0] = r[3, 3] = 0.5
        r[0, 3] = q * x * np.exp(2j * n * phase) / 2
    else:
        r[0, 0] = x * x / 2
        r[1, 1] = r[2, 2] = x * (1 - x) / 2
        r[3, 3] = 1 - x + x * x / 2
        r[0, 3] = q * x / 2
    r[3, 0] = np.conj(r[0, 3])
    return r


def repeat_map(rho0, eta: float, cfg: RepeatConfig) -> np.ndarray:
    """Compose the map ``cfg.n`` times, with the optimal scheme at ``cfg.phase`` if requested."""
    k = product_kraus(eta)
    rho = validate_state(rho0)
    ops = feedback_ops(k, optimal_scheme(cfg.phase)) if cfg.with_feedback else k.ops
    for _ in range(cfg.n):
        rho = kraus_sum(ops, validate_state(rho))
    return rho


def closed_form_repeat_concurrence(eta: float, n: int, with_feedback: bool) -> float:
    """Concurrence after ``n`` rounds starting from the Bell state.

    With feedback this is ``eta**n``.  Without it the nested-radical expression
    below reduces to ``eta**(2n)`` on [0, 1].
    """
    eta = check_eta(eta)
    RepeatConfig(n)
    x = eta**n
    if with_feedback:
        return x
    s = (x - 2) * x + 2
    root = math.sqrt(s)
    # s + 1 - 2 sqrt(s) cancels catastrophically near x = 1; use the identical
    # form ((s - 1) / (sqrt(s) + 1))**2 with s - 1 = (1 - x)**2
    minus = ((1 - x) ** 2 / (root + 1)) ** 2
    # the bracket is non-negative on [0, 1]; max() also turns -0.0 into 0.0
    return max(0.0, x / 2 * (math.sqrt(s + 1 + 2 * root) - math.sqrt(minus) - 2 * (1 - x)))
