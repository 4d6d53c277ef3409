"""Local amplitude damping on two qubits, Kraus sets and their unitary remixing.

States and operators are 4x4 arrays in the ``|11>, |10>, |01>, |00>`` basis
(see :mod:`qfb.linalg`).  The damping parameter ``eta`` is the survival
amplitude squared: ``eta = 1`` is the identity channel, ``eta = 0`` sends every
excitation to the ground state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import tensor, validate_state

KRAUS_TOL = 1e-12


def check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 <= eta <= 1.0):
        raise DomainError(f"eta must lie in [0, 1], got {eta}")
    return eta


def check_q(q: complex) -> complex:
    q = complex(q)
    if abs(q) > 1.0 + 1e-15:
        raise DomainError(f"|q| must not exceed 1, got {abs(q)}")
    return q


@dataclass(frozen=True)
class KrausSet:
    """Four 4x4 Kraus operators, stored as a (4, 4, 4) array."""

    ops: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=complex)
        if ops.shape != (4, 4, 4):
            raise ValueError(f"expected four 4x4 operators, got shape {ops.shape}")
        object.__setattr__(self, "ops", ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, i):
        return self.ops[i]

    def completeness_residual(self) -> float:
        total = np.einsum("jba,jbc->ac", self.ops.conj(), self.ops)
        return float(np.max(np.abs(total - np.eye(4))))

    def gram(self) -> np.ndarray:
        """``G[i, j] = Tr(K_i^dagger K_j)``."""
        return np.einsum("iba,jba->ij", self.ops.conj(), self.ops)


@dataclass(frozen=True)
class RemixParams:
    """Polar parametrisation of the two SU(2) factors of a Kraus remixing.

    ``alpha = r_alpha exp(i theta_alpha)``, ``beta = sqrt(1 - r_alpha**2)
    exp(i theta_beta)`` and likewise for the primed (qubit B) factor, so the
    unit-norm constraint holds by construction.
    """

    r_alpha: float = 1.0
    theta_alpha: float = 0.0
    theta_beta: float = 0.0
    r_alpha_p: float = 1.0
    theta_alpha_p: float = 0.0
    theta_beta_p: float = 0.0

    def __post_init__(self):
        for name in ("r_alpha", "r_alpha_p"):
            r = getattr(self, name)
            if not (0.0 <= r <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {r}")

    @property
    def alpha(self) -> complex:
        return self.r_alpha * np.exp(1j * self.theta_alpha)

    @property
    def beta(self) -> complex:
        return math.sqrt(1.0 - self.r_alpha**2) * np.exp(1j * self.theta_beta)

    @property
    def alpha_p(self) -> complex:
        return self.r_alpha_p * np.exp(1j * self.theta_alpha_p)

    @property
    def beta_p(self) -> complex:
        return math.sqrt(1.0 - self.r_alpha_p**2) * np.exp(1j * self.theta_beta_p)

    @property
    def theta_ab(self) -> float:
        return self.theta_alpha - self.theta_beta

    def v_a(self) -> np.ndarray:
        return su2_from_pair(self.alpha, self.beta)

    def v_b(self) -> np.ndarray:
        return su2_from_pair(self.alpha_p, self.beta_p)

    def matrix(self) -> np.ndarray:
        """The 4x4 mixing matrix ``V = V_A (x) V_B`` acting on Kraus indices."""
        return np.kron(self.v_a(), self.v_b())


def su2_from_pair(alpha: complex, beta: complex) -> np.ndarray:
    return np.array([[alpha, beta], [-np.conj(beta), np.conj(alpha)]], dtype=complex)


def local_kraus(eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-qubit damping operators in the ``|1>, |0>`` ordering.

    ``E1 = sqrt(eta)|1><1| + |0><0|`` and ``E2 = sqrt(1 - eta)|0><1|``.
    """
    eta = check_eta(eta)
    e1 = np.array([[math.sqrt(eta), 0.0], [0.0, 1.0]], dtype=complex)
    e2 = np.array([[0.0, 0.0], [math.sqrt(1.0 - eta), 0.0]], dtype=complex)
    return e1, e2


def product_kraus(eta: float) -> KrausSet:
    e1, e2 = local_kraus(eta)
    return KrausSet(np.stack([tensor(e1, e1), tensor(e1, e2), tensor(e2, e1), tensor(e2, e2)]))


def kraus_sum(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``sum_j ops[..., j] rho ops[..., j]^dagger`` with no validation; batched.

    ``ops`` has shape (..., 4, 4, 4) and ``rho`` broadcasts against (..., 4, 4).
    """
    return np.einsum("...jab,...bc,...jdc->...ad", ops, rho, ops.conj())


def apply_channel(k: KrausSet, rho) -> np.ndarray:
    """``rho -> sum_j K_j rho K_j^dagger`` after checking ``rho`` is a state."""
    rho = validate_state(rho)
    return kraus_sum(k.ops, rho)


def bell_state() -> np.ndarray:
    """``|Phi><Phi|`` with ``|Phi> = (|00> + |11>)/sqrt(2)``."""
    return rho_q(1.0)


def rho_q(q: complex) -> np.ndarray:
    """Mixture ``(|11><11| + |00><00|)/2`` with coherence ``<11|rho|00> = q/2``."""
    q = check_q(q)
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = 0.5
    r[0, 3] = q / 2
    r[3, 0] = np.conj(q) / 2
    return r


def closed_form_rho_prime(eta: float) -> np.ndarray:
    return closed_form_rho_q_prime(eta, 1.0)


def closed_form_rho_q_prime(eta: float, q: complex) -> np.ndarray:
    """Damped ``rho_q`` written out entry by entry."""
    eta = check_eta(eta)
    q = check_q(q)
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = eta**2
    r[1, 1] = r[2, 2] = eta * (1 - eta)
    r[3, 3] = 2 + eta * (eta - 2)
    r[0, 3] = q * eta
    r[3, 0] = np.conj(q) * eta
    return r / 2


def remix_ops(ops: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``K~_i = sum_j V_ij K_j`` (batched over leading axes of ``v``)."""
    return np.einsum("...ij,...jab->...iab", v, ops)


def remix_kraus(k: KrausSet, p: RemixParams) -> KrausSet:
    return KrausSet(remix_ops(k.ops, p.matrix()))


def is_canonical(k: KrausSet, tol: float = KRAUS_TOL) -> bool:
    """True when ``Tr(K_i^dagger K_j)`` vanishes for every ``i != j``."""
    g = k.gram()
    off = g - np.diag(np.diag(g))
    return bool(np.max(np.abs(off)) <= tol)


def completeness_holds(k: KrausSet, tol: float = KRAUS_TOL) -> bool:
    return k.completeness_residual() <= tol

