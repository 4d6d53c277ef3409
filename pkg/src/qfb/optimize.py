"""Optimisation of the feedback scheme and of the Kraus representation.

Two exhaustive grid sweeps are provided.  :func:`sweep_canonical` searches the
feedback Euler angles against the canonical product Kraus set.
:func:`sweep_remix` fixes ``beta_u = 0, beta_v = pi``, ties
``zeta_u = pi + xi_v - 2 theta_ab`` and scans the Kraus remixing.  Both
evaluate every grid point by direct simulation followed by the eigensolver
concurrence, so they are independent of the closed forms.

Grid points are grouped by an outer key (``eta`` or ``(eta, |q|)``).  Groups
are distributed over worker processes in contiguous blocks.  Each point is
computed on its own, so the result does not depend on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channels import check_eta, check_q, product_kraus, rho_q
from .errors import DomainError
from .feedback import AngleCombos
from .linalg import reverse_basis, tensor
from .measures import concurrence_batch, purity_closed_form_fb, purity_closed_form_nofb, subsystem_purity_batch

OBJECTIVES = ("concurrence", "purity")
TIE_TOL = 1e-12


def unit_grid(count: int = 11) -> np.ndarray:
    """``count`` evenly spaced points on [0, 1], endpoints included (step 0.1 for 11)."""
    return np.arange(count) / (count - 1)


def angle_grid(count: int = 61) -> np.ndarray:
    """``count`` evenly spaced angles on [0, 2pi], endpoints included (step pi/30 for 61)."""
    return np.arange(count) * (2 * math.pi / (count - 1))


@dataclass(frozen=True)
class SweepConfig:
    eta_grid: Sequence[float] = field(default_factory=lambda: tuple(unit_grid()))
    q_grid: Sequence[float] | None = None
    r_alpha_grid: Sequence[float] = field(default_factory=lambda: tuple(unit_grid()))
    angle_grid_size: int = 61
    # canonical sweep only: grid size for the phase angles xi and gamma_u
    phase_grid_size: int = 5
    fixed: bool = True
    objective: str = "concurrence"
    workers: int = 1
    tie_tol: float = TIE_TOL

    def __post_init__(self):
        if not len(self.eta_grid):
            raise ValueError("eta_grid is empty")
        for eta in self.eta_grid:
            check_eta(eta)
        if self.q_grid is not None:
            if not len(self.q_grid):
                raise ValueError("q_grid is empty")
            for q in self.q_grid:
                check_q(q)
        if not len(self.r_alpha_grid):
            raise ValueError("r_alpha_grid is empty")
        if self.angle_grid_size < 2 or self.phase_grid_size < 1:
            raise ValueError("angle grids need at least two points")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.workers < 1:
            raise ValueError("workers must be positive")


@dataclass(frozen=True)
class BestPoint:
    key: tuple[float, ...]
    params: tuple[float, ...]
    value: float
    tie_count: int
    tied_params: np.ndarray

    def tied_values(self, name_index: int) -> np.ndarray:
        return np.unique(self.tied_params[:, name_index])


@dataclass(frozen=True)
class SweepResult:
    objective: str
    key_names: tuple[str, ...]
    param_names: tuple[str, ...]
    keys: np.ndarray
    params: np.ndarray
    values: np.ndarray
    best: list[BestPoint]

    @property
    def tie_count(self) -> int:
        return sum(b.tie_count for b in self.best)

    def __len__(self):
        return len(self.values)

    def best_for(self, *key: float) -> BestPoint:
        for b in self.best:
            if np.allclose(b.key, key, rtol=0, atol=1e-12):
                return b
        raise KeyError(key)

    def select(self, **fixed: float) -> np.ndarray:
        """Boolean mask of records whose named key/param columns equal the given values."""
        mask = np.ones(len(self.values), dtype=bool)
        for name, val in fixed.items():
            if name in self.key_names:
                col = self.keys[:, self.key_names.index(name)]
            else:
                col = self.params[:, self.param_names.index(name)]
            mask &= np.abs(col - val) <= 1e-12
        return mask


# -- batched evaluation --------------------------------------------------------


def su2_batch(alpha, beta, gamma) -> np.ndarray:
    """Stack of z-y-z Euler matrices, ``|0>``-first ordering, shape (N, 2, 2)."""
    alpha, beta, gamma = np.broadcast_arrays(
        np.asarray(alpha, float), np.asarray(beta, float), np.asarray(gamma, float)
    )
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * (alpha + gamma)) * c
    out[..., 0, 1] = -np.exp(-0.5j * (alpha - gamma)) * s
    out[..., 1, 0] = np.exp(0.5j * (alpha - gamma)) * s
    out[..., 1, 1] = np.exp(0.5j * (alpha + gamma)) * c
    return out


def feedback_unitaries_batch(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    u = reverse_basis(u)
    v = reverse_basis(v)
    return np.stack([tensor(u, u), tensor(u, v), tensor(v, u), tensor(v, v)], axis=-3)


def evolve_batch(eta: float, q: complex, u: np.ndarray, v: np.ndarray, mix: np.ndarray | None = None):
    """Feedback-corrected damped ``rho_q`` for stacks of ``u``, ``v`` (and Kraus mixings)."""
    k = product_kraus(eta).ops
    ops = k if mix is None else np.einsum("nij,jab->niab", mix, k)
    m = feedback_unitaries_batch(u, v) @ ops
    rho = rho_q(q)
    return np.sum(m @ rho @ np.conj(np.swapaxes(m, -1, -2)), axis=-3)


def remix_mixing_batch(r_alpha, theta_ab) -> np.ndarray:
    """``V_A (x) 1`` with ``alpha = r e^{i theta_ab}``, ``beta = sqrt(1-r^2)``."""
    r = np.asarray(r_alpha, float)
    if np.any((r < 0.0) | (r > 1.0)):
        raise DomainError("r_alpha must lie in [0, 1]")
    a = r * np.exp(1j * np.asarray(theta_ab, float))
    b = np.sqrt(np.clip(1.0 - r * r, 0.0, None)).astype(complex)
    va = np.empty(a.shape + (2, 2), dtype=complex)
    va[..., 0, 0] = a
    va[..., 0, 1] = b
    va[..., 1, 0] = -np.conj(b)
    va[..., 1, 1] = np.conj(a)
    return tensor(va, np.broadcast_to(np.eye(2, dtype=complex), a.shape + (2, 2)))


def tied_zeta(theta_ab, xi_v):
    """The ``alpha_u + gamma_u`` that zeroes the remixed purity excess."""
    return math.pi + np.asarray(xi_v) - 2 * np.asarray(theta_ab)


def remix_states(eta: float, q: complex, r_alpha, theta_ab, xi_v) -> np.ndarray:
    r_alpha, theta_ab, xi_v = np.broadcast_arrays(
        np.atleast_1d(np.asarray(r_alpha, float)),
        np.atleast_1d(np.asarray(theta_ab, float)),
        np.atleast_1d(np.asarray(xi_v, float)),
    )
    u = su2_batch(tied_zeta(theta_ab, xi_v), 0.0, 0.0)
    v = su2_batch(xi_v, math.pi, 0.0)
    return evolve_batch(eta, q, u, v, remix_mixing_batch(r_alpha, theta_ab))


def canonical_states(eta: float, q: complex, beta_u, beta_v, xi, gamma_u) -> np.ndarray:
    beta_u, beta_v, xi, gamma_u = np.broadcast_arrays(
        *(np.atleast_1d(np.asarray(x, float)) for x in (beta_u, beta_v, xi, gamma_u))
    )
    u = su2_batch(xi, beta_u, gamma_u)
    v = su2_batch(0.0 * xi, beta_v, 0.0)
    return evolve_batch(eta, q, u, v)


def remix_concurrence(eta: float, r_alpha: float, theta_ab: float, xi_v: float, q: complex = 1.0) -> float:
    return float(concurrence_batch(remix_states(eta, q, r_alpha, theta_ab, xi_v))[0])


def _objective(states: np.ndarray, objective: str) -> np.ndarray:
    if objective == "concurrence":
        return concurrence_batch(states)
    return subsystem_purity_batch(states)


# -- sweeps --------------------------------------------------------------------


def _mesh(*axes) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _eval_block(task):
    kind, keys, params, objective = task
    out = []
    for key in keys:
        eta = key[0]
        q = key[1] if len(key) > 1 else 1.0
        if kind == "remix":
            states = remix_states(eta, q, params[:, 0], params[:, 1], params[:, 2])
        else:
            states = canonical_states(eta, q, *params.T)
        out.append(_objective(states, objective))
    return out


def _run_sweep(kind, cfg: SweepConfig, param_names, params) -> SweepResult:
    if cfg.q_grid is None:
        key_names = ("eta",)
        keys = [(float(e),) for e in cfg.eta_grid]
    else:
        key_names = ("eta", "q_abs")
        keys = [(float(e), float(abs(q))) for e in cfg.eta_grid for q in cfg.q_grid]

    nblocks = min(cfg.workers, len(keys))
    bounds = np.linspace(0, len(keys), nblocks + 1).round().astype(int)
    tasks = [(kind, keys[lo:hi], params, cfg.objective) for lo, hi in zip(bounds[:-1], bounds[1:])]
    if nblocks == 1:
        blocks = [_eval_block(tasks[0])]
    else:
        with ProcessPoolExecutor(max_workers=nblocks) as pool:
            blocks = list(pool.map(_eval_block, tasks))
    per_key = [v for block in blocks for v in block]

    npts = len(params)
    values = np.concatenate(per_key)
    all_keys = np.repeat(np.asarray(keys, float), npts, axis=0)
    all_params = np.tile(params, (len(keys), 1))
    best = [_best(key, params, vals, cfg) for key, vals in zip(keys, per_key)]
    return SweepResult(
        objective=cfg.objective,
        key_names=key_names,
        param_names=param_names,
        keys=all_keys,
        params=all_params,
        values=values,
        best=best,
    )


def _best(key, params, values, cfg: SweepConfig) -> BestPoint:
    target = values.max() if cfg.objective == "concurrence" else values.min()
    tied = np.nonzero(np.abs(values - target) <= cfg.tie_tol)[0]
    tied_params = params[tied]
    # lexicographically smallest parameter tuple wins
    order = np.lexsort(tied_params.T[::-1])
    pick = tied[order[0]]
    return BestPoint(
        key=tuple(key),
        params=tuple(float(x) for x in params[pick]),
        value=float(values[pick]),
        tie_count=int(len(tied)),
        tied_params=tied_params,
    )


def sweep_remix(cfg: SweepConfig) -> SweepResult:
    """Scan ``(r_alpha, theta_ab, xi_v)`` with ``beta_u = 0``, ``beta_v = pi``.

    ``theta_beta = 0`` (only ``theta_alpha - theta_beta`` enters) and the
    qubit-B mixing factor is the identity.
    """
    if not cfg.fixed:
        raise ValueError("the remix sweep requires beta_u = 0, beta_v = pi (fixed=True)")
    ang = angle_grid(cfg.angle_grid_size)
    params = _mesh(np.asarray(cfg.r_alpha_grid, float), ang, ang)
    return _run_sweep("remix", cfg, ("r_alpha", "theta_ab", "xi_v"), params)


def sweep_canonical(cfg: SweepConfig) -> SweepResult:
    """Scan ``(beta_u, beta_v, xi, gamma_u)`` against the canonical Kraus set.

    ``alpha_v = gamma_v = 0`` and ``alpha_u = xi``; the betas use the
    ``angle_grid_size`` grid and the phases the coarser ``phase_grid_size`` grid
    (a single phase point sits at 0).
    """
    ang = angle_grid(cfg.angle_grid_size)
    ph = angle_grid(cfg.phase_grid_size) if cfg.phase_grid_size > 1 else np.zeros(1)
    params = _mesh(ang, ang, ph, ph)
    return _run_sweep("canonical", cfg, ("beta_u", "beta_v", "xi", "gamma_u"), params)


def default_workers() -> int:
    env = os.environ.get("QFB_WORKERS")
    return max(1, int(env)) if env else 1


# -- stationary analysis -------------------------------------------------------


def _snap_trig(x: float) -> tuple[float, float]:
    """cos and sin, exact at integer multiples of pi/2."""
    k = x / (math.pi / 2)
    kr = round(k)
    if abs(k - kr) <= 1e-12:
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[kr % 4]
    return math.cos(x), math.sin(x)


def stationary_residuals(c: AngleCombos) -> tuple[float, float, float]:
    """Partial-derivative conditions of the feedback purity in ``(xi, theta, phi)``."""
    cx, sx = _snap_trig(c.xi)
    ct, st = _snap_trig(c.theta)
    cp, sp = _snap_trig(c.phi)
    return ((cx - 1) * st, (ct - cp) * sx, (cx + 1) * sp)


@dataclass(frozen=True)
class StationaryMember:
    fixed: dict
    family: str
    residual: float
    purities: np.ndarray


NO_IMPROVEMENT_SETS = (
    {"theta": 0.0, "xi": -math.pi},
    {"theta": 0.0, "xi": math.pi},
    {"theta": 0.0, "phi": 0.0},
    {"phi": 0.0, "xi": 0.0},
)
OPTIMAL_SETS = (
    {"theta": -math.pi, "phi": -math.pi},
    {"theta": -math.pi, "phi": math.pi},
    {"theta": math.pi, "phi": -math.pi},
    {"theta": math.pi, "phi": math.pi},
)


def classify_member(fixed: dict, eta_grid=None, free_grid=None, tol: float = 1e-12) -> StationaryMember:
    """Evaluate one solution set over ``eta`` and its free angle.

    Labels it ``"no-improvement"`` when the purity equals the no-feedback value,
    ``"optimal"`` when it is constantly 1/2, ``"other"`` otherwise.
    """
    eta_grid = unit_grid() if eta_grid is None else np.asarray(eta_grid, float)
    free_grid = angle_grid(13) if free_grid is None else np.asarray(free_grid, float)
    (free,) = {"xi", "theta", "phi"} - set(fixed)
    purities = np.empty((len(eta_grid), len(free_grid)))
    residual = 0.0
    for j, f in enumerate(free_grid):
        c = AngleCombos(**{**fixed, free: f})
        residual = max(residual, max(abs(x) for x in stationary_residuals(c)))
        for i, eta in enumerate(eta_grid):
            purities[i, j] = purity_closed_form_fb(eta, c)
    nofb = np.array([purity_closed_form_nofb(e) for e in eta_grid])[:, None]
    if np.all(np.abs(purities - nofb) <= tol):
        family = "no-improvement"
    elif np.all(np.abs(purities - 0.5) <= tol):
        family = "optimal"
    else:
        family = "other"
    return StationaryMember(fixed=dict(fixed), family=family, residual=residual, purities=purities)


def classify_stationary_sets(eta_grid=None) -> dict[str, list[StationaryMember]]:
    return {
        "no-improvement": [classify_member(f, eta_grid) for f in NO_IMPROVEMENT_SETS],
        "optimal": [classify_member(f, eta_grid) for f in OPTIMAL_SETS],
    }


# -- local refinement ----------------------------------------------------------


def refine(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float],
    step0: float = 0.1,
    tol: float = 1e-10,
    bounds: Sequence[tuple[float, float]] | None = None,
    max_evals: int = 20000,
    min_gain: float = 1e-13,
) -> tuple[np.ndarray, float, list[float]]:
    """Maximise ``objective`` by coordinate-wise pattern search.

    Each coordinate is probed at ``+-step``; a probe is kept only if it beats
    the current value by more than ``min_gain``, so rounding noise at a flat
    optimum does not move the point.  The step halves after a pass with no improvement and
    the search stops once it drops below ``tol``.  Returns the point, its value
    and the trace of accepted values (non-decreasing).
    """
    x = np.array(start, dtype=float)
    lo = hi = None
    if bounds is not None:
        lo = np.array([b[0] for b in bounds], float)
        hi = np.array([b[1] for b in bounds], float)
    best = float(objective(x))
    trace = [best]
    step = float(step0)
    evals = 1
    while step >= tol and evals < max_evals:
        improved = False
        for i in range(len(x)):
            for sign in (1.0, -1.0):
                y = x.copy()
                y[i] += sign * step
                if lo is not None:
                    y = np.clip(y, lo, hi)
                if np.array_equal(y, x):
                    continue
                val = float(objective(y))
                evals += 1
                if val > best + min_gain:
                    x, best = y, val
                    trace.append(best)
                    improved = True
                    break
        if not improved:
            step /= 2
    return x, best, trace
