"""Small dense complex matrix kernel for two-qubit work.

Every 4x4 matrix in this package is stored in the basis
``|11>, |10>, |01>, |00>`` (qubit A is the first tensor factor), which means
single-qubit 2x2 matrices fed to :func:`tensor` use the ordering ``|1>, |0>``.
:func:`reverse_basis` converts to and from the conventional ``|0>``-first
ordering.

The eigensolver handles general (non-Hermitian) matrices with a Householder
Hessenberg reduction followed by Wilkinson-shifted QR sweeps built from Givens
rotations.  It is vectorised over a leading batch axis so that parameter sweeps
can push hundreds of thousands of matrices through it at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidState

EIG_TOL = 1e-12
EIG_MAX_ITER = 200
PSD_TOL = 1e-10
STATE_TOL = 1e-10

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    iterations: int
    converged: bool


def as_matrix(m, n: int) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def tensor(a, b) -> np.ndarray:
    """Kronecker product; ``out[2i+k, 2j+l] = a[i, j] * b[k, l]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.einsum("...ij,...kl->...ikjl", a, b).reshape(
        a.shape[:-2] + (a.shape[-2] * b.shape[-2], a.shape[-1] * b.shape[-1])
    )


def dagger(a) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def matmul(a, b) -> np.ndarray:
    return np.asarray(a, dtype=complex) @ np.asarray(b, dtype=complex)


def trace(m) -> complex:
    return complex(np.trace(np.asarray(m)))


def reverse_basis(m) -> np.ndarray:
    """Reverse the ordering of basis vectors (``|11>`` first <-> ``|00>`` first).

    For a single qubit this is conjugation by the bit flip.
    """
    a = np.asarray(m)
    return a[..., ::-1, ::-1].copy()


def partial_trace_B(rho) -> np.ndarray:
    """Reduced state of qubit A: ``rho_A[i, j] = sum_k rho[2i+k, 2j+k]``."""
    r = np.asarray(rho, dtype=complex).reshape(np.shape(rho)[:-2] + (2, 2, 2, 2))
    return np.einsum("...ikjk->...ij", r)


def is_hermitian(m, tol: float = STATE_TOL) -> bool:
    a = np.asarray(m)
    return bool(np.max(np.abs(a - dagger(a))) <= tol)


def is_psd(m, tol: float = PSD_TOL) -> bool:
    """Hermitian with no eigenvalue below ``-tol``."""
    a = as_matrix(m, 4)
    if not is_hermitian(a, max(tol, STATE_TOL)):
        return False
    res = eigenvalues4(a)
    return bool(np.min(res.values.real) >= -tol)


def validate_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Return ``rho`` as a 4x4 array or raise :class:`InvalidState`."""
    try:
        a = as_matrix(rho, 4)
    except ValueError as exc:
        raise InvalidState(str(exc)) from exc
    if not is_hermitian(a, tol):
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(a) - 1.0) > tol:
        raise InvalidState(f"density matrix has trace {np.trace(a)!r}")
    if not is_psd(a, PSD_TOL):
        raise InvalidState("density matrix has a negative eigenvalue")
    return a


# -- eigensolver ------------------------------------------------------------


def hessenberg(m) -> np.ndarray:
    """Unitarily similar upper Hessenberg form (batched over leading axes).

    Columns whose below-subdiagonal part is already zero are left untouched so
    that exact zeros survive the reduction.
    """
    h = np.array(m, dtype=complex, copy=True)
    n = h.shape[-1]
    for k in range(n - 2):
        x = h[..., k + 1 :, k]
        tail = np.sum(np.abs(x[..., 1:]) ** 2, axis=-1)
        norm = np.sqrt(np.abs(x[..., 0]) ** 2 + tail)
        x0 = x[..., 0]
        ax0 = np.abs(x0)
        phase = np.where(ax0 > 0, x0 / np.where(ax0 > 0, ax0, 1.0), 1.0)
        v = x.copy()
        v[..., 0] = v[..., 0] + phase * norm
        vn = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
        active = (tail > 0) & (vn > 0)
        w = np.where(active[..., None], v / np.where(vn > 0, vn, 1.0)[..., None], 0.0)
        rows = h[..., k + 1 :, :]
        h[..., k + 1 :, :] = rows - 2.0 * w[..., :, None] * (np.conj(w)[..., None, :] @ rows)
        cols = h[..., :, k + 1 :]
        h[..., :, k + 1 :] = cols - 2.0 * (cols @ w[..., :, None]) * np.conj(w)[..., None, :]
    return h


def _wilkinson_shift(h: np.ndarray, m: int) -> np.ndarray:
    # h is entry-major: h[i, j] is the batch vector of entry (i, j)
    a = h[m - 2, m - 2]
    b = h[m - 2, m - 1]
    c = h[m - 1, m - 2]
    d = h[m - 1, m - 1]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = d + half + disc
    mu2 = d + half - disc
    # trailing eigenvalue closest to d
    return np.where(np.abs(mu1 - d) <= np.abs(mu2 - d), mu1, mu2)


def _qr_step(h: np.ndarray, m: int, mu: np.ndarray) -> None:
    """One explicit shifted QR step ``H <- RQ + mu`` on an entry-major m x m block."""
    for i in range(m):
        h[i, i] -= mu
    rot = []
    for k in range(m - 1):
        a = h[k, k]
        b = h[k + 1, k]
        aa = np.abs(a)
        r = np.hypot(aa, np.abs(b))
        safe_r = np.where(r > 0, r, 1.0)
        c = np.where(r > 0, aa / safe_r, 1.0)
        s = np.where(
            aa > 0,
            (a / np.where(aa > 0, aa, 1.0)) * np.conj(b) / safe_r,
            np.where(r > 0, 1.0 + 0j, 0j),
        )
        sc = np.conj(s)
        xk = h[k, k:m].copy()
        xk1 = h[k + 1, k:m]
        h[k, k:m] = c * xk + s * xk1
        h[k + 1, k:m] = c * xk1 - sc * xk
        h[k + 1, k] = 0.0
        rot.append((c, s, sc))
    for k, (c, s, sc) in enumerate(rot):
        top = k + 2
        yk = h[:top, k].copy()
        yk1 = h[:top, k + 1]
        h[:top, k] = c * yk + sc * yk1
        h[:top, k + 1] = c * yk1 - s * yk
    for i in range(m):
        h[i, i] += mu


_CHUNK = 16384


def eigenvalues4_batch(ms, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER):
    """Eigenvalues of a stack of square complex matrices.

    Parameters
    ----------
    ms : array_like, shape (B, n, n)
    tol : float
        Relative deflation threshold on subdiagonal entries.
    max_iter : int
        Cap on QR steps per matrix, summed over all deflation stages.

    Returns
    -------
    values : ndarray, shape (B, n)
        Sorted by descending real part (ties by descending imaginary part).
    iterations : ndarray of int, shape (B,)
    converged : ndarray of bool, shape (B,)
    """
    a = np.asarray(ms, dtype=complex)
    if a.ndim != 3 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected a (B, n, n) stack, got shape {a.shape}")
    nb, n = a.shape[0], a.shape[-1]
    values = np.zeros((nb, n), dtype=complex)
    iters = np.zeros(nb, dtype=int)
    converged = np.ones(nb, dtype=bool)
    for lo in range(0, nb, _CHUNK):
        hi = min(lo + _CHUNK, nb)
        _eig_chunk(a[lo:hi], tol, max_iter, values[lo:hi], iters[lo:hi], converged[lo:hi])
    order = np.lexsort((-values.imag, -values.real), axis=-1)
    values = np.take_along_axis(values, order, axis=-1)
    return values, iters, converged


def _eig_chunk(a, tol, max_iter, values, iters, converged):
    nb, n = a.shape[0], a.shape[-1]
    h = np.ascontiguousarray(np.moveaxis(hessenberg(a), 0, -1))
    scale = np.max(np.abs(a), axis=(-2, -1))
    for m in range(n, 1, -1):
        # the working set shrinks as members deflate; a member's arithmetic
        # never depends on which other matrices share the batch
        pending = np.arange(nb)
        hp = h[:m, :m].copy()
        its = iters.copy()
        stage_iter = 0
        while pending.size:
            sub = np.abs(hp[m - 1, m - 2])
            near = np.abs(hp[m - 1, m - 1]) + np.abs(hp[m - 2, m - 2])
            small = sub <= tol * near + _EPS * scale[pending]
            exhausted = its >= max_iter
            done = small | exhausted
            if done.any():
                converged[pending[exhausted & ~small]] = False
                h[:m, :m, pending[done]] = hp[:, :, done]
                iters[pending[done]] = its[done]
                keep = ~done
                pending = pending[keep]
                hp = hp[:, :, keep]
                its = its[keep]
                if not pending.size:
                    break
            stage_iter += 1
            mu = _wilkinson_shift(hp, m)
            if stage_iter % 11 == 0:
                # exceptional shift to break cycling
                mu = hp[m - 1, m - 1] + 1.5 * np.abs(hp[m - 1, m - 2])
            _qr_step(hp, m, mu)
            its += 1
        values[:, m - 1] = h[m - 1, m - 1]
        h[m - 1, : m - 1] = 0.0
    values[:, 0] = h[0, 0]


def eigenvalues4(m, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> EigenResult:
    """Eigenvalues of a general 4x4 complex matrix.

    ``converged`` is False when the iteration cap was reached; the values are
    then the current diagonal and must not be trusted.
    """
    a = as_matrix(m, 4)
    vals, its, ok = eigenvalues4_batch(a[None], tol, max_iter)
    return EigenResult(values=vals[0], iterations=int(its[0]), converged=bool(ok[0]))
