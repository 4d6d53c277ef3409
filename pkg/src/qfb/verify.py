"""Self-check suite: every analytic identity and invariant, run against simulation.

Each check compares a worst-case error with a tolerance multiplied by
``tolerance_scale``.  A scale of zero or below therefore fails every check,
which is how the command-line tool's failure path is exercised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import (
    RemixParams,
    apply_channel,
    bell_state,
    closed_form_rho_prime,
    closed_form_rho_q_prime,
    kraus_sum,
    product_kraus,
    remix_kraus,
    rho_q,
)
from .feedback import (
    AngleCombos,
    EulerAngles,
    FeedbackScheme,
    RepeatConfig,
    apply_feedback_channel,
    closed_form_repeat_concurrence,
    closed_form_repeat_state,
    closed_form_rho_dprime_elements,
    closed_form_rho_dprime_optimal,
    closed_form_rho_q_dprime_elements,
    optimal_scheme,
    repeat_map,
)
from .linalg import eigenvalues4, tensor
from .measures import (
    concurrence,
    concurrence_rho_prime_radical,
    concurrence_x_state,
    purity_closed_form_fb,
    purity_closed_form_nofb,
    purity_closed_form_remix,
    subsystem_purity,
)
from .optimize import NO_IMPROVEMENT_SETS, OPTIMAL_SETS, classify_member


# -- random inputs ------------------------------------------------------------


def random_unitary(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(rng: np.random.Generator, rank: int = 4) -> np.ndarray:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_x_state(rng: np.random.Generator) -> np.ndarray:
    """Random valid state with support on the diagonal and anti-diagonal only."""
    d = rng.dirichlet(np.ones(4))
    r = np.diag(d).astype(complex)
    c14 = math.sqrt(d[0] * d[3]) * rng.uniform() * np.exp(2j * math.pi * rng.uniform())
    c23 = math.sqrt(d[1] * d[2]) * rng.uniform() * np.exp(2j * math.pi * rng.uniform())
    r[0, 3], r[3, 0] = c14, np.conj(c14)
    r[1, 2], r[2, 1] = c23, np.conj(c23)
    return r


def random_euler(rng: np.random.Generator) -> EulerAngles:
    return EulerAngles(*rng.uniform(0, 2 * math.pi, size=3))


def random_scheme(rng: np.random.Generator) -> FeedbackScheme:
    return FeedbackScheme(random_euler(rng), random_euler(rng))


def random_remix(rng: np.random.Generator) -> RemixParams:
    r, rp = rng.uniform(size=2)
    ta, tb, tap, tbp = rng.uniform(0, 2 * math.pi, size=4)
    return RemixParams(r, ta, tb, rp, tap, tbp)


def random_q(rng: np.random.Generator) -> complex:
    return rng.uniform() * np.exp(2j * math.pi * rng.uniform())


# -- report -------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    error: float
    tol: float
    known_issue: bool = False
    scale: float = 1.0

    @property
    def passed(self) -> bool:
        if self.known_issue:
            return True
        return self.scale > 0 and self.error <= self.tol * self.scale

    def line(self) -> str:
        status = "KNOWN" if self.known_issue else ("PASS" if self.passed else "FAIL")
        return f"{status:5s} {self.name}: error={self.error!r} tol={self.tol * self.scale!r}"


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def known(self) -> list[Check]:
        return [c for c in self.checks if c.known_issue]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        npass = sum(c.passed and not c.known_issue for c in self.checks)
        return f"passed {npass}, failed {len(self.failures)}, known issues {len(self.known)}"


def _max_err(f: Callable[[], float], trials: int) -> float:
    return max(f() for _ in range(trials))


def _mat_err(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _off_diagonal(g) -> float:
    return float(np.max(np.abs(g - np.diag(np.diag(g)))))


def run_verification(trials: int = 200, seed: int = 0, tolerance_scale: float = 1.0) -> Report:
    """Run every check with ``trials`` random draws each."""
    rng = np.random.default_rng(seed)
    report = Report()

    def add(name, err, tol):
        report.checks.append(Check(name, float(err), tol, scale=tolerance_scale))

    etas = np.linspace(0.0, 1.0, 101)
    uni = lambda: float(rng.uniform())  # noqa: E731

    # linalg
    def kron_mixed():
        a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
        return _mat_err(tensor(a, b) @ tensor(c, d), tensor(a @ c, b @ d))

    add("tensor mixed-product rule", _max_err(kron_mixed, trials), 1e-12)

    def eig_similarity():
        q = random_unitary(rng, 4)
        vals = eigenvalues4(q @ np.diag([4.0, 3.0, 2.0, 1.0]) @ q.conj().T).values
        return _mat_err(vals, [4, 3, 2, 1])

    add("eigenvalues invariant under unitary similarity", _max_err(eig_similarity, trials), 1e-9)

    # channels
    def cptp():
        rho = random_state(rng)
        out = apply_channel(product_kraus(uni()), rho)
        herm = _mat_err(out, out.conj().T)
        tr = abs(np.trace(out) - 1)
        low = float(np.min(np.linalg.eigvalsh(out)))
        return max(herm, tr, 0.0 if low >= -1e-10 else -low)

    add("damping channel is trace/Hermiticity/positivity preserving", _max_err(cptp, trials), 1e-12)
    add(
        "canonical Kraus set completeness",
        max(product_kraus(e).completeness_residual() for e in etas),
        1e-13,
    )
    add(
        "canonical Kraus set is orthogonal",
        max(_off_diagonal(product_kraus(e).gram()) for e in etas),
        1e-12,
    )

    def remix_independence():
        k = product_kraus(uni())
        rho = random_state(rng)
        kt = remix_kraus(k, random_remix(rng))
        return max(_mat_err(kraus_sum(kt.ops, rho), kraus_sum(k.ops, rho)), kt.completeness_residual())

    add("remixed Kraus sets give the same channel", _max_err(remix_independence, trials), 1e-12)
    add(
        "damped Bell state closed form",
        max(_mat_err(apply_channel(product_kraus(e), bell_state()), closed_form_rho_prime(e)) for e in etas),
        1e-12,
    )

    def rho_q_prime():
        eta, q = uni(), random_q(rng)
        return _mat_err(apply_channel(product_kraus(eta), rho_q(q)), closed_form_rho_q_prime(eta, q))

    add("damped rho_q closed form", _max_err(rho_q_prime, trials), 1e-12)

    def semigroup():
        e1, e2, q = uni(), uni(), random_q(rng)
        two = apply_channel(product_kraus(e1), apply_channel(product_kraus(e2), rho_q(q)))
        return _mat_err(two, apply_channel(product_kraus(e1 * e2), rho_q(q)))

    add("damping composes multiplicatively in eta", _max_err(semigroup, trials), 1e-12)

    # feedback
    def elements():
        eta, q, s = uni(), random_q(rng), random_scheme(rng)
        k = product_kraus(eta)
        e1 = _mat_err(closed_form_rho_dprime_elements(eta, s), apply_feedback_channel(k, s, bell_state()))
        e2 = _mat_err(closed_form_rho_q_dprime_elements(eta, q, s), apply_feedback_channel(k, s, rho_q(q)))
        return max(e1, e2)

    add("feedback state matrix elements", _max_err(elements, trials), 1e-10)

    def optimal_state():
        eta, q, ph = uni(), random_q(rng), rng.uniform(0, 2 * math.pi)
        sim = apply_feedback_channel(product_kraus(eta), optimal_scheme(ph, rng.uniform(0, 2 * math.pi)), rho_q(q))
        return _mat_err(sim, closed_form_rho_dprime_optimal(eta, ph, q))

    add("optimal feedback state closed form", _max_err(optimal_state, trials), 1e-10)

    def repeated():
        eta, n, ph = uni(), int(rng.integers(1, 7)), rng.uniform(0, 2 * math.pi)
        a = _mat_err(repeat_map(bell_state(), eta, RepeatConfig(n)), closed_form_repeat_state(eta, n, False))
        b = _mat_err(
            repeat_map(bell_state(), eta, RepeatConfig(n, True, ph)), closed_form_repeat_state(eta, n, True, ph)
        )
        return max(a, b)

    add("repeated-map states closed form", _max_err(repeated, trials), 1e-10)

    # measures
    k_opt = [(e, apply_feedback_channel(product_kraus(e), optimal_scheme(), bell_state())) for e in etas]
    add("optimal feedback concurrence equals eta", max(abs(concurrence(r).value - e) for e, r in k_opt), 1e-10)
    add("optimal feedback purity equals 1/2", max(abs(subsystem_purity(r) - 0.5) for _, r in k_opt), 1e-10)

    def phase_freedom():
        eta = uni()
        vals = [
            concurrence(apply_feedback_channel(product_kraus(eta), optimal_scheme(pu, pv), bell_state())).value
            for pu, pv in rng.uniform(0, 2 * math.pi, size=(16, 2))
        ]
        return max(vals) - min(vals)

    add("optimal concurrence independent of free phases", _max_err(phase_freedom, max(1, trials // 16)), 1e-12)

    def purity_floor():
        eta, s = uni(), random_scheme(rng)
        return max(0.0, 0.5 - subsystem_purity(apply_feedback_channel(product_kraus(eta), s, bell_state())))

    add("no scheme pushes purity below 1/2", _max_err(purity_floor, trials), 1e-10)

    def purity_formulas():
        eta, s, p = uni(), random_scheme(rng), random_remix(rng)
        k = product_kraus(eta)
        e8 = abs(subsystem_purity(apply_channel(k, bell_state())) - purity_closed_form_nofb(eta))
        sim = subsystem_purity(apply_feedback_channel(k, s, bell_state()))
        e18 = abs(sim - purity_closed_form_fb(eta, AngleCombos.from_scheme(s)))
        simr = subsystem_purity(apply_feedback_channel(remix_kraus(k, p), s, bell_state()))
        e25 = abs(simr - purity_closed_form_remix(eta, s.u_params, s.v_params, p).value)
        return max(e8, e18, e25)

    add("purity closed forms (no feedback, feedback, remixed)", _max_err(purity_formulas, trials), 1e-10)

    def remix_primed():
        eta, s, p = uni(), random_scheme(rng), random_remix(rng)
        base = purity_closed_form_remix(eta, s.u_params, s.v_params, p).value
        other = RemixParams(p.r_alpha, p.theta_alpha, p.theta_beta, *rng.uniform(size=1), *rng.uniform(0, 6, 2))
        return abs(purity_closed_form_remix(eta, s.u_params, s.v_params, other).value - base)

    add("remixed purity ignores the qubit-B mixing", _max_err(remix_primed, trials), 1e-12)

    def lu_invariance():
        rho = random_state(rng)
        u = tensor(random_unitary(rng), random_unitary(rng))
        return abs(concurrence(u @ rho @ u.conj().T).value - concurrence(rho).value)

    add("concurrence invariant under local unitaries", _max_err(lu_invariance, trials), 1e-9)

    def x_oracle():
        rho = random_x_state(rng)
        return abs(concurrence(rho).value - concurrence_x_state(rho))

    add("X-state formula agrees with eigensolver concurrence", _max_err(x_oracle, trials), 1e-9)
    add(
        "repeated-map concurrence (feedback eta^n, none eta^2n)",
        max(
            max(
                abs(concurrence(repeat_map(bell_state(), e, RepeatConfig(n, True))).value - e**n),
                abs(concurrence(repeat_map(bell_state(), e, RepeatConfig(n))).value - e ** (2 * n)),
            )
            for e in etas[::5]
            for n in range(1, 7)
        ),
        1e-10,
    )
    add(
        "repeated-map radical formula agrees with eigensolver",
        max(
            abs(
                closed_form_repeat_concurrence(e, n, False)
                - concurrence(repeat_map(bell_state(), e, RepeatConfig(n))).value
            )
            for e in etas[::5]
            for n in range(1, 7)
        ),
        1e-12,
    )

    # optimize
    members = [classify_member(f) for f in NO_IMPROVEMENT_SETS + OPTIMAL_SETS]
    add("stationary residuals vanish exactly on both families", max(m.residual for m in members), 0.0)
    expected = ["no-improvement"] * len(NO_IMPROVEMENT_SETS) + ["optimal"] * len(OPTIMAL_SETS)
    add(
        "stationary families classified",
        float(sum(m.family != want for m, want in zip(members, expected))),
        0.0,
    )

    # documented disagreement: reported, never used as ground truth
    report.checks.append(
        Check(
            "closed-form damped-Bell concurrence radical vs Wootters eta^2 (0.1858 vs 0.25 at eta=0.5)",
            float(abs(concurrence_rho_prime_radical(0.5) - concurrence(closed_form_rho_prime(0.5)).value)),
            0.0,
            known_issue=True,
        )
    )
    return report
