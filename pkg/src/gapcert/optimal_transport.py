"""Wasserstein distances between finitely supported measures on an interval.

``w1`` uses the one-dimensional CDF formula.  ``w_alpha_lp`` solves the
transportation linear programme for the cost ``d(x, y)**alpha``, which is the
only exact route for ``alpha < 1`` (concave costs break the monotone
coupling).
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .errors import CapabilityError, ConvergenceError, DomainError, UsageError, ValidationError
from .regularity import GridFunction, holder_seminorm
from .tolerances import EPS_NUM

MAX_LP_SUPPORT = 200
# HiGHS defaults (1e-7) are loose next to sqrt-type costs of nearly equal atoms
_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite positive measure ``sum_i weights[i] * delta(support[i])``.

    Duplicate support points are merged and the support is sorted.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.support, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if pts.shape != w.shape:
            raise ValidationError(f"{pts.size} support points but {w.size} weights")
        if pts.size == 0:
            raise ValidationError("a measure needs at least one atom")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(pts)):
            raise ValidationError("weights must be finite and nonnegative")
        uniq, inverse = np.unique(pts, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, w)
        uniq.setflags(write=False)
        merged.setflags(write=False)
        object.__setattr__(self, "support", uniq)
        object.__setattr__(self, "weights", merged)

    @classmethod
    def dirac(cls, x: float) -> "DiscreteMeasure":
        return cls([x], [1.0])

    @classmethod
    def uniform(cls, points) -> "DiscreteMeasure":
        points = np.asarray(points, dtype=float)
        return cls(points, np.full(points.size, 1.0 / points.size))

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def is_probability(self, tol: float = EPS_NUM) -> bool:
        return abs(self.mass - 1.0) <= tol

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.support, self.weights / self.mass)

    def integrate(self, f) -> float:
        values = f(self.support) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["point", "weight"])
        for x, w in zip(self.support, self.weights):
            writer.writerow([repr(float(x)), repr(float(w))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscreteMeasure":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and rows[0][0].strip().lower() == "point":
            rows = rows[1:]
        try:
            pts = [float(r[0]) for r in rows]
            ws = [float(r[1]) for r in rows]
        except (ValueError, IndexError):
            raise ValidationError("measure CSV rows must be 'point,weight'") from None
        return cls(pts, ws)


def _check_masses(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = EPS_NUM):
    if abs(mu.mass - nu.mass) > tol * max(1.0, mu.mass):
        raise DomainError(f"measures have different masses {mu.mass} and {nu.mass}")


def w1(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """``W_1`` on the line: ``integral |F_mu - F_nu|`` of the step CDFs."""
    _check_masses(mu, nu)
    pts = np.union1d(mu.support, nu.support)
    f_mu = np.zeros(pts.size)
    f_nu = np.zeros(pts.size)
    np.add.at(f_mu, np.searchsorted(pts, mu.support), mu.weights)
    np.add.at(f_nu, np.searchsorted(pts, nu.support), nu.weights)
    gap = np.abs(np.cumsum(f_mu) - np.cumsum(f_nu))[:-1]
    return float(np.dot(gap, np.diff(pts)))


def _cost(x, y, alpha: float, metric: str, period: float | None):
    d = np.abs(x[:, None] - y[None, :])
    if metric == "circle":
        if period is None:
            raise UsageError("circle metric needs a period")
        d = np.minimum(d, period - d)
    return d ** alpha


def w_alpha_lp(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    alpha: float = 1.0,
    metric: str = "interval",
    period: float | None = None,
    gap_tol: float = EPS_NUM,
) -> float:
    """Optimal transport cost for ``d**alpha`` as an exact linear programme (HiGHS).

    The primal optimum is accepted only if the dual objective built from the
    solver's marginals matches it to ``gap_tol``.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    n, m = mu.support.size, nu.support.size
    if n > MAX_LP_SUPPORT or m > MAX_LP_SUPPORT:
        raise CapabilityError(f"LP transport limited to {MAX_LP_SUPPORT} atoms per side, got {n} and {m}")
    _check_masses(mu, nu)
    # put both marginals on exactly the same total mass
    b_nu = nu.weights * (mu.mass / nu.mass)
    cost = _cost(mu.support, nu.support, alpha, metric, period)
    if n == 1 or m == 1:
        plan = np.outer(mu.weights, b_nu) / mu.mass
        return float((plan * cost).sum())

    rows = np.concatenate([np.repeat(np.arange(n), m), n + np.tile(np.arange(m), n)])
    cols = np.concatenate([np.arange(n * m), np.arange(n * m)])
    a_eq = coo_matrix((np.ones(2 * n * m), (rows, cols)), shape=(n + m, n * m)).tocsr()
    b_eq = np.concatenate([mu.weights, b_nu])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs", options=_HIGHS_OPTIONS)
    if res.status != 0:
        raise ConvergenceError(f"transport LP failed: {res.message}")
    primal = float(res.fun)
    dual = float(np.dot(res.eqlin.marginals, b_eq))
    if abs(primal - dual) > gap_tol * max(1.0, abs(primal)):
        raise ConvergenceError(f"transport LP duality gap {abs(primal - dual):.3e} above {gap_tol:.1e}")
    return primal


def w_alpha(mu: DiscreteMeasure, nu: DiscreteMeasure, alpha: float = 1.0, metric: str = "interval", period=None) -> float:
    """Dispatch to the CDF formula when it is exact, the LP otherwise."""
    if alpha == 1 and metric == "interval":
        return w1(mu, nu)
    return w_alpha_lp(mu, nu, alpha, metric, period)


def pushforward_dual(spec, mu: DiscreteMeasure) -> DiscreteMeasure:
    """``L_0^* mu``: each atom at ``x`` splits into ``k`` atoms at ``b_j(x)`` of weight ``w / k``."""
    images = spec.branch_values(mu.support)
    weights = np.tile(mu.weights / spec.k, (spec.k, 1))
    return DiscreteMeasure(images.ravel(), weights.ravel())


@dataclass
class ContractionReport:
    max_ratio: float
    bound: float
    trials: int
    skipped: int
    passed: bool
    ratios: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "trials": self.trials,
            "skipped": self.skipped,
            "passed": self.passed,
        }


def random_probability(rng: np.random.Generator, domain, n_atoms: int) -> DiscreteMeasure:
    a, b = domain
    return DiscreteMeasure(rng.uniform(a, b, size=n_atoms), rng.dirichlet(np.ones(n_atoms)))


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("GAPCERT_THREADS", "1")))
    except ValueError:
        return 1


def dual_contraction_check(
    spec,
    alpha: float,
    trials: int,
    rng: np.random.Generator | int | None = 0,
    n_atoms: int = 8,
    eps: float = EPS_NUM,
    pairs=None,
) -> ContractionReport:
    """Largest ``W_alpha(L_0^* mu, L_0^* nu) / W_alpha(mu, nu)`` over random probability pairs.

    ``pairs`` overrides the random sampling with explicit ``(mu, nu)`` pairs.
    Pairs at distance zero are skipped.  The check passes when the largest
    ratio stays below ``theta + eps``.
    """
    theta = spec.theta(alpha)
    period = spec.diam if spec.metric == "circle" else None
    if pairs is None:
        rng = np.random.default_rng(rng)
        pairs = [(random_probability(rng, spec.domain, n_atoms), random_probability(rng, spec.domain, n_atoms)) for _ in range(trials)]

    def one(pair):
        mu, nu = pair
        base = w_alpha(mu, nu, alpha, spec.metric, period)
        if base <= 0:
            return None
        return w_alpha(pushforward_dual(spec, mu), pushforward_dual(spec, nu), alpha, spec.metric, period) / base

    workers = _thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]
    ratios = [r for r in results if r is not None]
    top = max(ratios, default=0.0)
    return ContractionReport(top, theta, len(pairs), len(pairs) - len(ratios), top <= theta + eps, ratios)


@dataclass
class DualityReport:
    w_alpha: float
    gaps: list
    passed: bool

    def to_dict(self) -> dict:
        return {"w_alpha": self.w_alpha, "max_gap": max(self.gaps, default=0.0), "passed": self.passed}


def kantorovich_duality_check(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    alpha: float,
    f_candidates,
    eps: float = EPS_NUM,
) -> DualityReport:
    """Weak duality: every candidate with ``Hol_alpha(f) <= 1`` has ``|mu(f) - nu(f)| <= W_alpha``.

    Candidates whose grid seminorm exceeds ``1 + eps`` are rejected with
    their index.
    """
    for i, f in enumerate(f_candidates):
        if not isinstance(f, GridFunction):
            raise ValidationError(f"candidate {i} is not a GridFunction", witnesses=[i])
        if holder_seminorm(f, alpha) > 1 + eps:
            raise ValidationError(f"candidate {i} has Hölder constant above 1", witnesses=[i])
    value = w_alpha(mu, nu, alpha)
    gaps = [abs(mu.integrate(f) - nu.integrate(f)) for f in f_candidates]
    return DualityReport(value, gaps, all(g <= value + eps for g in gaps))
