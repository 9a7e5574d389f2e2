"""Interval maps described through their inverse branches.

A :class:`MapSpec` stores ``k`` vectorised inverse branches ``b_j`` and the
forward map ``T``, together with the regularity classes it is declared to
belong to:

* ``H(alpha, theta)``: backward ``theta``-contracting on average in the
  metric ``d**alpha``, i.e. for every pair ``y, z`` some permutation ``s`` of
  the branches gives ``mean_j d(b_j(y), b_s(j)(z))**alpha <= theta d(y, z)**alpha``;
* ``V``: monotone branches whose images tile the interval.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, UsageError, ValidationError
from .tolerances import EPS_NUM, EPS_ROOT

Branch = Callable[[np.ndarray], np.ndarray]

_BRUTE_FORCE_MAX_K = 8


def bisect_monotone(func: Branch, lo: float, hi: float, targets, increasing: bool = True, tol: float = EPS_ROOT):
    """Vectorised bisection solving ``func(y) = t`` on ``[lo, hi]``.

    ``func`` must be monotone on the interval; targets outside its range are
    clamped to the matching endpoint.
    """
    t = np.asarray(targets, dtype=float)
    left = np.full(t.shape, float(lo))
    right = np.full(t.shape, float(hi))
    n_iter = max(1, int(math.ceil(math.log2(max(hi - lo, tol) / tol))) + 2)
    for _ in range(n_iter):
        mid = 0.5 * (left + right)
        below = func(mid) < t if increasing else func(mid) > t
        left = np.where(below, mid, left)
        right = np.where(below, right, mid)
    return 0.5 * (left + right)


def _pm_left_branch(q: float, tol: float = EPS_ROOT) -> Branch:
    """Inverse of ``y -> y (1 + (2y)**q)`` on ``[0, 1/2]``, bisection then a guarded Newton step."""
    scale = 2.0 ** q

    def g(y):
        return y + scale * y ** (q + 1)

    def dg(y):
        return 1.0 + (q + 1) * scale * y ** q

    def branch(x):
        x = np.asarray(x, dtype=float)
        coarse = bisect_monotone(g, 0.0, 0.5, x, tol=tol)
        # bracket of width ~tol from the bisection; Newton only accepted inside it
        newton = coarse - (g(coarse) - x) / dg(coarse)
        inside = np.abs(newton - coarse) <= tol
        y = np.where(inside, newton, coarse)
        return np.clip(y, 0.0, 0.5)

    return branch


@dataclass(frozen=True, eq=False)
class MapSpec:
    """An interval map ``T`` with ``k`` inverse branches.

    Attributes
    ----------
    family, parameters
        Identify the map for serialization.
    domain
        ``(a, b)`` with ``a < b``.
    branches
        Vectorised callables ``b_j : [a, b] -> [a, b]``.
    forward
        Vectorised callable for ``T``.
    holder
        Declared class ``H(alpha, theta)`` as a pair, or ``None``.
    class_v
        Whether the map is declared of class V.
    exceptional_points
        Points where ``T^{-1}(x) != {b_1(x), ..., b_k(x)}``.
    metric
        ``"interval"`` (``|x - y|``) or ``"circle"`` (distance mod ``b - a``).
    theta_of
        Optional exact contraction factor as a function of ``alpha``.
    """

    family: str
    parameters: dict
    domain: tuple[float, float]
    branches: tuple[Branch, ...]
    forward: Branch
    holder: tuple[float, float] | None = None
    class_v: bool = False
    exceptional_points: tuple[float, ...] = ()
    metric: str = "interval"
    theta_of: Callable[[float], float] | None = field(default=None, repr=False)

    def __post_init__(self):
        a, b = map(float, self.domain)
        if not a < b:
            raise DomainError(f"domain must satisfy a < b, got [{a}, {b}]")
        if len(self.branches) < 2:
            raise ValidationError("a map needs at least two inverse branches")
        if self.holder is not None:
            alpha, theta = self.holder
            if not 0 < alpha <= 1 or not 0 < theta < 1:
                raise DomainError(f"class H needs alpha in (0,1] and theta in (0,1), got {self.holder}")
        if self.metric not in ("interval", "circle"):
            raise ValidationError(f"unknown metric {self.metric!r}")
        object.__setattr__(self, "domain", (a, b))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "exceptional_points", tuple(float(p) for p in self.exceptional_points))

    @property
    def k(self) -> int:
        return len(self.branches)

    @property
    def diam(self) -> float:
        a, b = self.domain
        return b - a

    @property
    def class_tag(self) -> str:
        parts = []
        if self.holder is not None:
            parts.append(f"H({self.holder[0]:g},{self.holder[1]:g})")
        if self.class_v:
            parts.append("V")
        return "+".join(parts) if parts else "none"

    def theta(self, alpha: float) -> float:
        """Contraction factor in ``d**alpha``.

        A declared ``H(alpha, theta)`` at this very ``alpha`` wins; then the
        family formula when known.  Otherwise a declared ``H(alpha0, theta0)``
        yields ``theta0**(alpha/alpha0)`` for ``alpha <= alpha0`` by concavity
        of ``t -> t**(alpha/alpha0)``.
        """
        if not 0 < alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
        if self.holder is not None and abs(self.holder[0] - alpha) <= EPS_NUM:
            return self.holder[1]
        if self.theta_of is not None:
            return float(self.theta_of(alpha))
        if self.holder is None:
            raise UsageError(f"map {self.family!r} is not declared of class H")
        alpha0, theta0 = self.holder
        if alpha > alpha0 + EPS_NUM:
            raise UsageError(f"map declared H({alpha0:g}, {theta0:g}) says nothing about alpha = {alpha:g}")
        return theta0 ** (alpha / alpha0)

    def with_holder(self, alpha: float, theta: float | None = None) -> "MapSpec":
        """Copy with the declared Hölder class moved to ``alpha``."""
        if theta is None:
            theta = self.theta(alpha)
        return replace(self, holder=(float(alpha), float(theta)))

    def branch_values(self, x) -> np.ndarray:
        """Array of shape ``(k,) + x.shape`` with ``b_j(x)``."""
        x = np.asarray(x, dtype=float)
        return np.stack([np.asarray(b(x), dtype=float) * np.ones_like(x) for b in self.branches])

    def distance(self, x, y):
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.metric == "circle":
            d = np.minimum(d, self.diam - d)
        return d

    def is_exceptional(self, x, tol: float = EPS_ROOT) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for p in self.exceptional_points:
            out |= np.abs(x - p) <= tol
        return out

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        alpha, theta = self.holder if self.holder is not None else (None, None)
        return {
            "family": self.family,
            "parameters": dict(self.parameters),
            "domain": list(self.domain),
            "alpha": alpha,
            "theta": theta,
            "exceptional_points": list(self.exceptional_points),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# constructors -------------------------------------------------------------


def make_pomeau_manneville(q: float, alpha: float = 1.0, tol: float = EPS_ROOT) -> MapSpec:
    """``T(x) = x (1 + (2x)**q)`` on ``[0, 1/2)`` and ``2x - 1`` on ``[1/2, 1]``.

    Declared of class ``H(alpha, 1/2 + 1/2**(1 + alpha))``: the right branch
    halves distances and the left one is 1-Lipschitz.  Also of class V.
    """
    if not q > 0:
        raise DomainError(f"Pomeau-Manneville parameter q must be positive, got {q}")
    q = float(q)
    scale = 2.0 ** q

    def forward(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.5, x * (1.0 + scale * x ** q), 2.0 * x - 1.0)

    def right(x):
        return (np.asarray(x, dtype=float) + 1.0) / 2.0

    def theta_of(a):
        return 0.5 + 0.5 ** (1.0 + a)

    return MapSpec(
        family="pomeau_manneville",
        parameters={"q": q},
        domain=(0.0, 1.0),
        branches=(_pm_left_branch(q, tol), right),
        forward=forward,
        holder=(float(alpha), theta_of(alpha)),
        class_v=True,
        # b_1(1) = 1/2 but T(1/2) = 0
        exceptional_points=(1.0,),
        theta_of=theta_of,
    )


def make_doubling(variant: str, alpha: float = 1.0) -> MapSpec:
    """The circle, tent and interval versions of the doubling map, all ``H(alpha, 2**-alpha)``."""

    def theta_of(a):
        return 0.5 ** a

    if variant == "circle":
        def frac(x):
            return np.mod(np.asarray(x, dtype=float), 1.0)

        return MapSpec(
            family="doubling",
            parameters={"variant": variant},
            domain=(0.0, 1.0),
            branches=(lambda x: frac(x) / 2.0, lambda x: frac(x) / 2.0 + 0.5),
            forward=lambda x: np.mod(2.0 * np.asarray(x, dtype=float), 1.0),
            holder=(float(alpha), theta_of(alpha)),
            class_v=False,
            metric="circle",
            theta_of=theta_of,
        )
    if variant == "tent":
        return MapSpec(
            family="doubling",
            parameters={"variant": variant},
            domain=(0.0, 1.0),
            branches=(lambda x: np.asarray(x, dtype=float) / 2.0, lambda x: 1.0 - np.asarray(x, dtype=float) / 2.0),
            forward=_tent_forward,
            holder=(float(alpha), theta_of(alpha)),
            class_v=True,
            theta_of=theta_of,
        )
    if variant == "interval":
        return MapSpec(
            family="doubling",
            parameters={"variant": variant},
            domain=(0.0, 1.0),
            branches=(lambda x: np.asarray(x, dtype=float) / 2.0, lambda x: np.asarray(x, dtype=float) / 2.0 + 0.5),
            forward=lambda x: np.where(np.asarray(x) < 0.5, 2.0 * np.asarray(x, dtype=float), 2.0 * np.asarray(x, dtype=float) - 1.0),
            holder=(float(alpha), theta_of(alpha)),
            class_v=True,
            # D_i(b_1(1)) = D_i(1/2) = 0
            exceptional_points=(1.0,),
            theta_of=theta_of,
        )
    raise UsageError(f"unknown doubling variant {variant!r}; expected circle, tent or interval")


def _tent_forward(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.5, 2.0 * x, 2.0 - 2.0 * x)


def make_unimodal(
    c: float,
    rising: Branch,
    falling: Branch,
    domain: tuple[float, float] = (0.0, 1.0),
    n_check: int = 1001,
    tol: float = EPS_ROOT,
    family: str = "unimodal",
    parameters: dict | None = None,
) -> MapSpec:
    """2-to-1 unimodal map: ``rising`` maps ``[a, c]`` onto ``[a, b]`` increasingly,
    ``falling`` maps ``[c, b]`` onto ``[a, b]`` decreasingly.

    Monotonicity and surjectivity are checked on ``n_check`` sample points;
    failures raise :class:`ValidationError` with witness points attached.
    """
    a, b = map(float, domain)
    c = float(c)
    if not a < c < b:
        raise DomainError(f"turning point must lie strictly inside ({a}, {b}), got {c}")
    slack = 1e3 * tol * (b - a) + 1e-12
    left = np.linspace(a, c, n_check)
    right = np.linspace(c, b, n_check)
    up = np.asarray(rising(left), dtype=float)
    down = np.asarray(falling(right), dtype=float)

    witnesses = []
    bad = np.flatnonzero(np.diff(up) <= 0)
    witnesses += [("rising not increasing", float(left[i])) for i in bad[:5]]
    bad = np.flatnonzero(np.diff(down) >= 0)
    witnesses += [("falling not decreasing", float(right[i])) for i in bad[:5]]
    if abs(up[0] - a) > slack:
        witnesses.append(("rising(a) != a", a))
    if abs(up[-1] - b) > slack:
        witnesses.append(("rising(c) != b", c))
    if abs(down[0] - b) > slack:
        witnesses.append(("falling(c) != b", c))
    if abs(down[-1] - a) > slack:
        witnesses.append(("falling(b) != a", b))
    if witnesses:
        raise ValidationError("unimodal map failed monotonicity/surjectivity checks", witnesses=witnesses)

    def forward(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= c, rising(np.minimum(x, c)), falling(np.maximum(x, c)))

    def b1(x):
        return bisect_monotone(rising, a, c, np.clip(x, a, b), increasing=True, tol=tol)

    def b2(x):
        return bisect_monotone(falling, c, b, np.clip(x, a, b), increasing=False, tol=tol)

    return MapSpec(
        family=family,
        parameters=dict(parameters) if parameters is not None else {"c": c},
        domain=(a, b),
        branches=(b1, b2),
        forward=forward,
        class_v=True,
    )


def make_tent(tol: float = EPS_ROOT) -> MapSpec:
    """Full tent map on ``[0, 1]`` built through :func:`make_unimodal`."""
    return make_unimodal(0.5, lambda x: 2.0 * np.asarray(x), lambda x: 2.0 - 2.0 * np.asarray(x), tol=tol, family="tent", parameters={})


def make_logistic(tol: float = EPS_ROOT) -> MapSpec:
    """Full logistic map ``4x(1 - x)`` on ``[0, 1]``."""

    def f(x):
        x = np.asarray(x, dtype=float)
        return 4.0 * x * (1.0 - x)

    return make_unimodal(0.5, f, f, tol=tol, family="logistic", parameters={})


_FAMILIES = {
    "pomeau_manneville": lambda params: make_pomeau_manneville(float(params["q"])),
    "doubling": lambda params: make_doubling(str(params["variant"])),
    "tent": lambda params: make_tent(),
    "logistic": lambda params: make_logistic(),
}


def map_from_dict(data: dict) -> MapSpec:
    """Rebuild a shipped family from its JSON description.

    When ``alpha``/``theta`` are present they become the declared Hölder
    class; ``theta`` may be omitted for families with a known formula.
    """
    try:
        family = data["family"]
    except KeyError:
        raise ValidationError("map JSON is missing field 'family'") from None
    if family not in _FAMILIES:
        raise ValidationError(f"unknown map family {family!r}; known: {sorted(_FAMILIES)}")
    params = data.get("parameters", {}) or {}
    try:
        spec = _FAMILIES[family](params)
    except KeyError as exc:
        raise ValidationError(f"map family {family!r} needs parameter {exc.args[0]!r}") from None
    if "domain" in data and data["domain"] is not None and tuple(map(float, data["domain"])) != spec.domain:
        raise ValidationError(f"family {family!r} lives on {list(spec.domain)}, not {data['domain']}")
    alpha = data.get("alpha")
    theta = data.get("theta")
    if alpha is not None:
        spec = spec.with_holder(float(alpha), None if theta is None else float(theta))
    elif theta is not None:
        raise ValidationError("'theta' given without 'alpha'")
    if data.get("exceptional_points") is not None:
        spec = replace(spec, exceptional_points=tuple(data["exceptional_points"]))
    return spec


def map_from_json(text: str) -> MapSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"map JSON line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return map_from_dict(data)


# checks --------------------------------------------------------------------


def branch_consistency(spec: MapSpec, x) -> float:
    """Largest ``d(T(b_j(x)), x)`` over non-exceptional ``x`` and all branches."""
    x = np.asarray(x, dtype=float)
    x = x[~spec.is_exceptional(x)]
    if x.size == 0:
        return 0.0
    images = spec.branch_values(x)
    return float(np.max(spec.distance(spec.forward(images), x[None, :])))


def branch_images(spec: MapSpec, n: int = 2001) -> list[tuple[float, float]]:
    """Sampled image intervals ``I_j`` of the branches."""
    a, b = spec.domain
    vals = spec.branch_values(np.linspace(a, b, n))
    return [(float(v.min()), float(v.max())) for v in vals]


def check_class_v(spec: MapSpec, n: int = 2001, tol: float = 1e3 * EPS_ROOT, gap_tol: float = 1e-7) -> float:
    """Verify monotone branches whose images tile the domain.

    Returns the total overlap length of the sorted images; raises
    :class:`ValidationError` when a branch is not monotone, when the images
    overlap by more than ``tol``, or leave a gap wider than ``gap_tol``.
    Gaps get the looser tolerance: at a quadratic turning point the inverse
    branch is only resolved to about the square root of machine precision.
    """
    a, b = spec.domain
    xs = np.linspace(a, b, n)
    vals = spec.branch_values(xs)
    witnesses = []
    for j, v in enumerate(vals):
        d = np.diff(v)
        if not (np.all(d >= -tol) or np.all(d <= tol)):
            witnesses.append((f"branch {j} not monotone", float(xs[np.argmax(np.abs(np.diff(np.sign(d))))])))
    images = sorted(branch_images(spec, n))
    overlap = 0.0
    if abs(images[0][0] - a) > gap_tol:
        witnesses.append(("images miss the left end", a))
    if abs(images[-1][1] - b) > gap_tol:
        witnesses.append(("images miss the right end", b))
    for (lo0, hi0), (lo1, hi1) in zip(images, images[1:]):
        if lo1 > hi0 + gap_tol:
            witnesses.append(("gap between images", hi0))
        overlap += max(0.0, hi0 - lo1)
    if overlap > tol:
        witnesses.append(("images overlap", overlap))
    if witnesses:
        raise ValidationError("map is not of class V", witnesses=witnesses)
    return overlap


def _permutation_minimum(spec: MapSpec, by: np.ndarray, bz: np.ndarray, alpha: float) -> np.ndarray:
    """For each column pair, ``min_s mean_j d(by_j, bz_s(j))**alpha`` (exact)."""
    k = spec.k
    cost = spec.distance(by[:, None, :], bz[None, :, :]) ** alpha  # (k, k, n)
    if k <= _BRUTE_FORCE_MAX_K:
        rows = np.arange(k)
        best = np.full(by.shape[1], np.inf)
        for perm in itertools.permutations(range(k)):
            best = np.minimum(best, cost[rows, list(perm), :].mean(axis=0))
        return best
    out = np.empty(by.shape[1])
    for i in range(by.shape[1]):
        r, c = linear_sum_assignment(cost[:, :, i])
        out[i] = cost[r, c, i].mean()
    return out


def estimate_theta(
    spec: MapSpec,
    alpha: float,
    n_pairs: int,
    rng: np.random.Generator | int | None = 0,
    sweep: int = 64,
) -> float:
    """Empirical backward contraction factor in the metric ``d**alpha``.

    Maximum over ``n_pairs`` uniform random pairs plus a deterministic
    ``sweep x sweep`` grid of pairs of the exactly minimised permutation
    average.  It is a lower bound for the best ``theta`` of the map.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if n_pairs < 1:
        raise DomainError("n_pairs must be at least 1")
    rng = np.random.default_rng(rng)
    a, b = spec.domain
    y = rng.uniform(a, b, size=n_pairs)
    z = rng.uniform(a, b, size=n_pairs)
    if sweep:
        g = np.linspace(a, b, sweep)
        gy, gz = np.meshgrid(g, g, indexing="ij")
        y = np.concatenate([y, gy.ravel()])
        z = np.concatenate([z, gz.ravel()])
    d = spec.distance(y, z)
    keep = d > 0
    y, z, d = y[keep], z[keep], d[keep]
    if y.size == 0:
        return 0.0
    ratios = _permutation_minimum(spec, spec.branch_values(y), spec.branch_values(z), alpha) / d ** alpha
    return float(ratios.max())
