"""Grid-sampled functions and their Hölder / p-variation norms.

All seminorms are evaluated on the sample grid, so for a function known only
through its samples they are lower bounds of the continuum quantities (exact
for piecewise-linear data with ``alpha = 1``, and for p-variation of
piecewise-constant data).

Norm conventions::

    ||f||_Hol(alpha) = ||f||_inf + diam(domain)**alpha * Hol_alpha(f)
    ||f||_BV_p       = ||f||_inf + BV_p(f)
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CapabilityError, DomainError, InequalityViolation, ValidationError
from .tolerances import EPS_NUM

INTERP_LINEAR = "linear"
INTERP_CONSTANT = "constant"
_INTERP_ALIASES = {
    "linear": INTERP_LINEAR,
    "piecewise-linear": INTERP_LINEAR,
    "constant": INTERP_CONSTANT,
    "piecewise-constant": INTERP_CONSTANT,
    "piecewise-constant-left": INTERP_CONSTANT,
}

# Rows of the pairwise Hölder table processed at once; bounds memory to ~8 MB.
_HOLDER_CHUNK = 1 << 20


def normalize_interp(tag: str) -> str:
    try:
        return _INTERP_ALIASES[tag]
    except KeyError:
        raise ValidationError(f"unknown interpolation rule {tag!r}") from None


@dataclass(frozen=True)
class Space:
    """Function-space tag: ``Space("hol", alpha)`` or ``Space("bvp", p)``."""

    kind: str
    param: float

    def __post_init__(self):
        if self.kind == "hol":
            if not 0 < self.param <= 1:
                raise DomainError(f"Hölder exponent must lie in (0, 1], got {self.param}")
        elif self.kind == "bvp":
            if not self.param >= 1 or math.isinf(self.param):
                raise DomainError(f"p-variation exponent must be a finite p >= 1, got {self.param}")
        else:
            raise ValidationError(f"unknown space kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str | "Space") -> "Space":
        """Parse ``"hol:ALPHA"``, ``"lip"``, ``"bvp:P"`` or ``"bv"``."""
        if isinstance(text, Space):
            return text
        raw = text.strip().lower()
        if raw in ("lip", "hol"):
            return cls("hol", 1.0)
        if raw in ("bv", "bvp"):
            return cls("bvp", 1.0)
        kind, sep, value = raw.partition(":")
        if not sep or kind not in ("hol", "bvp"):
            raise ValidationError(f"space must look like 'hol:ALPHA' or 'bvp:P', got {text!r}")
        try:
            param = float(value)
        except ValueError:
            raise ValidationError(f"bad space parameter in {text!r}") from None
        return cls(kind, param)

    @property
    def is_holder(self) -> bool:
        return self.kind == "hol"

    def diam_factor(self, diam: float) -> float:
        return diam ** self.param if self.is_holder else 1.0

    def label(self) -> str:
        return f"Hol({self.param:g})" if self.is_holder else f"BV_{self.param:g}"

    def __str__(self):
        return f"{self.kind}:{self.param:g}"


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``values[i] = f(grid[i])`` plus an interpolation rule.

    ``domain`` defaults to ``(grid[0], grid[-1])``; it only matters for the
    ``(diam domain)**alpha`` factor of Hölder norms.
    """

    grid: np.ndarray
    values: np.ndarray
    interp: str = INTERP_LINEAR
    domain: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if grid.size == 0:
            raise ValidationError("grid must contain at least one point")
        if grid.shape != values.shape:
            raise ValidationError(f"grid has {grid.size} points but {values.size} values were given")
        if np.any(np.diff(grid) <= 0):
            bad = np.flatnonzero(np.diff(grid) <= 0)
            raise ValidationError("grid must be strictly increasing", witnesses=bad.tolist())
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(grid)):
            raise ValidationError("grid and values must be finite")
        domain = self.domain if self.domain is not None else (float(grid[0]), float(grid[-1]))
        a, b = float(domain[0]), float(domain[1])
        if a > grid[0] or b < grid[-1]:
            raise ValidationError(f"grid escapes the domain [{a}, {b}]")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "interp", normalize_interp(self.interp))
        object.__setattr__(self, "domain", (a, b))

    @classmethod
    def from_callable(cls, func: Callable, grid, interp: str = INTERP_LINEAR, domain=None) -> "GridFunction":
        grid = np.asarray(grid, dtype=float)
        values = np.broadcast_to(np.asarray(func(grid), dtype=float), grid.shape)
        return cls(grid, values, interp, domain)

    @classmethod
    def constant(cls, c: float, grid, interp: str = INTERP_LINEAR, domain=None) -> "GridFunction":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.full(grid.shape, float(c)), interp, domain)

    def __len__(self):
        return self.grid.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.interp == INTERP_LINEAR:
            return np.interp(x, self.grid, self.values)
        idx = np.searchsorted(self.grid, x, side="right") - 1
        return self.values[np.clip(idx, 0, self.grid.size - 1)]

    @property
    def diam(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.interp, self.domain)

    def _check_same_grid(self, other: "GridFunction"):
        if self.grid.shape != other.grid.shape or not np.array_equal(self.grid, other.grid):
            raise DomainError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    # serialization -------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, v in zip(self.grid, self.values):
            writer.writerow([repr(float(x)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, interp: str = INTERP_LINEAR, domain=None) -> "GridFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if rows and rows[0] and not _is_number(rows[0][0]):
            rows = rows[1:]
        xs, vs = [], []
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValidationError(f"CSV line {lineno}: expected 2 columns, got {len(row)}")
            try:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
            except ValueError:
                raise ValidationError(f"CSV line {lineno}: non-numeric entry {row!r}") from None
        return cls(np.array(xs), np.array(vs), interp, domain)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "interp": self.interp,
            "domain": list(self.domain),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridFunction":
        try:
            return cls(data["grid"], data["values"], data.get("interp", INTERP_LINEAR), data.get("domain"))
        except KeyError as exc:
            raise ValidationError(f"grid function JSON is missing field {exc.args[0]!r}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class RegularityNorm:
    space: Space
    seminorm: float
    sup_norm: float
    full_norm: float
    diam_factor: float

    def to_dict(self) -> dict:
        return {
            "space": str(self.space),
            "seminorm": self.seminorm,
            "sup": self.sup_norm,
            "full": self.full_norm,
        }


# seminorms ---------------------------------------------------------------


def holder_seminorm(f: GridFunction, alpha: float) -> float:
    """Largest ``|f(x_i) - f(x_j)| / |x_i - x_j|**alpha`` over all grid pairs."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    x, v = f.grid, f.values
    n = x.size
    if n < 2:
        raise DomainError("Hölder seminorm needs at least two grid points")
    if alpha == 1:
        # any chord slope is a convex combination of adjacent slopes
        return float(np.max(np.abs(np.diff(v)) / np.diff(x)))
    best = 0.0
    rows = max(1, _HOLDER_CHUNK // n)
    for start in range(0, n - 1, rows):
        stop = min(n - 1, start + rows)
        xi = x[start:stop, None]
        vi = v[start:stop, None]
        dx = x[None, :] - xi
        dv = np.abs(v[None, :] - vi)
        upper = dx > 0
        ratio = np.divide(dv, np.abs(dx) ** alpha, out=np.zeros_like(dv), where=upper)
        best = max(best, float(ratio.max()))
    return best


def _pth_power_increments(values: np.ndarray, p: float) -> np.ndarray:
    return np.abs(np.diff(values)) ** p


def turning_points(values: np.ndarray) -> np.ndarray:
    """Endpoints and local extrema of a sequence, repeated values collapsed.

    A chain point strictly inside a monotone run can be slid to an end of
    the run without lowering ``|a - v|**p + |v - b|**p`` (convex in ``v``),
    so the p-variation only sees these values.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return values
    keep = np.concatenate([[True], np.diff(values) != 0])
    v = values[keep]
    if v.size < 3:
        return v
    d = np.diff(v)
    turn = d[:-1] * d[1:] < 0
    return v[np.concatenate([[True], turn, [True]])]


def bvp_seminorm(f: GridFunction | Sequence[float], p: float) -> float:
    """Total p-variation of the sampled values.

    Dynamic programme over chains of grid indices: ``acc[j]`` is the largest
    sum of p-th powers of increments along a chain ending at ``j``.  The
    p-th root is taken once at the end.  ``O(n**2)`` time.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    values = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    n = values.size
    if n < 2:
        return 0.0
    if p == 1:
        return float(np.abs(np.diff(values)).sum())
    values = turning_points(values)
    n = values.size
    if n < 2:
        return 0.0
    acc = np.zeros(n)
    for j in range(1, n):
        cand = acc[:j] + np.abs(values[j] - values[:j]) ** p
        acc[j] = cand.max()
    return float(acc.max() ** (1.0 / p))


@functools.lru_cache(maxsize=64)
def _subset_tables(n: int, include_endpoints: bool | None):
    """For every subset of ``range(n)``: which positions close a jump, and from where."""
    subsets = np.arange(1 << n, dtype=np.int64)
    mask = ((subsets[:, None] >> np.arange(n)) & 1).astype(bool)
    if include_endpoints is not None:
        has_ends = mask[:, 0] & mask[:, -1]
        mask = mask[has_ends] if include_endpoints else mask[~has_ends]
    idx = np.where(mask, np.arange(n), -1)
    # previous selected index strictly before each position
    prev = np.maximum.accumulate(idx, axis=1)
    prev = np.concatenate([np.full((mask.shape[0], 1), -1), prev[:, :-1]], axis=1)
    active = mask & (prev >= 0)
    prev = np.maximum(prev, 0)
    active.setflags(write=False)
    prev.setflags(write=False)
    return active, prev


def bvp_bruteforce_oracle(f: GridFunction | Sequence[float], p: float, include_endpoints: bool | None = None) -> float:
    """Exhaustive p-variation over every sub-partition of the grid.

    ``include_endpoints=True`` restricts to partitions containing the first
    and last grid point, ``False`` to the remaining ones, ``None`` takes all.
    Only intended as a test oracle: grids of at most 20 points.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    values = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    n = values.size
    if n > 20:
        raise CapabilityError(f"brute-force oracle limited to 20 points, got {n}")
    if n < 2:
        return 0.0
    active, prev = _subset_tables(n, include_endpoints)
    if active.shape[0] == 0:
        return 0.0
    jumps = np.abs(values[None, :] - values[prev]) ** p
    totals = np.where(active, jumps, 0.0).sum(axis=1)
    return float(totals.max() ** (1.0 / p))


def seminorm(f: GridFunction, space: Space | str) -> float:
    space = Space.parse(space)
    if space.is_holder:
        return holder_seminorm(f, space.param)
    return bvp_seminorm(f, space.param)


def norm(f: GridFunction, space: Space | str) -> RegularityNorm:
    space = Space.parse(space)
    semi = seminorm(f, space)
    factor = space.diam_factor(f.diam)
    sup = f.sup_norm
    return RegularityNorm(space, semi, sup, sup + factor * semi, factor)


def full_norm(f: GridFunction, space: Space | str) -> float:
    return norm(f, space).full_norm


# inequalities from the function-space layer ------------------------------


def holder_implies_bvp(f: GridFunction, alpha: float, eps: float = EPS_NUM) -> float:
    """Return ``Hol_alpha(f) * diam**alpha``, after checking it bounds ``BV_{1/alpha}(f)``."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    bound = holder_seminorm(f, alpha) * f.diam ** alpha
    bv = bvp_seminorm(f, 1.0 / alpha)
    if bv > bound + eps:
        raise InequalityViolation(f"BV_{1 / alpha:g}(f) = {bv} exceeds Hölder bound {bound}")
    return bound


def banach_product_check(f: GridFunction, g: GridFunction, space: Space | str, eps: float = EPS_NUM) -> tuple[float, float]:
    """Return ``(||fg||, ||f|| ||g||)`` and check submultiplicativity."""
    f._check_same_grid(g)
    space = Space.parse(space)
    lhs = full_norm(f * g, space)
    rhs = full_norm(f, space) * full_norm(g, space)
    if lhs > rhs + eps:
        raise InequalityViolation(f"||fg|| = {lhs} > ||f|| ||g|| = {rhs} in {space.label()}")
    return lhs, rhs


def centering_constant(phi: GridFunction) -> float:
    return 0.5 * (float(phi.values.max()) + float(phi.values.min()))


def centered_norm_excess(phi: GridFunction, space: Space | str, eps: float = EPS_NUM) -> float:
    """Full norm of ``phi - c`` with ``c`` the midrange of ``phi``.

    Checks ``||phi - c|| <= 1.5 * diam_factor * seminorm(phi)``.
    """
    space = Space.parse(space)
    centered = phi - centering_constant(phi)
    info = norm(centered, space)
    bound = 1.5 * info.diam_factor * info.seminorm
    if info.full_norm > bound + eps:
        raise InequalityViolation(f"centered norm {info.full_norm} exceeds 3/2 bound {bound}")
    return info.full_norm


def exp_distance(phi_centered_norm: float) -> float:
    """Operator-distance bound ``exp(x) - 1`` between ``L_phi`` and ``L_0``."""
    if phi_centered_norm < 0:
        raise DomainError(f"norm must be nonnegative, got {phi_centered_norm}")
    return math.expm1(phi_centered_norm)


# random test functions ---------------------------------------------------


def random_lipschitz_function(grid, rng: np.random.Generator, lip: float = 1.0, domain=None) -> GridFunction:
    """Piecewise-linear function with random slopes in ``[-lip, lip]``."""
    grid = np.asarray(grid, dtype=float)
    slopes = rng.uniform(-lip, lip, size=grid.size - 1)
    values = np.concatenate([[0.0], np.cumsum(slopes * np.diff(grid))])
    values += rng.uniform(-1.0, 1.0)
    return GridFunction(grid, values, INTERP_LINEAR, domain)


def random_step_function(grid, rng: np.random.Generator, n_jumps: int | None = None, domain=None) -> GridFunction:
    """Piecewise-constant function with a random number of random jumps plus small noise."""
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    if n_jumps is None:
        n_jumps = int(rng.integers(1, max(2, n // 8)))
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(n_jumps, n - 1), replace=False))
    levels = rng.normal(size=cuts.size + 1)
    values = np.repeat(levels, np.diff(np.concatenate([[0], cuts, [n]])))
    values = values + 0.05 * rng.normal(size=n)
    return GridFunction(grid, values, INTERP_CONSTANT, domain)
