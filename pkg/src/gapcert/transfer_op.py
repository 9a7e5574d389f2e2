"""Transfer operators of interval maps, their discretization and spectral data.

``L_phi f(x) = (1/k) sum_j exp(phi(b_j(x))) f(b_j(x))``.

The discretization is by collocation: on nodes ``x_0 < ... < x_m-1`` a
coefficient vector is read as a grid function (piecewise-linear or
piecewise-constant), and row ``i`` of the matrix evaluates ``L_phi`` of that
function at ``x_i`` exactly, using the true branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .errors import ConvergenceError, DomainError, GapCertError, UsageError, ValidationError
from .interval_maps import MapSpec
from .optimal_transport import DiscreteMeasure
from .regularity import (
    INTERP_CONSTANT,
    INTERP_LINEAR,
    GridFunction,
    Space,
    full_norm,
    normalize_interp,
    random_lipschitz_function,
    random_step_function,
    seminorm,
)
from .tolerances import EPS_EIG, EPS_NUM, TOL_DISC

Potential = GridFunction | Callable | float | None


def _potential_callable(phi: Potential) -> Callable[[np.ndarray], np.ndarray]:
    if phi is None:
        return lambda y: np.zeros_like(np.asarray(y, dtype=float))
    if isinstance(phi, (int, float)):
        c = float(phi)
        return lambda y: np.full(np.shape(y), c)
    if callable(phi):
        return phi
    raise ValidationError(f"cannot use {type(phi).__name__} as a potential")


def apply(spec: MapSpec, phi: Potential, f: GridFunction | Callable, x) -> np.ndarray | float:
    """Evaluate ``L_phi f`` at ``x`` (scalar or array)."""
    a, b = spec.domain
    xa = np.asarray(x, dtype=float)
    if np.any((xa < a) | (xa > b)):
        raise DomainError(f"evaluation point outside [{a}, {b}]")
    pot = _potential_callable(phi)
    ys = spec.branch_values(xa)
    out = np.mean(np.exp(pot(ys)) * f(ys), axis=0)
    return float(out) if np.ndim(x) == 0 else out


def node_grid(domain: tuple[float, float], m: int) -> np.ndarray:
    a, b = domain
    return np.linspace(a, b, m)


def interpolation_weights(grid: np.ndarray, y: np.ndarray, basis: str):
    """Columns and weights ``(cols, w)`` of shape ``(len(y), 2)`` reproducing ``Interp(v)(y)``."""
    m = grid.size
    if basis == INTERP_LINEAR:
        idx = np.clip(np.searchsorted(grid, y, side="right") - 1, 0, m - 2)
        t = np.clip((y - grid[idx]) / (grid[idx + 1] - grid[idx]), 0.0, 1.0)
        return np.stack([idx, idx + 1], axis=-1), np.stack([1.0 - t, t], axis=-1)
    idx = np.clip(np.searchsorted(grid, y, side="right") - 1, 0, m - 1)
    return np.stack([idx, idx], axis=-1), np.stack([np.ones_like(y), np.zeros_like(y)], axis=-1)


@dataclass(eq=False)
class DiscretizedOperator:
    """Collocation matrix of ``L_phi`` together with what produced it."""

    map: MapSpec
    potential: Potential
    grid: np.ndarray
    matrix: sparse.csr_matrix
    basis: str
    space: Space

    @property
    def m(self) -> int:
        return self.grid.size

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, v):
        return self.matrix @ v

    def grid_function(self, values) -> GridFunction:
        return GridFunction(self.grid, values, self.basis, self.map.domain)

    def sample(self, f) -> np.ndarray:
        """Coefficient vector of ``f`` (a GridFunction on this grid or a callable)."""
        if isinstance(f, GridFunction):
            if f.grid.size != self.m or not np.array_equal(f.grid, self.grid):
                raise DomainError("grid function does not live on the operator grid")
            return np.array(f.values)
        return np.asarray(f(self.grid), dtype=float) * np.ones(self.m)

    def norm(self, values) -> float:
        return full_norm(self.grid_function(values), self.space)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def export(self, path: str | Path) -> Path:
        """Dump the matrix: ``.npz`` (sparse), ``.npy`` (dense) or ``.csv`` (dense text)."""
        path = Path(path)
        if path.suffix == ".npz":
            sparse.save_npz(path, self.matrix)
        elif path.suffix == ".npy":
            np.save(path, self.dense())
        elif path.suffix == ".csv":
            np.savetxt(path, self.dense(), delimiter=",", fmt="%.17g")
        else:
            raise UsageError(f"unsupported matrix dump format {path.suffix!r}")
        return path


def assemble(
    spec: MapSpec,
    phi: Potential = None,
    m: int = 512,
    basis: str = INTERP_LINEAR,
    space: Space | str | None = None,
) -> DiscretizedOperator:
    """Collocation matrix ``A[i, :] . v = L_phi(Interp(v))(x_i)`` on ``m`` uniform nodes."""
    if m < 3:
        raise DomainError(f"grid needs at least 3 nodes, got {m}")
    basis = normalize_interp(basis)
    if space is None:
        space = Space("hol", 1.0) if basis == INTERP_LINEAR else Space("bvp", 1.0)
    space = Space.parse(space)
    grid = node_grid(spec.domain, m)
    pot = _potential_callable(phi)
    k = spec.k
    rows, cols, vals = [], [], []
    for j, branch in enumerate(spec.branches):
        y = np.asarray(branch(grid), dtype=float) * np.ones(m)
        bad = ~np.isfinite(y)
        if bad.any():
            raise GapCertError(f"branch {j} failed at node index {int(np.flatnonzero(bad)[0])}")
        weight = np.exp(pot(y)) / k
        c, w = interpolation_weights(grid, y, basis)
        rows.append(np.repeat(np.arange(m), 2))
        cols.append(c.ravel())
        vals.append((w * weight[:, None]).ravel())
    mat = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
    ).tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return DiscretizedOperator(spec, phi, grid, mat, basis, space)


@dataclass
class SpectralData:
    lam: float
    h: GridFunction
    nu: DiscreteMeasure
    mu: DiscreteMeasure
    subdominant_modulus: float
    iterations: int
    residuals: tuple[float, float]
    subdominant_iterations: int = 0

    @property
    def gap_ratio(self) -> float:
        """``subdominant / lambda``; ``1 - gap_ratio`` is the observed gap size."""
        return self.subdominant_modulus / self.lam

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "subdominant": self.subdominant_modulus,
            "gap_ratio": self.gap_ratio,
            "residuals": list(self.residuals),
            "iterations": self.iterations,
            "subdominant_iterations": self.subdominant_iterations,
        }


def _power_right(mat, tol: float, max_iter: int):
    v = np.ones(mat.shape[0])
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = mat @ v
        lam = float(np.max(np.abs(w)))
        if lam == 0:
            raise ConvergenceError("operator annihilated the constant function", iterations=it)
        res = float(np.max(np.abs(w - lam * v)))
        v = w / lam
        if res <= tol * lam:
            return lam, v, it
    raise ConvergenceError(f"right power iteration did not converge in {max_iter} steps", residuals=res, iterations=max_iter)


def _power_left(mat_t, tol: float, max_iter: int):
    u = np.full(mat_t.shape[0], 1.0 / mat_t.shape[0])
    for it in range(1, max_iter + 1):
        w = mat_t @ u
        lam = float(w.sum())
        res = float(np.sum(np.abs(w - lam * u)))
        u = w / lam
        if res <= tol * lam:
            return lam, u, it
    raise ConvergenceError(f"left power iteration did not converge in {max_iter} steps", residuals=res, iterations=max_iter)


def subdominant_modulus(
    op: DiscretizedOperator,
    lam: float,
    h: np.ndarray,
    nu: np.ndarray,
    max_iter: int = 2000,
    min_iter: int = 60,
    stall_tol: float = 1e-7,
    seed: int = 20240101,
) -> tuple[float, int]:
    """Decay rate of ``g -> A(g - nu(g) h) / lam`` measured in the operator's full norm.

    The iterate is renormalised every step; the log-norm increments are
    averaged over the second half of the run, which also handles complex
    subdominant pairs.  Returns ``(modulus, iterations)``.
    """
    rng = np.random.default_rng(seed)
    mat = op.matrix
    nh = float(nu @ h)
    g = rng.standard_normal(op.m)
    g = g - (nu @ g) / nh * h
    log_norms = [0.0]
    n0 = op.norm(g)
    if n0 == 0:
        return 0.0, 0
    g = g / n0
    prev_est = None
    est = 0.0
    for it in range(1, max_iter + 1):
        g = mat @ g / lam
        g = g - (nu @ g) / nh * h
        size = op.norm(g)
        if size == 0 or not math.isfinite(size):
            return 0.0, it
        log_norms.append(log_norms[-1] + math.log(size))
        g = g / size
        if it >= min_iter and it % 10 == 0:
            half = it // 2
            est = math.exp((log_norms[it] - log_norms[half]) / (it - half))
            if prev_est is not None and abs(est - prev_est) <= stall_tol * max(est, 1e-300):
                return est * lam, it
            prev_est = est
    return est * lam, max_iter


def eigendata(
    op: DiscretizedOperator,
    tol: float = EPS_EIG,
    max_iter: int = 100_000,
    sub_max_iter: int = 2000,
) -> SpectralData:
    """Leading eigentriple ``(lambda, h, nu)``, the RPF measure and the subdominant modulus.

    ``h`` is normalised by ``nu(h) = 1`` and ``nu`` is a probability vector.
    """
    mat = op.matrix
    lam, h, it_r = _power_right(mat, tol, max_iter)
    lam_l, nu, it_l = _power_left(mat.T.tocsr(), tol, max_iter)
    h = h / float(nu @ h)
    res_r = float(np.max(np.abs(mat @ h - lam * h)))
    res_l = float(np.sum(np.abs(mat.T @ nu - lam * nu)))
    if np.any(h <= 0):
        raise ValidationError("leading eigenfunction is not positive")
    sub, it_s = subdominant_modulus(op, lam, h, nu, max_iter=sub_max_iter)
    h_fun = op.grid_function(h)
    nu_meas = DiscreteMeasure(op.grid, nu)
    sd = SpectralData(
        lam=lam,
        h=h_fun,
        nu=nu_meas,
        mu=DiscreteMeasure(op.grid, nu),  # replaced just below
        subdominant_modulus=sub,
        iterations=max(it_r, it_l),
        residuals=(res_r, res_l),
        subdominant_iterations=it_s,
    )
    sd.mu = rpf_measure(sd)
    return sd


def rpf_measure(sd: SpectralData) -> DiscreteMeasure:
    """``d mu = h d nu`` normalised to a probability."""
    h_at = sd.h(sd.nu.support)
    if np.any(h_at <= 0):
        raise ValidationError("eigenfunction must be positive to build the RPF measure")
    w = h_at * sd.nu.weights
    return DiscreteMeasure(sd.nu.support, w / w.sum())


def invariance_residual(
    spec: MapSpec,
    mu: DiscreteMeasure,
    tests: Sequence[GridFunction],
    space: Space | str = "hol:1",
) -> float:
    """``max_f |mu(f o T) - mu(f)| / ||f||`` over the test functions."""
    space = Space.parse(space)
    pushed = spec.forward(mu.support)
    worst = 0.0
    for f in tests:
        size = full_norm(f, space)
        if size == 0:
            continue
        worst = max(worst, abs(mu.integrate(f(pushed)) - mu.integrate(f)) / size)
    return worst


@dataclass
class RatioReport:
    """Result of a sampled inequality check ``observed <= bound + tol``."""

    name: str
    max_ratio: float
    bound: float
    tol: float
    samples: int
    skipped: int
    passed: bool
    ratios: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "tol": self.tol,
            "samples": self.samples,
            "skipped": self.skipped,
            "passed": self.passed,
        }


def lasota_yorke_check(
    spec: MapSpec,
    space: Space | str,
    samples: int,
    m: int = 512,
    rng: np.random.Generator | int | None = 0,
    tol: float = TOL_DISC,
    functions: Sequence[GridFunction] | None = None,
) -> RatioReport:
    """Sampled ``seminorm(L_0 f) / seminorm(f)`` against ``theta`` (Hölder) or ``k**(-1/p)`` (BV_p).

    Hölder checks use piecewise-linear random Lipschitz functions; BV_p
    checks use piecewise-constant step functions, for which the discrete
    p-variation cannot be inflated by interpolation.  Constant samples are
    skipped.
    """
    space = Space.parse(space)
    if space.is_holder:
        if spec.holder is None and spec.theta_of is None:
            raise UsageError(f"map {spec.family!r} is not of class H")
        bound = spec.theta(space.param)
        basis = INTERP_LINEAR
    else:
        if not spec.class_v:
            raise UsageError(f"map {spec.family!r} is not of class V")
        bound = spec.k ** (-1.0 / space.param)
        basis = INTERP_CONSTANT
    op = assemble(spec, None, m, basis, space)
    rng = np.random.default_rng(rng)
    if functions is None:
        make = random_lipschitz_function if space.is_holder else random_step_function
        functions = [make(op.grid, rng, domain=spec.domain) for _ in range(samples)]
    ratios, skipped = [], 0
    for f in functions:
        before = seminorm(f, space)
        if before == 0:
            skipped += 1
            continue
        after = seminorm(op.grid_function(op @ op.sample(f)), space)
        ratios.append(after / before)
    top = max(ratios, default=0.0)
    return RatioReport(f"lasota-yorke {space.label()}", top, bound, tol, len(functions), skipped, top <= bound + tol, ratios)


@dataclass
class DecayReport:
    delta: float
    sup_constant: float
    sup_constant_projection: float
    empirical_rate: float
    n_max: int
    trials: int
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _random_test_vector(op: DiscretizedOperator, rng: np.random.Generator) -> np.ndarray:
    if op.basis == INTERP_LINEAR:
        return random_lipschitz_function(op.grid, rng, domain=op.map.domain).values
    return random_step_function(op.grid, rng, domain=op.map.domain).values


def gap_decay_check(
    op: DiscretizedOperator,
    sd: SpectralData,
    delta: float,
    n_max: int = 60,
    trials: int = 50,
    rng: np.random.Generator | int | None = 0,
    constant_bound: float = 10.0,
) -> DecayReport:
    """``sup_n ||A^n f|| / (lambda^n (1 - delta)^n ||f||)`` over random ``nu``-mean-zero ``f``.

    The same supremum is also computed for the projected form
    ``R^n f = A^n (f - nu(f) h)`` with unconstrained ``f``; both must stay
    finite when a gap of size ``delta`` holds.  The check passes when the
    mean-zero supremum is at most ``constant_bound``.
    """
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    rng = np.random.default_rng(rng)
    nu = sd.nu.weights
    h = sd.h.values
    scale = sd.lam * (1.0 - delta)
    sup_zero = sup_proj = 0.0
    rate = 0.0
    used = 0
    for _ in range(trials):
        raw = _random_test_vector(op, rng)
        for kind in ("zero-mean", "projection"):
            if kind == "zero-mean":
                f = raw - float(nu @ raw)
                g = f
            else:
                f = raw
                g = raw - float(nu @ raw) * h
            size = op.norm(f)
            if size == 0:
                continue
            worst = op.norm(g) / size
            v = g
            for _n in range(n_max):
                v = (op @ v) / scale
                worst = max(worst, op.norm(v) / size)
            if kind == "zero-mean":
                sup_zero = max(sup_zero, worst)
                used += 1
                last = op.norm(v) / size
                if last > 0:
                    rate = max(rate, (1.0 - delta) * last ** (1.0 / n_max))
            else:
                sup_proj = max(sup_proj, worst)
    return DecayReport(
        delta=delta,
        sup_constant=sup_zero,
        sup_constant_projection=sup_proj,
        empirical_rate=rate,
        n_max=n_max,
        trials=used,
        bound=constant_bound,
        passed=bool(np.isfinite(sup_zero) and sup_zero <= constant_bound),
    )


def correlation_sequence(
    op: DiscretizedOperator,
    sd: SpectralData,
    f,
    g,
    n_max: int,
) -> np.ndarray:
    """``C_n = |lambda^-n nu(f . A^n(g h)) - mu(f) mu(g)|`` for ``n = 0..n_max``."""
    fv = op.sample(f)
    gv = op.sample(g)
    nu = sd.nu.weights
    mu = sd.mu.weights
    base = float(mu @ fv) * float(mu @ gv)
    v = gv * sd.h.values
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        out[n] = abs(float(nu @ (fv * v)) - base)
        v = (op @ v) / sd.lam
    return out


def decay_envelope_rate(seq: np.ndarray, start: int = 1, floor: float = 1e-13) -> float:
    """Geometric decay rate of the running-max envelope of a correlation sequence.

    Terms below ``floor`` are treated as already decayed.
    """
    seq = np.asarray(seq, dtype=float)
    env = np.maximum.accumulate(seq[::-1])[::-1]
    idx = np.flatnonzero(env[start:] > floor) + start
    if idx.size < 2:
        return 0.0
    slope = np.polyfit(idx, np.log(env[idx]), 1)[0]
    return float(math.exp(slope))
