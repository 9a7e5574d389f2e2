"""Spectral-gap certificates for transfer operators with almost constant potentials.

The chain of estimates, for an unperturbed Markov operator ``L_0`` that
contracts the seminorm ``V`` by ``theta`` and satisfies
``||f||_inf <= D V(f)`` on mean-zero functions:

1. base gap ``delta0 = (1 - theta) / (1 + D theta)``;
2. projection bound ``||pi_0|| <= (2D + 2) / (D + 2)``;
3. any ``L`` with ``||L - L_0|| <= delta0 (delta0 - delta) / (6 (1 + delta0 - delta) tau0 ||pi_0||)``
   keeps a gap of size ``delta`` (constant 1);
4. ``||L_phi - L_0|| <= exp(||phi - c||) - 1`` and
   ``||phi - c|| <= 3/2 diam**alpha Hol_alpha(phi)`` (resp. ``3/2 BV_p(phi)``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError, InequalityViolation, UsageError
from .interval_maps import MapSpec, check_class_v
from .regularity import Space, exp_distance
from .tolerances import EPS_NUM

CERTIFIED = "certified"
NOT_CERTIFIED = "not-certified"

# D = 1 for both Hölder (a mean-zero continuous f vanishes somewhere) and
# BV_p (a mean-zero f changes sign); tau0 = 1 since the eigenvector is the
# constant 1 and the eigenform a probability.
D_SUP = 1.0
TAU0 = 1.0


def doeblin_fortet_gap(theta: float, D: float) -> float:
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    return (1.0 - theta) / (1.0 + D * theta)


def projection_norm_bound(D: float) -> float:
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    return (2.0 * D + 2.0) / (D + 2.0)


def perturbation_radius(delta0: float, delta: float, tau0: float, pi_norm: float) -> float:
    """Admissible ``||L - L_0||`` that preserves a gap of size ``delta`` with constant 1."""
    if not 0 < delta0 < 1:
        raise DomainError(f"delta0 must lie in (0, 1), got {delta0}")
    if not 0 <= delta < delta0:
        raise DomainError(f"delta must satisfy 0 <= delta < delta0 = {delta0}, got {delta}")
    if tau0 < 1 or pi_norm < 1:
        raise DomainError(f"tau0 and pi_norm must be >= 1, got {tau0}, {pi_norm}")
    room = delta0 - delta
    return delta0 * room / (6.0 * (1.0 + room) * tau0 * pi_norm)


def certified_gap_size(delta0: float, epsilon: float, tau0: float, pi_norm: float) -> float:
    """Largest ``delta`` whose perturbation radius still covers ``epsilon``.

    Inverts :func:`perturbation_radius` in ``delta``.  Returns ``0.0`` when
    ``epsilon`` reaches the ``delta = 0`` radius, meaning no gap is certified.
    """
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    radius0 = perturbation_radius(delta0, 0.0, tau0, pi_norm)
    if epsilon >= radius0:
        return 0.0
    c = 6.0 * tau0 * pi_norm
    ce = c * epsilon
    delta = (delta0 * delta0 - ce * (1.0 + delta0)) / (delta0 - ce)
    return min(max(delta, 0.0), delta0)


def _threshold_from_radius(radius: float, scale: float) -> float:
    return (2.0 / (3.0 * scale)) * math.log1p(radius)


def _pipeline_radius(theta: float) -> float:
    delta0 = doeblin_fortet_gap(theta, D_SUP)
    return perturbation_radius(delta0, 0.0, TAU0, projection_norm_bound(D_SUP))


def holder_threshold(alpha: float, theta: float, diam: float) -> float:
    """Largest ``Hol_alpha(phi)`` certified for a map of class ``H(alpha, theta)``::

        2 / (3 diam**alpha) * log(1 + (1 - theta)**2 / (16 (1 + theta)))
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if not diam > 0:
        raise DomainError(f"diameter must be positive, got {diam}")
    scale = diam ** alpha
    closed = (2.0 / (3.0 * scale)) * math.log1p((1.0 - theta) ** 2 / (16.0 * (1.0 + theta)))
    assembled = _threshold_from_radius(_pipeline_radius(theta), scale)
    if abs(closed - assembled) > EPS_NUM * max(1.0, abs(closed)):
        raise InequalityViolation(f"closed-form threshold {closed} disagrees with pipeline {assembled}")
    return closed


def bvp_threshold(k: float, p: float) -> float:
    """Largest ``BV_p(phi)`` certified for a class-V map with ``k`` branches::

        2/3 * log(1 + (s - 1)**2 / (16 s (s + 1))),   s = k**(1/p)

    ``k = math.inf`` gives the limit ``2/3 log(17/16)``.
    """
    if not k >= 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if not p >= 1 or math.isinf(p):
        raise DomainError(f"p must be a finite p >= 1, got {p}")
    if math.isinf(k):
        return (2.0 / 3.0) * math.log1p(1.0 / 16.0)
    s = k ** (1.0 / p)
    closed = (2.0 / 3.0) * math.log1p((s - 1.0) ** 2 / (16.0 * s * (s + 1.0)))
    assembled = _threshold_from_radius(_pipeline_radius(1.0 / s), 1.0)
    if abs(closed - assembled) > EPS_NUM * max(1.0, abs(closed)):
        raise InequalityViolation(f"closed-form threshold {closed} disagrees with pipeline {assembled}")
    return closed


@dataclass(frozen=True)
class Certificate:
    """Every intermediate quantity of one certification, for audit."""

    map_family: str
    map_parameters: dict
    space: str
    theta: float
    D: float
    delta0: float
    pi_bound: float
    tau0: float
    radius: float
    threshold: float
    phi_seminorm: float
    centered_norm_bound: float
    epsilon: float
    certified_delta: float
    status: str
    requested_delta: float | None = None
    requested_radius: float | None = None
    requested_ok: bool | None = None

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    def to_dict(self) -> dict:
        return asdict(self)


def contraction_factor(spec: MapSpec, space: Space) -> float:
    """``theta`` for the pair (map, space): Hölder class factor, or ``k**(-1/p)`` for class V."""
    if space.is_holder:
        if spec.holder is None and spec.theta_of is None:
            raise UsageError(f"map {spec.family!r} ({spec.class_tag}) is not of class H; cannot certify in {space.label()}")
        return spec.theta(space.param)
    if not spec.class_v:
        raise UsageError(f"map {spec.family!r} ({spec.class_tag}) is not of class V; cannot certify in {space.label()}")
    return spec.k ** (-1.0 / space.param)


def certify(
    spec: MapSpec,
    space: Space | str,
    phi_seminorm_bound: float,
    requested_delta: float | None = None,
    verify_class_v: bool = True,
) -> Certificate:
    """Certify a spectral gap of ``L_phi`` for every potential with the given seminorm bound.

    The bound is a declared upper bound on ``Hol_alpha(phi)`` or
    ``BV_p(phi)``; grid estimates are not used here.  When
    ``requested_delta`` is given the certificate also records whether that
    particular gap size is covered.
    """
    space = Space.parse(space)
    if not phi_seminorm_bound >= 0:
        raise DomainError(f"seminorm bound must be nonnegative, got {phi_seminorm_bound}")
    theta = contraction_factor(spec, space)
    if not space.is_holder and verify_class_v:
        check_class_v(spec)

    D = D_SUP
    delta0 = doeblin_fortet_gap(theta, D)
    pi_bound = projection_norm_bound(D)
    radius = perturbation_radius(delta0, 0.0, TAU0, pi_bound)
    if space.is_holder:
        threshold = holder_threshold(space.param, theta, spec.diam)
    else:
        threshold = bvp_threshold(spec.k, space.param)
    centered = 1.5 * space.diam_factor(spec.diam) * phi_seminorm_bound
    epsilon = exp_distance(centered)
    delta = certified_gap_size(delta0, epsilon, TAU0, pi_bound)
    status = CERTIFIED if phi_seminorm_bound <= threshold else NOT_CERTIFIED
    if status == NOT_CERTIFIED:
        delta = 0.0

    req_radius = req_ok = None
    if requested_delta is not None:
        if not 0 <= requested_delta < delta0:
            raise DomainError(f"requested gap {requested_delta} must lie in [0, delta0 = {delta0})")
        req_radius = perturbation_radius(delta0, requested_delta, TAU0, pi_bound)
        req_ok = epsilon <= req_radius

    return Certificate(
        map_family=spec.family,
        map_parameters=dict(spec.parameters),
        space=str(space),
        theta=theta,
        D=D,
        delta0=delta0,
        pi_bound=pi_bound,
        tau0=TAU0,
        radius=radius,
        threshold=threshold,
        phi_seminorm=float(phi_seminorm_bound),
        centered_norm_bound=centered,
        epsilon=epsilon,
        certified_delta=delta,
        status=status,
        requested_delta=requested_delta,
        requested_radius=req_radius,
        requested_ok=req_ok,
    )
