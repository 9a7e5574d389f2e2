"""Shipped (map, potential) cases used by the demos and the acceptance tests.

Every case carries an analytic seminorm bound for its potential, so the
certificate never relies on grid estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .certification import Certificate, certify
from .interval_maps import MapSpec, make_doubling, make_logistic, make_pomeau_manneville, make_tent
from .regularity import INTERP_CONSTANT, INTERP_LINEAR, Space
from .transfer_op import DiscretizedOperator, SpectralData, assemble, eigendata


@dataclass(frozen=True)
class Case:
    name: str
    make_map: Callable[[], MapSpec]
    space: Space
    potential: Callable[[np.ndarray], np.ndarray]
    seminorm_bound: float

    @property
    def basis(self) -> str:
        return INTERP_LINEAR if self.space.is_holder else INTERP_CONSTANT


def _linear(slope):
    return lambda y: slope * np.asarray(y, dtype=float)


def _sine(lip):
    return lambda y: lip / (2 * math.pi) * np.sin(2 * math.pi * np.asarray(y, dtype=float))


def _step(height, at):
    return lambda y: height * (np.asarray(y, dtype=float) >= at)


SHIPPED_CASES = (
    Case("pm-q0.5-lip", lambda: make_pomeau_manneville(0.5), Space("hol", 1.0), _linear(0.0014), 0.0014),
    Case("pm-q1-lip", lambda: make_pomeau_manneville(1.0), Space("hol", 1.0), _linear(0.0014), 0.0014),
    Case("pm-q2-lip", lambda: make_pomeau_manneville(2.0), Space("hol", 1.0), _linear(0.0014), 0.0014),
    Case("pm-q1-sine", lambda: make_pomeau_manneville(1.0), Space("hol", 1.0), _sine(0.0014), 0.0014),
    Case("pm-q2-bv", lambda: make_pomeau_manneville(2.0), Space("bvp", 1.0), _step(0.0069, 0.5), 0.0069),
    Case("doubling-interval-lip", lambda: make_doubling("interval"), Space("hol", 1.0), _linear(0.0069), 0.0069),
    Case("tent-bv", make_tent, Space("bvp", 1.0), _step(0.0069, 0.3), 0.0069),
    Case("logistic-bv", make_logistic, Space("bvp", 1.0), _linear(0.0069), 0.0069),
    Case("logistic-bv2", make_logistic, Space("bvp", 2.0), _step(0.001, 0.7), 0.001),
)


@dataclass
class CaseRun:
    case: Case
    spec: MapSpec
    certificate: Certificate
    operator: DiscretizedOperator
    spectral: SpectralData


def run_case(case: Case, m: int = 512) -> CaseRun:
    spec = case.make_map()
    cert = certify(spec, case.space, case.seminorm_bound)
    op = assemble(spec, case.potential, m, case.basis, case.space)
    return CaseRun(case, spec, cert, op, eigendata(op))


def certified_cases() -> list[Case]:
    return [c for c in SHIPPED_CASES if certify(c.make_map(), c.space, c.seminorm_bound).certified]
