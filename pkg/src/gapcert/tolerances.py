"""Default numerical tolerances used across the package."""

from dataclasses import asdict, dataclass, replace

EPS_ROOT = 1e-12
EPS_EIG = 1e-10
EPS_NUM = 1e-9
TOL_DISC = 0.02


@dataclass(frozen=True)
class Tolerances:
    eps_root: float = EPS_ROOT
    eps_eig: float = EPS_EIG
    eps_num: float = EPS_NUM
    tol_disc: float = TOL_DISC

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value!r}")

    def updated(self, **overrides) -> "Tolerances":
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return asdict(self)
