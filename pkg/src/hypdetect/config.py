"""Dataclass configurations and result records shared across modules."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Map an angle onto the canonical branch (-pi, pi]."""
    t = math.remainder(theta, TWO_PI)
    return math.pi if t <= -math.pi else t


class MovementMode(enum.Enum):
    ANGULAR = "angular"
    RADIAL = "radial"
    MIXED = "mixed"

    @classmethod
    def parse(cls, value: "str | MovementMode") -> "MovementMode":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "").replace("-", "")
        aliases = {
            "angular": cls.ANGULAR,
            "angularonly": cls.ANGULAR,
            "radial": cls.RADIAL,
            "radialonly": cls.RADIAL,
            "mixed": cls.MIXED,
        }
        if key not in aliases:
            raise ValueError(f"unknown movement mode {value!r}")
        return aliases[key]

    @property
    def code(self) -> int:
        return {MovementMode.ANGULAR: 0, MovementMode.RADIAL: 1, MovementMode.MIXED: 2}[self]


@dataclass(frozen=True)
class ModelParams:
    """Model constants; the disk radius R = 2 log(n/nu) is derived."""

    alpha: float
    beta: float
    nu: float
    n: float
    R: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.5 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (1/2, 1], got {self.alpha}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.n <= self.nu:
            raise ValueError(f"need n > nu so that R > 0 (n={self.n}, nu={self.nu})")
        object.__setattr__(self, "R", 2.0 * math.log(self.n / self.nu))

    def check(self) -> None:
        expected = 2.0 * math.log(self.n / self.nu)
        if abs(self.R - expected) > 1e-12 * abs(expected):
            raise ValueError("stored R is inconsistent with (n, nu)")

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "nu": self.nu, "n": self.n, "R": self.R}


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.r >= 0.0) or not math.isfinite(self.r):
            raise ValueError(f"radius must be finite and non-negative, got {self.r}")
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "r", float(self.r))


@dataclass(frozen=True)
class SimConfig:
    """Time-stepping controls for the Euler-Maruyama integrator."""

    dt: float = 1e-3
    horizon: float = 1.0
    origin_floor: float = 0.5
    substep_factor: int = 16
    trace: bool = False
    # widen monitored target arcs to offset crossings missed between grid times
    continuity_correction: bool = True

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.horizon <= 0:
            raise ValueError("dt and horizon must be positive")
        if self.dt > self.horizon:
            raise ValueError("dt must not exceed the horizon")
        if self.origin_floor <= 0:
            raise ValueError("origin_floor must be positive")
        if self.substep_factor < 1:
            raise ValueError("substep_factor must be at least 1")

    def validate_for(self, params: ModelParams) -> None:
        if self.origin_floor >= params.R:
            raise ValueError("origin_floor must be below R")


@dataclass(frozen=True)
class DetectionOutcome:
    hit: bool
    hit_time: float
    min_radius: float
    variance_integral: float
    steps: int
    trace: "object | None" = None


@dataclass(frozen=True)
class RadialBarrierSpec:
    """Radial diffusion on [y0, Y]: absorbing at y0, reflecting at Y."""

    alpha: float
    y0: float
    Y: float

    def __post_init__(self) -> None:
        if not (0.0 < self.y0 < self.Y):
            raise ValueError(f"need 0 < y0 < Y, got y0={self.y0}, Y={self.Y}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


class Regime(enum.Enum):
    SMALL_S = "small"
    LARGE_S = "large"


@dataclass(frozen=True)
class RegionSpec:
    """Detection region of a movement regime at time s and width kappa."""

    mode: MovementMode
    s: float
    kappa: float
    params: ModelParams
    regime: "Regime | None" = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", MovementMode.parse(self.mode))
        if self.s < 0:
            raise ValueError("s must be non-negative")
        if self.mode is MovementMode.MIXED:
            if self.regime is None:
                raise ValueError("the mixed regime must be chosen explicitly (small or large s)")
            object.__setattr__(self, "regime", Regime(self.regime))

    @property
    def kappa_R(self) -> float:
        """Radial width coupled to kappa_A in the large-s mixed regime."""
        p = self.params
        return self.kappa if p.alpha < 2.0 * p.beta else math.exp(self.kappa**2)


@dataclass(frozen=True)
class ParetoSpec:
    omega: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.omega < 1.0:
            raise ValueError("omega must be at least 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def V(self) -> float:
        return self.omega**self.gamma

    @property
    def mean(self) -> float:
        return math.inf if self.gamma <= 1 else self.gamma * self.omega / (self.gamma - 1.0)


@dataclass(frozen=True)
class TailEntry:
    s: float
    p_hat: float
    ci: tuple[float, float]
    n_effective: int


@dataclass
class TailCurve:
    entries: list[TailEntry]
    mode: MovementMode
    params: ModelParams
    grid: dict = field(default_factory=dict)

    def s_values(self) -> list[float]:
        return [e.s for e in self.entries]

    def p_values(self) -> list[float]:
        return [e.p_hat for e in self.entries]


@dataclass(frozen=True)
class ExponentFit:
    model: str
    slope: float
    intercept: float
    r2: float
    window: tuple[float, float]
    slope_stderr: float = float("nan")
