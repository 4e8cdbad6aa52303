"""RC thermal dynamics for single-zone and multi-zone buildings.

Units are fixed throughout the package: hours, degrees Celsius, kW.
Positive power heats, negative power cools.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np


class PowerBoundError(ValueError):
    """Requested power exceeds the unit's heating/cooling capacity."""


@dataclass(frozen=True)
class ZoneParams:
    """First-order zone model ``dx/dt = a (x_out - x) + b u``.

    Attributes
    ----------
    a : heat-loss rate, 1/hour.
    b : power-to-temperature conversion, degC per kWh.
    x_lo, x_hi : comfort band, degC.
    x_target : preferred temperature, degC.
    u_max : maximum heating power, kW. Maximum cooling is ``-u_max``.
    dt : timestep, hours.
    """

    a: float
    b: float
    x_lo: float
    x_hi: float
    x_target: float
    u_max: float
    dt: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not self.b > 0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if not self.x_lo < self.x_target < self.x_hi:
            raise ValueError(
                f"need x_lo < x_target < x_hi, got {self.x_lo}, {self.x_target}, {self.x_hi}")
        if not self.u_max > 0:
            raise ValueError(f"u_max must be > 0, got {self.u_max}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")

    @property
    def decay(self) -> float:
        """Free-response factor over one timestep, ``exp(-a dt)``."""
        return math.exp(-self.a * self.dt)

    def with_target(self, x_target: float) -> "ZoneParams":
        """Copy with a new target; the comfort band moves with it."""
        shift = x_target - self.x_target
        return replace(self, x_target=x_target, x_lo=self.x_lo + shift, x_hi=self.x_hi + shift)


def _check_power(u, u_max):
    if abs(u) > u_max * (1 + 1e-12):
        raise PowerBoundError(f"|u|={abs(u)} exceeds u_max={u_max}")


def step_zone(x: float, u: float, x_out: float, p: ZoneParams) -> float:
    """Exact zero-order-hold update of a single zone over one timestep."""
    _check_power(u, p.u_max)
    fixed_point = p.b * u / p.a + x_out
    return p.decay * (x - fixed_point) + fixed_point


@dataclass(frozen=True)
class BuildingZone:
    """One zone of a multi-zone building.

    ``C`` thermal capacity (kWh/degC), ``R`` resistance to outdoors (degC/kW),
    ``w`` input efficiency.
    """

    C: float
    R: float
    w: float
    x_lo: float
    x_hi: float
    x_target: float
    u_max: float

    def __post_init__(self):
        for name in ("C", "R", "w", "u_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.x_lo < self.x_target < self.x_hi:
            raise ValueError("need x_lo < x_target < x_hi")


@dataclass(frozen=True)
class BuildingParams:
    """Coupled RC network of zones.

    ``adjacency`` maps ``(i, j)`` to the inter-zone resistance ``R_ij``.
    Either orientation may be given; if both are present they must agree.
    """

    zones: tuple[BuildingZone, ...]
    adjacency: dict = field(default_factory=dict)
    dt: float = 1.0
    substeps: int = 8

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))
        n = len(self.zones)
        if n == 0:
            raise ValueError("building needs at least one zone")
        if self.substeps < 1 or int(self.substeps) != self.substeps:
            raise ValueError(f"substeps must be an integer >= 1, got {self.substeps}")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        canon = {}
        for (i, j), r in self.adjacency.items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bad adjacency entry ({i}, {j})")
            if not r > 0:
                raise ValueError(f"R_{i}{j} must be > 0, got {r}")
            key = (min(i, j), max(i, j))
            if key in canon and canon[key] != r:
                raise ValueError(f"adjacency not symmetric at {key}: {canon[key]} != {r}")
            canon[key] = float(r)
        object.__setattr__(self, "adjacency", canon)

    @property
    def n_zones(self) -> int:
        return len(self.zones)

    def conductance(self) -> np.ndarray:
        """Symmetric matrix of inter-zone conductances ``1/R_ij`` (zero diagonal)."""
        G = np.zeros((self.n_zones, self.n_zones))
        for (i, j), r in self.adjacency.items():
            G[i, j] = G[j, i] = 1.0 / r
        return G

    def system(self):
        """Return ``(A, B, d_coef)`` with ``dx/dt = A x + B u + d_coef * x_out``."""
        C = np.array([z.C for z in self.zones])
        R = np.array([z.R for z in self.zones])
        w = np.array([z.w for z in self.zones])
        G = self.conductance()
        A = G / C[:, None]
        A[np.diag_indices_from(A)] = -(G.sum(axis=1) + 1.0 / R) / C
        B = w / C
        d_coef = 1.0 / (R * C)
        return A, B, d_coef

    def effective_zone(self, i: int, x: np.ndarray, x_out: float) -> tuple[ZoneParams, float]:
        """Single-zone surrogate of zone ``i`` with neighbours frozen at ``x``.

        Returns the surrogate parameters and the effective ambient temperature.
        """
        z = self.zones[i]
        G = self.conductance()[i]
        g_total = 1.0 / z.R + G.sum()
        ambient = (x_out / z.R + G @ np.asarray(x, dtype=float)) / g_total
        p = ZoneParams(a=g_total / z.C, b=z.w / z.C, x_lo=z.x_lo, x_hi=z.x_hi,
                       x_target=z.x_target, u_max=z.u_max, dt=self.dt)
        return p, float(ambient)


def step_building(x, u, x_out: float, p: BuildingParams) -> np.ndarray:
    """Advance a building by one timestep with fixed-step RK4 sub-stepping."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    n = p.n_zones
    if x.shape != (n,) or u.shape != (n,):
        raise ValueError(f"expected vectors of length {n}, got {x.shape} and {u.shape}")
    for ui, z in zip(u, p.zones):
        _check_power(ui, z.u_max)
    A, B, d_coef = p.system()
    forcing = B * u + d_coef * x_out
    h = p.dt / p.substeps

    def f(y):
        return A @ y + forcing

    for _ in range(p.substeps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def power_to_reach(x: float, x_goal: float, x_out: float, p: ZoneParams) -> float:
    """Magnitude of constant power that lands exactly on ``x_goal`` after one step.

    Only power pushing toward ``x_goal`` counts: if the free response already
    gets there the result is zero. Capped at ``u_max``.
    """
    k = p.decay
    u = p.a / p.b * ((x_goal - k * x) / (1.0 - k) - x_out)
    direction = math.copysign(1.0, x_goal - x)
    if x == x_goal or u * direction <= 0:
        return 0.0
    return min(abs(u), p.u_max)
