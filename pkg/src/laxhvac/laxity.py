"""Laxity quantities for HVAC operation requests.

All durations are measured in timesteps (real valued). A request whose start
lies in the future carries the sentinel laxity ``LAXITY_INF``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import math

from .thermal import ZoneParams

LAXITY_INF = 1e9
_LOG_GUARD = 1e-12


class ZetaDomainError(ArithmeticError):
    """The target temperature cannot be reached at this power and ambient.

    Raised when the log argument of ``zeta`` is not in ``(0, 1]``: either the
    goal lies across the full-power equilibrium, or beyond it so that only a
    negative time would reach it. The offending state is kept on the
    exception for diagnostics.
    """

    def __init__(self, x1, x2, u, x_out, ratio):
        self.x1, self.x2, self.u, self.x_out, self.ratio = x1, x2, u, x_out, ratio
        super().__init__(
            f"cannot drive {x2:.4g} -> {x1:.4g} degC with u={u:.4g} kW at "
            f"x_out={x_out:.4g} degC (log argument {ratio:.4g})")


@dataclass(frozen=True)
class Request:
    """One HVAC operation request.

    ``penalty``, ``laxity`` and ``min_time`` are the most recently computed
    values; ``update_request`` returns a refreshed copy.
    """

    unit_id: int
    t_start: int
    t_end: int
    penalty: float = 0.0
    laxity: float = LAXITY_INF
    min_time: float = 0.0

    def __post_init__(self):
        if self.t_start > self.t_end:
            raise ValueError(f"t_start={self.t_start} after t_end={self.t_end}")
        if self.penalty < 0:
            raise ValueError("penalty must be >= 0")


def zeta(x1: float, x2: float, u: float, x_out: float, p: ZoneParams) -> float:
    """Timesteps of constant power ``u`` needed to move from ``x2`` to ``x1``."""
    if x1 == x2:
        return 0.0
    offset = p.b * u / p.a + x_out
    num = x1 - offset
    den = x2 - offset
    if den == 0.0:
        raise ZetaDomainError(x1, x2, u, x_out, math.inf)
    ratio = num / den
    if not _LOG_GUARD < ratio <= 1.0 + _LOG_GUARD:
        raise ZetaDomainError(x1, x2, u, x_out, ratio)
    return -math.log(ratio) / (p.a * p.dt)


def penalty(x: float, x_out: float, p: ZoneParams) -> float:
    """Time at full power to return to the violated comfort boundary."""
    if x < p.x_lo:
        return zeta(p.x_lo, x, p.u_max, x_out, p)
    if x > p.x_hi:
        return zeta(p.x_hi, x, -p.u_max, x_out, p)
    return 0.0


def min_time(x: float, x_out: float, p: ZoneParams) -> float:
    """Minimum heating/cooling time to reach the target temperature."""
    if x < p.x_target:
        return zeta(p.x_target, x, p.u_max, x_out, p)
    if x > p.x_target:
        return zeta(p.x_target, x, -p.u_max, x_out, p)
    return 0.0


def constraint_laxity(req: Request, t: int, x: float, x_out: float,
                      p: ZoneParams) -> tuple[float, float, float]:
    """Return ``(laxity, penalty, min_time)`` for ``req`` at time ``t``.

    Comfort violations take precedence: the laxity is then the negated
    penalty, which is never larger than zero. Past the deadline the remaining
    duration simply goes negative; renewing the request is up to the caller.
    """
    if t < req.t_start:
        return LAXITY_INF, 0.0, 0.0
    tau = penalty(x, x_out, p)
    e = min_time(x, x_out, p)
    if x < p.x_lo or x > p.x_hi:
        return -tau, tau, e
    return (req.t_end - t) - e, tau, e


def laxity(req: Request, t: int, x: float, x_out: float, p: ZoneParams) -> float:
    """Constraint-augmented laxity of ``req`` at time ``t``."""
    return constraint_laxity(req, t, x, x_out, p)[0]


def update_request(req: Request, t: int, x: float, x_out: float, p: ZoneParams) -> Request:
    """Copy of ``req`` with penalty, laxity and min_time evaluated at ``t``."""
    lax, tau, e = constraint_laxity(req, t, x, x_out, p)
    return replace(req, laxity=lax, penalty=tau, min_time=e)


@dataclass(frozen=True)
class DurationConfig:
    """How long a freshly issued request may take, in timesteps."""

    duration: int = 24

    def __post_init__(self):
        if self.duration < 1:
            raise ValueError("request duration must be >= 1 timestep")


def should_renew(req: Request, t: int, x_prev: float, x_now: float, x_target: float) -> bool:
    if t > req.t_end:
        return True
    return (x_prev - x_target) * (x_now - x_target) <= 0


def renew_request(req: Request, t: int, x_prev: float, x_now: float,
                  duration_cfg: DurationConfig, x_target: float) -> Request:
    """Issue a new request if the deadline passed or the target was reached.

    Returns ``req`` itself when neither condition holds.
    """
    if should_renew(req, t, x_prev, x_now, x_target):
        return Request(unit_id=req.unit_id, t_start=t, t_end=t + duration_cfg.duration)
    return req
