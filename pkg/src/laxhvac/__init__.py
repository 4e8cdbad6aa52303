"""Laxity-based aggregate control of HVAC fleets."""

from .dispatch import (AbstractFleet, FeasibilityReport, PowerSchedule, ThermalFleet,
                       check_feasible, llf_dispatch, recover_schedule)
from .env import (AbstractState, Fleet, FleetState, LaxityEnv, RewardConfig, TargetSchedule,
                  Trace, abstract, env_step, metrics, reward, rollout)
from .laxity import (LAXITY_INF, DurationConfig, Request, ZetaDomainError, constraint_laxity,
                     laxity, min_time, penalty, renew_request, should_renew, update_request, zeta)
from .thermal import (BuildingParams, BuildingZone, PowerBoundError, ZoneParams,
                      step_building, step_zone)

__version__ = "0.1.0"
