"""Reference controllers: full-information MPC and a centralized learner."""

from .lp import LinearProgram, export_lp_text, parse_lp_text
from .mpc import build_mpc_lp, run_mpc, solve_mpc
from .simplex import InfeasibleError, LPError, LPSolution, UnboundedError, solve_lp
