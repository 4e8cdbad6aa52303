"""Compare a few fixed aggregate policies and MPC on the synthetic fixture.

    python demos/fixed_policies.py
"""
from laxhvac.baselines.mpc import run_mpc
from laxhvac.config import fixture_scenario
from laxhvac.env import metrics, rollout
from laxhvac.experiment import eval_initial_state


def main():
    sc = fixture_scenario()
    env = sc.build_env()
    _, start = sc.windows(env)
    x0 = eval_initial_state(sc, env.fleet)
    print(f"{env.fleet.n_units} units, P_hi = {env.P_hi:.1f} kW, window starts at step {start}")
    rows = []
    for frac in (0.0, 0.25, 0.5, 1.0):
        P = frac * env.P_hi
        rows.append((f"constant {P:.1f} kW", *metrics(rollout(env, lambda obs, P=P: P, x0, start))))
    rows.append(("MPC", *metrics(run_mpc(env, x0, start))))
    for name, atd, tec in rows:
        print(f"{name:<20} ATD {atd:7.3f} degC   TEC {tec:8.2f}")


if __name__ == "__main__":
    main()
