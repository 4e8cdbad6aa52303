"""Train both agents briefly on the fixture and print the ATD/TEC table.

    python demos/train_and_compare.py [episodes]

The acceptance run uses the full default budget; a few dozen episodes are
enough to see the shape of the learning curves.
"""
from dataclasses import replace
import sys

from laxhvac.config import fixture_scenario
from laxhvac.experiment import convergence_episode, evaluate, train_centralized, train_proposed


def main(episodes: int = 60):
    sc = fixture_scenario()
    sc = replace(sc, ddpg=replace(sc.ddpg, episodes=episodes))
    prop, pc = train_proposed(sc)
    cen, cc = train_centralized(sc)
    print(f"smoothed reward settles at episode {convergence_episode(pc)} (proposed) "
          f"and {convergence_episode(cc)} (centralized) of {episodes}")
    for name, atd, tec in evaluate(sc, prop, cen).table():
        print(f"{name:<12} ATD {atd:7.3f}   TEC {tec:8.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 60)
