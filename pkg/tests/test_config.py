import numpy as np
import pytest
import yaml

from laxhvac.config import (ConfigError, CsvSource, fixture_scenario, load_scenario,
                            scenario_from_dict, scenario_to_dict, dump_scenario)

MINIMAL = {"fleet": [{"a": 0.1, "b": 0.5, "x_lo": 19, "x_hi": 23, "x_target": 21,
                      "u_max": 4, "count": 3}]}


def test_minimal_defaults():
    sc = scenario_from_dict(MINIMAL)
    assert len(sc.fleet) == 3 and sc.episode_length == 96 and sc.dt == 1.0
    env = sc.build_env()
    assert env.fleet.n_units == 3


def test_fixture_round_trip(tmp_path):
    sc = fixture_scenario()
    dump_scenario(sc, tmp_path / "c.yaml")
    back = load_scenario(tmp_path / "c.yaml")
    assert back == sc
    assert scenario_to_dict(back) == scenario_to_dict(sc)


def test_building_round_trip(tmp_path):
    d = {"fleet": [{"type": "building", "substeps": 4, "adjacency": [[0, 1, 2.0]],
                    "zones": [{"C": 2.0, "R": 5.0, "w": 8.0, "x_lo": 19, "x_hi": 23,
                               "x_target": 21, "u_max": 6}] * 2}],
         "schedule": {"breakpoints": [[0, 21], [18, 18]], "start_hour": 0},
         "ddpg": {"hidden": [8, 8], "episodes": 3}, "mpc": {"window": 12}, "seed": 4}
    sc = scenario_from_dict(d)
    dump_scenario(sc, tmp_path / "b.yaml")
    assert load_scenario(tmp_path / "b.yaml") == sc
    assert sc.ddpg.hidden == (8, 8) and sc.mpc.window == 12


def test_csv_source_relative_to_config(tmp_path):
    (tmp_path / "series.csv").write_text(
        "timestamp,price,x_out\n" + "".join(
            f"2024-02-01T{h:02d}:00:00,0.1,5\n" for h in range(24)))
    d = dict(MINIMAL, exogenous={"csv": {"path": "series.csv"}}, episode_length=12)
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(d))
    sc = load_scenario(tmp_path / "c.yaml")
    assert isinstance(sc.exogenous, CsvSource)
    assert len(sc.series()) == 24


@pytest.mark.parametrize("patch,field_path", [
    ({"fleet": []}, "fleet"),
    ({"fleet": [{"a": 0.1}]}, "fleet[0].b"),
    ({"fleet": [dict(MINIMAL["fleet"][0], a="hot")]}, "fleet[0].a"),
    ({"fleet": [dict(MINIMAL["fleet"][0], colour=1)]}, "fleet[0].colour"),
    ({"fleet": [dict(MINIMAL["fleet"][0], count=0)]}, "fleet[0].count"),
    ({"episode_length": 0}, "episode_length"),
    ({"dt": -1}, "dt"),
    ({"reward": {"alpha": "x"}}, "reward.alpha"),
    ({"ddpg": {"hidden": [8, 2.5]}}, "ddpg.hidden"),
    ({"ddpg": {"learning": 1}}, "ddpg.learning"),
    ({"exogenous": {"csv": {"path": "nope.csv"}}}, "exogenous.csv.path"),
    ({"exogenous": {"synthetic": {"n_points": 0}}}, "exogenous.synthetic"),
    ({"exogenous": {}}, "exogenous"),
    ({"schedule": {"breakpoints": [[0]]}}, "schedule.breakpoints[0]"),
    ({"power_hi": "lots"}, "power_hi"),
    ({"seed": 1.5}, "seed"),
    ({"bogus": 1}, "bogus"),
])
def test_errors_name_field_path(patch, field_path, tmp_path):
    d = dict(MINIMAL, **patch)
    with pytest.raises(ConfigError) as ei:
        scenario_from_dict(d, base_dir=tmp_path)
    assert ei.value.field_path == field_path
    assert str(ei.value).startswith(field_path)


def test_invalid_yaml(tmp_path):
    (tmp_path / "c.yaml").write_text("fleet: [\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_scenario(tmp_path / "c.yaml")


def test_windows_split():
    sc = fixture_scenario()
    env = sc.build_env()
    train, ev = sc.windows(env)
    assert ev == env.n_windows - 1
    assert all(s + sc.episode_length <= ev for s in train)
    assert train == list(range(0, train[-1] + 1, 24))


def test_fixture_deterministic():
    assert fixture_scenario() == fixture_scenario()
    a, b = fixture_scenario(seed=0), fixture_scenario(seed=1)
    assert a.fleet != b.fleet


def test_initial_state_near_targets():
    sc = fixture_scenario()
    fleet = sc.build_fleet()
    x0 = sc.initial_state(fleet, 0, np.random.default_rng(0))
    assert np.all(np.abs(x0 - fleet.targets(0)) <= sc.initial.spread)
