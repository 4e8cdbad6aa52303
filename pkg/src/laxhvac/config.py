"""Scenario configuration files (YAML) and the synthetic fixture scenario."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .baselines.mpc import COMFORT_PENALTY
from .data import ExogenousSeries, SynthSpec, load_csv, synth_series
from .env import EPISODE_LENGTH, Fleet, LaxityEnv, RewardConfig, TargetSchedule
from .laxity import DurationConfig
from .rl.ddpg import DDPGConfig
from .thermal import BuildingParams, BuildingZone, ZoneParams


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class CsvSource:
    path: str
    columns: dict = field(default_factory=dict)
    start: str | None = None
    end: str | None = None

    def __hash__(self):
        return hash((self.path, tuple(sorted(self.columns.items())), self.start, self.end))


@dataclass(frozen=True)
class InitialConfig:
    """Initial temperatures: the target plus uniform noise of half-width ``spread``."""

    spread: float = 1.0


@dataclass(frozen=True)
class SplitConfig:
    """Which episode windows are used for training and evaluation.

    ``eval_start`` defaults to the last full window. Training windows start
    every ``train_stride`` steps and end before the evaluation window.
    """

    eval_start: int | None = None
    train_stride: int = 24


@dataclass(frozen=True)
class MPCConfig:
    window: int | None = None
    comfort_penalty: float = COMFORT_PENALTY


@dataclass(frozen=True)
class Scenario:
    fleet: tuple
    exogenous: SynthSpec | CsvSource = SynthSpec()
    episode_length: int = EPISODE_LENGTH
    dt: float = 1.0
    reward: RewardConfig = RewardConfig()
    request: DurationConfig = DurationConfig()
    schedule: TargetSchedule | None = None
    initial: InitialConfig = InitialConfig()
    power_lo: float = 0.0
    power_hi: float | None = None
    split: SplitConfig = SplitConfig()
    ddpg: DDPGConfig = DDPGConfig()
    mpc: MPCConfig = MPCConfig()
    seed: int = 0
    base_dir: str = field(default=".", compare=False)

    # -- derived objects -----------------------------------------------------

    def series(self) -> ExogenousSeries:
        src = self.exogenous
        if isinstance(src, SynthSpec):
            return synth_series(src, self.seed)
        path = Path(src.path)
        if not path.is_absolute():
            path = Path(self.base_dir) / path
        s = load_csv(path, src.columns or None, self.dt)
        if src.start or src.end:
            s = s.between(src.start or s.timestamps[0],
                          src.end or s.timestamps[-1] + np.timedelta64(1, "s"))
        return s

    def build_fleet(self) -> Fleet:
        return Fleet(self.fleet, self.schedule)

    def build_env(self, series: ExogenousSeries | None = None) -> LaxityEnv:
        s = self.series() if series is None else series
        return LaxityEnv(self.build_fleet(), s.price, s.x_out, self.reward, self.request,
                         self.episode_length, self.power_lo, self.power_hi)

    def windows(self, env: LaxityEnv) -> tuple[list[int], int]:
        """Training start indices and the evaluation start index."""
        n = env.n_windows
        ev = n - 1 if self.split.eval_start is None else self.split.eval_start
        if not 0 <= ev < n:
            raise ConfigError("split.eval_start", f"must lie in [0, {n})")
        last = ev - self.episode_length
        train = list(range(0, last + 1, self.split.train_stride)) if last >= 0 else []
        return (train or [ev]), ev

    def initial_state(self, fleet: Fleet, start: int, rng: np.random.Generator) -> np.ndarray:
        x0 = fleet.targets(0) + rng.uniform(-self.initial.spread, self.initial.spread,
                                            fleet.n_units)
        return x0


# -- parsing -----------------------------------------------------------------

def _expect_map(d, path):
    if not isinstance(d, dict):
        raise ConfigError(path, f"expected a mapping, got {type(d).__name__}")
    return d


def _build(cls, d, path, converters=None):
    """Instantiate dataclass ``cls`` from mapping ``d``; unknown keys are errors."""
    d = dict(_expect_map(d, path))
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - names)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown field")
    for k, conv in (converters or {}).items():
        if k in d:
            try:
                d[k] = conv(d[k])
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}.{k}" if path else k, str(exc)) from None
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from None
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _num(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"expected an integer, got {v!r}")
    return v


_ZONE_KEYS = ("a", "b", "x_lo", "x_hi", "x_target", "u_max")
_BZONE_KEYS = ("C", "R", "w", "x_lo", "x_hi", "x_target", "u_max")


def _parse_site(d, path, dt):
    d = dict(_expect_map(d, path))
    kind = d.pop("type", "zone")
    if kind == "zone":
        count = d.pop("count", 1)
        unknown = sorted(set(d) - set(_ZONE_KEYS))
        if unknown:
            raise ConfigError(f"{path}.{unknown[0]}", "unknown field")
        vals = {}
        for k in _ZONE_KEYS:
            if k not in d:
                raise ConfigError(f"{path}.{k}", "required field missing")
            try:
                vals[k] = _num(d[k])
            except ValueError as exc:
                raise ConfigError(f"{path}.{k}", str(exc)) from None
        try:
            z = ZoneParams(dt=dt, **vals)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
        try:
            count = _int(count)
        except ValueError as exc:
            raise ConfigError(f"{path}.count", str(exc)) from None
        if count < 1:
            raise ConfigError(f"{path}.count", "must be >= 1")
        return [z] * count
    if kind == "building":
        unknown = sorted(set(d) - {"zones", "adjacency", "substeps"})
        if unknown:
            raise ConfigError(f"{path}.{unknown[0]}", "unknown field")
        zs = d.get("zones")
        if not isinstance(zs, list) or not zs:
            raise ConfigError(f"{path}.zones", "expected a nonempty list")
        zones = []
        for j, zd in enumerate(zs):
            zp = f"{path}.zones[{j}]"
            zd = _expect_map(zd, zp)
            for k in zd:
                if k not in _BZONE_KEYS:
                    raise ConfigError(f"{zp}.{k}", "unknown field")
            for k in _BZONE_KEYS:
                if k not in zd:
                    raise ConfigError(f"{zp}.{k}", "required field missing")
            try:
                zones.append(BuildingZone(**{k: _num(zd[k]) for k in _BZONE_KEYS}))
            except ValueError as exc:
                raise ConfigError(zp, str(exc)) from None
        adj = {}
        for j, e in enumerate(d.get("adjacency", []) or []):
            if not (isinstance(e, list) and len(e) == 3):
                raise ConfigError(f"{path}.adjacency[{j}]", "expected [i, j, R_ij]")
            try:
                adj[(_int(e[0]), _int(e[1]))] = _num(e[2])
            except ValueError as exc:
                raise ConfigError(f"{path}.adjacency[{j}]", str(exc)) from None
        try:
            return [BuildingParams(tuple(zones), adj, dt=dt,
                                   substeps=_int(d.get("substeps", 8)))]
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"unknown site type {kind!r}")


def _parse_exogenous(d, path):
    d = _expect_map(d, path)
    if set(d) == {"synthetic"}:
        return _build(SynthSpec, d["synthetic"] or {}, f"{path}.synthetic",
                      {"price_peaks": lambda v: tuple(tuple(p) for p in v)})
    if set(d) == {"csv"}:
        return _build(CsvSource, d["csv"], f"{path}.csv",
                      {"start": lambda v: None if v is None else str(v),
                       "end": lambda v: None if v is None else str(v)})
    raise ConfigError(path, "expected exactly one of 'synthetic' or 'csv'")


def _parse_schedule(d, path):
    if d is None:
        return None
    d = dict(_expect_map(d, path))
    bps = d.get("breakpoints")
    if not isinstance(bps, list):
        raise ConfigError(f"{path}.breakpoints", "expected a list of [hour_of_week, target]")
    for j, b in enumerate(bps):
        if not (isinstance(b, list) and len(b) == 2):
            raise ConfigError(f"{path}.breakpoints[{j}]", "expected [hour_of_week, target]")
    d["breakpoints"] = tuple(tuple(b) for b in bps)
    return _build(TargetSchedule, d, path)


def _parse_ddpg(d, path):
    return _build(DDPGConfig, d, path, {"hidden": lambda v: tuple(_int(h) for h in v)})


def scenario_from_dict(d: dict, base_dir=".") -> Scenario:
    d = dict(_expect_map(d, ""))
    allowed = {f.name for f in fields(Scenario)} - {"base_dir"}
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    try:
        dt = _num(d.get("dt", 1.0))
    except ValueError as exc:
        raise ConfigError("dt", str(exc)) from None
    if dt <= 0:
        raise ConfigError("dt", "must be > 0")
    sites = d.get("fleet")
    if not isinstance(sites, list) or not sites:
        raise ConfigError("fleet", "expected a nonempty list of sites")
    fleet = []
    for j, s in enumerate(sites):
        fleet.extend(_parse_site(s, f"fleet[{j}]", dt))
    kw: dict[str, Any] = {"fleet": tuple(fleet), "dt": dt, "base_dir": str(base_dir)}
    if "exogenous" in d:
        kw["exogenous"] = _parse_exogenous(d["exogenous"], "exogenous")
    if "episode_length" in d:
        try:
            kw["episode_length"] = _int(d["episode_length"])
        except ValueError as exc:
            raise ConfigError("episode_length", str(exc)) from None
        if kw["episode_length"] < 1:
            raise ConfigError("episode_length", "must be >= 1")
    if "reward" in d:
        kw["reward"] = _build(RewardConfig, d["reward"], "reward",
                              {k: _num for k in ("alpha", "beta", "gamma")})
    if "request" in d:
        kw["request"] = _build(DurationConfig, d["request"], "request", {"duration": _int})
    if "schedule" in d:
        kw["schedule"] = _parse_schedule(d["schedule"], "schedule")
    if "initial" in d:
        kw["initial"] = _build(InitialConfig, d["initial"], "initial", {"spread": _num})
    for k in ("power_lo", "power_hi"):
        if k in d and not (k == "power_hi" and d[k] is None):
            try:
                kw[k] = _num(d[k])
            except ValueError as exc:
                raise ConfigError(k, str(exc)) from None
    if "split" in d:
        kw["split"] = _build(SplitConfig, d["split"], "split")
    if "ddpg" in d:
        kw["ddpg"] = _parse_ddpg(d["ddpg"], "ddpg")
    if "mpc" in d:
        kw["mpc"] = _build(MPCConfig, d["mpc"], "mpc")
    if "seed" in d:
        try:
            kw["seed"] = _int(d["seed"])
        except ValueError as exc:
            raise ConfigError("seed", str(exc)) from None
    sc = Scenario(**kw)
    if isinstance(sc.exogenous, CsvSource):
        p = Path(sc.exogenous.path)
        if not p.is_absolute():
            p = Path(base_dir) / p
        if not p.exists():
            raise ConfigError("exogenous.csv.path", f"file not found: {p}")
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    with open(path) as fh:
        try:
            d = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("", f"{path}: not valid YAML ({exc})") from None
    return scenario_from_dict(d or {}, base_dir=path.parent)


# -- serialization -------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, tuple):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    return obj


def _site_dict(s):
    if isinstance(s, ZoneParams):
        return {"type": "zone", **{k: getattr(s, k) for k in _ZONE_KEYS}}
    return {"type": "building",
            "zones": [{k: getattr(z, k) for k in _BZONE_KEYS} for z in s.zones],
            "adjacency": [[i, j, r] for (i, j), r in sorted(s.adjacency.items())],
            "substeps": s.substeps}


def scenario_to_dict(sc: Scenario) -> dict:
    """Plain-data form with every default spelled out."""
    if isinstance(sc.exogenous, SynthSpec):
        exo = {"synthetic": _plain(asdict(sc.exogenous))}
    else:
        exo = {"csv": _plain(asdict(sc.exogenous))}
    return {
        "seed": sc.seed,
        "dt": sc.dt,
        "episode_length": sc.episode_length,
        "fleet": [_site_dict(s) for s in sc.fleet],
        "exogenous": exo,
        "reward": asdict(sc.reward),
        "request": asdict(sc.request),
        "schedule": None if sc.schedule is None else {
            "breakpoints": _plain(sc.schedule.breakpoints), "start_hour": sc.schedule.start_hour},
        "initial": asdict(sc.initial),
        "power_lo": sc.power_lo,
        "power_hi": sc.power_hi,
        "split": asdict(sc.split),
        "ddpg": _plain(asdict(sc.ddpg)),
        "mpc": asdict(sc.mpc),
    }


def dump_scenario(sc: Scenario, path):
    with open(path, "w") as fh:
        yaml.safe_dump(scenario_to_dict(sc), fh, sort_keys=False)


# -- fixture -------------------------------------------------------------------

def fixture_scenario(n_units: int = 10, seed: int = 0, **overrides) -> Scenario:
    """Synthetic winter scenario with ``n_units`` heterogeneous heated zones.

    Parameters are invented but keep every zone's heating capacity well
    above the losses at the coldest synthetic hour.
    """
    rng = np.random.default_rng(1000 + seed)
    zones = []
    for _ in range(n_units):
        a = float(np.round(rng.uniform(0.08, 0.2), 3))
        u_max = float(np.round(rng.uniform(4.0, 8.0), 2))
        # full-power equilibrium 35-45 degC above ambient
        reach = rng.uniform(35.0, 45.0)
        b = float(np.round(reach * a / u_max, 4))
        zones.append(ZoneParams(a=a, b=b, x_lo=19.0, x_hi=23.0, x_target=21.0, u_max=u_max))
    kw = dict(fleet=tuple(zones), exogenous=SynthSpec(), seed=seed)
    kw.update(overrides)
    return Scenario(**kw)
