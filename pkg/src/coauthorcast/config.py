"""Pipeline configuration: INI sections per stage, typed accessors, and a
canonical hash recorded in every artifact header."""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from coauthorcast.corpus import WindowSpec
from coauthorcast.errors import ConfigError
from coauthorcast.hyperopt import GAConfig, HyperParams, Interval

OUTPUT_ENV = "COAUTHORCAST_OUT"
DEFAULT_OUTPUT = "coauthorcast-out"

# Every recognised key with its default; None marks keys without a default.
DEFAULTS: dict[str, dict[str, str | None]] = {
    "run": {"seed": None, "output": None, "threads": "1"},
    "input": {"path": None, "format": "jsonl", "strict": "false", "max_authors": "80",
              "authors_file": ""},
    "window": {"T0": "1951", "T1": "1985", "T2": "2018", "step": "1", "I": "180", "K": "42",
               "L": "24", "M": "12", "I1": "40", "t_U": "2000", "t_V": "2009",
               "t_X": "2000", "t_Y": "2010", "t_Z": "2018"},
    "train": {"method": "ols_on_logs", "lenient": "false"},
    "tune": {"n0": "400", "n1": "", "n2": "", "n3": "500", "L0": "[0.6, 1.0]",
             "L1": "(0, 0.4]", "L2": "[-0.01, 0.01]", "upsilon_in_L0": "true"},
    "predict": {"replicates": "100", "dump_replicates": "false", "printed_pmf": "false"},
    "evaluate": {"years": "", "distribution_mode": "single", "alpha": "0.05",
                 "poisson_scan": "true", "min_group_size": "20", "n_boot": "1000",
                 "max_lag": "3"},
    "synth": {"authors": "1000", "first_year": "1980", "last_year": "2015",
              "entry_first": "", "entry_last": "", "entry_growth": "0.0",
              "entry_extra_pubs": "0.5", "pub_scale": "0.6", "pub_time_slope": "0.01",
              "pub_power": "0.25", "pub_origin": "1990", "coauthor_scale": "8.0",
              "coauthor_time_slope": "0.01", "coauthor_power": "0.8",
              "coauthor_origin": "1990", "tau": "0.0", "upsilon": "1.0",
              "max_annual": "12", "padding": "true", "prefix": "s"},
}

# Keys that change where or how fast a run happens but not what it computes.
UNHASHED = {("run", "output"), ("run", "threads")}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def bundled_profile(name: str) -> Path | None:
    path = resources.files("coauthorcast") / "profiles" / name
    return Path(str(path)) if path.is_file() else None


@dataclass
class PipelineConfig:
    values: dict[str, dict[str, str | None]]
    base_dir: Path

    # -- construction -------------------------------------------------------
    @classmethod
    def load(cls, path: str | Path | None = None, overrides=(), *, seed: int | None = None,
             threads: int | None = None) -> "PipelineConfig":
        values = {s: dict(keys) for s, keys in DEFAULTS.items()}
        base = Path.cwd()
        if path is not None:
            cfg_path = Path(path)
            if not cfg_path.exists():
                cfg_path = bundled_profile(str(path)) or cfg_path
            if not cfg_path.exists():
                raise ConfigError(f"config file not found: {path}")
            parser = configparser.ConfigParser(interpolation=None)
            parser.optionxform = str
            try:
                parser.read(cfg_path, encoding="utf-8")
            except configparser.Error as exc:
                raise ConfigError(f"{cfg_path}: {exc}") from None
            for section in parser.sections():
                for key, value in parser.items(section):
                    _assign(values, section, key, value)
            base = cfg_path.resolve().parent
        for item in overrides:
            name, sep, value = item.partition("=")
            section, dot, key = name.partition(".")
            if not sep or not dot:
                raise ConfigError(f"--set expects section.key=value, got {item!r}")
            _assign(values, section.strip(), key.strip(), value.strip())
        if seed is not None:
            values["run"]["seed"] = str(seed)
        if threads is not None:
            values["run"]["threads"] = str(threads)
        cfg = cls(values, base)
        cfg.window()  # fail early on an inconsistent window
        return cfg

    # -- typed access -------------------------------------------------------
    def raw(self, section: str, key: str) -> str | None:
        return self.values[section][key]

    def get(self, section: str, key: str, cast=str, *, required: bool = True):
        raw = self.values[section][key]
        if raw is None or raw == "":
            if required:
                raise ConfigError(f"missing config key {section}.{key}")
            return None
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from None

    def flag(self, section: str, key: str) -> bool:
        raw = str(self.values[section][key]).strip().lower()
        if raw in _TRUE:
            return True
        if raw in _FALSE:
            return False
        raise ConfigError(f"{section}.{key} must be true or false, got {raw!r}")

    def path(self, section: str, key: str, *, required: bool = True) -> Path | None:
        raw = self.get(section, key, required=required)
        if raw is None:
            return None
        p = Path(os.path.expanduser(raw))
        return p if p.is_absolute() else (self.base_dir / p)

    @property
    def seed(self) -> int:
        return self.get("run", "seed", int)

    @property
    def threads(self) -> int:
        n = self.get("run", "threads", int)
        if n < 1:
            raise ConfigError("run.threads must be >= 1")
        return n

    def output_dir(self, cli_value: str | None = None) -> Path:
        chosen = (cli_value or self.values["run"]["output"] or os.environ.get(OUTPUT_ENV)
                  or DEFAULT_OUTPUT)
        return Path(chosen)

    def window(self) -> WindowSpec:
        g = lambda k: self.get("window", k, int)  # noqa: E731
        return WindowSpec.from_years(
            T0=g("T0"), T1=g("T1"), T2=g("T2"), step=g("step"), I=g("I"), K=g("K"),
            L=g("L"), M=g("M"), I1=g("I1"), t_U=g("t_U"), t_V=g("t_V"), t_X=g("t_X"),
            t_Y=g("t_Y"), t_Z=g("t_Z"))

    def ga_config(self, seed: int) -> GAConfig:
        return GAConfig(
            n0=self.get("tune", "n0", int), n1=self.get("tune", "n1", int, required=False),
            n2=self.get("tune", "n2", int, required=False), n3=self.get("tune", "n3", int),
            L0=Interval.parse(self.get("tune", "L0")), L1=Interval.parse(self.get("tune", "L1")),
            L2=Interval.parse(self.get("tune", "L2")),
            upsilon_in_L0=self.flag("tune", "upsilon_in_L0"), seed=seed)

    def evaluation_years(self) -> list[int] | None:
        raw = self.get("evaluate", "years", required=False)
        if raw is None:
            return None
        try:
            return [int(y) for y in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"evaluate.years must list integers, got {raw!r}") from None

    def synth_hyperparams(self) -> HyperParams:
        return HyperParams(self.get("synth", "tau", float), self.get("synth", "upsilon", float))

    # -- hashing ------------------------------------------------------------
    def canonical(self) -> dict:
        return {s: {k: v for k, v in sorted(keys.items()) if (s, k) not in UNHASHED}
                for s, keys in sorted(self.values.items())}

    def sha256(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _assign(values, section, key, value):
    if section not in values:
        raise ConfigError(f"unknown config section [{section}]")
    if key not in values[section]:
        raise ConfigError(f"unknown config key {section}.{key}")
    values[section][key] = value
