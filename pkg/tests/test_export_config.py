import json
import math

import numpy as np
import pytest

from coauthorcast.config import DEFAULTS, OUTPUT_ENV, PipelineConfig, bundled_profile
from coauthorcast.corpus import AuthorTimeline, WindowSpec
from coauthorcast.errors import ConfigError
from coauthorcast.export import (ArtifactMeta, forecast_replicates_csv, forecasts_from_csv,
                                 forecasts_to_csv, read_json, read_text, timelines_from_csv,
                                 timelines_to_csv, write_csv, write_json)
from coauthorcast.hyperopt import Interval
from coauthorcast.predict import Forecast

META = ArtifactMeta("train", "ab" * 32, 7)


class TestArtifacts:
    def test_csv_header(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", "a,b\n1,2\n", META)
        first = path.read_text().splitlines()[0]
        assert first == f"# coauthorcast stage=train config_sha256={'ab' * 32} seed=7"
        assert read_text(path) == "a,b\n1,2\n"

    def test_json_meta_and_nan(self, tmp_path):
        path = write_json(tmp_path / "x.json", {"v": float("nan"), "a": np.arange(2)}, META)
        body = read_json(path)
        assert body["meta"]["stage"] == "train" and body["meta"]["seed"] == 7
        assert body["v"] is None and body["a"] == [0, 1]
        assert path.read_text() == json.dumps(body, indent=2, sort_keys=True) + "\n"

    def test_missing_artifact(self, tmp_path):
        with pytest.raises(ConfigError, match="run the producing stage"):
            read_text(tmp_path / "absent.csv")

    def test_timelines_round_trip(self):
        tl = {"a": AuthorTimeline("a", {1990: 2, 1995: 1}, {1995: 3}, 1990),
              "b": AuthorTimeline("b", {2000: 1}, {}, 2000)}
        assert timelines_from_csv(timelines_to_csv(tl)) == tl

    def test_forecasts_round_trip(self):
        rng = np.random.default_rng(0)
        years = np.array([2000, 2001, 2002])
        h = np.cumsum(rng.poisson(1, (5, 3)), axis=1)
        k = np.cumsum(rng.poisson(2, (5, 3)), axis=1)
        f = Forecast("r1", years, h, k, 5, 11)
        (back,) = forecasts_from_csv(forecasts_to_csv([f]), forecast_replicates_csv([f]), 5, 11)
        np.testing.assert_array_equal(back.h, h)
        np.testing.assert_array_equal(back.k, k)
        np.testing.assert_array_equal(back.mean_k, f.mean_k)
        assert back.replicates == 5 and back.seed == 11

    def test_sample_dump_keeps_summary(self):
        f = Forecast("r1", np.array([2000, 2001]), np.array([[1, 2], [1, 4]]),
                     np.array([[0, 1], [0, 3]]), 2, 0)
        (back,) = forecasts_from_csv(forecasts_to_csv([f]), forecast_replicates_csv([f], [0]),
                                     2, 0)
        assert back.h.shape == (1, 2) and back.mean_k[1] == 2.0


def write_cfg(tmp_path, text):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    return path


class TestConfig:
    def test_defaults_are_set4(self):
        cfg = PipelineConfig.load(None)
        assert cfg.window() == WindowSpec.set4()

    def test_bundled_profiles(self):
        assert PipelineConfig.load("paper-set3.cfg").window() == WindowSpec.set3()
        assert bundled_profile("paper-set4.cfg") is not None
        assert bundled_profile("nope.cfg") is None

    def test_overrides_and_seed(self, tmp_path):
        cfg = PipelineConfig.load(write_cfg(tmp_path, "[run]\nseed = 3\n"),
                                  ["tune.n3=0", "window.I1 = 50"], seed=9)
        assert cfg.seed == 9 and cfg.get("tune", "n3", int) == 0
        assert cfg.window().I1 == 50

    def test_relative_paths_resolve_against_file(self, tmp_path):
        cfg = PipelineConfig.load(write_cfg(tmp_path, "[input]\npath = data/c.jsonl\n"))
        assert cfg.path("input", "path") == tmp_path / "data" / "c.jsonl"

    @pytest.mark.parametrize("text", ["[bogus]\nx = 1\n", "[run]\nsead = 1\n"])
    def test_unknown_names(self, tmp_path, text):
        with pytest.raises(ConfigError, match="unknown config"):
            PipelineConfig.load(write_cfg(tmp_path, text))

    def test_bad_override_syntax(self):
        with pytest.raises(ConfigError):
            PipelineConfig.load(None, ["n3=0"])

    def test_inconsistent_window(self):
        with pytest.raises(ConfigError):
            PipelineConfig.load(None, ["window.t_V=1990"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            PipelineConfig.load(tmp_path / "none.cfg")

    def test_typed_errors(self):
        cfg = PipelineConfig.load(None, ["run.threads=x", "train.lenient=maybe"])
        with pytest.raises(ConfigError):
            cfg.threads
        with pytest.raises(ConfigError):
            cfg.flag("train", "lenient")
        with pytest.raises(ConfigError):
            cfg.seed

    def test_ga_config(self):
        ga = PipelineConfig.load(None, ["tune.n0=10"]).ga_config(5)
        assert ga.n0 == 10 and ga.n1 == 6 and ga.seed == 5
        assert ga.L1 == Interval(0.0, 0.4, closed_low=False)

    def test_hash_ignores_output_and_threads(self):
        a = PipelineConfig.load(None, ["run.output=x"], threads=4)
        b = PipelineConfig.load(None, ["run.output=y"], threads=1)
        c = PipelineConfig.load(None, ["tune.n3=1"])
        assert a.sha256() == b.sha256() != c.sha256()

    def test_output_precedence(self, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV, "env-out")
        cfg = PipelineConfig.load(None)
        assert str(cfg.output_dir()) == "env-out"
        assert str(cfg.output_dir("cli-out")) == "cli-out"
        monkeypatch.delenv(OUTPUT_ENV)
        assert str(cfg.output_dir()) == "coauthorcast-out"

    def test_evaluation_years(self):
        assert PipelineConfig.load(None, ["evaluate.years=2012, 2014"]).evaluation_years() \
            == [2012, 2014]
        assert PipelineConfig.load(None).evaluation_years() is None

    def test_every_default_section_known(self):
        assert set(DEFAULTS) == {"run", "input", "window", "train", "tune", "predict",
                                 "evaluate", "synth"}
        assert not math.isnan(PipelineConfig.load(None).synth_hyperparams().upsilon)
