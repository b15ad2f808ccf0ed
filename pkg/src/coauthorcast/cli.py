"""Command-line front end.

Stages read their inputs from, and write their artifacts to, one output
directory, so each subcommand can be rerun on its own::

    coauthorcast pipeline --config paper-set4.cfg --seed 7 --output out/
    coauthorcast tune --config my.cfg --set tune.n3=50

Exit status is 0 on success, 1 when a stage fails and 2 for usage or
configuration errors (including missing input files).
"""

from __future__ import annotations

import argparse
import csv
import gzip
import io
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from coauthorcast import __version__, charts
from coauthorcast.config import PipelineConfig
from coauthorcast.corpus import (IngestReport, build_timelines, filter_publications,
                                 parse_dblp_xml, parse_jsonl, serialize_jsonl, slice_dataset)
from coauthorcast.errors import CoauthorcastError, ConfigError
from coauthorcast.evaluate import (ANNUAL_PUBS, ANNUAL_PUBS_AND_COAUTHORS, appendix_diagnostics,
                                   auc_report, distribution_report, grouped_autocorrelation,
                                   poisson_character_scan, trend_report)
from coauthorcast.export import (ArtifactMeta, forecast_replicates_csv, forecasts_from_csv,
                                 forecasts_to_csv, read_json, read_text, timelines_from_csv,
                                 timelines_to_csv, write_csv, write_json)
from coauthorcast.hyperopt import HyperParams, run_ga
from coauthorcast.matrices import GroupMeans, compute_eta, compute_xi
from coauthorcast.predict import simulate
from coauthorcast.rng import derive_seed
from coauthorcast.synthetic import GenerativeSpec, PowerTimeSurface, generate
from coauthorcast.training import LambdaMatrix, ZetaMatrix, fit_lambda, fit_zeta

log = logging.getLogger("coauthorcast")

STAGES = ("ingest", "matrices", "train", "tune", "predict", "evaluate", "report")
COMMANDS = STAGES + ("synth", "pipeline")
INPUT_FORMATS = ("jsonl", "dblp-xml")


@dataclass
class Run:
    config: PipelineConfig
    out: Path

    def meta(self, stage: str, seed: int | None = None) -> ArtifactMeta:
        if seed is None:
            seed = self.config.get("run", "seed", int, required=False)
        return ArtifactMeta(stage, self.config.sha256(), -1 if seed is None else seed)

    def stage_seed(self, stage: str) -> int:
        try:
            master = self.config.seed
        except ConfigError:
            raise ConfigError(f"the {stage} stage is stochastic; set run.seed or pass --seed") \
                from None
        return derive_seed(master, stage)

    def csv(self, name, text, stage, seed=None):
        write_csv(self.out / name, text, self.meta(stage, seed))

    def json(self, name, payload, stage, seed=None):
        write_json(self.out / name, payload, self.meta(stage, seed))

    def timelines(self):
        return timelines_from_csv(read_text(self.out / "timelines.csv"))

    def slice(self, timelines, role):
        return slice_dataset(timelines, self.config.window(), role)


# -- stages -------------------------------------------------------------------

def stage_ingest(run: Run) -> str:
    cfg = run.config
    path = cfg.path("input", "path")
    if not path.exists():
        raise ConfigError(f"input file not found: {path}")
    fmt = cfg.get("input", "format")
    if fmt not in INPUT_FORMATS:
        raise ConfigError(f"input.format must be one of {INPUT_FORMATS}, got {fmt!r}")
    strict = cfg.flag("input", "strict")
    report = IngestReport()
    if fmt == "jsonl":
        pubs = parse_jsonl(path, strict=strict, report=report)
    else:
        pubs = parse_dblp_xml(path, strict=strict, report=report)
    pubs = filter_publications(pubs, cfg.get("input", "max_authors", int), report=report)
    authors = None
    authors_file = cfg.path("input", "authors_file", required=False)
    if authors_file is not None:
        if not authors_file.exists():
            raise ConfigError(f"authors file not found: {authors_file}")
        authors = [ln.strip() for ln in authors_file.read_text(encoding="utf-8").splitlines()
                   if ln.strip() and not ln.startswith("#")]
    spec = cfg.window()
    timelines = build_timelines(pubs, (spec.T0, spec.T2), authors=authors, report=report)
    run.csv("timelines.csv", timelines_to_csv(timelines), "ingest")
    run.json("ingest_report.json", {"researchers": len(timelines), **report.to_dict()}, "ingest")
    return (f"ingest: {report.parsed} records parsed, {report.rejected} rejected, "
            f"{report.filtered} filtered; {len(timelines)} researchers")


def stage_matrices(run: Run) -> str:
    spec = run.config.window()
    timelines = run.timelines()
    slices = {role: run.slice(timelines, role) for role in ("training", "validation", "test")}
    eta = compute_eta(slices["training"], spec)
    xi = compute_xi(slices["training"], spec)
    for name, grid in (("eta", eta), ("xi", xi)):
        run.csv(f"{name}.csv", grid.to_csv(), "matrices")
        run.csv(f"{name}_counts.csv", grid.to_csv(counts=True), "matrices")
    run.json("slices.json", {
        "window": spec.to_dict(),
        "slices": {role: {"size": len(s), "coverage": s.coverage, "anchor_total": s.anchor_total}
                   for role, s in slices.items()},
    }, "matrices")
    sizes = ", ".join(f"{role} {len(s)}" for role, s in slices.items())
    return (f"matrices: {sizes}; eta {int(eta.defined.sum())}/{eta.values.size} groups, "
            f"xi {int(xi.defined.sum())}/{xi.values.size} groups")


def stage_train(run: Run) -> str:
    cfg = run.config
    spec = cfg.window()
    method = cfg.get("train", "method")
    lenient = cfg.flag("train", "lenient")
    eta = GroupMeans.from_csv("eta", read_text(run.out / "eta.csv"),
                              read_text(run.out / "eta_counts.csv"))
    xi = GroupMeans.from_csv("xi", read_text(run.out / "xi.csv"),
                             read_text(run.out / "xi_counts.csv"))
    lam = fit_lambda(eta, spec, method=method, lenient=lenient)
    zeta = fit_zeta(xi, spec, method=method, lenient=lenient)
    run.csv("lambda.csv", lam.to_csv(), "train")
    run.csv("lambda_provenance.csv", lam.provenance_csv(), "train")
    run.csv("lambda_coefficients.csv", lam.coefficients_csv(), "train")
    run.csv("zeta.csv", zeta.to_csv(), "train")
    run.csv("zeta_coefficients.csv", zeta.coefficients_csv(), "train")
    significant = [m + 1 for m, p in enumerate(zeta.significance) if p < 0.05]
    return (f"train: lambda {lam.I}x{lam.J}, zeta {zeta.M}x{zeta.J} ({method}); "
            f"zeta rows with a significant time trend: {significant or 'none'}")


def _load_zeta(run: Run) -> ZetaMatrix:
    return ZetaMatrix.from_csv(read_text(run.out / "zeta.csv"))


def _load_lambda(run: Run) -> LambdaMatrix:
    return LambdaMatrix.from_csv(read_text(run.out / "lambda.csv"))


def _load_hp(run: Run) -> HyperParams:
    hp = read_json(run.out / "hyperparams.json")
    return HyperParams(tau=hp["tau"], upsilon=hp["upsilon"])


def stage_tune(run: Run) -> str:
    seed = run.stage_seed("tune")
    spec = run.config.window()
    validation = run.slice(run.timelines(), "validation")
    result = run_ga(run.config.ga_config(seed), validation, _load_zeta(run), spec)
    run.csv("ga_trace.csv", result.trace_csv(), "tune", seed)
    run.json("hyperparams.json", {**result.best.to_dict(), "fitness": result.best_fitness,
                                  "generations": len(result.trace) - 1,
                                  "validation_researchers": len(validation),
                                  "skipped_terms": result.skipped_terms}, "tune", seed)
    return (f"tune: tau={result.best.tau:.4f} upsilon={result.best.upsilon:.4f} "
            f"fitness={result.best_fitness:.3f}")


def stage_predict(run: Run) -> str:
    cfg = run.config
    seed = run.stage_seed("predict")
    spec = cfg.window()
    test = run.slice(run.timelines(), "test")
    lam, zeta, hp = _load_lambda(run), _load_zeta(run), _load_hp(run)
    replicates = cfg.get("predict", "replicates", int)
    sim = simulate(test, lam, zeta, hp, spec, replicates=replicates, seed=seed,
                   threads=cfg.threads)
    run.csv("forecasts.csv", forecasts_to_csv(sim.forecasts), "predict", seed)
    run.csv("forecast_sample.csv", forecast_replicates_csv(sim.forecasts, [0]), "predict", seed)
    if cfg.flag("predict", "dump_replicates"):
        run.csv("forecast_replicates.csv", forecast_replicates_csv(sim.forecasts), "predict",
                seed)
    events = auc_report(test, lam, zeta, hp, spec, cfg.evaluation_years(),
                        printed_pmf=cfg.flag("predict", "printed_pmf"))
    run.csv("event_probabilities.csv", events.probabilities_csv(), "predict", seed)
    run.json("predict_summary.json", {
        "researchers": len(sim), "replicates": replicates, "h_overflow": sim.h_overflow,
        "r_clamped": sim.r_clamped, "skipped": sim.skipped,
    }, "predict", seed)
    return (f"predict: {len(sim)} researchers x {replicates} replicates; "
            f"h overflow {sim.h_overflow}, r clamped {sim.r_clamped}, skipped {len(sim.skipped)}")


def _load_forecasts(run: Run, pooled: bool):
    summary = read_json(run.out / "predict_summary.json")
    name = "forecast_replicates.csv" if pooled else "forecast_sample.csv"
    if pooled and not (run.out / name).exists():
        raise ConfigError("evaluate.distribution_mode=pooled needs predict.dump_replicates=true")
    return forecasts_from_csv(read_text(run.out / "forecasts.csv"), read_text(run.out / name),
                              summary["replicates"], summary["meta"]["seed"])


def stage_evaluate(run: Run) -> str:
    cfg = run.config
    spec = cfg.window()
    seed = run.stage_seed("evaluate")
    years = cfg.evaluation_years()
    mode = cfg.get("evaluate", "distribution_mode")
    alpha = cfg.get("evaluate", "alpha", float)
    timelines = run.timelines()
    test = run.slice(timelines, "test")
    training = run.slice(timelines, "training")
    forecasts = _load_forecasts(run, mode == "pooled")
    lam, zeta, hp = _load_lambda(run), _load_zeta(run), _load_hp(run)

    trend = trend_report(test, forecasts, spec, years)
    run.csv("trend.csv", trend.to_csv(), "evaluate", seed)
    run.csv("trend_indices.csv", trend.indices_csv(), "evaluate", seed)
    dist = distribution_report(test, forecasts, spec, years, mode=mode, alpha=alpha)
    run.csv("distribution.csv", dist.to_csv(), "evaluate", seed)
    run.csv("distribution_tests.csv", dist.tests_csv(), "evaluate", seed)
    auc = auc_report(test, lam, zeta, hp, spec, years,
                     printed_pmf=cfg.flag("predict", "printed_pmf"))
    run.csv("auc.csv", auc.to_csv(), "evaluate", seed)
    autocorr = grouped_autocorrelation(test, spec, cfg.get("evaluate", "max_lag", int))
    run.csv("autocorrelation.csv", autocorr.to_csv(), "evaluate", seed)
    appendix = appendix_diagnostics(training, spec)
    run.csv("appendix_proportion.csv", appendix.proportion_csv(), "evaluate", seed)
    run.csv("appendix_advantage.csv", appendix.advantage_csv(), "evaluate", seed)
    summary = {"trend": trend.summary(), "distribution": dist.summary(), "auc": auc.summary(),
               "autocorrelation_pooled": autocorr.pooled}
    if cfg.flag("evaluate", "poisson_scan"):
        for name, group_by in (("poisson_scan", ANNUAL_PUBS),
                               ("poisson_scan_joint", ANNUAL_PUBS_AND_COAUTHORS)):
            scan = poisson_character_scan(
                training, spec, group_by, min_size=cfg.get("evaluate", "min_group_size", int),
                n_boot=cfg.get("evaluate", "n_boot", int), seed=derive_seed(seed, name),
                alpha=alpha)
            run.csv(f"{name}.csv", scan.to_csv(), "evaluate", seed)
            run.csv(f"{name}_largest.csv", scan.largest_csv(), "evaluate", seed)
            summary[name] = scan.summary()
    run.json("evaluation.json", summary, "evaluate", seed)
    return (f"evaluate: AUC {auc.auc:.3f}; s2 min {np.nanmin(trend.s2):.3f}; "
            f"KS rejections {dist.rejections}/{len(dist.years)}")


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def stage_report(run: Run) -> str:
    ev = read_json(run.out / "evaluation.json")
    hp = read_json(run.out / "hyperparams.json")
    slices = read_json(run.out / "slices.json")
    pred = read_json(run.out / "predict_summary.json")
    zeta_rows = _csv_rows(read_text(run.out / "zeta_coefficients.csv"))
    pvals = {int(r["index"]): float(r["slope_p_value"]) for r in zeta_rows}
    alpha = run.config.get("evaluate", "alpha", float)

    desc = run.meta("report").header()[2:].strip()
    m = sorted(pvals)
    charts.significance_chart(run.out / "zeta_significance.svg", m, [pvals[i] for i in m], alpha,
                              description=desc)
    trend_rows = _csv_rows(read_text(run.out / "trend.csv"))
    last = max(int(r["year"]) for r in trend_rows)
    final = [r for r in trend_rows if int(r["year"]) == last]
    charts.trend_chart(run.out / "trend.svg", [int(r["k_anchor"]) for r in final],
                       [float(r["observed_k"]) for r in final],
                       [float(r["predicted_k"]) for r in final], last, description=desc)
    dist_rows = [r for r in _csv_rows(read_text(run.out / "distribution.csv"))
                 if int(r["year"]) == last]
    size = max(int(r["k"]) for r in dist_rows) + 1
    obs, pred_h = np.zeros(size), np.zeros(size)
    for r in dist_rows:
        obs[int(r["k"])] = float(r["observed_count"])
        pred_h[int(r["k"])] = float(r["predicted_count"])
    charts.distribution_chart(run.out / "distribution.svg", obs, pred_h, last,
                              description=desc)
    strata = [r for r in _csv_rows(read_text(run.out / "auc.csv"))
              if r["scope"] == "historical_pubs"]
    charts.auc_chart(run.out / "auc.svg", [r["group"] for r in strata],
                     [float(r["auc"]) if r["auc"] else np.nan for r in strata],
                     description=desc)

    report = {
        "slices": slices["slices"],
        "hyperparams": {"tau": hp["tau"], "upsilon": hp["upsilon"], "fitness": hp["fitness"]},
        "zeta_significant_rows": [i for i in m if pvals[i] < alpha],
        "auc": ev["auc"]["auc"],
        "s1": {y: v["s1"] for y, v in ev["trend"].items()},
        "s2": {y: v["s2"] for y, v in ev["trend"].items()},
        "ks_rejections": ev["distribution"]["rejections"],
        "ks_years": ev["distribution"]["years"],
        "simulation": {"h_overflow": pred["h_overflow"], "r_clamped": pred["r_clamped"]},
        "charts": ["zeta_significance.svg", "trend.svg", "distribution.svg", "auc.svg"],
    }
    if "poisson_scan" in ev:
        report["poisson_scan"] = {k: ev[k] for k in ("poisson_scan", "poisson_scan_joint")}
    run.json("report.json", report, "report")
    return (f"report: AUC {report['auc']:.3f}, tau={hp['tau']:.4f}, "
            f"upsilon={hp['upsilon']:.4f}; 4 charts")


def stage_synth(run: Run) -> str:
    cfg = run.config
    seed = run.stage_seed("synth")
    g = lambda key, cast=float: cfg.get("synth", key, cast)  # noqa: E731
    opt = lambda key: cfg.get("synth", key, int, required=False)  # noqa: E731
    spec = GenerativeSpec(
        n_authors=g("authors", int), first_year=g("first_year", int),
        last_year=g("last_year", int),
        publication_rate=PowerTimeSurface(g("pub_scale"), g("pub_time_slope"), g("pub_power"),
                                          g("pub_origin", int)),
        coauthor_rate=PowerTimeSurface(g("coauthor_scale"), g("coauthor_time_slope"),
                                       g("coauthor_power"), g("coauthor_origin", int)),
        hyperparams=cfg.synth_hyperparams(), entry_first=opt("entry_first"),
        entry_last=opt("entry_last"), entry_growth=g("entry_growth"),
        entry_extra_pubs=g("entry_extra_pubs"), max_annual=g("max_annual", int),
        padding=cfg.flag("synth", "padding"), seed=seed, prefix=cfg.get("synth", "prefix"))
    pubs, truth = generate(spec)
    run.out.mkdir(parents=True, exist_ok=True)
    data = serialize_jsonl(pubs)
    (run.out / "corpus.jsonl").write_bytes(data)
    with open(run.out / "corpus.jsonl.gz", "wb") as raw:
        with gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
            gz.write(data)
    (run.out / "focal_authors.txt").write_text(
        run.meta("synth", seed).header() + "".join(a + "\n" for a in truth.authors),
        encoding="utf-8")
    run.csv("ground_truth.csv", truth.to_csv(), "synth", seed)
    run.json("corpus.meta.json", {"publications": len(pubs), "authors": len(truth.authors),
                                  "synth": cfg.canonical()["synth"]}, "synth", seed)
    return f"synth: {len(pubs)} publications by {len(truth.authors)} focal authors"


HANDLERS = {
    "ingest": stage_ingest, "matrices": stage_matrices, "train": stage_train,
    "tune": stage_tune, "predict": stage_predict, "evaluate": stage_evaluate,
    "report": stage_report, "synth": stage_synth,
}


# -- argument handling ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", default="paper-set4.cfg",
                        help="INI config file, or the name of a bundled profile "
                             "(paper-set4.cfg, paper-set3.cfg); default %(default)s")
    common.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
    common.add_argument("--threads", type=int, help="worker cap; results do not depend on it")
    common.add_argument("--output", "-o", help="output directory (overrides run.output and "
                                                "$COAUTHORCAST_OUT)")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override one config value")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="coauthorcast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "ingest": "parse the corpus and build per-researcher timelines",
        "matrices": "slice the data and compute the empirical group means",
        "train": "fit the publication-rate and coauthor-rate matrices",
        "tune": "search the cumulative-advantage hyperparameters",
        "predict": "simulate forecasts for the test researchers",
        "evaluate": "compare forecasts with observations",
        "report": "collate headline numbers and draw charts",
        "synth": "draw a synthetic corpus from the model",
        "pipeline": "run ingest through report",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = PipelineConfig.load(args.config, args.overrides, seed=args.seed,
                                  threads=args.threads)
        run = Run(cfg, cfg.output_dir(args.output))
        stages = STAGES if args.command == "pipeline" else (args.command,)
    except ConfigError as exc:
        print(f"coauthorcast: error: {exc}", file=sys.stderr)
        return 2
    for stage in stages:
        try:
            print(HANDLERS[stage](run))
        except ConfigError as exc:
            print(f"coauthorcast {stage}: error: {exc}", file=sys.stderr)
            return 2
        except (CoauthorcastError, ValueError, ArithmeticError) as exc:
            print(f"coauthorcast {stage}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
