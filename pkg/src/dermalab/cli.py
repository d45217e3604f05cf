"""Command-line surface.

Subcommands: synth, pipeline, analyze, stats, report. Every command is
deterministic under a fixed configuration and seed, writes a machine-readable
log of its effective parameters next to its outputs, and never touches its
input directory. Files are written to temporary names and renamed into place.

Exit codes: 0 ok, 2 usage, 3 ingest, 4 modeling, 5 stats, 6 report.

Configuration: ``--config file.json`` holds flat dotted keys mirroring module
parameters (e.g. "cvxeda.alpha", "forest.n_trees"); command-line flags
override file values. The seed resolves as flag > config "seed" >
DERMALAB_SEED environment variable > 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dsp, features, ingest, stats, synth
from .cvxeda import CvxEdaParams, decompose, noise_matched_alpha
from .errors import (
    DermalabError,
    EmptyWindow,
    IngestError,
    InvalidSpec,
    ModelError,
    StatsError,
    TooShort,
)
from .forest import (
    ForestParams,
    evaluate_classification,
    evaluate_regression,
    fit,
    impurity_importance,
    shap_summary_points,
    train_test_split,
)

__all__ = ["main"]

SAM_DOMAINS = ("valence", "arousal", "dominance")

_RELATION_ALIASES = {
    "co2": "co2_suppresses_feature",
    "ir": "ir_raises_feature",
    "none": "none",
}

DEFAULTS = {
    "seed": 0,
    "pipeline.clean": True,
    "pipeline.normalize": True,
    "pipeline.decompose": True,
    "pipeline.lowpass_hz": 1.5,
    "pipeline.lowpass_order": 32,
    "clean.z_threshold": 3.0,
    "clean.replacement": "interpolate",
    "cvxeda.tau0": 2.0,
    "cvxeda.tau1": 0.7,
    "cvxeda.knot_spacing": 10.0,
    "cvxeda.alpha": "auto",   # noise-matched per session; or a number
    "cvxeda.gamma": 1e-2,
    "cvxeda.solver_tol": 1e-6,
    "cvxeda.max_iters": 50_000,
    "features.scr_min_amplitude": 0.01,
    "features.psd_window_len": 128,
    "features.psd_overlap_fraction": 0.5,
    "features.strict_overlap": False,
    "features.cdm_num_bands": 8,
    "features.cdm_bandwidth": 0.125,
    "features.analysis_rate_hz": 2.0,
    "features.highpass_hz": 0.01,
    "features.highpass_order": 8,
    "features.tvsymp_scope": "session",   # or "window"
    "forest.n_trees": None,
    "forest.max_depth": None,
    "forest.min_samples_leaf": None,
    "forest.features_per_split": None,
    "forest.bootstrap": True,
    "analyze.ratio": 0.7,
    "analyze.background_rows": 64,
    "analyze.class_features": ["tvsymp", "edasymp", "nsscr"],
    "stats.comparisons": None,
}


class _ReportInputMissing(DermalabError):
    pass


class RunConfig:
    """Flat dotted-key configuration with defaults and flag overrides."""

    def __init__(self, values: dict):
        unknown = set(values) - set(DEFAULTS)
        if unknown:
            raise InvalidSpec(f"unknown config key(s): {sorted(unknown)}")
        self.values = {**DEFAULTS, **values}
        self.explicit = set(values)

    @classmethod
    def load(cls, config_path, overrides: dict | None = None) -> "RunConfig":
        values = {}
        if config_path:
            values.update(json.loads(Path(config_path).read_text(encoding="utf-8")))
        cfg = cls(values)
        for key, val in (overrides or {}).items():
            if val is not None:
                cfg.values[key] = val
                cfg.explicit.add(key)
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def resolve_seed(self, flag_seed) -> int:
        """flag > config file > DERMALAB_SEED environment variable > 0."""
        if flag_seed is not None:
            return int(flag_seed)
        if "seed" in self.explicit:
            return int(self.values["seed"])
        env = os.environ.get("DERMALAB_SEED")
        return int(env) if env is not None else 0

    def feature_params(self) -> features.FeatureParams:
        return features.FeatureParams(
            scr_min_amplitude=self["features.scr_min_amplitude"],
            psd_window_len=int(self["features.psd_window_len"]),
            psd_overlap_fraction=self["features.psd_overlap_fraction"],
            strict_overlap=bool(self["features.strict_overlap"]),
            cdm_num_bands=int(self["features.cdm_num_bands"]),
            cdm_bandwidth=self["features.cdm_bandwidth"],
        )

    def cvxeda_params(self, alpha: float) -> CvxEdaParams:
        return CvxEdaParams(
            tau0=self["cvxeda.tau0"],
            tau1=self["cvxeda.tau1"],
            knot_spacing=self["cvxeda.knot_spacing"],
            alpha=alpha,
            gamma=self["cvxeda.gamma"],
            solver_tol=self["cvxeda.solver_tol"],
            max_iters=int(self["cvxeda.max_iters"]),
        )

    def forest_params(self, seed: int) -> ForestParams:
        return ForestParams(
            n_trees=self["forest.n_trees"],
            max_depth=self["forest.max_depth"],
            min_samples_leaf=self["forest.min_samples_leaf"],
            features_per_split=self["forest.features_per_split"],
            bootstrap=bool(self["forest.bootstrap"]),
            seed=seed,
        )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class _OutputDir:
    """Atomic per-file writes with rollback so a failed run leaves nothing
    behind."""

    def __init__(self, out_dir, force: bool):
        self.dir = Path(out_dir)
        if self.dir.exists() and any(self.dir.iterdir()) and not force:
            raise InvalidSpec(
                f"output directory {self.dir} is not empty (use --force to overwrite)"
            )
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written = []

    def write(self, name: str, text: str) -> Path:
        path = self.dir / name
        _atomic_write(path, text)
        self.written.append(path)
        return path

    def write_via(self, name: str, writer):
        """Run ``writer(tmp_path)`` and rename into place; returns the
        writer's return value."""
        tmp = self.dir / (name + ".tmp")
        result = writer(tmp)
        os.replace(tmp, self.dir / name)
        self.written.append(self.dir / name)
        return result

    def rollback(self) -> None:
        for path in self.written:
            try:
                path.unlink()
            except OSError:
                pass


# --- synth -------------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = RunConfig.load(args.config)
    seed = cfg.resolve_seed(args.seed)
    relation = _RELATION_ALIASES.get(args.relation, args.relation)
    synth.gen_session(
        args.out,
        n_windows=args.windows,
        relation=relation,
        seed=seed,
        task_s=args.task_s,
        baseline_s=args.baseline_s,
        survey_s=args.survey_s,
        stimuli_blocks=args.stimuli,
        noise_std=args.noise_std,
    )
    print(f"session written to {args.out}")
    return 0


# --- pipeline ------------------------------------------------------------------

def _load_session(session_dir: Path):
    eda = ingest.parse_eda_csv(session_dir / "eda.csv")
    env = ingest.parse_env_csv(session_dir / "env.csv")
    timeline = ingest.parse_events_csv(session_dir / "events.csv")
    sam_path = session_dir / "sam.csv"
    sam = ingest.parse_sam_csv(sam_path) if sam_path.exists() else {}
    rep_path = session_dir / "reports.csv"
    reports = ingest.parse_reports_csv(rep_path) if rep_path.exists() else {}
    return eda, env, timeline, sam, reports


def cmd_pipeline(args) -> int:
    cfg = RunConfig.load(args.config, {
        "pipeline.clean": False if args.no_clean else None,
        "pipeline.normalize": False if args.no_normalize else None,
        "pipeline.decompose": False if args.no_decompose else None,
        "cvxeda.alpha": args.alpha,
    })
    seed = cfg.resolve_seed(args.seed)
    session_dir = Path(args.session)
    try:
        eda, env, timeline, sam, reports = _load_session(session_dir)
    except FileNotFoundError as exc:
        raise IngestError(f"missing session file: {exc.filename}") from None

    if cfg["clean.replacement"] != "interpolate":
        raise InvalidSpec(
            "the pipeline needs length-preserving cleaning; "
            "set clean.replacement to 'interpolate'"
        )

    # condition the whole trace, then align windows on the same clock
    x = eda.samples
    outliers = []
    if cfg["pipeline.clean"]:
        x, outliers = dsp.zscore_clean(
            x, dsp.CleanParams(z_threshold=cfg["clean.z_threshold"])
        )
    if cfg["pipeline.normalize"]:
        x = dsp.standardize(x)
    lowpass = dsp.design_butterworth(
        "lowpass", cfg["pipeline.lowpass_hz"], int(cfg["pipeline.lowpass_order"]),
        eda.sample_rate,
    )
    alpha_cfg = cfg["cvxeda.alpha"]
    if alpha_cfg == "auto":
        # sparsity matched to the session's post-filter noise floor
        sigma = dsp.noise_floor(x) * dsp.filtered_noise_factor(lowpass)
        alpha = max(
            noise_matched_alpha(sigma, eda.sample_rate,
                                cfg["cvxeda.tau0"], cfg["cvxeda.tau1"]),
            8e-4,
        )
    else:
        alpha = float(alpha_cfg)
    x = dsp.zero_phase_filter(lowpass, x)
    view = ingest.SignalView(start_time=eda.start_time, sample_rate=eda.sample_rate,
                             samples=x)
    windows = ingest.window_align(view, env, timeline)

    fparams = cfg.feature_params()
    cvx = cfg.cvxeda_params(alpha)
    analysis_rate = cfg["features.analysis_rate_hz"]
    min_window_s = fparams.psd_window_len / analysis_rate

    # recording-scope sympathetic index series on the 2 Hz analysis stream
    tv_session = None
    if cfg["features.tvsymp_scope"] == "session":
        x2 = dsp.decimate(x, eda.sample_rate, analysis_rate)
        hp = dsp.design_butterworth(
            "highpass", cfg["features.highpass_hz"],
            int(cfg["features.highpass_order"]), analysis_rate,
        )
        tv_session = features.tvsymp_series(
            dsp.zero_phase_filter(hp, x2), analysis_rate, fparams
        )
    elif cfg["features.tvsymp_scope"] != "window":
        raise InvalidSpec("features.tvsymp_scope must be 'session' or 'window'")

    def _session_tv_mean(window):
        step2 = 1000.0 / analysis_rate
        i0 = max(int(np.ceil((window.start_ms - eda.start_time) / step2 - 1e-9)), 0)
        i1 = min(int(np.ceil((window.end_ms - eda.start_time) / step2 - 1e-9)),
                 tv_session.size)
        if i1 <= i0:
            return None
        return float(tv_session[i0:i1].mean())

    rows = []
    decomp_exports = {}
    skipped = []
    for window in windows:
        if window.duration_s < min_window_s:
            skipped.append({"window_id": window.window_id,
                            "reason": f"shorter than {min_window_s:.0f} s"})
            continue
        if cfg["pipeline.decompose"]:
            dec = decompose(window.samples, window.sample_rate, cvx)
        else:
            # degraded mode: treat the mean-removed signal as the phasic wave
            from types import SimpleNamespace
            dec = SimpleNamespace(phasic=window.samples - window.samples.mean())
        try:
            row = features.extract_window_features(
                window, dec, fparams,
                analysis_rate=analysis_rate,
                highpass_hz=cfg["features.highpass_hz"],
                highpass_order=int(cfg["features.highpass_order"]),
                tvsymp_value=None if tv_session is None else _session_tv_mean(window),
            )
        except (TooShort, EmptyWindow) as exc:
            skipped.append({"window_id": window.window_id, "reason": str(exc)})
            continue
        stress = None
        if window.window_id in reports:
            stress = ingest.label_stress(reports[window.window_id])
        row = features.attach_labels(row, stress_label=stress,
                                     sam=sam.get(window.window_id))
        rows.append(row)
        if cfg["pipeline.decompose"]:
            decomp_exports[window.window_id] = (dec, window.start_ms)

    out = _OutputDir(args.out, args.force)
    try:
        out.write_via("features.csv", lambda p: features.write_features_csv(rows, p))
        for wid, (dec, start_ms) in decomp_exports.items():
            out.write_via(f"decomp_{wid}.csv",
                          lambda p, d=dec, s=start_ms: d.to_csv(p, start_ms=s))
        log = {
            "command": "pipeline",
            "session": str(session_dir),
            "seed": seed,
            "parameters": cfg.values,
            "effective_alpha": alpha,
            "sample_rate_hz": eda.sample_rate,
            "n_outliers_cleaned": len(outliers),
            "env_gaps": [list(g) for g in env.gaps],
            "windows_processed": [r.window_id for r in rows],
            "windows_skipped": skipped,
            "lowpass": json.loads(lowpass.to_json()),
        }
        out.write("pipeline_log.json", json.dumps(log, indent=2))
    except Exception:
        out.rollback()
        raise
    print(f"{len(rows)} feature rows -> {out.dir / 'features.csv'}")
    return 0


# --- analyze -------------------------------------------------------------------

def _load_feature_files(paths):
    rows = []
    for p in paths:
        if not Path(p).exists():
            raise IngestError(f"features file not found: {p}")
        rows.extend(features.read_features_csv(p))
    return rows


def cmd_analyze(args) -> int:
    cfg = RunConfig.load(args.config, {
        "analyze.ratio": args.ratio,
        "forest.n_trees": args.trees,
    })
    seed = cfg.resolve_seed(args.seed)
    rows = _load_feature_files(args.features)
    task = args.task
    target = args.target

    if task == "regression":
        if target not in features.FEATURE_NAMES:
            raise InvalidSpec(f"regression target must be one of {features.FEATURE_NAMES}")
        feat_names = list(ingest.ENV_CHANNELS)
        X = np.asarray([[r.env[c] for c in feat_names] for r in rows])
        y = np.asarray([getattr(r, target) for r in rows], dtype=np.float64)
    else:
        if target not in SAM_DOMAINS:
            raise InvalidSpec(f"classification target must be one of {SAM_DOMAINS}")
        feat_names = list(cfg["analyze.class_features"])
        rows = [r for r in rows if getattr(r, target) is not None]
        if not rows:
            raise ModelError(f"no rows carry a {target} rating")
        X = np.asarray([[getattr(r, c) for c in feat_names] for r in rows])
        y = np.asarray([getattr(r, target) for r in rows], dtype=np.int64)

    idx_train, idx_test = train_test_split(np.arange(len(rows)), cfg["analyze.ratio"], seed)
    model = fit(X[idx_train], y[idx_train], task, cfg.forest_params(seed),
                feature_names=feat_names)

    metrics = {"task": task, "target": target, "r2": None, "accuracy": None,
               "confusion": None, "class_labels": None,
               "n_train": int(idx_train.size), "n_test": int(idx_test.size),
               "seed": seed}
    if task == "regression":
        metrics["r2"] = evaluate_regression(model, X[idx_test], y[idx_test])
    else:
        accuracy, matrix, labels = evaluate_classification(model, X[idx_test], y[idx_test])
        metrics["accuracy"] = accuracy
        metrics["confusion"] = matrix.tolist()
        metrics["class_labels"] = labels.tolist()

    importance = impurity_importance(model)
    background = X[idx_train][: int(cfg["analyze.background_rows"])]
    points = shap_summary_points(model, X, background)

    out = _OutputDir(args.out, args.force)
    try:
        out.write("model.json", model.to_json())
        out.write("metrics.json", json.dumps(metrics, indent=2))
        imp_lines = ["feature,importance"]
        imp_lines += [f"{name},{float(val)!r}" for name, val in zip(feat_names, importance)]
        out.write("importance.csv", "\n".join(imp_lines) + "\n")
        pt_lines = ["row,feature,phi,value,percentile"]
        pt_lines += [
            f"{p['row']},{p['feature']},{p['phi']!r},{p['value']!r},{p['percentile']!r}"
            for p in points
        ]
        out.write("shap_points.csv", "\n".join(pt_lines) + "\n")
        log = {
            "command": "analyze",
            "features_files": [str(p) for p in args.features],
            "seed": seed,
            "task": task,
            "target": target,
            "feature_names": feat_names,
            "parameters": model.params,
            "ratio": cfg["analyze.ratio"],
            "background_rows": int(background.shape[0]),
        }
        out.write("analyze_log.json", json.dumps(log, indent=2))
    except Exception:
        out.rollback()
        raise
    headline = metrics["r2"] if task == "regression" else metrics["accuracy"]
    print(f"{task} on {target}: {'R2' if task == 'regression' else 'accuracy'} = {headline:.4f}")
    return 0


# --- stats ---------------------------------------------------------------------

def _default_comparisons(labels_present):
    stim = {"stimulus_pristine", "stimulus_polluted", "stimulus_genfill"}
    comparisons = {}
    if stim <= labels_present:
        comparisons["rest_vs_affective_stimuli"] = [
            ["baseline"],
            ["stimulus_pristine", "stimulus_polluted", "stimulus_genfill"],
        ]
        comparisons["real_vs_genfill_stimuli"] = [
            ["stimulus_polluted"], ["stimulus_genfill"],
        ]
        comparisons["pristine_vs_polluted_stimuli"] = [
            ["stimulus_pristine"], ["stimulus_polluted", "stimulus_genfill"],
        ]
    elif {"baseline", "task"} <= labels_present:
        comparisons["baseline_vs_task"] = [["baseline"], ["task"]]
    return comparisons


def cmd_stats(args) -> int:
    cfg = RunConfig.load(args.config)
    rows = _load_feature_files([args.features])
    if args.sam:
        if not Path(args.sam).exists():
            raise IngestError(f"sam file not found: {args.sam}")
        sam = ingest.parse_sam_csv(args.sam)
        rows = [features.attach_labels(r, sam=sam.get(r.window_id)) for r in rows]

    summary = stats.event_summary(rows)
    labels_present = set(summary.labels)
    comparisons = cfg["stats.comparisons"] or _default_comparisons(labels_present)

    lines = ["section,name,feature,n,mean,std,H,df,p,rho"]
    for label, feat, mean, std, n in summary.rows():
        lines.append(f"summary,{label},{feat},{n},{mean!r},{std!r},,,,")

    for name, groups_labels in comparisons.items():
        groups_rows = []
        for gset in groups_labels:
            sel = [r for r in rows if r.label in set(gset)]
            if not sel:
                raise StatsError(f"comparison {name!r}: group {gset} matched no rows")
            groups_rows.append(sel)
        for feat in features.FEATURE_NAMES:
            groups = [[getattr(r, feat) for r in g] for g in groups_rows]
            res = stats.kruskal_wallis(groups)
            lines.append(f"kruskal,{name},{feat},{sum(len(g) for g in groups)},,,"
                         f"{res.H!r},{res.df},{res.p!r},")

    have_sam = [r for r in rows if r.arousal is not None]
    if have_sam:
        for domain in SAM_DOMAINS:
            dom_rows = [r for r in rows if getattr(r, domain) is not None]
            ratings = [getattr(r, domain) for r in dom_rows]
            for feat in features.FEATURE_NAMES:
                vals = [getattr(r, feat) for r in dom_rows]
                try:
                    rho = stats.spearman_rho(vals, ratings)
                except DermalabError as exc:
                    print(f"warning: spearman {feat} vs {domain} skipped: {exc}",
                          file=sys.stderr)
                    continue
                lines.append(f"spearman,{domain},{feat},{len(dom_rows)},,,,,,{rho!r}")
    else:
        print("warning: no SAM ratings available; spearman section omitted",
              file=sys.stderr)

    out = _OutputDir(args.out, args.force)
    try:
        out.write("stats_report.csv", "\n".join(lines) + "\n")
        log = {
            "command": "stats",
            "features_file": str(args.features),
            "sam_file": str(args.sam) if args.sam else None,
            "comparisons": comparisons,
            "labels_present": sorted(labels_present),
        }
        out.write("stats_log.json", json.dumps(log, indent=2))
    except Exception:
        out.rollback()
        raise
    print(f"stats report -> {out.dir / 'stats_report.csv'}")
    return 0


# --- report ----------------------------------------------------------------------

def _read_shap_points(path):
    import csv as _csv

    points = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for rec in _csv.DictReader(fh):
            points.append(
                {
                    "row": int(rec["row"]),
                    "feature": rec["feature"],
                    "phi": float(rec["phi"]),
                    "value": float(rec["value"]),
                    "percentile": float(rec["percentile"]),
                }
            )
    return points


def cmd_report(args) -> int:
    from . import report as rpt

    analysis_dir = Path(args.analysis)
    metrics_path = analysis_dir / "metrics.json"
    shap_path = analysis_dir / "shap_points.csv"
    if not metrics_path.exists() or not shap_path.exists():
        raise _ReportInputMissing(f"analysis outputs missing under {analysis_dir}")
    if not Path(args.features).exists():
        raise _ReportInputMissing(f"features file not found: {args.features}")
    stats_lines = []
    if args.stats:
        stats_path = Path(args.stats) / "stats_report.csv"
        if not stats_path.exists():
            raise _ReportInputMissing(f"stats output missing under {args.stats}")
        body = stats_path.read_text(encoding="utf-8").strip().splitlines()
        stats_lines = ["```", *body, "```"]

    metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
    points = _read_shap_points(shap_path)
    rows = _load_feature_files([args.features])

    out = _OutputDir(args.out, args.force)
    try:
        order = out.write_via("beeswarm.svg",
                              lambda p: rpt.beeswarm_svg(points, p))
        box_files = []
        for feat in features.FEATURE_NAMES:
            name = f"box_{feat}.svg"
            out.write_via(name, lambda p, f=feat: rpt.event_boxplot_svg(rows, f, p))
            box_files.append(out.dir / name)
        confusion_file = None
        if metrics.get("confusion"):
            confusion_file = out.dir / "confusion.svg"
            out.write_via("confusion.svg",
                          lambda p: rpt.confusion_svg(metrics["confusion"],
                                                      metrics["class_labels"], p))
        out.write_via("report.md", lambda p: rpt.write_report_md(
            p,
            beeswarm_order=order,
            metrics=metrics,
            box_files=box_files,
            confusion_file=confusion_file,
            stats_lines=stats_lines,
        ))
        log = {
            "command": "report",
            "analysis_dir": str(analysis_dir),
            "stats_dir": str(args.stats) if args.stats else None,
            "features_file": str(args.features),
            "beeswarm_order": order,
        }
        out.write("report_log.json", json.dumps(log, indent=2))
    except Exception:
        out.rollback()
        raise
    print(f"report -> {out.dir / 'report.md'}")
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dermalab",
        description="Electrodermal activity pipeline: synthesize, process, model, test, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic session directory")
    p.add_argument("--windows", type=int, default=8)
    p.add_argument("--relation", default="none",
                   choices=sorted(set(_RELATION_ALIASES) | set(synth.RELATIONS)))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--task-s", type=float, default=120.0)
    p.add_argument("--baseline-s", type=float, default=30.0)
    p.add_argument("--survey-s", type=float, default=30.0)
    p.add_argument("--stimuli", type=int, default=0, help="stimulus block count")
    p.add_argument("--noise-std", type=float, default=0.01)
    p.add_argument("--config", default=None)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="clean, filter, decompose, extract features")
    p.add_argument("--session", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--no-clean", action="store_true")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--no-decompose", action="store_true")
    p.add_argument("--alpha", type=float, default=None,
                   help="driver sparsity weight override")
    p.add_argument("--force", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("analyze", help="train a forest and attribute its predictions")
    p.add_argument("--features", nargs="+", required=True,
                   help="feature CSVs; several files pool sessions")
    p.add_argument("--task", choices=("regression", "classification"), required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--ratio", type=float, default=None)
    p.add_argument("--trees", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--force", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("stats", help="event summaries, rank tests, correlations")
    p.add_argument("--features", required=True)
    p.add_argument("--sam", default=None, help="optional sam.csv to (re)join ratings")
    p.add_argument("--config", default=None)
    p.add_argument("--force", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="render vector-graphics report files")
    p.add_argument("--analysis", required=True)
    p.add_argument("--stats", default=None)
    p.add_argument("--features", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--force", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ReportInputMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 6
    except StatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (IngestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DermalabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
