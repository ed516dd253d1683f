"""Composition of the mitigation stages into the eight plan variants,
seeded repetition, aggregation and report emission.

Stage order per run: split, optional quantile repair (on raw features),
normalization fit on the (repaired) train split, baseline or adversarial
training, scoring, optional calibrated-equalized-odds adjustment fit on
validation and applied to test, then thresholding at 0.5 and the
fairness report on the test split.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adversarial import AdvConfig, adversarial_train
from .data import Dataset, apply_normalizer, fit_normalizer, split
from .metrics import FAIR_DI_MIN, FAIR_DIFF_BAND, MetricsReport, fairness_report
from .nn import TrainConfig, predict_proba, train_baseline
from .posteq import apply_caleq, fit_caleq
from .repair import apply_repair, fit_repair

PLAN_ORDER = ("None", "Pre", "In", "Post", "Pre + In", "Pre + Post",
              "In + Post", "Pre + In + Post")

METRIC_FIELDS = ("accuracy", "spd", "eod", "aod", "di")


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class MitigationPlan:
    pre: bool = False
    inproc: bool = False
    post: bool = False

    @property
    def name(self) -> str:
        parts = [label for flag, label in
                 ((self.pre, "Pre"), (self.inproc, "In"), (self.post, "Post"))
                 if flag]
        return " + ".join(parts) if parts else "None"


ALL_PLANS = tuple(
    MitigationPlan(pre="Pre" in name.split(" + "),
                   inproc="In" in name.split(" + "),
                   post="Post" in name.split(" + "))
    if name != "None" else MitigationPlan()
    for name in PLAN_ORDER
)


def plan_from_name(name: str) -> MitigationPlan:
    """Accepts both the canonical 'Pre + In + Post' form and the compact
    'pre,in,post' token form ('none' for the unmitigated plan)."""
    cleaned = name.strip()
    if cleaned in PLAN_ORDER:
        tokens = [] if cleaned == "None" else cleaned.split(" + ")
    else:
        tokens = [t.strip().lower() for t in cleaned.split(",") if t.strip()]
        if tokens == ["none"]:
            tokens = []
        bad = [t for t in tokens if t not in ("pre", "in", "post")]
        if bad or not cleaned:
            raise ValueError(f"unknown plan: {name!r}")
        tokens = [t.capitalize() if t != "in" else "In" for t in tokens]
    lower = [t.lower() for t in tokens]
    if len(set(lower)) != len(lower):
        raise ValueError(f"duplicate stage in plan: {name!r}")
    return MitigationPlan(pre="pre" in lower, inproc="in" in lower,
                          post="post" in lower)


@dataclass(frozen=True)
class RunSettings:
    """Knobs shared across all runs of an experiment."""

    epochs: int = 50
    batch_size: int = 128
    learning_rate: float = 0.001
    repair_level: float = 1.0
    alpha: float = 1.0
    adversary_lr: float = 0.05
    cost_mode: str = "fnr"


def _train_stage(d: Dataset, pre: bool, inproc: bool, seed: int,
                 settings: RunSettings):
    """Split, optional repair, normalization and training; everything up
    to (and excluding) the post-processing stage."""
    splits = split(d, seed)
    train, test, val = splits.train, splits.test, splits.validation

    if pre:
        rmap = fit_repair(train, settings.repair_level)
        train = apply_repair(rmap, train)
        test = apply_repair(rmap, test)
        val = apply_repair(rmap, val)

    nz = fit_normalizer(train)
    train = apply_normalizer(nz, train)
    test = apply_normalizer(nz, test)
    val = apply_normalizer(nz, val)

    if inproc:
        cfg = AdvConfig(epochs=settings.epochs, batch_size=settings.batch_size,
                        learning_rate=settings.learning_rate, seed=seed,
                        alpha=settings.alpha, adversary_lr=settings.adversary_lr)
        params = adversarial_train(train, cfg)
    else:
        cfg = TrainConfig(epochs=settings.epochs, batch_size=settings.batch_size,
                          learning_rate=settings.learning_rate, seed=seed)
        params = train_baseline(train, cfg)
    return params, test, val


def _evaluate(params, test: Dataset, val: Dataset, post: bool, seed: int,
              settings: RunSettings) -> MetricsReport:
    test_scores = predict_proba(params, test.features)
    if post:
        val_scores = predict_proba(params, val.features)
        adj = fit_caleq(val_scores, val.labels, val.protected, settings.cost_mode)
        test_scores = apply_caleq(adj, test_scores, test.protected, seed)
    yhat = (test_scores >= 0.5).astype(np.int64)
    return fairness_report(test.labels, yhat, test.protected)


def run_once(d: Dataset, plan: MitigationPlan, seed: int,
             settings: RunSettings = RunSettings()) -> MetricsReport:
    """One fully deterministic (plan, seed) run; returns the test-split
    fairness report."""
    params, test, val = _train_stage(d, plan.pre, plan.inproc, seed, settings)
    return _evaluate(params, test, val, plan.post, seed, settings)


@dataclass(frozen=True)
class PlanSummary:
    name: str
    n_runs: int
    mean: dict
    std: dict


@dataclass(frozen=True)
class ExperimentSummary:
    plans: tuple[PlanSummary, ...]
    seeds: tuple[int, ...]
    settings: RunSettings
    reports: dict = field(default_factory=dict)  # (plan name, seed) -> report


def _run_group(args):
    """Execute all plans that share one (pre, inproc, seed) training
    stage; they differ only in the post-processing flag, so the trained
    model is reused. Results are identical to per-plan run_once calls."""
    d, pre, inproc, seed, plans, settings = args
    try:
        params, test, val = _train_stage(d, pre, inproc, seed, settings)
        return [(plan.name, seed,
                 _evaluate(params, test, val, plan.post, seed, settings))
                for plan in plans]
    except Exception as exc:
        names = ", ".join(p.name for p in plans)
        raise PipelineError(
            f"run failed for plan(s) {names!r}, seed {seed}: {exc}") from exc


def _aggregate(values):
    defined = [v for v in values if v is not None]
    if not defined:
        return None, None
    arr = np.asarray(defined, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def run_experiment(d: Dataset, plans, seeds, settings: RunSettings = RunSettings(),
                   jobs: int = 1) -> ExperimentSummary:
    """Run every (plan, seed) pair; aggregation is keyed by pair, so the
    summary is independent of scheduling order."""
    plans = list(plans)
    seeds = [int(s) for s in seeds]
    if not plans or not seeds:
        raise PipelineError("need at least one plan and one seed")
    groups = {}
    for plan in plans:
        for seed in seeds:
            groups.setdefault((plan.pre, plan.inproc, seed), []).append(plan)
    tasks = [(d, pre, inproc, seed, group_plans, settings)
             for (pre, inproc, seed), group_plans in groups.items()]
    results = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for group_results in pool.map(_run_group, tasks):
                for name, seed, report in group_results:
                    results[(name, seed)] = report
    else:
        for task in tasks:
            for name, seed, report in _run_group(task):
                results[(name, seed)] = report

    summaries = []
    for plan in plans:
        runs = [results[(plan.name, seed)] for seed in seeds]
        mean, std = {}, {}
        for fld in METRIC_FIELDS:
            mean[fld], std[fld] = _aggregate([getattr(r, fld) for r in runs])
        summaries.append(PlanSummary(name=plan.name, n_runs=len(runs),
                                     mean=mean, std=std))
    return ExperimentSummary(plans=tuple(summaries), seeds=tuple(seeds),
                             settings=settings, reports=results)


def _ordered(summary: ExperimentSummary):
    rank = {name: i for i, name in enumerate(PLAN_ORDER)}
    return sorted(summary.plans, key=lambda p: rank.get(p.name, len(rank)))


def _fair_flags(mean: dict) -> dict:
    lo, hi = FAIR_DIFF_BAND
    flags = {}
    for fld in ("spd", "eod", "aod"):
        v = mean[fld]
        flags[f"fair_{fld}"] = None if v is None else lo <= v <= hi
    di = mean["di"]
    flags["fair_di"] = None if di is None else di >= FAIR_DI_MIN
    return flags


def _fmt(v, digits=6):
    return "" if v is None else f"{v:.{digits}f}"


def emit_report(summary: ExperimentSummary, format: str = "csv") -> str:
    """Render the summary as machine CSV or an aligned human table, one
    row per plan in the canonical plan order."""
    rows = _ordered(summary)
    if format == "csv":
        buf = io.StringIO()
        header = ["plan"]
        for fld in METRIC_FIELDS:
            header += [f"{fld}_mean", f"{fld}_std"]
        header += ["fair_spd", "fair_eod", "fair_aod", "fair_di"]
        buf.write(",".join(header) + "\n")
        for p in rows:
            cells = [p.name]
            for fld in METRIC_FIELDS:
                cells += [_fmt(p.mean[fld]), _fmt(p.std[fld])]
            flags = _fair_flags(p.mean)
            cells += ["" if flags[k] is None else str(flags[k]).lower()
                      for k in ("fair_spd", "fair_eod", "fair_aod", "fair_di")]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()
    if format == "table":
        widths = {"plan": max(len("plan"), *(len(p.name) for p in rows))}
        lines = []
        header = f"{'plan':<{widths['plan']}}"
        for fld in METRIC_FIELDS:
            header += f"  {fld:>17}"
        header += "  fair"
        lines.append(header)
        for p in rows:
            line = f"{p.name:<{widths['plan']}}"
            for fld in METRIC_FIELDS:
                if p.mean[fld] is None:
                    line += f"  {'-':>17}"
                else:
                    line += f"  {p.mean[fld]:>8.4f}±{p.std[fld]:<8.4f}"
            flags = _fair_flags(p.mean)
            marks = "".join("?" if flags[k] is None else ("y" if flags[k] else "n")
                            for k in ("fair_spd", "fair_eod", "fair_aod", "fair_di"))
            line += f"  {marks}"
            lines.append(line)
        return "\n".join(lines) + "\n"
    raise ValueError(f"unsupported report format: {format!r}")
