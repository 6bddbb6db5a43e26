"""Sweep grids, early fusion and result tables."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify.validation import ForestTrainer, cross_validate
from .csvio import fmt, read_rows, write_rows
from .errors import ParseError, PipelineError, SelectionBoundsError
from .features import SPATIO_TEMPORAL, STATISTICAL
from .select import ALPHA, rank_and_filter, score_matrix

log = logging.getLogger(__name__)

GRID_KINDS = ("single_stat", "single_temporal", "complement", "equal", "full_grid")
TOP_FEATURES = 250
STEP = 10

METRIC_HEADER = [
    "n_stat",
    "n_temporal",
    "acc_mean",
    "acc_std",
    "prec_mean",
    "prec_std",
    "rec_mean",
    "rec_std",
    "f1_mean",
    "f1_std",
]


@dataclass(frozen=True, order=True)
class SweepConfig:
    n_stat: int
    n_temporal: int
    grid_kind: str = "full_grid"

    def __post_init__(self):
        if self.n_stat < 0 or self.n_temporal < 0 or self.n_stat + self.n_temporal < 1:
            raise ValueError(f"invalid feature counts ({self.n_stat}, {self.n_temporal})")

    @property
    def key(self):
        return (self.n_stat, self.n_temporal)

    @property
    def group(self):
        if self.n_stat and self.n_temporal:
            return "mixed"
        return STATISTICAL if self.n_stat else SPATIO_TEMPORAL


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    mean: object  # FoldMetrics
    std: object

    def row(self):
        m, s = self.mean, self.std
        return [
            self.config.n_stat,
            self.config.n_temporal,
            m.accuracy,
            s.accuracy,
            m.precision,
            s.precision,
            m.recall,
            s.recall,
            m.f1,
            s.f1,
        ]


def enumerate_grid(kind, limit=TOP_FEATURES, step=STEP, rect_step=0):
    """Feature-count configurations for one sweep family.

    ``full_grid`` is the union of the four families (99 configurations at the
    default limit of 250 and step of 10); with ``rect_step > 0`` it also
    adds every ``(i, j)`` on a rectangular lattice of that spacing.
    """
    sizes = list(range(step, limit + 1, step))
    if kind == "single_stat":
        return [SweepConfig(n, 0, kind) for n in sizes]
    if kind == "single_temporal":
        return [SweepConfig(0, n, kind) for n in sizes]
    if kind == "complement":
        return [SweepConfig(n, limit - n, kind) for n in sizes if n < limit]
    if kind == "equal":
        return [SweepConfig(n, n, kind) for n in sizes]
    if kind == "full_grid":
        seen = {}
        for sub in GRID_KINDS[:-1]:
            for c in enumerate_grid(sub, limit, step):
                seen.setdefault(c.key, c)
        if rect_step > 0:
            axis = range(0, limit + 1, rect_step)
            for i in axis:
                for j in axis:
                    if i + j > 0:
                        seen.setdefault((i, j), SweepConfig(i, j, "full_grid"))
        return sorted(seen.values(), key=lambda c: c.key)
    raise ValueError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")


@dataclass(frozen=True)
class RankedSet:
    """A feature matrix restricted to its ANOVA survivors, columns in rank order."""

    matrix: object
    scores: list

    def __len__(self):
        return len(self.scores)

    def top(self, n):
        if not 0 <= n <= len(self.scores):
            raise SelectionBoundsError(f"asked for {n} features; {len(self.scores)} available")
        return self.matrix.take(range(n))


def rank_matrix(matrix, alpha=ALPHA, top=TOP_FEATURES):
    ranked = rank_and_filter(score_matrix(matrix), alpha)[:top]
    return RankedSet(matrix.select([s.name for s in ranked]), ranked)


def ranked_from_scores(matrix, ranked, top=TOP_FEATURES):
    ranked = list(ranked)[:top]
    return RankedSet(matrix.select([s.name for s in ranked]), ranked)


def early_fuse(stat, temporal, config):
    """Top ``n_stat`` statistical columns followed by the top ``n_temporal`` temporal ones."""
    s = stat.top(config.n_stat)
    t = temporal.top(config.n_temporal)
    if not np.array_equal(s.window_ids, t.window_ids):
        pos = {w: i for i, w in enumerate(t.window_ids.tolist())}
        try:
            t = t.rows([pos[w] for w in s.window_ids.tolist()])
        except KeyError as exc:
            raise SelectionBoundsError(f"window {exc.args[0]!r} missing from temporal features") from None
    if config.n_temporal == 0:
        return s
    if config.n_stat == 0:
        return t
    return s.hstack(t)


@dataclass
class SweepRun:
    results: list
    failures: list  # (SweepConfig, message)


def run_sweep(stat, temporal, configs, k=10, seed=1, estimators=100, jobs=1, trainer=None):
    """Cross-validate a forest on every fused configuration.

    Failing configurations are logged and collected rather than raised.
    Results come back ordered by ``(n_stat, n_temporal)``.
    """
    trainer = trainer or ForestTrainer(estimators=estimators, jobs=jobs)
    configs = sorted({c.key: c for c in configs}.values(), key=lambda c: c.key)
    results, failures = [], []
    for i, config in enumerate(configs, start=1):
        try:
            fused = early_fuse(stat, temporal, config)
            cv = cross_validate(fused, k=k, seed=seed, trainer=trainer)
        except PipelineError as exc:
            log.error("config (%d, %d) failed: %s", config.n_stat, config.n_temporal, exc)
            failures.append((config, str(exc)))
            continue
        results.append(SweepResult(config, cv.mean, cv.std))
        log.info(
            "[%d/%d] stat=%d temporal=%d acc=%.2f",
            i,
            len(configs),
            config.n_stat,
            config.n_temporal,
            cv.mean.accuracy,
        )
    return SweepRun(results, failures)


def top_results(results, n=10):
    """Best ``n`` by mean accuracy (ties: fewer features first, then by counts)."""
    return sorted(results, key=lambda r: (-r.mean.accuracy, r.config.n_stat + r.config.n_temporal, r.config.key))[:n]


def best_of_each(results):
    """Best mixed, statistical-only and temporal-only results (any may be missing)."""
    out = {}
    for group in ("mixed", STATISTICAL, SPATIO_TEMPORAL):
        members = [r for r in results if r.config.group == group]
        if members:
            out[group] = top_results(members, 1)[0]
    return out


def group_summary(results):
    """Five-number accuracy summary per input group (box-plot data)."""
    rows = []
    for group in (STATISTICAL, SPATIO_TEMPORAL, "mixed"):
        acc = np.array([r.mean.accuracy for r in results if r.config.group == group])
        if len(acc):
            q = np.percentile(acc, [0, 25, 50, 75, 100])
            rows.append([group, len(acc)] + q.tolist())
    return rows


def write_sweep_outputs(out_dir, run):
    out = Path(out_dir)
    results = sorted(run.results, key=lambda r: r.config.key)
    write_rows(out / "sweep_results.csv", METRIC_HEADER, ([_cell(v) for v in r.row()] for r in results))
    write_rows(
        out / "heatmap.csv",
        ["n_stat", "n_temporal", "mean_accuracy"],
        ([r.config.n_stat, r.config.n_temporal, fmt(r.mean.accuracy)] for r in results),
    )
    write_rows(
        out / "top10.csv",
        ["rank"] + METRIC_HEADER,
        ([i] + [_cell(v) for v in r.row()] for i, r in enumerate(top_results(results), start=1)),
    )
    write_rows(
        out / "accuracy_by_group.csv",
        ["group", "n_stat", "n_temporal", "acc_mean"],
        ([r.config.group, r.config.n_stat, r.config.n_temporal, fmt(r.mean.accuracy)] for r in results),
    )
    write_rows(
        out / "group_summary.csv",
        ["group", "count", "min", "q1", "median", "q3", "max"],
        ([g, n] + [fmt(v) for v in q] for g, n, *q in group_summary(results)),
    )
    write_rows(
        out / "sweep_failures.csv",
        ["n_stat", "n_temporal", "error"],
        ([c.n_stat, c.n_temporal, msg] for c, msg in sorted(run.failures, key=lambda f: f[0].key)),
    )


def _cell(v):
    return v if isinstance(v, int) else fmt(v)


def read_sweep_results(path):
    from .classify.validation import FoldMetrics

    header, rows = read_rows(path)
    if header != METRIC_HEADER:
        raise ParseError(f"{path}: unexpected header {header}")
    out = []
    for r in rows:
        v = [float(x) for x in r[2:]]
        out.append(
            SweepResult(
                SweepConfig(int(r[0]), int(r[1])),
                FoldMetrics(v[0], v[2], v[4], v[6]),
                FoldMetrics(v[1], v[3], v[5], v[7]),
            )
        )
    return out


def format_metric_table(results, title):
    """Aligned text table: feature counts, then ``mean (std)`` per metric."""
    header = ["Statistical", "Spatio-temporal", "Accuracy", "Precision", "Recall", "F1"]
    body = []
    for r in results:
        m, s = r.mean, r.std
        body.append(
            [
                str(r.config.n_stat),
                str(r.config.n_temporal),
                f"{m.accuracy:.2f} ({s.accuracy:.2f})",
                f"{m.precision:.3f} ({s.precision:.3f})",
                f"{m.recall:.3f} ({s.recall:.3f})",
                f"{m.f1:.3f} ({s.f1:.3f})",
            ]
        )
    return _align(title, header, body)


def _align(title, header, body):
    widths = [max(len(str(row[i])) for row in [header] + body) for i in range(len(header))]
    lines = [title, "  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(str(c).rjust(w) for c, w in zip(row, widths)) for row in body]
    return "\n".join(lines) + "\n"


def format_rows(title, header, rows):
    return _align(title, header, [[str(c) for c in row] for row in rows])
