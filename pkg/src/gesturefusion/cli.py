"""Command-line front end: synth, extract, rank, sweep and report.

Settings come from built-in defaults, then an optional flat ``key = value``
config file, then command flags of the same names.  Exit codes: 0 when
every output was written, 1 for pipeline failures (bad input, missing
upstream artifacts, failed sweep configurations), 2 for invalid settings.
"""

import argparse
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import experiment, synth
from .classify.baselines import modal_class, one_rule
from .csvio import fmt, read_rows, write_rows
from .errors import PipelineError
from .features import SPATIO_TEMPORAL, STATISTICAL, FeatureMatrix, extract_features
from .ingest import add_angle_channels, parse_frames, windowize, write_frames
from .select import rank_and_filter, read_ranked, score_matrix, select_raw_channels, top_n_table, write_ranked

log = logging.getLogger("gesturefusion")

FRAMES = "frames.csv"
RAW_SCORES = "raw_channel_scores.csv"
RAW_DROPPED = "raw_channel_dropped.csv"
TABLE1 = "table1_raw_mean_f.csv"
FEATURES = {STATISTICAL: "features_stat.csv", SPATIO_TEMPORAL: "features_temporal.csv"}
RANKED = {STATISTICAL: "ranked_features_stat.csv", SPATIO_TEMPORAL: "ranked_features_temporal.csv"}
MANIFEST = "feature_manifest.csv"
BASELINES = "baselines.csv"
SWEEP = "sweep_results.csv"
REPORT = "report.txt"
TABLE4 = "table4_top10.csv"
TABLE5 = "table5_best_of_each.csv"
REFERENCE_HEADER = ["quantity", "value"]

TABLE1_STEP = 50
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    input_path: str = ""
    output_dir: str = "out"
    window_len: int = 3
    stride: int = 1
    top_raw_channels: int = 50  # 0 keeps every raw channel
    alpha: float = 0.05
    top_features: int = 250
    folds: int = 10
    estimators: int = 100
    seed: int = 1
    grid_kind: str = "full_grid"
    grid_limit: int = 250
    grid_step: int = 10
    rect_step: int = 0
    jobs: int = 1
    ecdf_len: int = 10
    reference_path: str = ""
    profile: str = "default"
    classes: int = 18
    recordings_per_class: int = 0  # 0 selects the profile's own counts
    frames_per_recording: int = 3
    channels: int = 64
    informative_fraction: float = 0.8
    null_channels: int = 4
    noise: float = 1.0

    @property
    def frames_path(self):
        return Path(self.input_path) if self.input_path else Path(self.output_dir) / FRAMES

    def validate(self):
        checks = [
            (self.window_len >= 2, "window_len must be >= 2"),
            (self.stride >= 1, "stride must be >= 1"),
            (self.top_raw_channels >= 0, "top_raw_channels must be >= 0"),
            (0.0 < self.alpha < 1.0, "alpha must be in (0, 1)"),
            (self.top_features >= 1, "top_features must be >= 1"),
            (self.folds >= 2, "folds must be >= 2"),
            (self.estimators >= 1, "estimators must be >= 1"),
            (self.seed >= 0, "seed must be >= 0"),
            (self.grid_kind in experiment.GRID_KINDS, f"grid_kind must be one of {', '.join(experiment.GRID_KINDS)}"),
            (self.grid_step >= 1 and self.grid_limit >= self.grid_step, "need grid_limit >= grid_step >= 1"),
            (self.rect_step >= 0, "rect_step must be >= 0"),
            (self.jobs >= 1, "jobs must be >= 1"),
            (self.ecdf_len >= 1, "ecdf_len must be >= 1"),
            (self.profile in ("default", "complementary"), "profile must be default or complementary"),
            (1 <= self.classes <= 18, "classes must be in 1..18"),
            (self.recordings_per_class >= 0, "recordings_per_class must be >= 0"),
            (self.frames_per_recording >= 1, "frames_per_recording must be >= 1"),
            (self.channels >= 1, "channels must be >= 1"),
            (0.0 <= self.informative_fraction <= 1.0, "informative_fraction must be in [0, 1]"),
            (self.null_channels >= 0, "null_channels must be >= 0"),
            (self.noise >= 0.0, "noise must be >= 0"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(key, text):
    kind = _FIELDS[key].type
    try:
        if kind is int:
            return int(text)
        if kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError
            return value
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {text!r}") from None
    return text


def read_config_file(path):
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value' with a known key, got {line!r}")
        out[key] = _convert(key, value.strip())
    return out


def build_config(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in _FIELDS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _convert(key, flag)
    return RunConfig(**values).validate()


def _require(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"missing required input {path}; run the upstream command first")
    return path


def _write_table(path, header, rows):
    write_rows(path, header, ([v if isinstance(v, (int, str)) else fmt(v) for v in row] for row in rows))


def cmd_synth(cfg):
    if cfg.profile == "complementary":
        frames = synth.synth_complementary(recordings_per_class=cfg.recordings_per_class or 100, seed=cfg.seed)
    else:
        per_class = cfg.recordings_per_class or (
            synth.DEFAULT_RECORDINGS if cfg.classes == len(synth.DEFAULT_RECORDINGS) else 180
        )
        frames = synth.synth_gestures(
            classes=cfg.classes,
            recordings_per_class=per_class,
            frames_per_recording=cfg.frames_per_recording,
            channels=cfg.channels,
            informative_fraction=cfg.informative_fraction,
            seed=cfg.seed,
            null_channels=cfg.null_channels,
            noise=cfg.noise,
        )
    dest = cfg.frames_path
    dest.parent.mkdir(parents=True, exist_ok=True)
    write_frames(frames, dest)
    log.info("wrote %d frames x %d channels to %s", len(frames), len(frames.channels), dest)


def cmd_extract(cfg):
    out = Path(cfg.output_dir)
    with open(_require(cfg.frames_path), "rb") as fh:
        frames = parse_frames(fh)
    frames = add_angle_channels(frames)
    selection = select_raw_channels(frames, cfg.top_raw_channels or len(frames.channels), cfg.alpha)
    write_ranked(out / RAW_SCORES, selection.ranked)
    write_ranked(out / RAW_DROPPED, selection.dropped)
    finite = sum(1 for s in selection.ranked if math.isfinite(s.f_score))
    ns = [1] + list(range(TABLE1_STEP, finite, TABLE1_STEP)) + [finite]
    _write_table(out / TABLE1, ["n", "mean_f", "infinite_excluded"], top_n_table(selection.ranked, ns))

    chosen = frames.select_channels(selection.channels)
    windows = windowize(chosen, cfg.window_len, cfg.stride)
    stat, temporal = extract_features(windows, cfg.ecdf_len)
    stat.to_csv(out / FEATURES[STATISTICAL])
    temporal.to_csv(out / FEATURES[SPATIO_TEMPORAL])
    stat.write_manifest(out / MANIFEST)
    temporal.write_manifest(out / MANIFEST, append=True)
    log.info(
        "%d windows, %d channels: %d statistical and %d spatio-temporal features",
        len(windows),
        len(selection.channels),
        stat.shape[1],
        temporal.shape[1],
    )


def _load_features(out):
    manifest = _require(out / MANIFEST)
    return {d: FeatureMatrix.from_csv(_require(out / FEATURES[d]), manifest) for d in FEATURES}


def cmd_rank(cfg):
    out = Path(cfg.output_dir)
    matrices = _load_features(out)
    labels = matrices[STATISTICAL].labels
    modal, hits = modal_class(labels)
    rows = [["zero_rule", "none", 100.0 * hits / len(labels), hits, len(labels), f"class={modal}"]]
    for domain, matrix in matrices.items():
        ranked = rank_and_filter(score_matrix(matrix), cfg.alpha)
        write_ranked(out / RANKED[domain], ranked)
        log.info("%s: %d of %d features kept", domain, len(ranked), matrix.shape[1])
        rule = one_rule(matrix)
        rows.append(["one_rule", domain, rule.accuracy, rule.correct, rule.total, f"feature={rule.name}"])
    _write_table(out / BASELINES, ["model", "domain", "accuracy", "correct", "total", "detail"], rows)


def cmd_sweep(cfg):
    out = Path(cfg.output_dir)
    matrices = _load_features(out)
    ranked = {d: experiment.ranked_from_scores(matrices[d], read_ranked(_require(out / RANKED[d])), cfg.top_features) for d in FEATURES}
    configs = experiment.enumerate_grid(cfg.grid_kind, cfg.grid_limit, cfg.grid_step, cfg.rect_step)
    log.info("sweeping %d configurations", len(configs))
    run = experiment.run_sweep(
        ranked[STATISTICAL],
        ranked[SPATIO_TEMPORAL],
        configs,
        k=cfg.folds,
        seed=cfg.seed,
        estimators=cfg.estimators,
        jobs=cfg.jobs,
    )
    experiment.write_sweep_outputs(out, run)
    if run.failures:
        log.error("%d of %d configurations failed; see sweep_failures.csv", len(run.failures), len(configs))
        return EXIT_FAIL
    return EXIT_OK


def _reference(path):
    header, rows = read_rows(path)
    if header != REFERENCE_HEADER:
        raise ConfigError(f"{path}: reference file needs header quantity,value")
    return {q: float(v) for q, v in rows}


def cmd_report(cfg):
    out = Path(cfg.output_dir)
    results = experiment.read_sweep_results(_require(out / SWEEP))
    top = experiment.top_results(results)
    best = experiment.best_of_each(results)
    sections = []
    observed = {}

    if (out / TABLE1).is_file():
        _, rows = read_rows(out / TABLE1)
        sections.append(experiment.format_rows("Mean ANOVA F of the top N raw channels", ["N", "Mean F", "Infinite F excluded"], [[r[0], f"{float(r[1]):.2f}", r[2]] for r in rows]))
        for r in rows:
            observed[f"raw_top{r[0]}"] = float(r[1])
    else:
        log.warning("%s not found; raw channel table omitted", out / TABLE1)

    if (out / BASELINES).is_file():
        _, rows = read_rows(out / BASELINES)
        sections.append(experiment.format_rows("Baselines", ["Model", "Input", "Accuracy", "Correct", "Total", "Detail"], [[r[0], r[1], f"{float(r[2]):.2f}", r[3], r[4], r[5]] for r in rows]))
        for r in rows:
            observed[r[0] if r[1] == "none" else f"{r[0]}_{r[1]}"] = float(r[2])
    else:
        log.warning("%s not found; baseline table omitted", out / BASELINES)

    sections.append(experiment.format_metric_table(top, "Ten best configurations"))
    sections.append(experiment.format_metric_table(list(best.values()), "Best configuration per input set"))
    for group, r in best.items():
        observed[f"best_{group}"] = r.mean.accuracy

    _write_table(out / TABLE4, ["rank"] + experiment.METRIC_HEADER, ([i] + r.row() for i, r in enumerate(top, start=1)))
    _write_table(out / TABLE5, ["input_set"] + experiment.METRIC_HEADER, ([g] + r.row() for g, r in best.items()))

    if cfg.reference_path:
        ref = _reference(_require(cfg.reference_path))
        rows = []
        for key in sorted(ref):
            got = observed.get(key)
            rows.append([key, f"{ref[key]:.2f}", "-" if got is None else f"{got:.2f}", "-" if got is None else f"{got - ref[key]:+.2f}"])
        sections.append(experiment.format_rows("Comparison with reference values", ["Quantity", "Reference", "Observed", "Difference"], rows))

    text = "\n".join(sections)
    (out / REPORT).write_text(text, encoding="utf-8", newline="\n")
    log.info("report written to %s", out / REPORT)


COMMANDS = {
    "synth": (cmd_synth, "write a synthetic frame dataset"),
    "extract": (cmd_extract, "select raw channels and extract both feature sets"),
    "rank": (cmd_rank, "rank features by ANOVA F and compute baselines"),
    "sweep": (cmd_sweep, "cross-validate forests over the feature-count grid"),
    "report": (cmd_report, "render result tables as text and CSV"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="gesturefusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        for key, f in _FIELDS.items():
            flags = [f"--{key}"] + ([f"--{key.replace('_', '-')}"] if "_" in key else [])
            p.add_argument(*flags, dest=key, default=None, metavar=f.type.__name__.upper(), help=f"default {f.default!r}")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    # leave handlers alone if the host process already configured logging
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(args.log_level)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    log.debug("settings: %s", asdict(cfg))
    handler = COMMANDS[args.command][0]
    try:
        code = handler(cfg)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (PipelineError, FileNotFoundError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
