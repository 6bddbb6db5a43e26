import pytest

from gesturefusion.cli import RunConfig, main, read_config_file

SMALL = [
    "--classes", "4",
    "--recordings_per_class", "12",
    "--channels", "12",
    "--top_raw_channels", "8",
    "--top_features", "30",
    "--grid_limit", "20",
    "--folds", "3",
    "--estimators", "8",
]


def run_all(out, extra=()):
    for cmd in ("synth", "extract", "rank", "sweep", "report"):
        assert main([cmd, "--output_dir", str(out), *SMALL, *extra]) == 0, cmd


def test_full_pipeline(tmp_path):
    run_all(tmp_path)
    for name in (
        "frames.csv",
        "features_stat.csv",
        "features_temporal.csv",
        "feature_manifest.csv",
        "raw_channel_scores.csv",
        "table1_raw_mean_f.csv",
        "ranked_features_stat.csv",
        "ranked_features_temporal.csv",
        "baselines.csv",
        "sweep_results.csv",
        "heatmap.csv",
        "top10.csv",
        "report.txt",
        "table4_top10.csv",
        "table5_best_of_each.csv",
    ):
        assert (tmp_path / name).is_file(), name
    stat_header = (tmp_path / "features_stat.csv").open().readline().strip().split(",")
    temporal_header = (tmp_path / "features_temporal.csv").open().readline().strip().split(",")
    kept, rest = divmod(len(stat_header) - 2, 33)
    assert rest == 0 and 1 <= kept <= 8 and len(temporal_header) - 2 == 13 * kept
    # full grid limited to 20: (10,0) (20,0) (0,10) (0,20) (10,10) (20,20) (10,10 complement)
    assert len((tmp_path / "sweep_results.csv").read_text().splitlines()) == 1 + 6
    report = (tmp_path / "report.txt").read_text()
    assert "Ten best configurations" in report and "Baselines" in report


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_all(a)
    run_all(b, ("--jobs", "2"))
    for path in sorted(a.iterdir()):
        assert path.read_bytes() == (b / path.name).read_bytes(), path.name


def test_report_before_sweep(tmp_path, caplog):
    assert main(["report", "--output_dir", str(tmp_path)]) == 1
    assert "sweep_results.csv" in caplog.text


def test_extract_empty_input(tmp_path, caplog):
    (tmp_path / "frames.csv").write_text("")
    assert main(["extract", "--output_dir", str(tmp_path)]) == 1
    assert "no frames" in caplog.text


def test_extract_bad_cell(tmp_path, caplog):
    (tmp_path / "frames.csv").write_text("recording_id,label,left_palm_yaw\nr,HELLO,1\nr,HELLO,x\n")
    assert main(["extract", "--output_dir", str(tmp_path)]) == 1
    assert "row 3" in caplog.text and "left_palm_yaw" in caplog.text


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nseed = 7\nalpha=0.01\nwindow-len = 4\n\n")
    assert read_config_file(cfg) == {"seed": 7, "alpha": 0.01, "window_len": 4}
    from gesturefusion.cli import build_config, build_parser

    args = build_parser().parse_args(["rank", "--config", str(cfg), "--seed", "3"])
    config = build_config(args)
    assert (config.seed, config.alpha, config.window_len) == (3, 0.01, 4)
    assert RunConfig().seed == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["rank", "--folds", "1"],
        ["rank", "--alpha", "1.5"],
        ["rank", "--seed", "abc"],
        ["rank", "--grid_kind", "diagonal"],
    ],
)
def test_invalid_settings(argv, tmp_path):
    assert main([*argv, "--output_dir", str(tmp_path)]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["rank", "--config", str(cfg)]) == 2


def test_sweep_failures_exit_nonzero(tmp_path):
    for cmd in ("synth", "extract", "rank"):
        assert main([cmd, "--output_dir", str(tmp_path), *SMALL]) == 0
    # more features than survive selection
    assert main(["sweep", "--output_dir", str(tmp_path), *SMALL, "--grid_kind", "single_stat", "--grid_limit", "40", "--top_features", "30"]) == 1
    assert len((tmp_path / "sweep_failures.csv").read_text().splitlines()) == 2
    assert len((tmp_path / "sweep_results.csv").read_text().splitlines()) == 1 + 3


def test_reference_comparison(tmp_path):
    run_all(tmp_path)
    ref = tmp_path / "ref.csv"
    ref.write_text("quantity,value\nzero_rule,9.45\nbest_mixed,86.75\n")
    assert main(["report", "--output_dir", str(tmp_path), "--reference_path", str(ref)]) == 0
    assert "Comparison with reference values" in (tmp_path / "report.txt").read_text()
