import pytest

from csdetect.cli import main
from csdetect.config import DEFAULTS, PipelineConfig
from csdetect.errors import UsageError
from csdetect.reporting import (
    emit_report,
    load_result_json,
    result_from_dict,
)

TINY_CONFIG = """
[model]
kind = "gbt"

[model.gbt]
n_rounds = 5
max_depth = 2

[features]
subset = "optimal23"

[cv]
k = 5
seed = 2

[experiment]
personal_k = 3
"""


def synth_args(out_dir, seed=5):
    return [
        "synth", "--users", "6", "--scenarios", "3", "--reports", "3",
        "--class-separation", "1.5", "--user-shift", "1.0",
        "--segment-shift", "2.0", "--seed", str(seed), "--out", str(out_dir),
    ]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synthdata")
    assert main(synth_args(out)) == 0
    return out


def test_synth_deterministic_files(synth_dir, tmp_path):
    again = tmp_path / "again"
    assert main(synth_args(again)) == 0
    for name in ("tracking.csv", "reports.csv"):
        assert (synth_dir / name).read_bytes() == (again / name).read_bytes()


def test_validate_runs(synth_dir, capsys):
    code = main([
        "validate",
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "frames" in out and "reports" in out


def test_ingest_round_trips(synth_dir, tmp_path):
    out = tmp_path / "canon"
    code = main([
        "ingest",
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "tracking.csv").read_bytes() == (synth_dir / "tracking.csv").read_bytes()
    assert (out / "validation.txt").exists()


def test_run_ablate_levels_emits_three_formats(synth_dir, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(TINY_CONFIG)
    out = tmp_path / "results"
    code = main([
        "run", "ablate-levels", "--config", str(cfg),
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
        "--out", str(out),
    ])
    assert code == 0
    files = {p.suffix: p for p in out.iterdir()}
    assert set(files) == {".json", ".csv", ".md"}
    csv_lines = files[".csv"].read_text().strip().splitlines()
    assert len(csv_lines) == 1 + 7  # header + seven level combinations
    result = load_result_json(files[".json"])
    assert result["kind"] == "ablate-levels"
    assert len(result["rows"]) == 7
    assert "| L1+L2+L3 |" in files[".md"].read_text()


def test_run_compare_models_markdown_columns(synth_dir, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(TINY_CONFIG.replace('kind = "gbt"', 'kind = "gbt"') + """
[model.rf]
n_trees = 5
max_depth = 3

[model.et]
n_trees = 5
max_depth = 3

[model.stack]
oof_folds = 2
""")
    out = tmp_path / "results"
    code = main([
        "run", "compare-models", "--config", str(cfg),
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
        "--out", str(out), "--formats", "md,json",
    ])
    assert code == 0
    md = next(out.glob("*.md")).read_text()
    for col in ("Model", "Train Time (s)", "Inf. Time /Sample (ms)",
                "Acc. (Mean±Std)", "Acc. Avg Rank", "F1-Macro (Mean±Std)"):
        assert col in md
    assert "Friedman on accuracy" in md


def test_report_reemits_from_json(synth_dir, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(TINY_CONFIG)
    out = tmp_path / "res"
    main([
        "run", "ablate-levels", "--config", str(cfg),
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
        "--out", str(out), "--formats", "json",
    ])
    json_path = next(out.glob("*.json"))
    out2 = tmp_path / "reemit"
    code = main(["report", "--input", str(json_path), "--out", str(out2),
                 "--formats", "csv,md"])
    assert code == 0
    assert len(list(out2.glob("*.csv"))) == 1
    assert len(list(out2.glob("*.md"))) == 1


def test_result_json_round_trip(synth_dir, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(TINY_CONFIG)
    out = tmp_path / "res"
    main([
        "run", "ablate-levels", "--config", str(cfg),
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
        "--out", str(out), "--formats", "json",
    ])
    data = load_result_json(next(out.glob("*.json")))
    rebuilt = result_from_dict(data)
    assert rebuilt.as_dict() == data


def test_calibrate_emits_step_csv(synth_dir, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(TINY_CONFIG)
    out = tmp_path / "cal"
    code = main([
        "calibrate", "--user", "u01", "--config", str(cfg),
        "--tracking", str(synth_dir / "tracking.csv"),
        "--reports", str(synth_dir / "reports.csv"),
        "--out", str(out),
    ])
    assert code == 0
    csv_path = next(out.glob("calibrate-u01-*.csv"))
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0].startswith("step,added_segments,n_train,train_time_s")
    assert len(lines) >= 3


def test_unknown_subcommand_exits_one(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_missing_subcommand_exits_one(capsys):
    assert main([]) == 1


def test_missing_dataset_paths_exit_one(tmp_path):
    assert main(["run", "ablate-levels", "--out", str(tmp_path)]) == 1


def test_data_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "reports.csv"
    bad.write_text("user_id,scenario_id,report_time_s,fms\nu1,s1,30.0,11\n")
    tracking = tmp_path / "tracking.csv"
    from csdetect import features as feat

    tracking.write_text(
        ",".join(["user_id", "scenario_id", "timestamp_s"] + list(feat.registry().names))
        + "\n"
    )
    code = main(["validate", "--tracking", str(tracking), "--reports", str(bad)])
    assert code == 2


# -- config ---------------------------------------------------------------------


def test_config_defaults_round_trip():
    cfg = PipelineConfig()
    assert cfg.to_dict() == DEFAULTS
    assert PipelineConfig(cfg.to_dict()) == cfg


def test_config_rejects_unknown_keys():
    with pytest.raises(UsageError, match="model.gbt.depth"):
        PipelineConfig({"model": {"gbt": {"depth": 3}}})
    with pytest.raises(UsageError):
        PipelineConfig({"modle": {}})


def test_config_formats(tmp_path):
    (tmp_path / "c.toml").write_text("[cv]\nk = 7\n")
    (tmp_path / "c.json").write_text('{"cv": {"k": 7}}')
    (tmp_path / "c.yaml").write_text("cv:\n  k: 7\n")
    for name in ("c.toml", "c.json", "c.yaml"):
        assert PipelineConfig.load(tmp_path / name).get("cv.k") == 7
    with pytest.raises(UsageError):
        PipelineConfig.load(tmp_path / "c.toml").set("cv.q", 1)


def test_config_hash_stable_and_sensitive():
    a, b = PipelineConfig(), PipelineConfig()
    assert a.config_hash() == b.config_hash()
    b.set("cv.k", 7)
    assert a.config_hash() != b.config_hash()


def test_emit_report_rejects_unknown_format(tmp_path, synth_dir):
    cfg = PipelineConfig()
    from csdetect.experiments import ExperimentResult

    result = ExperimentResult(kind="ablate-levels", seed=0, config=cfg.to_dict(), rows=[])
    with pytest.raises(UsageError):
        emit_report(result, ["pdf"], tmp_path)
    assert emit_report(result, [], tmp_path) == []
