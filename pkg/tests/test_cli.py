"""CLI verbs, exercised through main() in-process."""

import json

import pytest

from gridtrust.cli import main


@pytest.fixture(scope="module")
def populated(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert main(["--data-dir", str(data), "--experiment-seed", "321",
                 "simulate", "--sessions", "4", "--bot-seed", "2"]) == 0
    return root, data


def test_simulate_and_ingest(populated, capsys):
    root, data = populated
    export = root / "export.jsonl"
    assert main(["--data-dir", str(data), "--experiment-seed", "321",
                 "ingest", "--out", str(export), "--no-frames"]) == 0
    lines = export.read_text().strip().split("\n")
    kinds = [json.loads(l)["kind"] for l in lines]
    assert kinds.count("session") == 4 and kinds.count("trial") == 4 * 72


def test_exclude_series_analyze_render(populated):
    root, data = populated
    export = root / "export.jsonl"
    main(["--data-dir", str(data), "--experiment-seed", "321",
          "ingest", "--out", str(export), "--no-frames"])

    kept = root / "kept.jsonl"
    report = root / "exclusions.jsonl"
    assert main(["exclude", "--input", str(export),
                 "--out-kept", str(kept), "--out-report", str(report)]) == 0
    assert kept.exists() and report.exists()

    series_csv = root / "series_g0.csv"
    assert main(["--experiment-seed", "321", "series", "--input", str(kept),
                 "--group", "0", "--out", str(series_csv)]) == 0
    rows = series_csv.read_text().strip().split("\n")
    assert len(rows) == 64  # header + 63 trials
    assert rows[0] == "trial,trust,capability"

    analysis = root / "report.json"
    assert main(["--experiment-seed", "321", "analyze", "--input", str(kept),
                 "--out", str(analysis), "--p-max", "1", "--q-max", "1"]) == 0
    data_json = json.loads(analysis.read_text())
    assert len(data_json["groups"]) == 2

    tables = root / "tables"
    assert main(["render", "--report", str(analysis), "--out-dir", str(tables)]) == 0
    assert (tables / "rmse_matrix.txt").exists()
    assert (tables / "aic_group0.csv").exists()


def test_render_bad_report_writes_error_marker(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"groups": []}')
    out = tmp_path / "tables"
    assert main(["render", "--report", str(bad), "--out-dir", str(out)]) == 1
    assert (out / "render_error.txt").exists()


def test_config_file_supplies_settings(tmp_path):
    cfg = tmp_path / "cfg.json"
    data = tmp_path / "store"
    cfg.write_text(json.dumps({"data_dir": str(data), "experiment_seed": 9}))
    assert main(["--config", str(cfg), "simulate", "--sessions", "1", "--bot-seed", "1"]) == 0
    assert (data / "index.jsonl").exists()
