import json
from pathlib import Path

import pytest

from dvlaccel import pipeline
from dvlaccel.cli import main
from dvlaccel.config import RunConfig
from dvlaccel.errors import DataError
from dvlaccel.pipeline import StageError, stage

ARTIFACTS = [
    "config.json", "split.json", "checkpoint.json", "loss_history.csv", "eval.json",
    "report.txt", "report.json", "traces.csv", "plots/loss.svg", "plots/trace.svg",
]


def tiny_config(tmp_path, **extra):
    doc = {
        "n_train": 2, "n_test": 1, "duration": 40,
        "train": {"epochs": 2, "batch_size": 16},
        "out": str(tmp_path / "run"),
    }
    doc.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def snapshot(root: Path):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_pipeline_writes_all_artifacts(tmp_path, capsys):
    cfg = tiny_config(tmp_path)
    assert main(["pipeline", "--config", str(cfg)]) == 0
    out = tmp_path / "run"
    for name in ARTIFACTS:
        assert (out / name).is_file(), name
    assert len(list((out / "segments" / "augmented").glob("*.csv"))) == 2
    assert not list(out.rglob("*.partial"))
    assert "dl_rmse" in capsys.readouterr().out
    assert len((out / "loss_history.csv").read_text().splitlines()) == 3


def test_rerun_is_bit_identical(tmp_path):
    cfg = tiny_config(tmp_path)
    assert main(["pipeline", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["pipeline", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    a, b = snapshot(tmp_path / "a"), snapshot(tmp_path / "b")
    a.pop("config.json"), b.pop("config.json")
    assert a == b


def test_seed_changes_output(tmp_path):
    cfg = tiny_config(tmp_path)
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "2"])
    f = "segments/train/train-00.csv"
    assert (tmp_path / "a" / f).read_bytes() != (tmp_path / "b" / f).read_bytes()


def test_stages_individually_and_csv_format(tmp_path):
    cfg = tiny_config(tmp_path)
    for cmd in ("simulate", "augment", "split", "train", "eval", "compare", "plot"):
        assert main([cmd, "--config", str(cfg), "--format", "csv"]) == 0, cmd
    report = (tmp_path / "run" / "report.csv").read_text().splitlines()
    assert report[0].startswith("dl_rmse") or "dl_rmse" in report[0]


def test_missing_segment_file_is_data_error(tmp_path, capsys):
    cfg = tiny_config(tmp_path, segment_files={"train": ["nope.csv"], "test": ["nope2.csv"]})
    assert main(["pipeline", "--config", str(cfg)]) == 3
    err = capsys.readouterr().err
    assert "[dataset]" in err and "nope.csv" in err


def test_out_of_order_stage_is_data_error(tmp_path, capsys):
    cfg = tiny_config(tmp_path)
    assert main(["train", "--config", str(cfg)]) == 3
    assert "[dataset]" in capsys.readouterr().err


@pytest.mark.parametrize("doc", [
    '{"n_train": 0}',
    '{"bogus_key": 1}',
    '{"architecture": {"kernel": 5}}',
    '{"report_format": "xml"}',
    "{not json",
])
def test_bad_config_exit_2(tmp_path, doc):
    path = tmp_path / "bad.json"
    path.write_text(doc)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file_exit_2(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "absent.json")]) == 2


def test_negative_seed_exit_2(tmp_path):
    assert main(["simulate", "--seed", "-1", "--out", str(tmp_path)]) == 2


def test_divergence_exit_4(tmp_path, capsys):
    cfg = tiny_config(tmp_path, train={"epochs": 2, "optimizer": "sgd", "learning_rate": 1e300, "standardize": False})
    assert main(["pipeline", "--config", str(cfg)]) == 4
    assert "[train]" in capsys.readouterr().err
    assert not (tmp_path / "run" / "checkpoint.json").exists()
    assert not (tmp_path / "run" / "checkpoint.json.partial").exists()  # training fails before any write


def test_unknown_format_rejected_by_parser():
    with pytest.raises(SystemExit) as info:
        main(["compare", "--format", "xml"])
    assert info.value.code == 2


def test_failed_stage_keeps_only_partial_files(tmp_path):
    target = tmp_path / "x.txt"
    with pytest.raises(StageError) as info:
        with stage("eval") as out:
            out.write_text(target, "half")
            assert target.with_name("x.txt.partial").exists()
            raise DataError("boom")
    assert info.value.stage == "eval" and info.value.exit_code == 3
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt.partial"]


def test_config_round_trip(tmp_path):
    cfg = RunConfig.load(tiny_config(tmp_path))
    again = RunConfig.from_dict(json.loads(cfg.to_json()))
    assert again.to_json() == cfg.to_json()
