"""File-based stages: simulate -> augment -> split -> train -> eval -> compare -> plot.

Each stage reads what earlier stages left in the output directory and
writes its own files through :class:`StageOutputs`: everything is first
written as ``<name>.partial`` and renamed only when the stage succeeds, so
a failed stage leaves its partial files behind for inspection.
"""

from __future__ import annotations

import json
import logging
import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .config import RunConfig, derive_seed
from .dataset import DatasetSplit, assemble_split, augment_segment, read_segment_csv, segment_to_csv
from .errors import DataError, DvlAccelError
from .nn.checkpoint import ModelCheckpoint
from .plots import loss_svg, trace_svg
from .report import ComparisonReport, axis_rmse, compare
from .simulator import random_fleet, simulate_segment
from .training import LossHistory, predict_examples, rmse, train

log = logging.getLogger(__name__)

STAGES = ("simulate", "augment", "split", "train", "eval", "compare", "plot")


class StageError(DvlAccelError):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


class StageOutputs:
    def __init__(self) -> None:
        self._pending: list[tuple[Path, Path]] = []

    def write_text(self, path, text: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".partial")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self._pending.append((tmp, path))
        return path

    def commit(self) -> list[Path]:
        for tmp, final in self._pending:
            os.replace(tmp, final)
        return [final for _, final in self._pending]


@contextmanager
def stage(name: str):
    outputs = StageOutputs()
    log.info("stage %s", name)
    try:
        yield outputs
    except StageError:
        raise
    except DvlAccelError as exc:
        raise StageError(name, exc) from exc
    except OSError as exc:
        raise StageError(name, DataError(str(exc))) from exc
    outputs.commit()


class Layout:
    def __init__(self, out) -> None:
        self.root = Path(out)

    config = property(lambda self: self.root / "config.json")
    train_dir = property(lambda self: self.root / "segments" / "train")
    test_dir = property(lambda self: self.root / "segments" / "test")
    aug_dir = property(lambda self: self.root / "segments" / "augmented")
    split = property(lambda self: self.root / "split.json")
    checkpoint = property(lambda self: self.root / "checkpoint.json")
    history = property(lambda self: self.root / "loss_history.csv")
    eval = property(lambda self: self.root / "eval.json")
    report_txt = property(lambda self: self.root / "report.txt")
    traces = property(lambda self: self.root / "traces.csv")
    plots = property(lambda self: self.root / "plots")

    def report(self, fmt: str) -> Path:
        return self.root / f"report.{fmt}"


def _clear(*dirs: Path) -> None:
    for d in dirs:
        for f in d.glob("*.csv"):
            f.unlink()


def _read_dir(path: Path):
    files = sorted(path.glob("*.csv"))
    if not files:
        raise DataError(f"no segment files in {path}; run the earlier stage first")
    return [read_segment_csv(f) for f in files]


def _segments(cfg: RunConfig, lay: Layout):
    if cfg.segment_files is not None:
        return [read_segment_csv(p) for p in cfg.segment_files["train"]], [read_segment_csv(p) for p in cfg.segment_files["test"]]
    return _read_dir(lay.train_dir), _read_dir(lay.test_dir)


def _corpus(cfg: RunConfig, lay: Layout):
    train_segs, test_segs = _segments(cfg, lay)
    if cfg.augment_copies:
        train_segs = train_segs + _read_dir(lay.aug_dir)
    return train_segs, test_segs


def _load_split(cfg: RunConfig, lay: Layout) -> DatasetSplit:
    train_segs, test_segs = _corpus(cfg, lay)
    try:
        manifest = json.loads(lay.split.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{lay.split} not found; run the split stage first") from None
    return DatasetSplit.from_manifest(manifest, train_segs + test_segs)


def run_simulate(cfg: RunConfig) -> list[Path]:
    lay = Layout(cfg.out)
    with stage("simulate") as out:
        out.write_text(lay.config, cfg.to_json())
        _clear(lay.train_dir, lay.test_dir, lay.aug_dir)
        if cfg.segment_files is None:
            train_p = cfg.train_profiles or random_fleet(cfg.seed, cfg.n_train, 0, cfg.fleet_ranges, cfg.duration)
            test_p = cfg.test_profiles or random_fleet(cfg.seed, cfg.n_test, 1000, cfg.fleet_ranges, cfg.duration)
            for tag, profiles, folder, kind in ((10, train_p, lay.train_dir, "train"), (11, test_p, lay.test_dir, "test")):
                for i, prof in enumerate(profiles):
                    seg_id = f"{kind}-{i:02d}"
                    seg = simulate_segment(prof, cfg.dvl_errors, cfg.duration, cfg.rate, derive_seed(cfg.seed, tag, i), seg_id)
                    out.write_text(folder / f"{seg_id}.csv", segment_to_csv(seg))
    return sorted(lay.root.glob("segments/*/*.csv"))


def run_augment(cfg: RunConfig) -> None:
    lay = Layout(cfg.out)
    with stage("dataset") as out:
        train_segs, _ = _segments(cfg, lay)
        _clear(lay.aug_dir)
        if cfg.augment_copies:
            for i, seg in enumerate(train_segs):
                aug = augment_segment(seg, cfg.augmentation, derive_seed(cfg.seed, 13, i))
                out.write_text(lay.aug_dir / f"{aug.segment_id}.csv", segment_to_csv(aug))


def run_split(cfg: RunConfig) -> DatasetSplit:
    lay = Layout(cfg.out)
    with stage("dataset") as out:
        train_segs, test_segs = _corpus(cfg, lay)
        split = assemble_split(train_segs, test_segs, cfg.window, cfg.validation_fraction, derive_seed(cfg.seed, 12))
        out.write_text(lay.split, json.dumps(split.to_manifest()) + "\n")
    log.info("split: %d train, %d validation, %d test", len(split.train), len(split.validation), len(split.test))
    return split


def run_train(cfg: RunConfig) -> tuple[ModelCheckpoint, LossHistory]:
    lay = Layout(cfg.out)
    with stage("dataset"):
        split = _load_split(cfg, lay)
    with stage("train") as out:
        ckpt, hist = train(split, cfg.architecture, cfg.train_config)
        out.write_text(lay.checkpoint, ckpt.to_json())
        out.write_text(lay.history, hist.to_csv())
    return ckpt, hist


def _load_checkpoint(lay: Layout) -> ModelCheckpoint:
    return ModelCheckpoint.load(lay.checkpoint)


def run_eval(cfg: RunConfig) -> dict:
    lay = Layout(cfg.out)
    with stage("dataset"):
        split = _load_split(cfg, lay)
    with stage("eval") as out:
        ckpt = _load_checkpoint(lay)
        pred = predict_examples(ckpt, split.test, cfg.train_config.backend)
        target = np.stack([e.target.a for e in split.test])
        result = {"dl_rmse": rmse(pred, target), "dl_axis_rmse": axis_rmse(pred, target), "n_examples": len(split.test)}
        out.write_text(lay.eval, json.dumps(result, indent=2, sort_keys=True) + "\n")
    return result


def _traces_csv(arrays: dict[str, np.ndarray], mask: np.ndarray) -> str:
    cols = ["t", "ax_gt", "ay_gt", "az_gt", "ax_dl", "ay_dl", "az_dl", "ax_ls", "ay_ls", "az_ls"]
    data = np.column_stack([arrays["time"][mask], arrays["targets"][mask], arrays["dl"][mask], arrays["ls"][mask]])
    return ",".join(cols) + "\n" + "".join(",".join(repr(float(x)) for x in row) + "\n" for row in data)


def run_compare(cfg: RunConfig, fmt: str | None = None) -> ComparisonReport:
    lay = Layout(cfg.out)
    fmt = fmt or cfg.report_format
    with stage("dataset"):
        split = _load_split(cfg, lay)
    with stage("compare") as out:
        ckpt = _load_checkpoint(lay)
        ids = sorted({e.segment_id for e in split.test})
        desc = f"{len(ids)} synthetic test segments ({', '.join(ids)}), window {cfg.window}"
        report, arrays = compare(split.test, ckpt, desc, cfg.train_config.backend)
        out.write_text(lay.report_txt, report.to_text())
        out.write_text(lay.report(fmt), report.render(fmt))
        trace_id = ids[min(cfg.trace_segment, len(ids) - 1)]
        mask = np.array([e.segment_id == trace_id for e in split.test])
        out.write_text(lay.traces, _traces_csv(arrays, mask))
    return report


def run_plot(cfg: RunConfig) -> list[Path]:
    lay = Layout(cfg.out)
    with stage("plot") as out:
        try:
            hist = LossHistory.from_csv(lay.history.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise DataError(f"{lay.history} not found; run the train stage first") from None
        paths = [out.write_text(lay.plots / "loss.svg", loss_svg(hist))]
        if lay.traces.exists():
            data = np.loadtxt(lay.traces, delimiter=",", skiprows=1, ndmin=2)
            title = ""
            if lay.report_txt.exists():
                kv = dict(line.split(": ", 1) for line in lay.report_txt.read_text(encoding="utf-8").splitlines() if ": " in line)
                title = (
                    f"Test segment: CNN-LSTM RMSE {float(kv['dl_rmse_m_s2']):.4f}, "
                    f"LS RMSE {float(kv['ls_rmse_m_s2']):.4f} m/s^2"
                )
            paths.append(out.write_text(lay.plots / "trace.svg", trace_svg(data[:, 0], data[:, 1:4], data[:, 4:7], data[:, 7:10], title)))
    return paths


def run_pipeline(cfg: RunConfig, fmt: str | None = None) -> ComparisonReport:
    run_simulate(cfg)
    run_augment(cfg)
    run_split(cfg)
    run_train(cfg)
    run_eval(cfg)
    report = run_compare(cfg, fmt)
    run_plot(cfg)
    return report
