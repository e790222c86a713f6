"""Static SVG charts written without a plotting backend.

Output is plain text built from fixed-precision coordinates, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .training import LossHistory

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=30, bottom=45)
COLORS = {"train": "#1f77b4", "validation": "#d62728", "gt": "#222222", "dl": "#1f77b4", "ls": "#ff7f0e"}


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


class _Panel:
    def __init__(self, x0: float, y0: float, w: float, h: float, xlim, ylim) -> None:
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xlim, self.ylim = xlim, ylim

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.w

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y0 + self.h - (y - lo) / (hi - lo) * self.h

    def polyline(self, xs, ys, color: str, name: str, dashed: bool = False) -> str:
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        dash = ' stroke-dasharray="6,3"' if dashed else ""
        return (
            f'<polyline class="curve" data-name="{name}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"{dash} points="{pts}"/>'
        )

    def markers(self, xs, ys, color: str, name: str) -> list[str]:
        return [
            f'<circle class="point" data-name="{name}" cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="2.5" fill="{color}"/>'
            for x, y in zip(xs, ys)
        ]

    def axes(self, xlabel: str, ylabel: str, yfmt=lambda v: f"{v:g}") -> list[str]:
        out = [
            f'<rect x="{self.x0:.2f}" y="{self.y0:.2f}" width="{self.w:.2f}" height="{self.h:.2f}" '
            'fill="none" stroke="#888888"/>'
        ]
        for t in _nice_ticks(*self.xlim):
            x = self.px(t)
            out.append(f'<line x1="{x:.2f}" y1="{self.y0 + self.h:.2f}" x2="{x:.2f}" y2="{self.y0 + self.h + 4:.2f}" stroke="#888888"/>')
            out.append(f'<text x="{x:.2f}" y="{self.y0 + self.h + 16:.2f}" font-size="10" text-anchor="middle">{t:g}</text>')
        for t in _nice_ticks(*self.ylim):
            y = self.py(t)
            out.append(f'<line x1="{self.x0 - 4:.2f}" y1="{y:.2f}" x2="{self.x0:.2f}" y2="{y:.2f}" stroke="#888888"/>')
            out.append(f'<text x="{self.x0 - 6:.2f}" y="{y + 3:.2f}" font-size="10" text-anchor="end">{yfmt(t)}</text>')
        out.append(
            f'<text x="{self.x0 + self.w / 2:.2f}" y="{self.y0 + self.h + 32:.2f}" font-size="12" text-anchor="middle">{xlabel}</text>'
        )
        out.append(
            f'<text x="{self.x0 - 52:.2f}" y="{self.y0 + self.h / 2:.2f}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 {self.x0 - 52:.2f} {self.y0 + self.h / 2:.2f})">{ylabel}</text>'
        )
        return out


def _doc(body: list[str], width: int = WIDTH, height: int = HEIGHT, title: str = "") -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        head.append(f'<text x="{width / 2:.2f}" y="18" font-size="14" text-anchor="middle">{title}</text>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _legend(x: float, y: float, entries: Sequence[tuple[str, str]]) -> list[str]:
    out = []
    for k, (label, color) in enumerate(entries):
        yy = y + 14 * k
        out.append(f'<line x1="{x:.2f}" y1="{yy:.2f}" x2="{x + 18:.2f}" y2="{yy:.2f}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x + 22:.2f}" y="{yy + 4:.2f}" font-size="11">{label}</text>')
    return out


def loss_svg(history: LossHistory) -> str:
    """Training (and validation, if any) MSE per epoch on a log10 axis."""
    if history.epochs == 0:
        raise ValueError("cannot plot an empty loss history")
    curves = [("train", history.train_loss)]
    if history.val_loss:
        curves.append(("validation", history.val_loss))
    floor = 1e-300
    logs = [np.log10(np.maximum(np.asarray(v, dtype=float), floor)) for _, v in curves]
    lo = min(float(l.min()) for l in logs)
    hi = max(float(l.max()) for l in logs)
    pad = max(0.05 * (hi - lo), 0.05)
    m = MARGIN
    panel = _Panel(m["left"], m["top"], WIDTH - m["left"] - m["right"], HEIGHT - m["top"] - m["bottom"],
                   (1, max(history.epochs, 2)), (lo - pad, hi + pad))
    body = panel.axes("epoch", "MSE loss [(m/s^2)^2]", yfmt=lambda v: f"1e{v:g}")
    epochs = list(range(1, history.epochs + 1))
    for (name, _), ys in zip(curves, logs):
        body.append(panel.polyline(epochs, ys, COLORS[name], name))
        body.extend(panel.markers(epochs, ys, COLORS[name], name))
    body.extend(_legend(panel.x0 + panel.w - 110, panel.y0 + 14, [(n, COLORS[n]) for n, _ in curves]))
    return _doc(body, title="Training and validation loss")


def trace_svg(time: np.ndarray, gt: np.ndarray, dl: np.ndarray, ls: np.ndarray, title: str = "") -> str:
    """Three stacked panels (x, y, z) of ground truth, network and LS acceleration."""
    time = np.asarray(time, dtype=float)
    height = 3 * 200 + 40
    m = MARGIN
    body: list[str] = []
    for axis in range(3):
        ys = np.concatenate([gt[:, axis], dl[:, axis], ls[:, axis]])
        lo, hi = float(ys.min()), float(ys.max())
        pad = max(0.05 * (hi - lo), 1e-6)
        panel = _Panel(m["left"], 30 + 200 * axis, WIDTH - m["left"] - m["right"], 150,
                       (float(time.min()), float(time.max()) if time.max() > time.min() else float(time.min()) + 1),
                       (lo - pad, hi + pad))
        body.extend(panel.axes("time [s]", f"a_{'xyz'[axis]} [m/s^2]"))
        body.append(panel.polyline(time, gt[:, axis], COLORS["gt"], f"gt_{'xyz'[axis]}"))
        body.append(panel.polyline(time, ls[:, axis], COLORS["ls"], f"ls_{'xyz'[axis]}", dashed=True))
        body.append(panel.polyline(time, dl[:, axis], COLORS["dl"], f"dl_{'xyz'[axis]}"))
    body.extend(_legend(WIDTH - 150, 40, [("ground truth", COLORS["gt"]), ("CNN-LSTM", COLORS["dl"]), ("least squares", COLORS["ls"])]))
    return _doc(body, height=height, title=title or "Acceleration on a test segment")


def emit_plots(history: LossHistory, report, traces: dict[str, np.ndarray] | None, out_dir) -> list[Path]:
    """Write ``loss.svg`` and, when traces are given, ``trace.svg``; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "loss.svg"]
    paths[0].write_text(loss_svg(history), encoding="utf-8")
    if traces is not None:
        title = ""
        if report is not None:
            title = f"Test segment: CNN-LSTM RMSE {report.dl_rmse:.4f}, LS RMSE {report.ls_rmse:.4f} m/s^2"
        p = out_dir / "trace.svg"
        p.write_text(trace_svg(traces["time"], traces["targets"], traces["dl"], traces["ls"], title), encoding="utf-8")
        paths.append(p)
    return paths
