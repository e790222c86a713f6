import re

import numpy as np
import pytest

from dvlaccel.plots import loss_svg, trace_svg
from dvlaccel.training import LossHistory


def curve_points(svg, name):
    m = re.search(rf'<polyline class="curve" data-name="{name}"[^>]*points="([^"]*)"', svg)
    assert m, name
    return m.group(1).split()


def history(n=30, val=True):
    tl = [1.0 / (e + 1) for e in range(n)]
    return LossHistory(tl, [1.5 * v for v in tl] if val else [])


def test_loss_curves_have_one_point_per_epoch():
    svg = loss_svg(history())
    assert len(curve_points(svg, "train")) == 30
    assert len(curve_points(svg, "validation")) == 30
    assert svg.count('class="point"') == 60


def test_validation_curve_omitted_without_validation():
    svg = loss_svg(history(val=False))
    assert len(curve_points(svg, "train")) == 30
    assert 'data-name="validation"' not in svg


def test_deterministic_bytes():
    assert loss_svg(history()) == loss_svg(history())
    t = np.arange(20.0)
    a = np.sin(t)[:, None] * np.ones(3)
    assert trace_svg(t, a, a * 0.9, a * 1.1, "x") == trace_svg(t, a, a * 0.9, a * 1.1, "x")


def test_trace_has_three_estimators():
    t = np.arange(20.0)
    a = np.cos(t)[:, None] * [1, 2, 3]
    svg = trace_svg(t, a, a, a, "demo")
    for name in ("gt_", "dl_", "ls_"):
        assert svg.count(f'data-name="{name}') >= 1, name


def test_empty_history_rejected():
    with pytest.raises(ValueError):
        loss_svg(LossHistory([], []))
