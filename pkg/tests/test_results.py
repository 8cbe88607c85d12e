"""CSV/SVG result store"""

import os

import numpy as np
import pytest

from modules.melnikov_homoclinic import Verdict
from modules.results import PlotSeries, ResultStore, format_value, read_csv, type_color


def test_format_value():
    assert format_value(True) == "true"
    assert format_value(np.bool_(False)) == "false"
    assert format_value(np.int64(7)) == "7"
    assert format_value(None) == ""
    assert format_value(Verdict.TANGENT) == "TANGENT"
    assert format_value("G1_PLUS") == "G1_PLUS"


def test_floats_keep_full_precision():
    for value in (1.0 / 3.0, np.float64(2.0 ** -40), -123456.789):
        assert float(format_value(value)) == float(value)
    assert "," not in format_value(0.5)


def test_csv_round_trip(out_dir):
    store = ResultStore(out_dir, {"command": "melnikov", "p1": 0.7, "workers": 4, "out_dir": out_dir}, timestamp=False)
    path = store.write_csv("table.csv", ["side", "mean", "ok"], [("RIGHT", 0.2, True), ("LEFT", -0.1, False)])
    assert os.path.dirname(path) == out_dir
    meta, rows = read_csv(path)
    assert meta["status"] == "complete"
    assert meta["command"] == "melnikov"
    assert meta["p1"] == "0.69999999999999996"
    assert "workers" not in meta and "out_dir" not in meta
    assert meta["tool"].startswith("dvdp-survey")
    assert rows == [
        {"side": "RIGHT", "mean": "0.20000000000000001", "ok": "true"},
        {"side": "LEFT", "mean": "-0.10000000000000001", "ok": "false"},
    ]
    assert store.files == [path]


def test_mark_partial(out_dir):
    store = ResultStore(out_dir, {"command": "diagram"})
    marker = store.mark_partial("SectionAmbiguity: left misses the section")
    with open(marker, encoding="utf-8") as f:
        assert f.read().strip() == "SectionAmbiguity: left misses the section"
    path = store.write_csv("after.csv", ["x"], [(1,)])
    assert read_csv(path)[0]["status"] == "partial"
    assert store.mark_partial("again") == marker
    assert store.files.count(marker) == 1


def test_svg_is_reproducible(out_dir):
    series = [
        PlotSeries("curve", np.column_stack([np.linspace(0, 1, 20), np.linspace(0, 1, 20) ** 2])),
        PlotSeries("dots", np.array([[0.2, 0.5], [0.4, 0.1]]), kind="points", color="r"),
        PlotSeries("empty", np.empty((0, 2))),
    ]
    store = ResultStore(out_dir, {"command": "portrait"}, timestamp=False)
    first = store.write_svg("a.svg", series, "x", "y", "demo")
    second = store.write_svg("b.svg", series, "x", "y", "demo")
    with open(first, "rb") as f1, open(second, "rb") as f2:
        assert f1.read() == f2.read()


def test_type_color():
    color = type_color(1, 1, 1)
    assert color.startswith("#") and len(color) == 7
    assert color == type_color(1, 1, 1)
    assert color != type_color(0, 0, 1)
