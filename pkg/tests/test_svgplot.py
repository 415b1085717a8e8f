"""SVG chart emission: well-formed XML, series handling, axis scales."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from proxdyn.errors import ValidationError
from proxdyn.svgplot import line_chart

NS = "{http://www.w3.org/2000/svg}"


def chart(tmp_path, series, **kw):
    path = tmp_path / "chart.svg"
    line_chart(path, series, **kw)
    return ET.parse(path).getroot()


def test_emits_parseable_svg_with_polylines(tmp_path):
    ts = np.linspace(1.0, 10.0, 50)
    root = chart(tmp_path, [("a", ts, 1.0 / ts), ("b", ts, 2.0 / ts)],
                 title="decay", xscale="log", yscale="log")
    assert root.tag == f"{NS}svg"
    polylines = root.findall(f"{NS}polyline")
    assert len(polylines) == 2
    texts = [el.text for el in root.findall(f"{NS}text")]
    assert "decay" in texts
    assert "a" in texts and "b" in texts


def test_log_axis_drops_nonpositive_points(tmp_path):
    ts = np.array([1.0, 2.0, 3.0, 4.0])
    ys = np.array([1.0, 0.0, -1.0, 2.0])
    root = chart(tmp_path, [("s", ts, ys)], yscale="log")
    pts = root.find(f"{NS}polyline").get("points").split()
    assert len(pts) == 2


def test_linear_chart_keeps_all_finite_points(tmp_path):
    ts = np.linspace(0.0, 1.0, 20)
    ys = np.sin(ts)
    root = chart(tmp_path, [("sin", ts, ys)])
    pts = root.find(f"{NS}polyline").get("points").split()
    assert len(pts) == 20


def test_flat_series_still_renders(tmp_path):
    ts = np.linspace(1.0, 2.0, 5)
    root = chart(tmp_path, [("const", ts, np.ones(5))], yscale="log")
    assert root.find(f"{NS}polyline") is not None


def test_title_is_escaped(tmp_path):
    ts = np.array([1.0, 2.0])
    root = chart(tmp_path, [("s", ts, ts)], title="a < b & c")
    texts = [el.text for el in root.findall(f"{NS}text")]
    assert "a < b & c" in texts


def test_rejects_bad_input(tmp_path):
    with pytest.raises(ValidationError):
        line_chart(tmp_path / "x.svg", [])
    with pytest.raises(ValidationError):
        line_chart(tmp_path / "x.svg", [("s", [1, 2], [1, 2, 3])])
    with pytest.raises(ValidationError):
        line_chart(tmp_path / "x.svg", [("s", [1, 2], [1, 2])], xscale="cubic")
    with pytest.raises(ValidationError):
        # nothing plottable on a log axis
        line_chart(tmp_path / "x.svg", [("s", [1, 2], [-1, -2])], yscale="log")
