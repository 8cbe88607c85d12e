"""
Duffing-Van der Pol Survey - Result Store
CSV tables and SVG pictures with provenance headers
"""

import csv
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
from matplotlib import colormaps  # noqa: E402
from matplotlib.colors import to_hex  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

import numpy as np  # noqa: E402

import config  # noqa: E402
from . import __version__  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = config.SVG_HASH_SALT

# Provenance keys that never change the content of a run
_VOLATILE_KEYS = ("out_dir", "workers", "timestamp")


def _log(msg: str) -> None:
    print(f"[ResultStore] {msg}")


def format_value(value: Any) -> str:
    """Cell text: floats with CSV_SIGNIFICANT_DIGITS significant digits, '.' decimal"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{config.CSV_SIGNIFICANT_DIGITS}g}"
    if value is None:
        return ""
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def type_color(i: int, j: int, k: int) -> str:
    """Fixed color of a cycle type (i, j, k)"""
    return to_hex(colormaps["tab20"]((9 * i + 3 * j + k) % 20))


@dataclass
class PlotSeries:
    """
    One drawable item of an SVG picture

    kind is 'line' (polyline) or 'points' (markers only).
    """

    label: str
    points: np.ndarray
    kind: str = "line"
    color: Optional[str] = None


class ResultStore:
    """
    Output directory of one run

    Every file starts with '#' provenance lines (tool version, command and
    the configuration echo). Runs that stop on a numeric failure are marked
    partial: files written afterwards carry the status and a PARTIAL marker
    file names the failure.
    """

    def __init__(self, out_dir: str = None, provenance: Dict[str, Any] = None, timestamp: bool = True):
        self.out_dir = config.create_directories(out_dir)
        self.provenance = {
            k: v for k, v in sorted((provenance or {}).items()) if k not in _VOLATILE_KEYS
        }
        self.timestamp = timestamp
        self.status = "complete"
        self.files: List[str] = []

        if config.DEBUG:
            _log(f"Initialized at {self.out_dir}")

    # ==================== PROVENANCE ====================

    def header_lines(self) -> List[str]:
        lines = [f"tool = dvdp-survey {__version__}", f"status = {self.status}"]
        lines.extend(f"{key} = {format_value(value)}" for key, value in self.provenance.items())
        return lines

    def mark_partial(self, reason: str) -> str:
        """Flag the run as partial and write the PARTIAL marker"""
        self.status = "partial"
        path = os.path.join(self.out_dir, "PARTIAL")
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(f"{reason}\n")
        if path not in self.files:
            self.files.append(path)
        if config.DEBUG:
            _log(f"Run marked partial: {reason}")
        return path

    # ==================== CSV ====================

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """
        Write one table

        Args:
            name: file name inside the output directory
            header: column names
            rows: sequences of cell values

        Returns:
            str: path of the written file
        """
        path = os.path.join(self.out_dir, name)
        with open(path, "w", newline="", encoding="utf-8") as f:
            for line in self.header_lines():
                f.write(f"# {line}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(header))
            count = 0
            for row in rows:
                writer.writerow([format_value(v) for v in row])
                count += 1

        self.files.append(path)
        if config.DEBUG:
            _log(f"Wrote {count} row(s) to {path}")
        return path

    # ==================== SVG ====================

    def write_svg(
        self,
        name: str,
        series: Sequence[PlotSeries],
        xlabel: str = "x",
        ylabel: str = "y",
        title: str = "",
        limits: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None,
    ) -> str:
        """
        Write polylines and point markers as SVG

        Returns:
            str: path of the written file
        """
        fig = Figure(figsize=(6.4, 4.8))
        ax = fig.add_subplot(1, 1, 1)
        labelled = False
        for item in series:
            pts = np.asarray(item.points, dtype=float).reshape(-1, 2)
            if pts.shape[0] == 0:
                continue
            style = {"label": item.label}
            if item.color is not None:
                style["color"] = item.color
            if item.kind == "points":
                ax.plot(pts[:, 0], pts[:, 1], linestyle="none", marker=".", markersize=2, **style)
            else:
                ax.plot(pts[:, 0], pts[:, 1], linewidth=0.8, **style)
            labelled = labelled or bool(item.label)

        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if limits is not None:
            ax.set_xlim(*limits[0])
            ax.set_ylim(*limits[1])
        if labelled and len(series) <= 20:
            ax.legend(fontsize="x-small")

        metadata = {
            "Creator": f"dvdp-survey {__version__}",
            "Description": "; ".join(self.header_lines()),
        }
        if not self.timestamp:
            metadata["Date"] = None

        path = os.path.join(self.out_dir, name)
        fig.savefig(path, format="svg", metadata=metadata)
        self.files.append(path)
        if config.DEBUG:
            _log(f"Wrote {len(series)} series to {path}")
        return path


def read_csv(path: str) -> Tuple[Dict[str, str], List[Dict[str, str]]]:
    """
    Read a table written by ResultStore

    Returns:
        (provenance dict, list of row dicts)
    """
    meta: Dict[str, str] = {}
    body = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(" = ")
                meta[key] = value
            else:
                body.append(line)
    rows = list(csv.DictReader(body))
    return meta, rows


# ==================== TESTING ====================

if __name__ == "__main__":
    import tempfile

    store = ResultStore(tempfile.mkdtemp(), {"command": "demo", "p1": 0.1}, timestamp=False)
    path = store.write_csv("demo.csv", ["x", "y"], [(0.1, 1.0 / 3.0), (2, True)])
    print(open(path).read())
    print(read_csv(path))
