"""Readers and writers for frequency tables and fit outputs.

Input tables are comma separated, one bin per row, either
``center,frequency`` (edges derived from the centers) or
``left_edge,right_edge,frequency``.  Blank lines and lines starting with
``#`` are ignored.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .binning import edges_from_midpoints
from .estimators import FitSummary
from .types import BinclustError, BinLayout, BinnedDataset, Trace, ValidationError, validate_dataset


class ParseError(ValidationError):
    def __init__(self, message: str, line: Optional[int] = None, path=None):
        self.line = line
        where = f"{path}:" if path is not None else ""
        where += f"{line}: " if line is not None else (": " if where else "")
        super().__init__(f"{where}{message}")


class NonContiguousEdges(ValidationError):
    pass


def fmt(x: float) -> str:
    """Float with 17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _frequency(token: str, line: int, path) -> int:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"frequency {token!r} is not a number", line, path) from None
    if value != int(value):
        raise ParseError(f"frequency {token!r} is not an integer", line, path)
    if value < 0:
        raise ParseError(f"frequency {token!r} is negative", line, path)
    return int(value)


def _number(token: str, what: str, line: int, path) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{what} {token!r} is not a number", line, path) from None


def _rows(path, header: bool):
    with open(path, newline="") as fh:
        skipped_header = not header
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
                continue
            if not skipped_header:
                skipped_header = True
                continue
            yield lineno, cells


def parse_input(path, edges_format: bool = False, header: bool = False) -> BinnedDataset:
    """Read a frequency table into a validated :class:`BinnedDataset`."""
    ncol = 3 if edges_format else 2
    rows = []
    for lineno, cells in _rows(path, header):
        if len(cells) != ncol:
            raise ParseError(f"expected {ncol} columns, found {len(cells)}", lineno, path)
        rows.append((lineno, cells))
    if not rows:
        raise ParseError("no data rows", None, path)

    if edges_format:
        edges, freqs = [], []
        for lineno, (left, right, f) in rows:
            lo = _number(left, "left edge", lineno, path)
            hi = _number(right, "right edge", lineno, path)
            if not hi > lo:
                raise ParseError(f"right edge {hi!r} does not exceed left edge {lo!r}", lineno, path)
            if edges and lo != edges[-1]:
                raise NonContiguousEdges(
                    f"{path}:{lineno}: bin starts at {lo!r} but the previous bin ends at {edges[-1]!r}"
                )
            if not edges:
                edges.append(lo)
            edges.append(hi)
            freqs.append(_frequency(f, lineno, path))
        dataset = BinnedDataset(BinLayout(tuple(edges)), tuple(freqs))
    else:
        centers, freqs = [], []
        for lineno, (c, f) in rows:
            center = _number(c, "center", lineno, path)
            if centers and not center > centers[-1]:
                raise ParseError(f"center {center!r} does not exceed the previous center {centers[-1]!r}", lineno, path)
            centers.append(center)
            freqs.append(_frequency(f, lineno, path))
        dataset = BinnedDataset(edges_from_midpoints(centers), tuple(freqs))
    validate_dataset(dataset)
    return dataset


def write_dataset(dataset: BinnedDataset, path, edges_format: Optional[bool] = None, header: bool = False) -> None:
    """Write `dataset` so that :func:`parse_input` reads it back unchanged.

    Center format is used when the layout carries centers, unless
    `edges_format` says otherwise.
    """
    layout = dataset.layout
    if edges_format is None:
        edges_format = layout.centers is None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if edges_format:
            if header:
                w.writerow(["left_edge", "right_edge", "frequency"])
            for l, f in enumerate(dataset.freqs):
                w.writerow([fmt(layout.edges[l]), fmt(layout.edges[l + 1]), f])
        else:
            if header:
                w.writerow(["center", "frequency"])
            for c, f in zip(layout.reporting_centers(), dataset.freqs):
                w.writerow([fmt(c), f])


def write_trace(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "k", "partition", "alpha"])
        for it, p, a in zip(trace.iterations, trace.partitions, trace.alpha_draws):
            w.writerow([it, p.k, p.token(), fmt(a)])


def read_trace_partitions(path) -> list[tuple[int, ...]]:
    with open(path, newline="") as fh:
        return [tuple(int(s) for s in row["partition"].split("-")) for row in csv.DictReader(fh)]


def write_density(grid: Sequence[float], values: Sequence[float], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "density"])
        for x, v in zip(grid, values):
            w.writerow([fmt(x), fmt(v)])


def summary_record(summary: FitSummary, seed: int, config: dict) -> dict:
    return {
        "modal_partition": list(summary.modal_partition.sizes),
        "k": summary.k,
        "visits": summary.visits,
        "draws": summary.draws,
        "groups": [
            {"size": g.size, "weight": g.weight, "mean": g.mean, "sd": g.sd}
            for g in summary.groups
        ],
        "mean_order_violations": summary.order_violations,
        "seed": seed,
        "config": config,
    }


def to_json(obj, indent: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, float):
        if not np.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite value {obj!r}")
        text = fmt(obj)
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, (np.integer, np.floating)):
        return to_json(obj.item(), indent)
    return json.dumps(obj)


def _json_dump(obj, path) -> None:
    Path(path).write_text(to_json(obj) + "\n")


def write_outputs(
    trace: Trace,
    summary: FitSummary,
    grid: np.ndarray,
    density: np.ndarray,
    out_dir,
    seed: int,
    config: dict,
    suffix: str = "",
    runtime: Optional[float] = None,
) -> dict:
    """Write trace CSV, summary JSON and density CSV; return the paths.

    Wall-clock runtime goes to a separate ``timing`` file so that the three
    result files are byte-identical across reruns.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": out / f"trace{suffix}.csv",
        "summary": out / f"summary{suffix}.json",
        "density": out / f"density{suffix}.csv",
    }
    try:
        write_trace(trace, paths["trace"])
        _json_dump(summary_record(summary, seed, config), paths["summary"])
        write_density(grid, density, paths["density"])
        if runtime is not None:
            paths["timing"] = out / f"timing{suffix}.json"
            _json_dump({"runtime_seconds": runtime}, paths["timing"])
    except OSError as exc:
        raise BinclustError(f"cannot write outputs to {os.fspath(out)}: {exc}") from exc
    return paths
