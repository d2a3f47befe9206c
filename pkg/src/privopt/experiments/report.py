"""Report output: long-format CSV and SVG plots.

CSV columns are ``epsilon, delta, metric, mean, stderr, n_trials, seed``;
floats are written with ``repr`` so reruns are byte-identical. Every file is
written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

COLUMNS = ("epsilon", "delta", "metric", "mean", "stderr", "n_trials", "seed")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(rows: list[dict]) -> str:
    if not rows:
        raise ValueError("report needs at least one row")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            out.append({"epsilon": float(r["epsilon"]), "delta": float(r["delta"]), "metric": r["metric"],
                        "mean": float(r["mean"]), "stderr": float(r["stderr"]),
                        "n_trials": int(r["n_trials"]), "seed": int(r["seed"])})
    return out


def _svg_bytes(rows: list[dict], series_key: str) -> bytes:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    keys = sorted({r[series_key] for r in rows}, key=str)
    for key in keys:
        pts = sorted((r["epsilon"], r["mean"]) for r in rows if r[series_key] == key)
        xs, ys = zip(*pts)
        label = f"delta={key:g}" if series_key == "delta" else str(key)
        ax.plot(xs, ys, marker="o", label=label)
    eps = [r["epsilon"] for r in rows]
    if min(eps) > 0 and max(eps) / min(eps) > 100:
        ax.set_xscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel(rows[0]["metric"] if series_key == "delta" else "value")
    ax.legend()
    buf = io.BytesIO()
    with plt.rc_context({"svg.hashsalt": "privopt", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def emit_report(rows: list[dict], fmt: str, path) -> None:
    """Write ``rows`` as CSV, or as an SVG line plot with one series per delta
    (single metric) or per metric (several metrics)."""
    if not rows:
        raise ValueError("report needs at least one row")
    if fmt == "csv":
        atomic_write(path, csv_text(rows).encode())
    elif fmt == "svg":
        metrics = {r["metric"] for r in rows}
        series = "delta" if len(metrics) == 1 else "metric"
        atomic_write(path, _svg_bytes(rows, series))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
