"""Log-log SVG plots from run CSVs."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .runner import CSV_COLUMNS, CSV_VERSION, fit_slope  # noqa: E402


class SchemaError(ValueError):
    pass


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != f"# {CSV_VERSION}":
        raise SchemaError(f"{path}: missing '# {CSV_VERSION}' header line")
    reader = csv.DictReader(lines[1:])
    cols = reader.fieldnames or []
    for col in CSV_COLUMNS:
        if col not in cols:
            raise SchemaError(f"{path}: missing column '{col}'")
    rows = list(reader)
    out: dict[str, np.ndarray] = {}
    for col in CSV_COLUMNS:
        try:
            out[col] = np.array([float(r[col]) if r[col] != "" else np.nan for r in rows])
        except (TypeError, ValueError):
            raise SchemaError(f"{path}: column '{col}' has a non-numeric entry") from None
    for col in ("seed", "T", "t", "gap_or_regret", "oracle_calls_cum"):
        if np.isnan(out[col]).any():
            raise SchemaError(f"{path}: column '{col}' has an empty entry")
    return out


def _series(data: dict[str, np.ndarray]):
    Ts = np.unique(data["T"])
    if len(Ts) > 1:
        final = data["t"] == data["T"]
        x = Ts
        y = np.array([np.median(data["gap_or_regret"][final & (data["T"] == T)]) for T in Ts])
        b = np.array([np.nanmax(data["bound"][final & (data["T"] == T)]) if np.isfinite(
            data["bound"][final & (data["T"] == T)]).any() else np.nan for T in Ts])
        return "T", x, y, b
    ts = np.unique(data["t"])
    y = np.array([np.median(data["gap_or_regret"][data["t"] == t]) for t in ts])
    bound = data["bound"][np.isfinite(data["bound"])]
    b = np.full(len(ts), bound[0] if len(bound) else np.nan)
    return "t", ts, y, b


def report(csv_paths, out_dir: str | Path) -> list[Path]:
    """One SVG per CSV: median measured curve, fitted slope, and the bound when recorded."""
    written = []
    if not csv_paths:
        return written
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plt.rcParams["svg.hashsalt"] = "oftpl"
    for path in csv_paths:
        data = read_csv(path)
        axis, x, y, b = _series(data)
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        pos = y > 0
        fit = fit_slope(x, y, drop_first=axis == "T") if pos.sum() >= 2 else {"slope": None}
        label = "median" if fit["slope"] is None else f"median (slope {fit['slope']:.2f})"
        ax.loglog(x[pos], y[pos], "o-", label=label)
        if np.isfinite(b).any():
            ax.loglog(x[np.isfinite(b)], b[np.isfinite(b)], "--", label="bound")
        elif pos.any():
            ref = y[pos][0] * (x[pos] / x[pos][0]) ** -1.0
            ax.loglog(x[pos], ref, ":", label="1/T reference")
        ax.set_xlabel(axis)
        ax.set_ylabel("gap or regret")
        ax.set_title(Path(path).stem)
        ax.legend()
        fig.tight_layout()
        target = out_dir / f"{Path(path).stem}.svg"
        fig.savefig(target, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(target)
    return written
