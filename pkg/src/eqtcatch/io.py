"""Portable CSV/JSON exports, their readers and the run manifest.

Times are written in ns and rates in units of 2π·MHz; everything in memory
stays SI.  Floats use 17 significant digits so that reading a file back
recovers the exact doubles.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .catcher import CaptureRun, capture_report, has_dip
from .dynamics import BiphotonKernel
from .model import TWO_PI, TimeGrid
from .schmidt import SchmidtDecomposition

NS = 1e-9
MHZ_2PI = TWO_PI * 1e6
_FLOAT = "%.17g"


class CsvParseError(ValueError):
    """Malformed input table; ``line`` is 1-based."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_table(path, header, columns, int_columns=()):
    """Write equal-length columns as CSV with a single header row."""
    cols = [np.asarray(c) for c in columns]
    fmt = ["%d" if i in int_columns else _FLOAT for i in range(len(cols))]
    np.savetxt(path, np.column_stack(cols), fmt=fmt, delimiter=",", header=",".join(header), comments="")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _finite(x):
    """JSON-safe float: None for missing or non-finite values."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def grid_spec(grid: TimeGrid) -> dict:
    return {"t_start_s": grid.t_start, "t_end_s": grid.t_end, "n_points": grid.n_points}


class Manifest:
    """Collects every file a command writes, with checksums."""

    def __init__(self, directory, config_hash=None, command=None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.command = command
        self.entries = {}
        self.results = {}

    def path(self, name) -> Path:
        return self.directory / name

    def add(self, name, panel=None):
        p = self.path(name)
        self.entries[name] = {"path": name, "sha256": sha256_file(p), "bytes": p.stat().st_size, "panel": panel}

    def write(self, status="complete", error=None) -> Path:
        payload = {
            "command": self.command,
            "config_hash": self.config_hash,
            "status": status,
            "files": [self.entries[k] for k in sorted(self.entries)],
            "results": self.results,
        }
        if error is not None:
            payload["error"] = error
        out = self.path("manifest.json")
        write_json(out, payload)
        return out


# kernels -------------------------------------------------------------------

def write_kernel(path, kernel: BiphotonKernel, config_hash=None) -> Path:
    """Kernel CSV (i, j, t1_ns, t2_ns, re, im) plus a ``.json`` sidecar."""
    path = Path(path)
    n = kernel.grid.n_points
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    t_ns = kernel.grid.times / NS
    v = kernel.values.ravel()
    write_table(path, ("i", "j", "t1_ns", "t2_ns", "re", "im"),
                (i.ravel(), j.ravel(), t_ns[i.ravel()], t_ns[j.ravel()], v.real, v.imag), int_columns=(0, 1))
    sidecar = path.with_suffix(".json")
    write_json(sidecar, {
        "grid": grid_spec(kernel.grid),
        "norm": kernel.norm,
        "generation_probability": kernel.generation_probability,
        "engine": kernel.engine,
        "parameters_hash": config_hash,
        "meta": {k: v for k, v in kernel.meta.items() if isinstance(v, (bool, int, float, str))},
    })
    return sidecar


def read_kernel(path) -> BiphotonKernel:
    path = Path(path)
    sidecar = path.with_suffix(".json")
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        g = meta["grid"]
        grid = TimeGrid(float(g["t_start_s"]), float(g["t_end_s"]), int(g["n_points"]))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CsvParseError(sidecar, 1, f"unreadable kernel sidecar ({exc})") from None
    n = grid.n_points
    values = np.full((n, n), np.nan, dtype=complex)
    for line, row in _rows(path, ("i", "j", "re", "im")):
        try:
            a, b = int(row["i"]), int(row["j"])
            z = complex(float(row["re"]), float(row["im"]))
        except ValueError:
            raise CsvParseError(path, line, "non-numeric field") from None
        if not (0 <= a < n and 0 <= b < n):
            raise CsvParseError(path, line, f"index ({a}, {b}) outside a {n}-point grid")
        values[a, b] = z
    if np.isnan(values.real).any():
        raise CsvParseError(path, 1, "kernel table does not cover the full grid")
    return BiphotonKernel(grid, values, float(meta.get("norm", 1.0)), str(meta.get("engine", "unknown")))


# Schmidt modes -------------------------------------------------------------

def write_modes(path, decomp: SchmidtDecomposition, branch: str, n_modes: int):
    """One CSV per branch with rows (k, t_ns, re, im, abs2) for the first ``n_modes`` pairs."""
    modes = decomp.optical_modes if branch == "optical" else decomp.microwave_modes
    keep = min(n_modes, len(modes))
    n = decomp.grid.n_points
    k = np.repeat(np.arange(keep), n)
    t_ns = np.tile(decomp.grid.times / NS, keep)
    v = modes[:keep].ravel()
    write_table(path, ("k", "t_ns", "re", "im", "abs2"), (k, t_ns, v.real, v.imag, np.abs(v) ** 2),
                int_columns=(0,))


def modes_summary(decomp: SchmidtDecomposition, n_modes: int) -> dict:
    keep = min(n_modes, len(decomp.lambdas))
    return {
        "lambdas": decomp.lambdas.tolist(),
        "entropy_nats": decomp.entropy,
        "truncation_mass": max(0.0, 1.0 - float(np.sum(decomp.lambdas[:keep]))),
        "exported_modes": keep,
        "phases": [[p.real, p.imag] for p in decomp.phases[:keep]],
        "grid": grid_spec(decomp.grid),
    }


# photons and captures ------------------------------------------------------

def _rows(path, required):
    """Yield ``(line_number, row_dict)`` after checking the header."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CsvParseError(path, 0, f"cannot open: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or not any(h.strip() for h in header):
            raise CsvParseError(path, 1, "empty file or missing header")
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise CsvParseError(path, 1, f"header lacks column(s) {', '.join(missing)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(path, line, f"expected {len(header)} fields, found {len(row)}")
            yield line, dict(zip(header, (c.strip() for c in row)))


def read_photon(path, mode: int = 0):
    """Read ``t_ns, re[, im]`` (or a mode export, selecting ``k == mode``).

    Returns ``(grid, amplitude)``; samples must lie on a uniform grid.
    """
    times, amps, lines = [], [], []
    for line, row in _rows(path, ("t_ns", "re")):
        if "k" in row:
            try:
                if int(row["k"]) != mode:
                    continue
            except ValueError:
                raise CsvParseError(path, line, f"mode index {row['k']!r} is not an integer") from None
        try:
            t = float(row["t_ns"])
            z = complex(float(row["re"]), float(row.get("im") or 0.0))
        except ValueError:
            raise CsvParseError(path, line, "non-numeric field") from None
        if not (math.isfinite(t) and math.isfinite(z.real) and math.isfinite(z.imag)):
            raise CsvParseError(path, line, "non-finite value")
        if times and t <= times[-1]:
            raise CsvParseError(path, line, "times must increase strictly")
        times.append(t)
        amps.append(z)
        lines.append(line)
    if len(times) < 4:
        raise CsvParseError(path, lines[-1] if lines else 1, f"need at least 4 samples, found {len(times)}")
    grid = TimeGrid(times[0] * NS, times[-1] * NS, len(times))
    dev = np.abs(grid.times / NS - np.asarray(times))
    worst = int(np.argmax(dev))
    if dev[worst] > 1e-6 * (times[1] - times[0]):
        raise CsvParseError(path, lines[worst], "samples are not uniformly spaced")
    return grid, np.asarray(amps)


def write_capture(path, run: CaptureRun):
    """Capture CSV and a ``.json`` summary next to it."""
    path = Path(path)
    t = run.times
    f = run.photon.amplitude
    write_table(path, ("t_ns", "fin_re", "fin_im", "kappa1_MHz_over_2pi", "d_abs2", "dout_abs2", "eta"),
                (t / NS, f.real, f.imag, run.schedule.kappa1 / MHZ_2PI, np.abs(run.d) ** 2,
                 np.abs(run.d_out) ** 2, run.eta))
    summary = capture_summary(run)
    write_json(path.with_suffix(".json"), summary)
    return summary


def capture_summary(run: CaptureRun) -> dict:
    rep = capture_report(run)
    sched = run.schedule
    scale = lambda x: None if x is None else x / MHZ_2PI  # noqa: E731
    return {
        "eta_final": rep.eta_final,
        "t_balance_ns": _finite(None if rep.t_balance is None else rep.t_balance / NS),
        "reflected_before_balance": _finite(rep.reflected_before_balance),
        "kappa1_max_MHz_over_2pi": _finite(scale(rep.kappa1_max)),
        "kappa1_min_after_balance_MHz_over_2pi": _finite(scale(rep.kappa1_min_after_balance)),
        "bookkeeping_residual": rep.bookkeeping_residual,
        "clamped_samples": int(np.count_nonzero(sched.clamped)),
        "schedule_has_dip": has_dip(sched.kappa1),
        "input_norm": run.photon.norm,
    }
