"""Parameter sweeps of the probe transmission, with dip detection.

One correlation table is built per distinct (bath, temperature) combination
and reused across every probe frequency on that slice; grid points are
independent, so sweeps parallelize over slices while staying bit-identical
for any worker count. Failed points become flagged rows, never aborted jobs.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.signal import find_peaks

from . import __version__
from .bathcorr import tabulate
from .errors import NibaspecError
from .model import OhmicExpCutoff, ResonatorParams, SystemParams, Thermal, effective_bath
from .niba import probe_response

AXIS_NAMES = ("omega", "omega_p", "g", "alpha", "kappa", "temperature")

# baseline operating point: resonator sweep defaults with the qubit as the unit
DEFAULTS = {
    "delta": 1.0,
    "eps0": 0.0,
    "eps_p": 0.01,
    "n_factor": 0.1,
    "omega": 1.2,
    "g": 0.2,
    "kappa": 0.05,
    "alpha": 0.1,
    "omega_c": 10.0,
    "temperature": 1.0,
    "omega_p": 1.0,
}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; choose from {AXIS_NAMES}")
        if self.count < 2:
            raise ValueError(f"axis {self.name}: count must be >= 2, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"axis {self.name}: require start < stop")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"axis {self.name}: spacing must be linear or log")
        if self.spacing == "log" and self.start <= 0:
            raise ValueError(f"axis {self.name}: log spacing needs positive start")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepGrid:
    """Up to two swept axes over a fixed base configuration.

    bath_kind selects how points map onto a bath: "structured" builds the
    effective bath from (omega, g, kappa); "ohmic" uses (alpha, omega_c).
    """

    axes: tuple[Axis, ...]
    fixed: dict = field(default_factory=dict)
    bath_kind: str = "structured"

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep job takes one or two axes")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate swept axis in {names}")
        if self.bath_kind not in ("structured", "ohmic"):
            raise ValueError(f"bath_kind must be structured or ohmic, got {self.bath_kind!r}")
        structured_only = {"omega", "g", "kappa"}
        if self.bath_kind == "ohmic" and structured_only & set(names):
            raise ValueError("omega/g/kappa axes apply to the structured bath only")
        if self.bath_kind == "structured" and "alpha" in names:
            raise ValueError("alpha is derived for the structured bath; sweep g or kappa")
        unknown = set(self.fixed) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown fixed parameters {sorted(unknown)}")

    def resolved(self, point: dict) -> dict:
        vals = dict(DEFAULTS)
        vals.update(self.fixed)
        vals.update(point)
        return vals


@dataclass(frozen=True)
class Dip:
    center: float
    depth: float
    width: float


@dataclass
class SweepResult:
    grid: SweepGrid
    columns: tuple[str, ...]
    data: np.ndarray  # one row per grid point: axis values, T_re, T_im, |T|^2, valid
    dips: dict = field(default_factory=dict)  # line-cut key -> list[Dip]
    metadata: dict = field(default_factory=dict)


def _bath_and_thermal(vals: dict, bath_kind: str):
    thermal = Thermal(vals["temperature"])
    if bath_kind == "structured":
        bath = effective_bath(ResonatorParams(omega=vals["omega"], g=vals["g"],
                                              kappa=vals["kappa"]))
    else:
        bath = OhmicExpCutoff(alpha=vals["alpha"], omega_c=vals["omega_c"])
    return bath, thermal


def _eval_slice(args):
    """Evaluate every probe frequency sharing one correlation table."""
    vals, bath_kind, omega_ps, tol_tail, quad_tol = args
    bath, thermal = _bath_and_thermal(vals, bath_kind)
    system = SystemParams(delta=vals["delta"], eps0=vals["eps0"],
                          eps_p=vals["eps_p"], n_factor=vals["n_factor"])
    out = np.empty((len(omega_ps), 4))
    try:
        corr = tabulate(bath, thermal, tol_tail=tol_tail,
                        omega_max=max(omega_ps), quad_tol=quad_tol)
    except (NibaspecError, ValueError, FloatingPointError):
        out[:] = (np.nan, np.nan, np.nan, 0.0)
        return out
    for k, omega_p in enumerate(omega_ps):
        try:
            resp = probe_response(corr, system, float(omega_p))
            out[k] = (resp.transmission.real, resp.transmission.imag, resp.t_abs2, 1.0)
        except (NibaspecError, ValueError, FloatingPointError):
            out[k] = (np.nan, np.nan, np.nan, 0.0)
    return out


def default_workers() -> int:
    env = os.environ.get("NIBASPEC_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def run_sweep(grid: SweepGrid, workers: int | None = None,
              tol_tail: float = 1e-10, quad_tol: float = 1e-9) -> SweepResult:
    """Evaluate |T|^2 over the grid; rows ordered as the cartesian product of
    the axes (first axis outermost). Results are independent of worker count.
    """
    if workers is None:
        workers = default_workers()
    started = time.perf_counter()
    axis_values = [ax.values() for ax in grid.axes]
    names = [ax.name for ax in grid.axes]

    # group points into slices sharing a bath+thermal combination
    if "omega_p" in names and names[-1] != "omega_p":
        # keep omega_p innermost so each slice is contiguous
        order = sorted(range(len(names)), key=lambda i: names[i] == "omega_p")
        names = [names[i] for i in order]
        axis_values = [axis_values[i] for i in order]
        grid = SweepGrid(axes=tuple(grid.axes[i] for i in order),
                         fixed=grid.fixed, bath_kind=grid.bath_kind)

    if names[-1] == "omega_p":
        outer_names = names[:-1]
        outer_sets = list(product(*axis_values[:-1])) if outer_names else [()]
        omega_ps = axis_values[-1]
    else:
        outer_names = names
        outer_sets = list(product(*axis_values))
        omega_ps = None

    tasks = []
    for combo in outer_sets:
        point = dict(zip(outer_names, combo))
        vals = grid.resolved(point)
        wps = omega_ps if omega_ps is not None else np.array([vals["omega_p"]])
        tasks.append((vals, grid.bath_kind, wps, tol_tail, quad_tol))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_eval_slice, tasks, chunksize=1))
    else:
        blocks = [_eval_slice(t) for t in tasks]

    rows = []
    for combo, block in zip(outer_sets, blocks):
        wps = omega_ps if omega_ps is not None else [None]
        for k in range(block.shape[0]):
            axis_cols = list(combo) + ([omega_ps[k]] if omega_ps is not None else [])
            rows.append(axis_cols + list(block[k]))
    data = np.asarray(rows, dtype=float)

    dips: dict = {}
    if omega_ps is not None and len(omega_ps) >= 32:
        for combo, block in zip(outer_sets, blocks):
            if np.all(block[:, 3] == 1.0):
                key = combo[0] if len(combo) == 1 else (combo if combo else None)
                dips[key] = detect_dips(np.asarray(omega_ps), block[:, 2])

    columns = tuple(names) + ("T_re", "T_im", "T_abs2", "valid")
    metadata = {
        "version": __version__,
        "bath_kind": grid.bath_kind,
        "fixed": dict(grid.fixed),
        "tol_tail": tol_tail,
        "quad_tol": quad_tol,
        "workers": workers,
        "wall_time_s": time.perf_counter() - started,
    }
    return SweepResult(grid=grid, columns=columns, data=data, dips=dips,
                       metadata=metadata)


def detect_dips(omega_p: np.ndarray, t_abs2: np.ndarray,
                prominence: float = 0.005) -> list[Dip]:
    """Local transmission minima with prominence >= `prominence` (in |T|^2 units).

    Centers are parabola-refined through the three points around each minimum;
    widths are measured at half prominence. Needs >= 32 points per line.
    """
    omega_p = np.asarray(omega_p, dtype=float)
    y = np.asarray(t_abs2, dtype=float)
    if omega_p.size < 32:
        raise ValueError(f"need >= 32 points per line cut, got {omega_p.size}")
    idx, props = find_peaks(-y, prominence=prominence, width=0, rel_height=0.5)
    dips = []
    pos = np.arange(omega_p.size)
    for i, prom, lip, rip in zip(idx, props["prominences"],
                                 props["left_ips"], props["right_ips"]):
        x3, y3 = omega_p[i - 1: i + 2], y[i - 1: i + 2]
        a, b, _ = np.polyfit(x3 - x3[1], y3, 2)
        center = x3[1] - b / (2.0 * a) if a > 0 else x3[1]
        width = float(np.interp(rip, pos, omega_p) - np.interp(lip, pos, omega_p))
        dips.append(Dip(center=float(center), depth=float(prom), width=width))
    return dips
