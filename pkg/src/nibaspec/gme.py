"""Time-domain master-equation oracle for the linear-response pipeline.

Integrates the population difference P(t) = <sigma_z(t)> through the
memory-kernel equation

    dP/dt = int_{t0}^t dt' [K-(t,t') - K+(t,t') P(t')],
    K+(t,t') = h+(t-t') cos(zeta(t,t')),   K-(t,t') = h-(t-t') sin(zeta(t,t')),
    zeta(t,t') = eps0 (t-t') + (eps_p/omega_p)[sin(omega_p t) - sin(omega_p t')],

with a second-order product-integration scheme (trapezoidal history sum,
implicit trapezoidal step), then Fourier-projects the steady periodic tail to
extract the probe harmonic p_1. O(n^2) cost: an oracle, not a spectrum path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bathcorr import CorrTable, tabulate
from .errors import ConvergenceError, TransientError
from .model import BathSpec, StructuredEffective, SystemParams, Thermal
from .niba import h_pm


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    p: np.ndarray


@dataclass
class GmeRun:
    """One time-domain integration job; trajectory is filled by propagate()."""

    system: SystemParams
    bath: BathSpec
    thermal: Thermal
    omega_p: float
    p0_init: float = 1.0
    dt: float | None = None
    t_end: float | None = None
    trajectory: Trajectory | None = field(default=None, repr=False)


@dataclass(frozen=True)
class Harmonic:
    m: int
    p_m: complex


def kernels_t(corr: CorrTable, delta: float, eps0: float, eps_p: float,
              omega_p: float, t, t_prime):
    """Memory kernels (K+, K-) at (t, t'); requires t >= t'."""
    t = np.asarray(t, dtype=float)
    tp = np.asarray(t_prime, dtype=float)
    if np.any(t < tp):
        raise ValueError("kernels require t >= t_prime")
    if eps_p != 0 and omega_p <= 0:
        raise ValueError("omega_p must be positive when eps_p != 0")
    lag = t - tp
    zeta = eps0 * lag
    if eps_p != 0:
        zeta = zeta + (eps_p / omega_p) * (np.sin(omega_p * t) - np.sin(omega_p * tp))
    hp, hm = h_pm(corr, delta, lag)
    kp = hp * np.cos(zeta)
    km = hm * np.sin(zeta)
    if np.ndim(kp):
        return kp, km
    return float(kp), float(km)


def _default_dt(run: GmeRun) -> float:
    scales = [2.0 * math.pi / run.omega_p, 2.0 * math.pi / run.system.delta]
    if isinstance(run.bath, StructuredEffective) and run.bath.gamma < run.bath.omega:
        omega_bar = math.sqrt(run.bath.omega**2 - run.bath.gamma**2)
        if omega_bar > 0:
            scales.append(2.0 * math.pi / omega_bar)
    dt = min(scales) / 64.0
    if hasattr(run.bath, "omega_c"):
        dt = min(dt, 0.5 / run.bath.omega_c)
    return dt


def _march(p0, dt, n, n_mem, hp, hm, eps0, eps_p, omega_p, ts, delta):
    """Implicit-trapezoid march of the memory-kernel equation on a uniform grid."""
    p = np.empty(n + 1)
    p[0] = p0
    s = np.sin(omega_p * ts) if eps_p != 0 else None
    ratio = eps_p / omega_p if eps_p != 0 else 0.0
    d2 = delta * delta
    f_prev = 0.0  # history integral is empty at t0
    gain = 1.0 / (1.0 + 0.25 * dt * dt * d2)
    for i in range(n):
        jmin = max(0, i + 1 - n_mem)
        hp_rev = hp[1: i + 2 - jmin][::-1]  # lags for j = jmin..i
        hm_rev = hm[1: i + 2 - jmin][::-1]
        zeta = eps0 * (ts[i + 1] - ts[jmin: i + 1])
        if eps_p != 0:
            zeta = zeta + ratio * (s[i + 1] - s[jmin: i + 1])
        km = hm_rev * np.sin(zeta)
        kp = hp_rev * np.cos(zeta)
        hist = km - kp * p[jmin: i + 1]
        a = dt * (hist.sum() - 0.5 * hist[0])  # trapezoid: half weight at the far end
        p[i + 1] = (p[i] + 0.5 * dt * (f_prev + a)) * gain
        f_prev = a - 0.5 * dt * d2 * p[i + 1]
    return p


def propagate(run: GmeRun, corr: CorrTable | None = None,
              check_convergence: bool = True,
              convergence_tol: float = 1e-4) -> Trajectory:
    """Integrate P(t) from t0 = 0 with the probe switched on at t0.

    The step is snapped so the probe period is an integer number of steps and
    the horizon an integer number of periods. With check_convergence a halved-
    step run must agree to convergence_tol in the sup norm (the returned
    trajectory is the fine one).
    """
    if corr is None:
        corr = tabulate(run.bath, run.thermal, omega_max=run.omega_p)
    period = 2.0 * math.pi / run.omega_p
    n_sub = max(8, int(math.ceil(period / (run.dt or _default_dt(run)))))
    t_end = run.t_end if run.t_end is not None else 150.0 + 8.0 * period
    n_periods = max(int(math.ceil(t_end / period)), 10)

    def solve(n_sub_eff):
        dt = period / n_sub_eff
        n = n_sub_eff * n_periods
        ts = np.arange(n + 1) * dt
        lags = np.arange(min(n, int(math.ceil(corr.t_max / dt))) + 1) * dt
        hp, hm = h_pm(corr, run.system.delta, lags)
        if not corr.is_zero:
            hp[lags > corr.t_max] = 0.0
            hm[lags > corr.t_max] = 0.0
        p = _march(run.p0_init, dt, n, len(lags) - 1, hp, hm, run.system.eps0,
                   run.system.eps_p, run.omega_p, ts, run.system.delta)
        return ts, p

    ts, p = solve(n_sub)
    if check_convergence:
        ts2, p2 = solve(2 * n_sub)
        gap = float(np.max(np.abs(p - p2[::2])))
        if gap > convergence_tol:
            raise ConvergenceError(
                f"step-halving disagreement {gap:.2e} > {convergence_tol:.2e}; refine dt"
            )
        ts, p = ts2, p2
    if np.max(np.abs(p)) > 1.0 + 1e-3:
        raise ConvergenceError("population left the physical range |P| <= 1")
    traj = Trajectory(t=ts, p=p)
    run.trajectory = traj
    return traj


def extract_harmonic(traj: Trajectory, omega_p: float, m: int,
                     discard_fraction: float = 0.75,
                     periodicity_tol: float = 1e-3) -> Harmonic:
    """Fourier coefficient p_m = (omega_p/2 pi) int P(t) e^{-i m omega_p t} dt
    over an integer number of steady-state periods.

    The first discard_fraction of the trajectory is dropped; at least two full
    periods must remain and the last two must agree to periodicity_tol,
    otherwise the transient has not decayed and the caller must extend t_end.
    """
    t, p = traj.t, traj.p
    dt = t[1] - t[0]
    period = 2.0 * math.pi / omega_p
    n_sub = int(round(period / dt))
    if n_sub < 2 or abs(n_sub * dt - period) > 1e-9 * period:
        raise ValueError("trajectory grid is not commensurate with the probe period")
    n = len(t) - 1
    usable = n - int(math.ceil(discard_fraction * n))
    n_periods = usable // n_sub
    if n_periods < 2:
        raise TransientError("fewer than two probe periods after transient discard")
    if n < 2 * n_sub:
        raise TransientError("trajectory shorter than two probe periods")
    wobble = float(np.max(np.abs(p[-n_sub - 1:] - p[-2 * n_sub - 1: -n_sub])))
    if wobble > periodicity_tol:
        raise TransientError(
            f"last two periods differ by {wobble:.2e} > {periodicity_tol:.2e}; extend t_end"
        )
    i0 = n - n_periods * n_sub
    tw = t[i0:]
    pw = p[i0:]
    w = np.ones(len(tw))
    w[0] = w[-1] = 0.5
    val = np.sum(w * pw * np.exp(-1j * m * omega_p * tw)) * dt / (n_periods * period)
    return Harmonic(m=m, p_m=complex(val))


def probe_harmonic(system: SystemParams, bath: BathSpec, thermal: Thermal,
                   omega_p: float, corr: CorrTable | None = None,
                   t_end: float | None = None, max_extensions: int = 5,
                   check_convergence: bool = True) -> Harmonic:
    """First probe harmonic p_1, extending the horizon until the tail is periodic.

    p_1/eps_p is the time-domain estimate of the linear susceptibility. The
    step is halved until the self-convergence check passes; the horizon is
    stretched until the transient has decayed."""
    if corr is None:
        corr = tabulate(bath, thermal, omega_max=omega_p)
    period = 2.0 * math.pi / omega_p
    horizon = t_end if t_end is not None else 150.0 + 8.0 * period
    dt = None
    last_exc: TransientError | None = None
    for attempt in range(max_extensions + 1):
        run = GmeRun(system=system, bath=bath, thermal=thermal,
                     omega_p=omega_p, t_end=horizon, dt=dt)
        # the step-halving check concerns dt, not the horizon: settle it once
        if check_convergence and attempt == 0:
            for _ in range(4):
                try:
                    traj = propagate(run, corr=corr, check_convergence=True)
                    break
                except ConvergenceError:
                    dt = (run.dt or _default_dt(run)) / 2.0
                    run = GmeRun(system=system, bath=bath, thermal=thermal,
                                 omega_p=omega_p, t_end=horizon, dt=dt)
            else:
                raise ConvergenceError("step refinement exhausted without convergence")
        else:
            traj = propagate(run, corr=corr, check_convergence=False)
        try:
            return extract_harmonic(traj, omega_p, 1)
        except TransientError as exc:
            last_exc = exc
            horizon *= 1.6
    raise last_exc if last_exc is not None else TransientError("no periodic tail found")
