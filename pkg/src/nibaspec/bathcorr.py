"""Bath correlation function Q(t) = Q'(t) + i Q''(t).

Q(t) is the twice-integrated bath force correlator,

    Q(t) = int_0^inf dw G(w)/w^2 [coth(beta*w/2)(1 - cos w*t) + i sin w*t].

Three evaluation routes are provided: closed forms for the underdamped
structured bath (linear-plus-decaying-oscillation for Q', saturating for Q'',
plus a thermal series), a generic adaptive quadrature valid for any
UV-convergent spectral density, and tabulation onto a reusable interpolated
time grid. The quadrature is the correctness oracle for the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from ._quad import integrate_panels, panel_edges
from .errors import ConvergenceError, OverdampedBathError, UVDivergenceError
from .model import BathSpec, OhmicExpCutoff, StrictOhmic, StructuredEffective, Thermal

DEFAULT_TAIL_TOL = 1e-10
DEFAULT_QUAD_TOL = 1e-9
DEFAULT_MATS_TOL = 1e-12
DEFAULT_INTERP_TOL = 1e-8


@dataclass(frozen=True)
class CorrParams:
    """Coefficients of the structured-bath closed forms.

    x_rate = 2*pi*alpha*k_B*T/hbar is the asymptotic slope of Q';
    omega_bar = sqrt(omega^2 - gamma^2) the shifted oscillation frequency;
    n_coef, l_coef, z_coef weigh the decaying oscillation terms.
    """

    x_rate: float
    omega_bar: float
    n_coef: float
    l_coef: float
    z_coef: float
    gamma: float
    alpha: float

    @property
    def omega(self) -> float:
        return math.hypot(self.omega_bar, self.gamma)


def corr_params(spec: StructuredEffective, thermal: Thermal) -> CorrParams:
    """Compute all closed-form coefficients in one pass.

    Requires an underdamped bath (gamma < omega); the overdamped case must go
    through q_quadrature instead.
    """
    if spec.gamma >= spec.omega:
        raise OverdampedBathError(
            f"gamma={spec.gamma} >= omega={spec.omega}: closed forms invalid, "
            "use q_quadrature"
        )
    if spec.gamma <= 0:
        raise OverdampedBathError(
            "gamma must be positive for the closed forms; alpha == 0 specs "
            "should take the decoupled (Q == 0) path"
        )
    beta = thermal.beta
    omega_bar = math.sqrt(spec.omega**2 - spec.gamma**2)
    n_coef = (spec.omega**2 - 2.0 * spec.gamma**2) / (2.0 * spec.gamma * omega_bar)
    denom = math.cosh(beta * omega_bar) - math.cos(beta * spec.gamma)
    pa = math.pi * spec.alpha
    l_coef = pa * (n_coef * math.sinh(beta * omega_bar) - math.sin(beta * spec.gamma)) / denom
    z_coef = pa * (math.sinh(beta * omega_bar) + n_coef * math.sin(beta * spec.gamma)) / denom
    return CorrParams(
        x_rate=2.0 * math.pi * spec.alpha * thermal.temperature,
        omega_bar=omega_bar,
        n_coef=n_coef,
        l_coef=l_coef,
        z_coef=z_coef,
        gamma=spec.gamma,
        alpha=spec.alpha,
    )


def _mats_sum(alpha, omega, gamma, temperature, t, tol, block=16, n_max=65536):
    """Thermal series part of Q'(t): positive, monotone terms over nu_n = 2*pi*n*T.

    Truncated once the newest term falls below tol times the accumulated sum
    (never before 4 terms). Terms decay like n^-5, so this converges fast.
    """
    t = np.asarray(t, dtype=float)
    pref = 4.0 * math.pi * alpha * omega**4 * temperature
    acc = np.zeros_like(t)
    n = 1
    while n <= n_max:
        ns = np.arange(n, n + block)[:, None]
        nu = 2.0 * math.pi * temperature * ns
        den = (omega**2 + nu**2) ** 2 - 4.0 * gamma**2 * nu**2
        terms = (-np.expm1(-nu * t[None, :])) / nu / den
        acc = acc + terms.sum(axis=0)
        last = terms[-1]
        n += block
        if n > 4 and np.all(last <= tol * np.abs(acc) + 1e-300):
            return pref * acc
    raise ConvergenceError(f"thermal series did not converge within {n_max} terms")


def q_matsubara(spec: StructuredEffective, thermal: Thermal, t, tol: float = DEFAULT_MATS_TOL):
    """Series part of Q'(t) for the structured bath; scalar or array t."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    t_arr = np.asarray(t, dtype=float)
    if spec.alpha == 0:
        return np.zeros_like(t_arr) if t_arr.ndim else 0.0
    out = _mats_sum(spec.alpha, spec.omega, spec.gamma, thermal.temperature,
                    np.atleast_1d(t_arr), tol)
    return out.reshape(t_arr.shape) if t_arr.ndim else float(out[0])


def q_structured(params: CorrParams, thermal: Thermal, t, mats_tol: float = DEFAULT_MATS_TOL):
    """Closed-form Q'(t), Q''(t) for the underdamped structured bath.

    Q'(t)  = X t - L (e^{-gamma t} cos(omega_bar t) - 1)
             - Z e^{-gamma t} sin(omega_bar t) + thermal series,
    Q''(t) = pi*alpha - pi*alpha e^{-gamma t} (cos(omega_bar t) - N sin(omega_bar t)).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    env = np.exp(-params.gamma * t_arr)
    c = np.cos(params.omega_bar * t_arr)
    s = np.sin(params.omega_bar * t_arr)
    pa = math.pi * params.alpha
    mats = _mats_sum(params.alpha, params.omega, params.gamma,
                     thermal.temperature, t_arr, mats_tol) if params.alpha else 0.0
    q_real = params.x_rate * t_arr - params.l_coef * (env * c - 1.0) - params.z_coef * env * s + mats
    q_imag = pa - env * pa * (c - params.n_coef * s)
    if np.ndim(t):
        return q_real, q_imag
    return float(q_real[0]), float(q_imag[0])


def _tail_cutoff(spec: BathSpec, thermal: Thermal, abs_tol: float) -> float:
    """Upper integration limit such that the neglected tail is below abs_tol/10."""
    if isinstance(spec, StructuredEffective):
        # |tail| <= alpha*omega^4/U^4 (coth ~ 1 once beta*U >> 1)
        u = spec.omega * (40.0 * max(spec.alpha, 1e-30) / abs_tol) ** 0.25
        return max(8.0 * spec.omega, 4.0 * thermal.temperature, u)
    # Ohmic: |tail| <= ~4*alpha*omega_c*exp(-U/omega_c)/U
    wc = spec.omega_c
    u = wc * math.log(max(40.0 * spec.alpha * wc / abs_tol, 10.0))
    for _ in range(2):
        u = wc * math.log(max(40.0 * spec.alpha * wc / (abs_tol * u), 10.0))
    return max(u, 8.0 * wc, 4.0 * thermal.temperature)


def _quad_edges(spec: BathSpec, thermal: Thermal, t_ref: float, abs_tol: float) -> np.ndarray:
    upper = _tail_cutoff(spec, thermal, abs_tol)
    # resolve the fastest oscillation (half period pi/t) and the bath features
    widths = [upper / 24.0]
    if t_ref > 0:
        widths.append(math.pi / t_ref)
    breaks: list[float] = []
    if isinstance(spec, StructuredEffective):
        widths.append(spec.omega / 8.0)
        for k in (1.0, 2.0, 4.0, 8.0):
            breaks.extend((spec.omega - k * spec.gamma, spec.omega + k * spec.gamma))
        breaks.append(spec.omega)
    else:
        widths.append(spec.omega_c / 8.0)
        breaks.append(spec.omega_c)
    breaks.append(2.0 * thermal.temperature)
    return panel_edges(0.0, upper, min(widths), breaks)


def q_quadrature(spec: BathSpec, thermal: Thermal, t, abs_tol: float = DEFAULT_QUAD_TOL):
    """Q'(t), Q''(t) by adaptive quadrature of the defining integral.

    Valid for any UV-convergent spectral density; this is the oracle the
    structured closed forms are checked against. Scalar or array t.
    """
    if isinstance(spec, StrictOhmic):
        raise UVDivergenceError(
            "strict Ohmic density has no UV cutoff; Q(t) diverges. "
            "Map it onto a structured or cutoff bath first."
        )
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    q_real = np.zeros_like(t_arr)
    q_imag = np.zeros_like(t_arr)
    if spec.alpha > 0:
        beta = thermal.beta
        live = t_arr > 0  # t = 0 integrand vanishes identically

        def g_over_w2(w):
            if isinstance(spec, StructuredEffective):
                return (2.0 * spec.alpha * spec.omega**4
                        / (w * ((spec.omega**2 - w**2) ** 2 + (2.0 * spec.gamma * w) ** 2)))
            return 2.0 * spec.alpha * np.exp(-w / spec.omega_c) / w

        # dyadic groups share one panel set sized for the group's largest t
        ts_live = t_arr[live]
        order = np.argsort(ts_live)
        groups: list[np.ndarray] = []
        idx = order
        while idx.size:
            t_hi = ts_live[idx[-1]]
            in_group = ts_live[idx] > 0.5 * t_hi
            groups.append(idx[in_group])
            idx = idx[~in_group]

        res_r = np.zeros_like(ts_live)
        res_i = np.zeros_like(ts_live)
        for grp in groups:
            tg = ts_live[grp]
            edges = _quad_edges(spec, thermal, float(tg.max()), abs_tol)

            def f(w, tg=tg):
                base = g_over_w2(w)
                a = base / np.tanh(0.5 * beta * w)
                half = np.sin(0.5 * w[None, :] * tg[:, None])
                real_rows = a[None, :] * (2.0 * half * half)
                imag_rows = base[None, :] * np.sin(w[None, :] * tg[:, None])
                return np.concatenate([real_rows, imag_rows], axis=0)

            vals, _ = integrate_panels(f, edges, abs_tol)
            res_r[grp] = vals[: tg.size]
            res_i[grp] = vals[tg.size:]
        q_real[live] = res_r
        q_imag[live] = res_i
    if np.ndim(t):
        return q_real, q_imag
    return float(q_real[0]), float(q_imag[0])


@dataclass(frozen=True)
class CorrSample:
    t: float
    q_real: float
    q_imag: float


class CorrTable:
    """Q(t) sampled on an adaptive grid with cubic interpolation.

    Immutable after construction and safe to share across workers. The
    recorded `interp_error` is the measured max abs deviation between the
    interpolant and direct evaluation at interval midpoints.
    """

    def __init__(self, t, q_real, q_imag, spec, thermal, tol_tail, interp_error):
        self.t = np.asarray(t, dtype=float)
        self.q_real = np.asarray(q_real, dtype=float)
        self.q_imag = np.asarray(q_imag, dtype=float)
        self.spec = spec
        self.thermal = thermal
        self.tol_tail = float(tol_tail)
        self.interp_error = float(interp_error)
        self.t_max = float(self.t[-1])
        self.is_zero = bool(np.all(self.q_real == 0.0) and np.all(self.q_imag == 0.0))
        self._sp_r = CubicSpline(self.t, self.q_real)
        self._sp_i = CubicSpline(self.t, self.q_imag)

    def interpolate(self, t):
        """Interpolated (Q', Q'') at t in [0, t_max]."""
        return self._sp_r(t), self._sp_i(t)

    @property
    def samples(self) -> list[CorrSample]:
        return [CorrSample(float(a), float(b), float(c))
                for a, b, c in zip(self.t, self.q_real, self.q_imag)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,q_real,q_imag\n")
            for a, b, c in zip(self.t, self.q_real, self.q_imag):
                fh.write(f"{a:.12g},{b:.12g},{c:.12g}\n")


def _direct_evaluator(spec: BathSpec, thermal: Thermal, quad_tol: float):
    if isinstance(spec, StructuredEffective):
        params = corr_params(spec, thermal)
        return lambda t: q_structured(params, thermal, t)
    return lambda t: q_quadrature(spec, thermal, t, abs_tol=quad_tol)


def _find_t_max(evaluate, target: float, guess: float) -> float:
    hi = max(guess, 1.0)
    for _ in range(80):
        if evaluate(hi)[0] >= target:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the kernel-envelope horizon")
    return brentq(lambda t: evaluate(t)[0] - target, 0.0, hi, xtol=1e-6 * hi)


def _initial_grid(spec, thermal, t_max: float, omega_max) -> np.ndarray:
    if isinstance(spec, StructuredEffective):
        omega_bar = math.sqrt(spec.omega**2 - spec.gamma**2)
        fast = max(omega_bar, omega_max or 0.0)
        h_dense = min(2.0 * math.pi / (256.0 * omega_bar), 2.0 * math.pi / (16.0 * fast))
        t_dense = min(t_max, 25.0 / spec.gamma)
        grid = [np.arange(0.0, t_dense, h_dense)]
        if t_dense < t_max:
            n_tail = max(2, int(math.ceil((t_max - t_dense) / 2.0)))
            grid.append(np.linspace(t_dense, t_max, n_tail + 1))
        else:
            grid.append(np.array([t_max]))
        return np.unique(np.concatenate(grid))
    # Ohmic: graded grid, dense where the short-time curvature lives
    h0 = min(1.0 / (16.0 * spec.omega_c), thermal.beta / 64.0)
    h_max = min(thermal.beta / 4.0, max(t_max / 64.0, 4 * h0), 1.0)
    if omega_max:
        h_max = min(h_max, 2.0 * math.pi / (16.0 * omega_max))
    pts = [0.0]
    h = h0
    while pts[-1] < t_max:
        pts.append(min(pts[-1] + h, t_max))
        h = min(h * 1.06, h_max)
    return np.asarray(pts)


def tabulate(
    spec: BathSpec,
    thermal: Thermal,
    tol_tail: float = DEFAULT_TAIL_TOL,
    omega_max: float | None = None,
    quad_tol: float = DEFAULT_QUAD_TOL,
    interp_tol: float = DEFAULT_INTERP_TOL,
    max_rounds: int = 10,
) -> CorrTable:
    """Build a reusable Q(t) table out to the kernel-envelope horizon.

    t_max solves Q'(t_max) = -ln(tol_tail), so e^{-Q'} is below tol_tail past
    the end of the table. The grid starts at >= 16 points per period of the
    fastest relevant oscillation (including omega_max, if the caller will
    multiply by probe phases) and is then midpoint-refined until cubic
    interpolation is accurate to interp_tol.
    """
    if isinstance(spec, StrictOhmic):
        raise UVDivergenceError("strict Ohmic bath cannot be tabulated; no UV cutoff")
    if spec.alpha == 0:
        t = np.linspace(0.0, 50.0, 9)
        return CorrTable(t, np.zeros_like(t), np.zeros_like(t), spec, thermal,
                         tol_tail, 0.0)

    evaluate = _direct_evaluator(spec, thermal, quad_tol)
    target = -math.log(tol_tail)
    x_rate = 2.0 * math.pi * spec.alpha * thermal.temperature
    t_max = _find_t_max(evaluate, target, guess=target / x_rate)

    grid = _initial_grid(spec, thermal, t_max, omega_max)
    qr, qi = evaluate(grid)
    err = math.inf
    for _ in range(max_rounds):
        mids = 0.5 * (grid[:-1] + grid[1:])
        mr, mi = evaluate(mids)
        sp_r = CubicSpline(grid, qr)
        sp_i = CubicSpline(grid, qi)
        gap = np.maximum(np.abs(sp_r(mids) - mr), np.abs(sp_i(mids) - mi))
        err = float(gap.max())
        if err <= interp_tol:
            break
        bad = gap > interp_tol
        grid = np.concatenate([grid, mids[bad]])
        qr = np.concatenate([qr, mr[bad]])
        qi = np.concatenate([qi, mi[bad]])
        order = np.argsort(grid)
        grid, qr, qi = grid[order], qr[order], qi[order]
    else:
        raise ConvergenceError(
            f"interpolation error {err:.2e} above {interp_tol:.2e} after {max_rounds} rounds"
        )
    return CorrTable(grid, qr, qi, spec, thermal, tol_tail, err)
