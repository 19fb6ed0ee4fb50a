"""NIBA kernels and the weak-probe linear response.

The intra-blip kernel envelopes are

    h+(t) = delta^2 e^{-Q'(t)} cos(Q''(t)),
    h-(t) = delta^2 e^{-Q'(t)} sin(Q''(t)),

and the probe response is assembled from five semi-infinite kernel integrals:
two static ones, two at first order in the probe amplitude, and the frequency-
dependent damping kernel v+ that keeps the response non-Markovian. The
susceptibility

    chi(w_p) = [k1_minus - k1_plus * k0_minus/k0_plus] / (eps_p * (i w_p + v_plus))

reduces to k1_minus/(eps_p*(i w_p + v_plus)) for an unbiased system, and the
transmission amplitude is T = 1 - i * n_factor * w_p * chi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import integrate_panels, panel_edges
from .bathcorr import CorrTable
from .errors import DecoupledKernelError, SingularResponseError
from .model import OhmicExpCutoff, StructuredEffective, SystemParams


def h_pm(corr: CorrTable, delta: float, t):
    """Kernel envelopes (h+, h-) at time t, from the interpolated Q(t).

    Past the table horizon the envelope e^{-Q'} is below the tail tolerance
    and both values are returned as zero. A decoupled (all-zero) table gives
    (delta^2, 0) for every t.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    d2 = delta * delta
    if corr.is_zero:
        hp = np.full_like(t_arr, d2)
        hm = np.zeros_like(t_arr)
    else:
        hp = np.zeros_like(t_arr)
        hm = np.zeros_like(t_arr)
        inside = t_arr <= corr.t_max
        qr, qi = corr.interpolate(t_arr[inside])
        env = d2 * np.exp(-qr)
        hp[inside] = env * np.cos(qi)
        hm[inside] = env * np.sin(qi)
    if np.ndim(t):
        return hp, hm
    return float(hp[0]), float(hm[0])


@dataclass(frozen=True)
class KernelFunctions:
    """h+/h- backed by a shared correlation table."""

    corr: CorrTable
    delta: float

    def h_plus(self, t):
        return h_pm(self.corr, self.delta, t)[0]

    def h_minus(self, t):
        return h_pm(self.corr, self.delta, t)[1]


@dataclass(frozen=True)
class ResponseKernels:
    """The five kernel integrals entering the linear response at omega_p.

    k1_plus and k1_minus carry the explicit eps_p/omega_p prefactor, so they
    scale exactly linearly with eps_p; k0_plus/k0_minus are real.
    """

    k0_plus: float
    k0_minus: float
    k1_plus: complex
    k1_minus: complex
    v_plus: complex
    eps_p: float
    omega_p: float


@dataclass(frozen=True)
class ComplexResponse:
    chi: complex
    transmission: complex
    t_abs2: float


def _time_edges(kf: KernelFunctions, omega_ref: float) -> np.ndarray:
    """Half-period panels over [0, t_max], guided by the bath's own scales."""
    t_max = kf.corr.t_max
    widths = [t_max / 16.0]
    if omega_ref > 0:
        widths.append(math.pi / omega_ref)
    breaks: list[float] = []
    spec = kf.corr.spec
    if isinstance(spec, StructuredEffective) and spec.gamma < spec.omega:
        omega_bar = math.sqrt(spec.omega**2 - spec.gamma**2)
        widths.append(math.pi / omega_bar)
    elif isinstance(spec, OhmicExpCutoff):
        breaks.extend((1.0 / spec.omega_c, 4.0 / spec.omega_c, kf.corr.thermal.beta))
    return panel_edges(0.0, t_max, min(widths), breaks)


def static_kernels(kf: KernelFunctions, eps0: float, abs_tol: float | None = None):
    """Zero-order kernels k0_plus = int h+ cos(eps0 t), k0_minus = int h- sin(eps0 t).

    The envelope must decay (alpha > 0); a decoupled table makes the k0_plus
    integral divergent and is rejected.
    """
    if kf.corr.is_zero:
        raise DecoupledKernelError(
            "alpha == 0: static kernel integrals diverge; use the analytic "
            "decoupled response (chi == 0)"
        )
    if abs_tol is None:
        abs_tol = 1e-9 * kf.delta**2
    edges = _time_edges(kf, abs(eps0))

    def f(ts):
        hp, hm = h_pm(kf.corr, kf.delta, ts)
        return np.stack([hp * np.cos(eps0 * ts), hm * np.sin(eps0 * ts)])

    (k0p, k0m), _ = integrate_panels(f, edges, abs_tol)
    return float(k0p), float(k0m)


def response_kernels(
    kf: KernelFunctions,
    eps0: float,
    eps_p: float,
    omega_p: float,
    abs_tol: float | None = None,
) -> ResponseKernels:
    """All five kernel integrals on one adaptive half-period mesh.

    omega_p must be positive (the first-order kernels carry eps_p/omega_p).
    """
    if omega_p <= 0:
        raise ValueError(f"omega_p must be positive, got {omega_p}")
    if kf.corr.is_zero:
        raise DecoupledKernelError(
            "alpha == 0: kernel integrals diverge; use the analytic decoupled response"
        )
    if abs_tol is None:
        abs_tol = 1e-9 * kf.delta**2
    edges = _time_edges(kf, max(omega_p, abs(eps0)))

    def f(ts):
        hp, hm = h_pm(kf.corr, kf.delta, ts)
        ce = np.cos(eps0 * ts)
        se = np.sin(eps0 * ts)
        half = np.exp(-0.5j * omega_p * ts) * np.sin(0.5 * omega_p * ts)
        full = np.exp(-1j * omega_p * ts)
        return np.stack([
            hp * ce + 0j,          # k0_plus
            hm * se + 0j,          # k0_minus
            half * hp * se,        # k1_plus before -eps_p/omega_p
            half * hm * ce,        # k1_minus before +eps_p/omega_p
            full * hp * ce,        # v_plus
        ])

    vals, _ = integrate_panels(f, edges, abs_tol)
    ratio = eps_p / omega_p
    return ResponseKernels(
        k0_plus=float(vals[0].real),
        k0_minus=float(vals[1].real),
        k1_plus=complex(-ratio * vals[2]),
        k1_minus=complex(ratio * vals[3]),
        v_plus=complex(vals[4]),
        eps_p=eps_p,
        omega_p=omega_p,
    )


DENOMINATOR_FLOOR = 1e-12


def susceptibility(rk: ResponseKernels, eps0: float, eps_p: float, omega_p: float) -> complex:
    """Linear susceptibility chi(omega_p); independent of eps_p by construction.

    The stored eps_p prefactor of the first-order kernels is divided back out,
    so rescaling the probe amplitude cancels exactly.
    """
    if eps_p != rk.eps_p or omega_p != rk.omega_p:
        raise ValueError("eps_p/omega_p disagree with the kernels' construction values")
    if eps0 == 0.0:
        combo = rk.k1_minus
    else:
        if rk.k0_plus == 0.0:
            raise SingularResponseError("k0_plus == 0: biased kernel ratio is singular")
        combo = rk.k1_minus - rk.k1_plus * (rk.k0_minus / rk.k0_plus)
    den = 1j * omega_p + rk.v_plus
    if abs(den) < DENOMINATOR_FLOOR:
        raise SingularResponseError(
            f"response denominator |i*omega_p + v_plus| = {abs(den):.3e} below floor"
        )
    return combo / den / eps_p


def transmission(chi: complex, omega_p: float, n_factor: float) -> ComplexResponse:
    """Probe transmission T = 1 - i * n_factor * omega_p * chi and |T|^2."""
    t = 1.0 - 1j * n_factor * omega_p * chi
    return ComplexResponse(chi=chi, transmission=t, t_abs2=abs(t) ** 2)


def probe_response(
    corr: CorrTable,
    system: SystemParams,
    omega_p: float,
    abs_tol: float | None = None,
) -> ComplexResponse:
    """Transmission at one probe frequency from a prebuilt correlation table.

    The decoupled case (all-zero table) is returned analytically as chi = 0,
    T = 1; everything else goes through the kernel integrals.
    """
    system.check_probe_weak(omega_p)
    if corr.is_zero:
        return ComplexResponse(chi=0j, transmission=1.0 + 0j, t_abs2=1.0)
    kf = KernelFunctions(corr, system.delta)
    rk = response_kernels(kf, system.eps0, system.eps_p, omega_p, abs_tol)
    chi = susceptibility(rk, system.eps0, system.eps_p, omega_p)
    return transmission(chi, omega_p, system.n_factor)
