"""Parameter types, spectral densities, two-level spectra, and renormalized splittings.

Units: hbar = k_B = 1 throughout. All frequencies are angular and measured
in units of the bare qubit splitting delta (so delta = 1 is the usual choice).
Temperatures are given as k_B*T/hbar, i.e. as an angular frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class SystemParams:
    """Two-level system under a static bias and a weak monochromatic probe.

    bias(t) = eps0 + eps_p * cos(omega_p * t); n_factor converts the linear
    susceptibility into the measured transmission amplitude.
    """

    delta: float = 1.0
    eps0: float = 0.0
    eps_p: float = 0.01
    n_factor: float = 0.1

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.eps_p < 0:
            raise ValueError(f"eps_p must be >= 0, got {self.eps_p}")

    def check_probe_weak(self, omega_p: float) -> None:
        """Warn when the probe leaves the linear-response window eps_p <= 0.1*omega_p."""
        if self.eps_p > 0.1 * omega_p:
            warnings.warn(
                f"probe amplitude eps_p={self.eps_p} exceeds 0.1*omega_p={0.1 * omega_p}; "
                "linear response may be inaccurate",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ResonatorParams:
    """Harmonic mode of frequency omega coupled to the qubit with strength g.

    kappa is the dimensionless mode-bath coupling; kappa < 1/pi keeps the
    effective-bath semi-width gamma = pi*kappa*omega below omega (underdamped).
    """

    omega: float
    g: float
    kappa: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if not 0 <= self.kappa < 1 / math.pi:
            raise ValueError(
                f"kappa={self.kappa} out of range: require 0 <= kappa < 1/pi "
                f"~ {1 / math.pi:.6f} so the mapped bath stays underdamped"
            )


@dataclass(frozen=True)
class StructuredEffective:
    """Lorentzian-peaked bath: G(w) = 2*alpha*w*omega^4 / ((omega^2-w^2)^2 + (2*gamma*w)^2)."""

    alpha: float
    omega: float
    gamma: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        # gamma == 0 is allowed only as a fully decoupled descriptor
        if self.alpha > 0 and not 0 < self.gamma < self.omega:
            raise ValueError(
                f"gamma={self.gamma} must satisfy 0 < gamma < omega={self.omega}"
            )
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class OhmicExpCutoff:
    """Ohmic bath with exponential cutoff: G(w) = 2*alpha*w*exp(-w/omega_c)."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")


@dataclass(frozen=True)
class StrictOhmic:
    """Cutoff-free Ohmic density G(w) = kappa*w.

    Descriptor only (documents the resonator-bath coupling before the
    effective-bath mapping); every correlation evaluator rejects it as
    UV divergent.
    """

    kappa: float

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


BathSpec = Union[StructuredEffective, OhmicExpCutoff, StrictOhmic]


@dataclass(frozen=True)
class Thermal:
    """Bath temperature as an angular frequency k_B*T/hbar; strictly positive."""

    temperature: float

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError(
                f"temperature must be positive (got {self.temperature}); "
                "the finite-temperature series forms assume T > 0"
            )

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature


def effective_bath(res: ResonatorParams) -> StructuredEffective:
    """Map a dissipative resonator onto the structured bath seen by the qubit.

    alpha = 8*kappa*g^2/omega^2, gamma = pi*kappa*omega.
    """
    alpha = 8.0 * res.kappa * res.g**2 / res.omega**2
    gamma = math.pi * res.kappa * res.omega
    return StructuredEffective(alpha=alpha, omega=res.omega, gamma=gamma)


def spectral_density(spec: BathSpec, omega):
    """Evaluate G(omega) for the given bath model; accepts scalars or arrays.

    All models vanish linearly at omega = 0; the structured model satisfies
    G(w)/w -> 2*alpha as w -> 0 and peaks near the resonator frequency.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be >= 0")
    if isinstance(spec, StructuredEffective):
        num = 2.0 * spec.alpha * w * spec.omega**4
        den = (spec.omega**2 - w**2) ** 2 + (2.0 * spec.gamma * w) ** 2
        out = num / den
    elif isinstance(spec, OhmicExpCutoff):
        out = 2.0 * spec.alpha * w * np.exp(-w / spec.omega_c)
    elif isinstance(spec, StrictOhmic):
        out = spec.kappa * w
    else:
        raise TypeError(f"unknown bath spec {type(spec).__name__}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RabiLevels:
    """Lowest three eigenfrequencies of the qubit-resonator system and the
    transition frequencies out of the ground state."""

    omega0: float
    omega1: float
    omega2: float
    omega10: float
    omega20: float
    perturbative: bool  # False when g > 0.5*min(delta, omega)


def rabi_spectrum(delta: float, omega: float, g: float) -> RabiLevels:
    """Second-order perturbative spectrum of the qubit-resonator system.

    omega0   = -delta/2 - f
    omega1,2 = omega/2 - f -/+ sqrt((delta - omega + 2f)^2 + 4g^2)/2
    with the level shift f = g^2/(delta + omega). Valid for g << delta, omega;
    outside that window the values are still returned but flagged.
    """
    f = g**2 / (delta + omega)
    omega0 = -delta / 2.0 - f
    half_split = 0.5 * math.sqrt((delta - omega + 2.0 * f) ** 2 + 4.0 * g**2)
    omega1 = omega / 2.0 - f - half_split
    omega2 = omega / 2.0 - f + half_split
    return RabiLevels(
        omega0=omega0,
        omega1=omega1,
        omega2=omega2,
        omega10=omega1 - omega0,
        omega20=omega2 - omega0,
        perturbative=g <= 0.5 * min(delta, omega),
    )


def delta_T(delta: float, alpha: float, omega_c: float, thermal: Thermal) -> float:
    """Temperature-dependent renormalized splitting for the Ohmic bath.

    delta_r = delta * (delta/omega_c)^(alpha/(1-alpha)) is the T = 0 value;
    delta_T = delta_r * (nu_1/delta_r)^alpha with nu_1 = 2*pi*k_B*T/hbar.
    Requires 0 <= alpha < 1 and omega_c > delta.
    """
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha={alpha} out of range [0, 1) for the renormalized splitting")
    if omega_c <= delta:
        raise ValueError(f"omega_c={omega_c} must exceed delta={delta}")
    delta_r = delta * (delta / omega_c) ** (alpha / (1.0 - alpha))
    nu1 = 2.0 * math.pi * thermal.temperature
    return delta_r * (nu1 / delta_r) ** alpha
