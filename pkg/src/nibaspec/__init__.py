"""Weak-probe transmission spectra of a dissipative two-state system.

The qubit couples to either a Lorentzian-peaked (structured) bath, as arises
from a damped resonator mode, or an Ohmic bath with exponential cutoff. The
population-difference dynamics is treated with intra-blip kernels whose
linear response in the probe amplitude yields the susceptibility and the
measured transmission |T(omega_p)|^2. A time-domain memory-kernel integrator
validates the frequency-domain pipeline end to end.
"""

__version__ = "0.1.0"

from .bathcorr import (
    CorrParams,
    CorrSample,
    CorrTable,
    corr_params,
    q_matsubara,
    q_quadrature,
    q_structured,
    tabulate,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DecoupledKernelError,
    NibaspecError,
    OverdampedBathError,
    SingularResponseError,
    TransientError,
    UVDivergenceError,
)
from .gme import (
    GmeRun,
    Harmonic,
    Trajectory,
    extract_harmonic,
    kernels_t,
    probe_harmonic,
    propagate,
)
from .model import (
    BathSpec,
    OhmicExpCutoff,
    RabiLevels,
    ResonatorParams,
    StrictOhmic,
    StructuredEffective,
    SystemParams,
    Thermal,
    delta_T,
    effective_bath,
    rabi_spectrum,
    spectral_density,
)
from .niba import (
    ComplexResponse,
    KernelFunctions,
    ResponseKernels,
    h_pm,
    probe_response,
    response_kernels,
    static_kernels,
    susceptibility,
    transmission,
)
from .sweep import (
    Axis,
    Dip,
    SweepGrid,
    SweepResult,
    detect_dips,
    run_sweep,
)

__all__ = [
    "__version__",
    "Axis",
    "BathSpec",
    "ComplexResponse",
    "ConfigError",
    "ConvergenceError",
    "CorrParams",
    "CorrSample",
    "CorrTable",
    "DecoupledKernelError",
    "Dip",
    "GmeRun",
    "Harmonic",
    "KernelFunctions",
    "NibaspecError",
    "OhmicExpCutoff",
    "OverdampedBathError",
    "RabiLevels",
    "ResonatorParams",
    "ResponseKernels",
    "SingularResponseError",
    "StrictOhmic",
    "StructuredEffective",
    "SweepGrid",
    "SweepResult",
    "SystemParams",
    "Thermal",
    "Trajectory",
    "TransientError",
    "UVDivergenceError",
    "corr_params",
    "delta_T",
    "detect_dips",
    "effective_bath",
    "extract_harmonic",
    "h_pm",
    "kernels_t",
    "probe_harmonic",
    "probe_response",
    "q_matsubara",
    "q_quadrature",
    "q_structured",
    "rabi_spectrum",
    "response_kernels",
    "run_sweep",
    "spectral_density",
    "static_kernels",
    "susceptibility",
    "tabulate",
    "transmission",
]
