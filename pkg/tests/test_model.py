import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nibaspec import (
    OhmicExpCutoff,
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


class TestEffectiveBath:
    def test_mapping_values(self):
        bath = effective_bath(ResonatorParams(omega=1.0, g=0.2, kappa=0.05))
        assert bath.alpha == pytest.approx(0.016, rel=1e-12)
        assert bath.gamma == pytest.approx(math.pi * 0.05, rel=1e-15)
        assert bath.omega == 1.0

    def test_decoupled_qubit(self):
        bath = effective_bath(ResonatorParams(omega=1.0, g=0.0, kappa=0.05))
        assert bath.alpha == 0.0

    def test_detuned_mapping(self):
        bath = effective_bath(ResonatorParams(omega=0.5, g=0.2, kappa=0.05))
        assert bath.alpha == pytest.approx(0.064, rel=1e-12)
        assert bath.gamma == pytest.approx(math.pi * 0.05 * 0.5, rel=1e-15)

    def test_overdamped_kappa_rejected(self):
        with pytest.raises(ValueError, match="kappa"):
            ResonatorParams(omega=1.0, g=0.2, kappa=0.4)

    @given(g=st.floats(0.01, 0.5))
    @settings(max_examples=30, deadline=None)
    def test_alpha_quadratic_in_g(self, g):
        base = effective_bath(ResonatorParams(omega=1.0, g=g, kappa=0.05))
        doubled = effective_bath(ResonatorParams(omega=1.0, g=2 * g, kappa=0.05))
        assert doubled.alpha == pytest.approx(4 * base.alpha, rel=1e-13)


class TestSpectralDensity:
    def test_structured_peak_value(self):
        spec = StructuredEffective(alpha=0.016, omega=1.0, gamma=math.pi * 0.05)
        # at the resonator frequency: alpha*omega^3/(2*gamma^2)
        assert spectral_density(spec, 1.0) == pytest.approx(0.32422778765548087, rel=1e-12)

    def test_zero_frequency(self):
        for spec in (
            StructuredEffective(alpha=0.016, omega=1.0, gamma=0.1),
            OhmicExpCutoff(alpha=0.1, omega_c=10.0),
            StrictOhmic(kappa=0.05),
        ):
            assert spectral_density(spec, 0.0) == 0.0

    def test_ohmic_cutoff_value(self):
        spec = OhmicExpCutoff(alpha=0.1, omega_c=10.0)
        assert spectral_density(spec, 1.0) == pytest.approx(0.18096748360719191, rel=1e-12)

    def test_low_frequency_ohmic_limit(self):
        spec = StructuredEffective(alpha=0.016, omega=1.0, gamma=math.pi * 0.05)
        w = 1e-4
        assert spectral_density(spec, w) / (2 * spec.alpha * w) == pytest.approx(1.0, abs=1e-2)

    def test_peak_near_resonator_frequency(self):
        # semi-width up to 0.2*omega: the maximum stays within one 0.025-step of omega
        for gamma in (0.05, 0.1, 0.2):
            spec = StructuredEffective(alpha=0.02, omega=1.0, gamma=gamma)
            w = np.arange(0.0, 2.0 + 1e-9, 0.025)
            peak = w[np.argmax(spectral_density(spec, w))]
            assert abs(peak - spec.omega) <= 0.025 + 1e-12

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValueError):
            spectral_density(OhmicExpCutoff(alpha=0.1, omega_c=10.0), -1.0)


class TestRabiSpectrum:
    def test_uncoupled_positive_detuning(self):
        lv = rabi_spectrum(1.0, 1.2, 0.0)
        assert lv.omega10 == pytest.approx(1.0, abs=1e-15)
        assert lv.omega20 == pytest.approx(1.2, abs=1e-15)

    def test_vacuum_splitting_at_resonance(self):
        lv = rabi_spectrum(1.0, 1.0, 0.2)
        f = 0.2**2 / 2.0
        assert lv.omega2 - lv.omega1 == pytest.approx(2 * math.sqrt(f**2 + 0.2**2), abs=1e-15)
        assert lv.omega2 - lv.omega1 == pytest.approx(0.4019950248448356, rel=1e-12)

    def test_degenerate_crossing_at_zero_coupling(self):
        lv = rabi_spectrum(1.0, 1.0, 0.0)
        assert lv.omega1 == lv.omega2 == pytest.approx(0.5, abs=1e-15)

    def test_avoided_crossing_minimum_at_resonance(self):
        # the gap closes to its minimum at omega = delta up to the O(g^2)
        # level shift, where it equals 2*sqrt(f^2 + g^2)
        g = 0.1
        f = g**2 / 2.0
        omegas = np.linspace(0.8, 1.2, 4001)
        splits = np.array([rabi_spectrum(1.0, w, g).omega2 - rabi_spectrum(1.0, w, g).omega1
                           for w in omegas])
        w_min = omegas[np.argmin(splits)]
        assert abs(w_min - 1.0) <= g**2 + 2e-4
        lv = rabi_spectrum(1.0, 1.0, g)
        assert lv.omega2 - lv.omega1 == pytest.approx(2 * math.sqrt(f**2 + g**2), abs=1e-15)
        assert splits.min() == pytest.approx(2 * math.sqrt(f**2 + g**2), abs=2 * f**2 / g)

    def test_validity_flag(self):
        assert rabi_spectrum(1.0, 1.0, 0.2).perturbative
        assert not rabi_spectrum(1.0, 1.0, 0.6).perturbative

    def test_continuity_in_omega(self):
        vals = [rabi_spectrum(1.0, w, 0.2).omega20 for w in np.linspace(0.9, 1.1, 201)]
        assert np.max(np.abs(np.diff(vals))) < 0.01


class TestDeltaT:
    def test_alpha_zero_identity(self, thermal):
        assert delta_T(1.0, 0.0, 10.0, thermal) == 1.0

    def test_reference_value(self, thermal):
        assert delta_T(1.0, 0.1, 10.0, thermal) == pytest.approx(0.9545924317243375, rel=1e-12)

    def test_monotone_decreasing_in_alpha(self, thermal):
        alphas = np.linspace(0.0, 0.5, 26)
        vals = [delta_T(1.0, a, 10.0, thermal) for a in alphas]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_invalid_alpha(self, thermal):
        with pytest.raises(ValueError):
            delta_T(1.0, 1.0, 10.0, thermal)

    def test_cutoff_below_delta(self, thermal):
        with pytest.raises(ValueError):
            delta_T(1.0, 0.1, 0.5, thermal)


class TestValidation:
    def test_zero_temperature_rejected(self):
        with pytest.raises(ValueError, match="temperature"):
            Thermal(0.0)

    def test_beta(self):
        assert Thermal(2.0).beta == 0.5

    def test_probe_weakness_warning(self):
        sys = SystemParams(eps_p=0.5)
        with pytest.warns(UserWarning, match="linear response"):
            sys.check_probe_weak(1.0)

    def test_structured_gamma_bounds(self):
        with pytest.raises(ValueError):
            StructuredEffective(alpha=0.1, omega=1.0, gamma=1.5)
        # decoupled descriptor may carry gamma = 0
        StructuredEffective(alpha=0.0, omega=1.0, gamma=0.0)
