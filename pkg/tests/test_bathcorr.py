import math

import numpy as np
import pytest

from nibaspec import (
    OhmicExpCutoff,
    OverdampedBathError,
    StrictOhmic,
    StructuredEffective,
    Thermal,
    UVDivergenceError,
    corr_params,
    q_matsubara,
    q_quadrature,
    q_structured,
    tabulate,
)


class TestCorrParams:
    def test_reference_coefficients(self, bath_resonant, thermal):
        p = corr_params(bath_resonant, thermal)
        assert p.x_rate == pytest.approx(2 * math.pi * 0.016, rel=1e-13)
        assert p.omega_bar == pytest.approx(0.9875859400564979, rel=1e-13)
        assert p.n_coef == pytest.approx(3.0640566116051676, rel=1e-12)
        assert p.l_coef == pytest.approx(0.3146488399666979, rel=1e-12)
        assert p.z_coef == pytest.approx(0.1519760454884533, rel=1e-12)

    def test_narrow_peak_asymptote(self, thermal):
        # N ~ omega/(2*gamma) for gamma -> 0
        spec = StructuredEffective(alpha=0.01, omega=1.0, gamma=1e-4)
        p = corr_params(spec, thermal)
        assert p.n_coef == pytest.approx(1.0 / 2e-4, rel=1e-6)

    def test_low_temperature_ratio(self):
        # L/(pi*alpha*N) -> 1 once beta*omega_bar is large
        spec = StructuredEffective(alpha=0.016, omega=1.0, gamma=math.pi * 0.05)
        omega_bar = math.sqrt(1 - (math.pi * 0.05) ** 2)
        cold = Thermal(omega_bar / 50.0)
        p = corr_params(spec, cold)
        assert p.l_coef / (math.pi * spec.alpha * p.n_coef) == pytest.approx(1.0, abs=1e-12)

    def test_overdamped_rejected(self, thermal):
        with pytest.raises(OverdampedBathError):
            corr_params(StructuredEffective(alpha=0.0, omega=1.0, gamma=0.0), thermal)


class TestQStructured:
    def test_zero_time(self, bath_resonant, thermal):
        p = corr_params(bath_resonant, thermal)
        assert q_structured(p, thermal, 0.0) == (0.0, 0.0)

    def test_imaginary_part_saturation(self, bath_resonant, thermal):
        p = corr_params(bath_resonant, thermal)
        pa = math.pi * bath_resonant.alpha
        t = 10.0 / p.gamma
        _, qi = q_structured(p, thermal, t)
        assert abs(qi - pa) <= (1 + p.n_coef) * pa * math.exp(-p.gamma * t)

    def test_matches_quadrature_oracle(self, bath_resonant, thermal):
        p = corr_params(bath_resonant, thermal)
        ts = np.array([0.5, 2.0, 5.0, 10.0])
        qr_c, qi_c = q_structured(p, thermal, ts)
        qr_q, qi_q = q_quadrature(bath_resonant, thermal, ts)
        q_c = qr_c + 1j * qi_c
        q_q = qr_q + 1j * qi_q
        assert np.max(np.abs(q_c - q_q) / np.abs(q_q)) < 1e-6

    def test_real_part_nonnegative(self, bath_resonant, thermal):
        # Q' >= 0 always; for a peaked bath it overshoots and breathes at
        # omega_bar while the decaying oscillation lives, so monotonicity only
        # holds once e^{-gamma t} has died out
        p = corr_params(bath_resonant, thermal)
        ts = np.linspace(0.0, 300.0, 6001)
        qr, qi = q_structured(p, thermal, ts)
        assert np.all(qr >= -1e-14)
        late = ts > 25.0 / p.gamma
        assert np.all(np.diff(qr[late]) > 0)
        # Q'' stays inside the envelope bound around its asymptote
        pa = math.pi * p.alpha
        assert np.all(qi >= -pa * (1 + p.n_coef))
        assert np.all(qi <= pa * (2 + p.n_coef))

    def test_linear_in_alpha(self, thermal):
        a = StructuredEffective(alpha=0.016, omega=1.0, gamma=math.pi * 0.05)
        b = StructuredEffective(alpha=3 * 0.016, omega=1.0, gamma=math.pi * 0.05)
        ts = np.linspace(0.1, 20.0, 40)
        qa = np.array(q_structured(corr_params(a, thermal), thermal, ts))
        qb = np.array(q_structured(corr_params(b, thermal), thermal, ts))
        assert np.allclose(qb, 3 * qa, rtol=1e-12)


class TestMatsubara:
    def test_zero_time(self, bath_resonant, thermal):
        assert q_matsubara(bath_resonant, thermal, 0.0) == 0.0

    def test_partial_sums_monotone(self, bath_resonant, thermal):
        # positive terms: looser tolerance can only give a smaller sum
        loose = q_matsubara(bath_resonant, thermal, 1.0, tol=1e-3)
        tight = q_matsubara(bath_resonant, thermal, 1.0, tol=1e-14)
        assert 0.0 < loose <= tight

    def test_against_brute_force_sum(self, bath_resonant, thermal):
        t = 1.0
        n = np.arange(1, 1_000_001)
        nu = 2 * math.pi * thermal.temperature * n
        den = (bath_resonant.omega**2 + nu**2) ** 2 - 4 * bath_resonant.gamma**2 * nu**2
        brute = (4 * math.pi * bath_resonant.alpha * bath_resonant.omega**4
                 * thermal.temperature * np.sum((1 - np.exp(-nu * t)) / nu / den))
        assert q_matsubara(bath_resonant, thermal, t) == pytest.approx(brute, abs=1e-10)


class TestQQuadrature:
    def test_zero_time(self, bath_resonant, thermal):
        assert q_quadrature(bath_resonant, thermal, 0.0) == (0.0, 0.0)

    def test_strict_ohmic_rejected(self, thermal):
        with pytest.raises(UVDivergenceError):
            q_quadrature(StrictOhmic(kappa=0.05), thermal, 1.0)

    def test_ohmic_imaginary_closed_form(self, thermal):
        # Q'' for the exponential cutoff is temperature-free: 2*alpha*atan(omega_c*t)
        spec = OhmicExpCutoff(alpha=0.2, omega_c=10.0)
        ts = np.array([0.2, 1.0, 5.0])
        _, qi = q_quadrature(spec, thermal, ts)
        assert np.max(np.abs(qi - 2 * spec.alpha * np.arctan(spec.omega_c * ts))) < 1e-8

    def test_ohmic_real_cold_limit(self):
        # beta*omega_c = 1e4: Q'(t) -> alpha*ln(1 + omega_c^2 t^2)
        spec = OhmicExpCutoff(alpha=0.2, omega_c=10.0)
        cold = Thermal(1e-3)
        qr, _ = q_quadrature(spec, cold, 1.0)
        assert qr == pytest.approx(spec.alpha * math.log(1 + 100.0), rel=1e-5)

    def test_alpha_zero(self, thermal):
        spec = OhmicExpCutoff(alpha=0.0, omega_c=10.0)
        assert q_quadrature(spec, thermal, 3.0) == (0.0, 0.0)


class TestTabulate:
    def test_zero_coupling_table(self, thermal):
        spec = StructuredEffective(alpha=0.0, omega=1.0, gamma=0.0)
        table = tabulate(spec, thermal)
        assert table.is_zero
        assert table.t_max == 50.0

    def test_horizon_from_envelope(self, corr_resonant, bath_resonant, thermal):
        # linear term alone puts the horizon near -ln(tol_tail)/x_rate ~ 229
        assert 200.0 < corr_resonant.t_max < 245.0
        p = corr_params(bath_resonant, thermal)
        qr, _ = q_structured(p, thermal, corr_resonant.t_max)
        assert qr == pytest.approx(-math.log(corr_resonant.tol_tail), rel=1e-3)

    def test_interpolation_error_at_off_grid_times(self, corr_resonant, bath_resonant, thermal):
        rng = np.random.default_rng(42)
        ts = rng.uniform(0.0, corr_resonant.t_max, 100)
        qr_i, qi_i = corr_resonant.interpolate(ts)
        p = corr_params(bath_resonant, thermal)
        qr_d, qi_d = q_structured(p, thermal, ts)
        assert np.max(np.abs(qr_i - qr_d)) <= 1e-8
        assert np.max(np.abs(qi_i - qi_d)) <= 1e-8
        assert corr_resonant.interp_error <= 1e-8

    def test_grid_resolves_fast_oscillation(self, corr_resonant, bath_resonant):
        omega_bar = math.sqrt(bath_resonant.omega**2 - bath_resonant.gamma**2)
        fast = max(omega_bar, 2.0)  # table was built with omega_max = 2.0
        early = corr_resonant.t[corr_resonant.t < 20.0]
        assert np.max(np.diff(early)) <= 2 * math.pi / (16 * fast) + 1e-12

    def test_strictly_increasing_grid(self, corr_resonant):
        assert corr_resonant.t[0] == 0.0
        assert np.all(np.diff(corr_resonant.t) > 0)

    def test_csv_dump(self, corr_resonant, tmp_path):
        path = tmp_path / "corr.csv"
        corr_resonant.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,q_real,q_imag"
        assert len(lines) == len(corr_resonant.t) + 1

    def test_ohmic_table_matches_direct(self, thermal):
        spec = OhmicExpCutoff(alpha=0.2, omega_c=10.0)
        table = tabulate(spec, thermal, omega_max=1.5)
        ts = np.linspace(0.3, table.t_max * 0.9, 23)
        qr_d, qi_d = q_quadrature(spec, thermal, ts)
        qr_i, qi_i = table.interpolate(ts)
        assert np.max(np.abs(qr_i - qr_d)) < 2e-8
        assert np.max(np.abs(qi_i - qi_d)) < 2e-8
