import numpy as np
import pytest
import scipy.integrate
from mpmath import mp, mpc, mpf
from mpmath import cos as mcos
from mpmath import exp as mexp
from mpmath import matrix as mmatrix
from mpmath import sin as msin

from qnuisance.errors import BadFixedParameter, OutOfDomain
from qnuisance.metrology import (
    FIG1_PRESETS,
    FIG1_S0,
    STATUS_OK,
    STATUS_RANK,
    STATUS_SINGULAR,
    NoiseModelSpec,
    bloch_derivatives,
    decay_state,
    default_time_grid,
    evolve_bloch,
    fisher_point,
    fisher_time_series,
    kernels,
    preset_spec,
)


def spec_for(variant, omega=1000.0, b2=100.0, gamma=10.0, s0=FIG1_S0):
    return NoiseModelSpec(variant=variant, omega=omega, b2=b2, gamma_corr=gamma, s0=s0)


def mp_series(variant, omega, b2, gamma, s0, t, dps=60):
    """High-precision oracle: Fisher entries from mpmath finite differences."""
    mp.dps = dps

    def decays(om_, b2_, g_):
        tt = mpf(t)
        if variant == 1:
            z = mpc(-g_, om_)
            E = (mexp(z * tt) - 1) / z
            Q = (E - tt) / z
            g3 = 2 * b2_ * (tt / g_ - (1 - mexp(-g_ * tt)) / g_ ** 2)
            return b2_ * Q.real + g3 / 2, om_ * tt + b2_ * Q.imag, g3
        if variant == 2:
            den = g_ ** 2 + om_ ** 2
            return ((b2_ * g_ / den + b2_ / g_) * tt, (om_ + b2_ * om_ / den) * tt,
                    2 * b2_ / g_ * tt)
        return (b2_ / g_) * tt, om_ * tt, 2 * (b2_ / g_) * tt

    def bloch(om_, b2_, g_):
        G1, Om, G3 = decays(om_, b2_, g_)
        u = mcos(Om) * s0[0] + msin(Om) * s0[1]
        w = -msin(Om) * s0[0] + mcos(Om) * s0[1]
        return [mexp(-G1) * u, mexp(-G1) * w, mexp(-G3) * mpf(s0[2])]

    params = [mpf(omega), mpf(b2), mpf(gamma)]
    h = mpf(10) ** -30
    ds = []
    for i in range(3):
        plus, minus = list(params), list(params)
        plus[i] += h
        minus[i] -= h
        sp, sm = bloch(*plus), bloch(*minus)
        ds.append([(a - b) / (2 * h) for a, b in zip(sp, sm)])
    s = bloch(*params)
    r2 = sum(x * x for x in s)
    G = mmatrix(3, 3)
    for i in range(3):
        for j in range(3):
            dot = sum(a * b for a, b in zip(ds[i], ds[j]))
            si = sum(a * b for a, b in zip(s, ds[i]))
            sj = sum(a * b for a, b in zip(s, ds[j]))
            G[i, j] = dot + si * sj / (1 - r2)
    from mpmath import inverse
    return float(G[0, 0]), float(1 / inverse(G)[0, 0])


class TestKernels:
    def test_variant2_values(self):
        dw, g1, g3 = kernels(spec_for(2), 1.0)
        assert g3 == pytest.approx(10.0)
        assert g1 == pytest.approx(1000.0 / 1000100.0)
        assert dw == pytest.approx(1e5 / 1000100.0)

    def test_variant1_at_zero(self):
        assert kernels(spec_for(1), 0.0) == (0.0, 0.0, 0.0)

    def test_variant3_values(self):
        dw, g1, g3 = kernels(spec_for(3), 2.0)
        assert (dw, g1) == (0.0, 0.0)
        assert g3 == pytest.approx(10.0)

    def test_variant1_approaches_variant2(self):
        # at Gamma t = 20 the residual is exp(-20) (omega <= Gamma keeps the
        # oscillatory prefactor of order one)
        s1 = spec_for(1, omega=4.0, b2=2.0, gamma=5.0)
        s2 = spec_for(2, omega=4.0, b2=2.0, gamma=5.0)
        t = 20.0 / 5.0
        for a, b in zip(kernels(s1, t), kernels(s2, t)):
            assert a == pytest.approx(b, rel=1e-8)

    def test_variant1_against_quadrature(self):
        spec = spec_for(1, omega=30.0, b2=4.0, gamma=2.0)
        for t in (0.05, 0.4, 2.0):
            dw, g1, g3 = kernels(spec, t)
            ref_dw = 4.0 * scipy.integrate.quad(
                lambda s: np.exp(-2.0 * s) * np.sin(30.0 * s), 0, t, limit=200)[0]
            ref_g1 = 4.0 * scipy.integrate.quad(
                lambda s: np.exp(-2.0 * s) * np.cos(30.0 * s), 0, t, limit=200)[0]
            ref_g3 = 4.0 * scipy.integrate.quad(lambda s: np.exp(-2.0 * s), 0, t)[0]
            assert dw == pytest.approx(ref_dw, abs=1e-10)
            assert g1 == pytest.approx(ref_g1, abs=1e-10)
            assert g3 == pytest.approx(ref_g3, abs=1e-10)

    def test_negative_time_rejected(self):
        with pytest.raises(OutOfDomain):
            kernels(spec_for(1), -1.0)


class TestEvolveBloch:
    def test_initial_condition(self):
        for variant in (1, 2, 3):
            np.testing.assert_allclose(evolve_bloch(spec_for(variant), 0.0), FIG1_S0,
                                       atol=1e-15)

    def test_no_noise_pure_rotation(self):
        spec = spec_for(2, b2=0.0, s0=(0.6, 0.0, 0.3))
        for t in (0.1, 1.0, 7.0):
            s = evolve_bloch(spec, t)
            assert np.linalg.norm(s) == pytest.approx(np.linalg.norm([0.6, 0.0, 0.3]))
            assert s[2] == pytest.approx(0.3)

    def test_variant3_planar_stays_planar(self):
        spec = spec_for(3, b2=1.0, gamma=2.0, s0=(1.0, 0.0, 0.0))
        for t in (0.2, 1.0):
            s = evolve_bloch(spec, t)
            assert s[2] == 0.0
            # planar damping exp(-gamma t) with gamma = b^2/Gamma = 0.5
            assert np.linalg.norm(s) == pytest.approx(np.exp(-0.5 * t))

    def test_norm_never_grows(self):
        for preset in FIG1_PRESETS:
            for variant in (1, 2, 3):
                spec = preset_spec(preset, variant)
                r0 = np.linalg.norm(spec.s0)
                for t in default_time_grid(spec.gamma_corr, 40):
                    assert np.linalg.norm(evolve_bloch(spec, t)) <= r0 + 1e-12

    def test_decay_monotone_for_markovian_variants(self):
        for variant in (2, 3):
            spec = spec_for(variant)
            grid = default_time_grid(spec.gamma_corr, 30)
            states = [decay_state(spec, t) for t in grid]
            for a, b in zip(states, states[1:]):
                assert b.Gamma1 >= a.Gamma1 >= 0.0
                assert b.Gamma3 >= a.Gamma3 >= 0.0


class TestBlochDerivatives:
    def test_against_finite_differences(self):
        for preset, (om, b2, G) in FIG1_PRESETS.items():
            for variant in (1, 2):
                spec = preset_spec(preset, variant)
                t = 0.4 / G
                _, ds = bloch_derivatives(spec, t)
                params = [om, b2, G]
                for i in range(3):
                    h = 1e-5 * max(1.0, abs(params[i]))
                    plus, minus = list(params), list(params)
                    plus[i] += h
                    minus[i] -= h
                    fd = (evolve_bloch(NoiseModelSpec(variant, *plus, spec.s0), t)
                          - evolve_bloch(NoiseModelSpec(variant, *minus, spec.s0), t)) / (2 * h)
                    ref = max(np.max(np.abs(ds[:, i])), 1e-12)
                    assert np.max(np.abs(fd - ds[:, i])) / ref < 1e-6


class TestFisherPoint:
    def test_variant3_phase_coordinates_value(self):
        # gamma t = 0.5 with planar initial state: g11/t^2 = exp(-2 gamma t)
        spec = spec_for(3, omega=3.0, b2=1.0, gamma=2.0, s0=(1.0, 0.0, 0.0))
        g11, partial, status = fisher_point(spec, 1.0)
        assert status == STATUS_OK
        assert g11 / 1.0 ** 2 == pytest.approx(np.exp(-1.0), rel=1e-12)
        assert partial == g11

    def test_variant3_equality_exact(self):
        for preset in FIG1_PRESETS:
            spec = preset_spec(preset, 3)
            series = fisher_time_series(spec, default_time_grid(spec.gamma_corr, 50))
            for g, gp, st in zip(series.g11, series.g11_partial, series.status):
                if st == STATUS_OK:
                    assert g == gp

    def test_planar_initial_state_degenerates_variants_1_2(self):
        for variant in (1, 2):
            spec = spec_for(variant, s0=(1.0, 0.0, 0.0))
            _, _, status = fisher_point(spec, 0.05)
            assert status == STATUS_SINGULAR

    def test_pure_state_no_noise_is_rank_deficient(self):
        spec = spec_for(3, b2=0.0, s0=(1.0, 0.0, 0.0))
        _, _, status = fisher_point(spec, 0.3)
        assert status == STATUS_RANK

    def test_no_noise_mixed_planar_state(self):
        # G = (s1^2 + s2^2) t^2 in omega coordinates
        r = 0.8
        spec = spec_for(3, b2=0.0, s0=(r, 0.0, 0.0))
        for t in (0.5, 2.0):
            g11, partial, status = fisher_point(spec, t)
            assert status == STATUS_OK
            assert g11 == pytest.approx(r * r * t * t, rel=1e-12)

    def test_against_mpmath_oracle(self):
        om, b2, G = FIG1_PRESETS["fig1a"]
        for variant in (1, 2):
            spec = preset_spec("fig1a", variant)
            for t in (0.001, 0.04, 0.3, 3.0):
                g11, partial, status = fisher_point(spec, t)
                assert status == STATUS_OK
                ref_g11, ref_partial = mp_series(variant, om, b2, G, FIG1_S0, t)
                assert g11 == pytest.approx(ref_g11, rel=1e-9)
                assert partial == pytest.approx(ref_partial, rel=1e-7)

    def test_partial_never_exceeds_full(self):
        for preset in FIG1_PRESETS:
            for variant in (1, 2, 3):
                spec = preset_spec(preset, variant)
                series = fisher_time_series(spec, default_time_grid(spec.gamma_corr, 60))
                for g, gp, st in zip(series.g11, series.g11_partial, series.status):
                    if st == STATUS_OK:
                        assert gp <= g * (1.0 + 1e-9) + 1e-300

    def test_variant1_meets_variant2_at_late_times_fig1a(self):
        # the two series coincide on the scale of the plotted curves; the
        # pointwise ratio stays exp(2 b^2/Gamma^2)-ish by the damping offset
        times = default_time_grid(10.0, 120)
        s1 = fisher_time_series(preset_spec("fig1a", 1), times)
        s2 = fisher_time_series(preset_spec("fig1a", 2), times)
        idx = int(np.argmin(np.abs(times - 3.0)))
        for field in ("g11_over_t2", "g11_partial_over_t2"):
            a, b = getattr(s1, field), getattr(s2, field)
            scale = max(np.nanmax(np.abs(a)), np.nanmax(np.abs(b)))
            assert abs(a[idx] - b[idx]) <= 1e-3 * scale

    def test_zero_time_rejected(self):
        with pytest.raises(OutOfDomain):
            fisher_point(spec_for(1), 0.0)


class TestNoiseModelSpec:
    def test_validation(self):
        with pytest.raises(BadFixedParameter):
            NoiseModelSpec(4, 1.0, 1.0, 1.0, (0, 0, 0))
        with pytest.raises(BadFixedParameter):
            NoiseModelSpec(1, -1.0, 1.0, 1.0, (0, 0, 0))
        with pytest.raises(BadFixedParameter):
            NoiseModelSpec(1, 1.0, 1.0, 1.0, (1.2, 0, 0))

    def test_preset_values(self):
        spec = preset_spec("fig1a", 1)
        assert (spec.omega, spec.b2, spec.gamma_corr) == (1e3, 1e2, 10.0)
        np.testing.assert_allclose(spec.s0, (np.sqrt(0.91), 0.0, 0.3))
