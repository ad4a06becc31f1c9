import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import no_control_qfi as nc_oracle
from oracles import oscillator_qfi, t0

from floquet_thermometry import (
    FiniteN,
    Modulation,
    NearlyFlat,
    Oscillator,
    SubOhmic,
    error_bound,
    qfi,
    qfi_closed_form,
    qfi_fidelity_difference,
    qfi_population_derivative,
    sideband_weights,
)
from floquet_thermometry.errors import RegimeError
from floquet_thermometry.modulation import SidebandSet
from floquet_thermometry.qfi import (
    decompose,
    dominance_at_t_minus1,
    dominance_indicator,
    eta,
    fidelity,
    h_rem_explicit,
    ladder_qfi,
    no_control_qfi,
    qfi_eta,
    qfi_sinusoidal_closed,
    scaling_exponent,
    t0_fixed_point,
)
from floquet_thermometry.scan import find_peaks
from floquet_thermometry.steadystate import log_effective_boltzmann, log_populations

T0_FROZEN = 0.26109550844020837  # mpmath findroot of T = coth(1/2T)/4


def test_t0_fixed_point():
    assert t0_fixed_point(1.0) == pytest.approx(T0_FROZEN, rel=1e-13)
    assert t0_fixed_point(1.0) == pytest.approx(float(t0(1)), rel=1e-13)
    assert t0_fixed_point(2.0) == pytest.approx(2 * t0_fixed_point(1.0), rel=1e-13)
    assert t0_fixed_point(1.0) == pytest.approx(0.262, rel=0.01)
    d = mp.diff(lambda T: nc_oracle(1, T), mp.mpf(t0_fixed_point(1.0)))
    assert abs(d) < 1e-6


def test_no_control_value_at_t0(flat, osc):
    T = t0_fixed_point(1.0)
    H = qfi(osc, flat, SidebandSet.unmodulated(1.0), T).H
    assert H == pytest.approx(float(nc_oracle(1, mp.mpf(T))), rel=1e-13)
    assert H == pytest.approx(4.881, abs=1e-3)


@pytest.mark.parametrize("method", ["closed", "population", "fidelity"])
def test_no_control_collapse(flat, osc, method):
    sb = SidebandSet.unmodulated(1.0)
    for T in (0.02, 0.2, 2.0):
        assert qfi(osc, flat, sb, T, method).H == pytest.approx(no_control_qfi(1.0, T), rel=1e-8)


def test_high_temperature_decay(flat, osc):
    sb = SidebandSet.unmodulated(1.0)
    Ts = np.geomspace(5, 500, 8)
    H = [qfi(osc, flat, sb, T, "population").H for T in Ts]
    assert np.all(np.diff(H) < 0)
    assert np.allclose(np.array(H) * Ts**2, 1.0, rtol=0.01)


def test_two_level_formula(flat):
    sb = SidebandSet.unmodulated(1.0)
    for T in (0.1, 0.5, 2.0):
        e = math.exp(1 / T)
        want = e / ((1 + e) ** 2 * T**4)
        for m in ("closed", "population", "fidelity"):
            assert qfi(FiniteN(2), flat, sb, T, m).H == pytest.approx(want, rel=1e-8)


def test_three_methods_and_oracle(flat, osc):
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 1)
    T = 0.1
    a = qfi_closed_form(osc, flat, sb, T)
    b = qfi_population_derivative(osc, flat, sb, T)
    c = qfi_fidelity_difference(osc, flat, sb, T)
    assert (a.method, b.method, c.method) == ("ClosedForm", "PopulationDerivative", "FidelityDifference")
    P = {int(m): mp.besselj(int(m), 0.2) ** 2 for m in sb.m}
    want = float(oscillator_qfi(lambda w: 1, 1, mp.mpf("0.9"), P, T))
    for rep in (a, b, c):
        assert rep.H == pytest.approx(want, rel=1e-6)
    assert ladder_qfi(osc, flat, sb, T) == pytest.approx(want, rel=1e-12)


def test_sinusoidal_closed_form_matches_general_route(flat, osc):
    # A_sin/B_sin uses the small-mu weights P0 = 1 - mu^2/2, P1 = mu^2/4
    mu, D = 0.2, 0.9
    m = np.array([-1, 0, 1])
    sb = SidebandSet(1.0, D, m, np.array([mu**2 / 4, 1 - mu**2 / 2, mu**2 / 4]))
    for T in (0.01, 0.025, 0.1, 0.3, 1.0):
        rep = qfi_sinusoidal_closed(mu, D, 1.0, T)
        assert rep.H == pytest.approx(qfi_fidelity_difference(osc, flat, sb, T).H, rel=1e-6)
        assert rep.H == pytest.approx(qfi_closed_form(osc, flat, sb, T).H, rel=1e-10)


def test_sinusoidal_closed_form_limits():
    for T in (0.01, 0.1, 0.262, 3.0):
        assert qfi_sinusoidal_closed(0.0, 0.5, 1.0, T).H == pytest.approx(no_control_qfi(1.0, T), rel=1e-13)
    # stays finite deep in the low-temperature tail
    assert math.isfinite(qfi_sinusoidal_closed(0.2, 0.9, 1.0, 1e-4).H)


def test_components_and_remainder():
    for mu, D, T in [(0.2, 0.9, 0.05), (0.1, 0.5, 0.2), (0.3, 0.3, 0.7)]:
        rep = qfi_sinusoidal_closed(mu, D, 1.0, T)
        c = rep.components
        assert c["H_m1"] + c["H_0"] + c["H_p1"] + c["H_rem"] == pytest.approx(rep.H, rel=1e-12)
        assert c["H_rem"] == pytest.approx(h_rem_explicit(mu, D, 1.0, T), rel=1e-8, abs=1e-12 * rep.H)


def test_low_temperature_sideband_dominance():
    rep = qfi_sinusoidal_closed(0.2, 0.9, 1.0, 0.025)
    H, Hm1 = rep.H, rep.components["H_m1"]
    # H_-1 / H is set by eta ~ 1/P_-1: mpmath gives |H - H_-1|/H = 0.0372
    P = mp.mpf("0.01")
    T = mp.mpf("0.025")
    e4 = mp.e**-4
    Hm1_o = P * e4 * 16 / ((1 - e4) ** 2 * T**2)
    x = P * e4 + (1 - 2 * P) * mp.e**-40 + P * mp.e ** (-mp.mpf("1.9") / T)
    assert Hm1 == pytest.approx(float(Hm1_o), rel=1e-12)
    assert abs(H - Hm1) / H == pytest.approx(0.0372, abs=1e-3)
    assert rep.R > 0 and x > 0


def test_peak_at_t_minus1(flat, osc):
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 1)
    f = lambda T: qfi(osc, flat, sb, T).H  # noqa: E731
    peaks = find_peaks(f, np.geomspace(0.005, 0.1, 80))
    assert len(peaks) == 1 and peaks[0] == pytest.approx(0.025, rel=1e-3)


def test_regime_fallback_and_strict(flat, osc):
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 3)
    rep = qfi_closed_form(osc, flat, sb, 0.1)
    assert rep.method == "PopulationDerivative"
    assert rep.meta["negative_sideband_weight"] > 1e-9
    with pytest.raises(RegimeError) as err:
        qfi_closed_form(osc, flat, sb, 0.1, strict=True)
    assert err.value.value > 1e-9


def test_methods_agree_with_negative_sidebands(osc):
    g = SubOhmic(0.1, 100.0, 1e-11)
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 3)
    for T in (0.007, 0.05, 0.4):
        ref = ladder_qfi(osc, g, sb, T)
        for m in ("population", "fidelity"):
            assert qfi(osc, g, sb, T, m).H == pytest.approx(ref, rel=1e-7)


def test_fidelity_identity(flat):
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 1)
    lp = log_populations(log_effective_boltzmann(flat, sb, 0.2), 40)
    assert fidelity(lp, lp) == pytest.approx(1.0, abs=1e-15)


def test_error_bound():
    assert error_bound(4.0, 0.5) == pytest.approx(1.0)
    assert error_bound(4.0, 0.5, 4) == pytest.approx(error_bound(4.0, 0.5) / 2)
    assert error_bound(0.0, 0.1) == math.inf
    with pytest.raises(ValueError):
        error_bound(-1.0, 0.1)


@pytest.mark.parametrize("mu", [0.2, 0.1])
def test_xi_limit(flat, osc, mu):
    limit = math.e**2 / (2 * mu)
    T1 = 1e-4
    sb = sideband_weights(Modulation.sinusoidal(1.0, 1 - 4 * T1, mu), 1)
    assert qfi(osc, flat, sb, T1).xi == pytest.approx(limit, rel=0.01)
    assert limit == pytest.approx({0.2: 18.473, 0.1: 36.945}[mu], abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(mu=st.floats(0.0, 0.5), D=st.floats(0.05, 0.95), T=st.floats(1e-3, 5.0))
def test_qfi_nonnegative_and_xi_consistent(flat, mu, D, T):
    sb = sideband_weights(Modulation.sinusoidal(1.0, D, mu), 3)
    rep = qfi(Oscillator(), flat, sb, T, with_components=True)
    assert rep.H >= 0
    c = rep.components
    # the sum cancels when H is far below H_-1, so rounding scales with the largest part
    scale = max(abs(v) for v in c.values())
    assert c["H_m1"] + c["H_0"] + c["H_p1"] + c["H_rem"] == pytest.approx(rep.H, rel=1e-9, abs=1e-15 * scale)
    if rep.H > 0:
        assert rep.xi == pytest.approx(1 / (T * math.sqrt(rep.H)), rel=1e-15)


def test_dominance_indicator(flat, osc):
    assert dominance_indicator(0.0, 1.0) == -math.inf
    assert dominance_indicator(2.0, 2.0) == math.inf
    assert qfi_sinusoidal_closed(0.2, 0.9, 1.0, 0.1).R > 0
    assert qfi_sinusoidal_closed(0.0, 0.9, 1.0, 0.1).R == -math.inf
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 1)
    assert dominance_at_t_minus1(osc, flat, sb) > 0
    near_t0 = qfi_sinusoidal_closed(0.2, 0.1, 1.0, 0.225).R
    assert math.isfinite(near_t0)  # sign is recorded, not asserted


def test_decompose_matches_sinusoidal_components():
    m = np.array([-1, 0, 1])
    sb = SidebandSet(1.0, 0.9, m, np.array([0.01, 0.98, 0.01]))
    rep = qfi_sinusoidal_closed(0.2, 0.9, 1.0, 0.05)
    parts = decompose(rep.H, sb, 0.05)
    for k in ("H_m1", "H_0", "H_p1", "H_rem"):
        assert parts[k] == pytest.approx(rep.components[k], rel=1e-12, abs=1e-15)


def test_eta_and_optimality(flat):
    sb = sideband_weights(Modulation.sinusoidal(1.0, 0.9, 0.2), 1)
    p = sb.weight(-1)
    assert eta(flat, sb) == pytest.approx((sb.weight(0) + sb.weight(1) + p) / p, rel=1e-12)
    assert eta(flat, SidebandSet.unmodulated(1.0)) == math.inf
    Hs = [qfi_eta(e, 0.1, 0.025) for e in (1.0, 1.5, 3.0, 10.0, 100.0)]
    assert np.all(np.diff(Hs) < 0)
    assert qfi_eta(math.inf, 0.1, 0.025) == 0


def test_scaling_exponent(flat):
    Ts = np.geomspace(1e-4, 1e-2, 10)
    fits = [scaling_exponent(flat, k, Ts) for k in (2, 4, 8)]
    for f in fits:
        assert f.slope == pytest.approx(-2, abs=0.05)
    # prefactor H T^2 against eta e^k k^2 / (eta e^k - 1)^2, three-sideband model
    f = scaling_exponent(flat, 4, Ts, M=1)
    assert f.slope == pytest.approx(-2, abs=0.05)
    pred = f.eta * math.exp(4) * 16 / (f.eta * math.exp(4) - 1) ** 2
    assert np.allclose(f.H * f.T**2, pred, rtol=0.02)


def test_scaling_regime_floor(flat):
    with pytest.raises(RegimeError) as err:
        scaling_exponent(NearlyFlat(1e-3, 1e-6, 100.0), 4, [1e-4, 1e-3])
    assert err.value.value == pytest.approx(0.1)
    with pytest.raises(RegimeError):
        scaling_exponent(flat, 4, [1e-9, 1e-8])  # w_-1 below the spectral edge
