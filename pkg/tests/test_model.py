import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cavdiscord.matrix import check_density_matrix
from cavdiscord.model import (
    CorrelationVector,
    Family,
    PhysicalParams,
    SingleAtomInit,
    WernerSpec,
    asymptotic_magnitude_sq,
    correlation_vector,
    decoherence_factor,
    decoherence_factor_array,
    dephase_both,
    dispersive_validity,
    single_atom_state,
    two_atom_state,
    werner_initial,
)

from oracles import bell_diagonal_state, f_mp

E_MINUS_4 = 0.0183156388887341802937  # exp(-4)
WEAK_FIELD_ASYMPTOTE = 0.606560983971293338859  # exp(-0.5 / (1 + 1e-4))


def scaled(g, alpha):
    return PhysicalParams.scaled(g, alpha)


class TestParams:
    def test_from_raw(self):
        p = PhysicalParams.from_raw(g=0.01, delta=1.0, omega=10.0, omega0=11.0, gamma=1e-6)
        assert p.omega_eff == pytest.approx(1e-4, rel=1e-12)

    def test_raw_inconsistent(self):
        with pytest.raises(ValueError):
            PhysicalParams(omega_eff=2.0, raw_params=(1.0, 1.0, 0.0, 1.0))

    @pytest.mark.parametrize("kw", [dict(omega_eff=0.0), dict(gamma=-1.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            PhysicalParams(**kw)


class TestDecoherenceFactor:
    def test_origin(self):
        assert decoherence_factor(scaled(0.3, 1.2), 0.0) == 1 + 0j

    def test_collapse_without_decay(self):
        fsq = abs(decoherence_factor(scaled(0.0, 1.0), math.pi / 2)) ** 2
        assert fsq == pytest.approx(E_MINUS_4, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 2.5])
    def test_revival_without_decay(self, alpha):
        assert abs(decoherence_factor(scaled(0.0, alpha), math.pi)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize(
        "gamma, alpha, t",
        [(0.01, 0.5, 1.3), (0.1, 1.0, 2.7), (0.01, 1.0, 10.0), (1.0, 0.7 + 0.4j, 0.9)],
    )
    def test_against_high_precision(self, gamma, alpha, t):
        got = decoherence_factor(scaled(gamma, alpha), t)
        assert abs(got - f_mp(1.0, gamma, abs(alpha) ** 2, t)) <= 1e-13

    def test_frozen_value(self):
        # 30-digit evaluation of the three-factor product
        got = decoherence_factor(scaled(0.1, 1.0), 2.7)
        assert got == pytest.approx(-0.34772403028411522837 - 0.37647042189493359464j, abs=1e-14)

    def test_units(self):
        # omega_eff = 2 at time t equals omega_eff = 1 at time 2t with gamma scaled
        a = decoherence_factor(PhysicalParams(2.0, 0.02, 0.8), 1.5)
        b = decoherence_factor(PhysicalParams(1.0, 0.01, 0.8), 3.0)
        assert a == pytest.approx(b, abs=1e-14)

    def test_only_modulus_of_alpha_matters(self):
        t = 2.2
        a = decoherence_factor(scaled(0.05, 1.0), t)
        b = decoherence_factor(scaled(0.05, 0.6 + 0.8j), t)
        assert a == pytest.approx(b, abs=1e-14)

    def test_vectorised_matches_scalar(self):
        params = scaled(0.03, 0.9)
        ts = np.linspace(0, 30, 301)
        assert_allclose(
            decoherence_factor_array(params, ts),
            [decoherence_factor(params, t) for t in ts],
            atol=1e-14,
        )

    def test_negative_time(self):
        with pytest.raises(ValueError):
            decoherence_factor(scaled(0.0, 1.0), -1.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(0.0, 1.0),
        st.floats(0.0, 2.0),
        st.floats(1e-6, 50.0),
    )
    def test_bounded(self, gamma, alpha, t):
        mod = abs(decoherence_factor(scaled(gamma, alpha), t))
        assert mod <= 1.0 + 1e-15
        if gamma > 1e-3 and alpha > 0.1 and t > 1e-3:
            assert mod < 1.0

    @pytest.mark.parametrize("gamma", [0.01, 0.1])
    def test_revival_envelope_decreasing(self, gamma):
        params = scaled(gamma, 1.0)
        peaks = [abs(decoherence_factor(params, k * math.pi)) ** 2 for k in range(12)]
        assert all(b <= a + 1e-15 for a, b in zip(peaks, peaks[1:]))


class TestAsymptote:
    def test_vacuum(self):
        assert asymptotic_magnitude_sq(scaled(0.1, 0.0)) == 1.0

    def test_weak_field_parameters(self):
        assert asymptotic_magnitude_sq(scaled(0.01, 0.5)) == pytest.approx(WEAK_FIELD_ASYMPTOTE, rel=1e-13)

    def test_strong_damping(self):
        assert asymptotic_magnitude_sq(scaled(1e3, 1.0)) == pytest.approx(1.0, abs=3e-6)
        assert asymptotic_magnitude_sq(scaled(1e3, 1.0)) == pytest.approx(
            abs(decoherence_factor(scaled(1e3, 1.0), 10.0)) ** 2, abs=1e-12
        )

    @pytest.mark.parametrize("gamma", [0.01, 0.1, 1.0])
    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_matches_long_time(self, gamma, alpha):
        params = scaled(gamma, alpha)
        late = abs(decoherence_factor(params, 1e3)) ** 2
        assert late == pytest.approx(asymptotic_magnitude_sq(params), abs=1e-6)

    def test_requires_decay(self):
        with pytest.raises(ValueError):
            asymptotic_magnitude_sq(scaled(0.0, 1.0))


class TestSingleAtom:
    def test_no_coherence_is_static(self):
        init = SingleAtomInit(0.3, 0.7, 0.0)
        assert_allclose(single_atom_state(init, scaled(0.1, 1.0), 4.0), np.diag([0.3, 0.7]))

    def test_initial(self):
        init = SingleAtomInit(0.6, 0.4, 0.2 + 0.3j)
        assert_allclose(single_atom_state(init, scaled(0.1, 1.0), 0.0), init.matrix())

    def test_collapsed_coherence(self):
        init = SingleAtomInit(0.5, 0.5, 0.5)
        rho = single_atom_state(init, scaled(0.0, 1.0), math.pi / 2)
        assert abs(rho[0, 1]) == pytest.approx(math.exp(-2) / 2, rel=1e-12)
        assert_allclose(np.diag(rho).real, [0.5, 0.5])
        check_density_matrix(rho)

    def test_invalid_init(self):
        with pytest.raises(ValueError):
            SingleAtomInit(0.5, 0.5, 0.6)
        with pytest.raises(ValueError):
            SingleAtomInit(0.5, 0.6, 0.0)


class TestWerner:
    def test_mixed(self):
        assert_allclose(werner_initial(WernerSpec(0.0)), np.eye(4) / 4)

    def test_pure_phi(self):
        phi = np.array([0, 1, 1, 0]) / math.sqrt(2)
        assert_allclose(werner_initial(WernerSpec(1.0, Family.PHI)), np.outer(phi, phi), atol=1e-15)

    def test_phi_p04(self):
        rho = werner_initial(WernerSpec(0.4))
        assert_allclose(np.diag(rho).real, [0.15, 0.35, 0.35, 0.15], atol=1e-15)
        assert rho[1, 2] == pytest.approx(0.2, abs=1e-15)
        assert rho[2, 1] == pytest.approx(0.2, abs=1e-15)

    def test_psi_p04(self):
        rho = werner_initial(WernerSpec(0.4, "psi"))
        assert_allclose(np.diag(rho).real, [0.35, 0.15, 0.15, 0.35], atol=1e-15)
        assert rho[0, 3] == pytest.approx(0.2, abs=1e-15)

    @pytest.mark.parametrize("p", [-0.1, 1.1])
    def test_invalid_p(self, p):
        with pytest.raises(ValueError):
            WernerSpec(p)

    def test_family_parse(self):
        assert Family.parse("Ψ") is Family.PSI
        with pytest.raises(ValueError):
            Family.parse("chi")


class TestTwoAtomState:
    def test_initial(self):
        spec = WernerSpec(0.7, "psi")
        assert_allclose(two_atom_state(spec, scaled(0.1, 1.0), 0.0), werner_initial(spec))

    def test_phi_matches_closed_matrix(self):
        p, fsq = 0.4, 0.5
        rho = dephase_both(werner_initial(WernerSpec(p)), math.sqrt(fsq) * np.exp(0.7j))
        expected = np.diag([0.15, 0.35, 0.35, 0.15]).astype(complex)
        expected[1, 2] = expected[2, 1] = 0.1
        assert_allclose(rho, expected, atol=1e-15)

    def test_psi_coherence(self):
        params = scaled(0.05, 0.8)
        spec = WernerSpec(0.6, "psi")
        for t in (0.4, 2.0, 7.5):
            f = decoherence_factor(params, t)
            rho = two_atom_state(spec, params, t)
            assert rho[0, 3] == pytest.approx(0.6 * f * f / 2, abs=1e-15)
            assert abs(rho[0, 3]) == pytest.approx(0.6 * abs(f) ** 2 / 2, abs=1e-15)

    def test_valid_on_random_parameters(self, rng):
        for _ in range(300):
            spec = WernerSpec(rng.uniform(0, 1), rng.choice(list(Family)))
            params = scaled(rng.uniform(0, 1), rng.uniform(0, 2))
            check_density_matrix(two_atom_state(spec, params, rng.uniform(0, 50)))


class TestCorrelationVector:
    def test_mixed(self):
        d = correlation_vector(np.eye(4) / 4)
        assert d.as_tuple() == pytest.approx((0, 0, 0), abs=1e-15)

    def test_phi_initial(self):
        d = correlation_vector(werner_initial(WernerSpec(0.4)))
        assert d.as_tuple() == pytest.approx((0.4, 0.4, -0.4), abs=1e-15)

    def test_psi_pure(self):
        d = correlation_vector(werner_initial(WernerSpec(1.0, "psi")))
        assert d.as_tuple() == pytest.approx((1, -1, 1), abs=1e-15)

    def test_round_trip_bell_diagonal(self):
        for d in [(0.3, -0.1, 0.2), (0.2, 0.2, -0.8), (-0.5, 0.1, 0.3)]:
            got = correlation_vector(bell_diagonal_state(*d))
            # |d1|, |d2| are recovered up to a local rotation that flips signs in pairs
            assert abs(got.d3 - d[2]) <= 1e-15
            assert sorted(np.abs(got.as_tuple()[:2])) == pytest.approx(sorted(np.abs(d[:2])), abs=1e-15)

    def test_model_structure(self, rng):
        for _ in range(200):
            p = rng.uniform(0, 1)
            params = scaled(rng.uniform(0, 1), rng.uniform(0, 2))
            t = rng.uniform(0, 50)
            fsq = abs(decoherence_factor(params, t)) ** 2
            phi = correlation_vector(two_atom_state(WernerSpec(p, "phi"), params, t))
            psi = correlation_vector(two_atom_state(WernerSpec(p, "psi"), params, t))
            assert phi.d1 == pytest.approx(phi.d2, abs=1e-15)
            assert psi.d1 == pytest.approx(-psi.d2, abs=1e-15)
            assert abs(phi.d3) == pytest.approx(p, abs=1e-15)
            assert abs(psi.d3) == pytest.approx(p, abs=1e-15)
            assert phi.d1 == pytest.approx(p * fsq, abs=1e-15)

    def test_rejects_non_x(self, rng):
        rho = np.eye(4, dtype=complex) / 4
        rho[0, 1] = rho[1, 0] = 0.05
        with pytest.raises(ValueError):
            correlation_vector(rho)

    def test_rejects_unequal_populations(self):
        with pytest.raises(ValueError):
            correlation_vector(np.diag([0.4, 0.2, 0.2, 0.2]))

    def test_unphysical_vector(self):
        with pytest.raises(ValueError):
            CorrelationVector(1.0, 1.0, 1.0)


class TestDispersive:
    def params(self, delta_over_g):
        g = 0.01
        delta = delta_over_g * g
        return PhysicalParams.from_raw(g, delta, 1.0, 1.0 + delta)

    def test_comfortable(self):
        r = dispersive_validity(self.params(100), 0)
        assert r.ratio == pytest.approx(100)
        assert not r.warning

    def test_marginal(self):
        r = dispersive_validity(self.params(10), 3)
        assert r.ratio == pytest.approx(5)
        assert r.warning

    def test_many_photons(self):
        r = dispersive_validity(self.params(100), 9999)
        assert r.ratio == pytest.approx(1)
        assert r.warning

    def test_requires_raw(self):
        with pytest.raises(ValueError):
            dispersive_validity(scaled(0.0, 1.0), 0)
