import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonclassicality.fockstats import (
    Family,
    ParameterError,
    PhotonDistribution,
    StateSpec,
    TruncationError,
    empirical_moments,
    generating_function,
    mean_photon_number,
    moments,
    moments_from_probs,
    photon_distribution,
)

SPECS = [
    StateSpec.coherent(1.3),
    StateSpec.mixed_coherent(2.0, 0.5),
    StateSpec.thermal(1.7),
    StateSpec.squeezed_vacuum(0.9),
    StateSpec.spats(0.6),
    StateSpec.lossy_fock(4, 0.2),
]

amplitudes = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)


def _spec_strategy():
    return st.one_of(
        amplitudes.map(StateSpec.coherent),
        st.tuples(amplitudes, amplitudes).map(lambda a: StateSpec.mixed_coherent(*a)),
        st.floats(0.0, 5.0).map(StateSpec.thermal),
        st.floats(0.0, 1.5).map(StateSpec.squeezed_vacuum),
        st.floats(0.0, 2.0).map(StateSpec.spats),
        st.tuples(st.integers(1, 20), st.floats(0.0, 1.0)).map(lambda a: StateSpec.lossy_fock(*a)),
    )


class TestStateSpec:
    def test_labels(self):
        assert [s.label for s in SPECS] == [0, 0, 0, 1, 1, 1]

    @pytest.mark.parametrize(
        "family,params",
        [
            ("Coherent", {}),
            ("Thermal", {"nbar": -1.0}),
            ("LossyFock", {"n": 2, "p_loss": 1.5}),
            ("LossyFock", {"n": 0, "p_loss": 0.0}),
            ("LossyFock", {"n": 2.5, "p_loss": 0.0}),
            ("SqueezedVacuum", {"r": float("nan")}),
        ],
    )
    def test_invalid_parameters(self, family, params):
        with pytest.raises(ParameterError):
            StateSpec(Family(family), params)

    def test_to_dict(self):
        assert StateSpec.thermal(2.0).to_dict() == {"family": "Thermal", "params": {"nbar": 2.0}}


class TestPhotonDistribution:
    @pytest.mark.parametrize("spec", [StateSpec.squeezed_vacuum(1e-169), StateSpec.coherent(1e-170), StateSpec.thermal(1e-320)])
    def test_underflowing_parameter_is_vacuum(self, spec):
        np.testing.assert_array_equal(photon_distribution(spec).probs[:1], [1.0])

    @given(_spec_strategy())
    def test_normalization(self, spec):
        dist = photon_distribution(spec)
        assert np.all(dist.probs >= 0)
        assert dist.probs.sum() + dist.tail_mass == pytest.approx(1.0, abs=1e-12)
        assert dist.tail_mass < 1e-10

    @given(_spec_strategy(), st.floats(-0.9, 0.9))
    def test_generating_function_oracle(self, spec, z):
        dist = photon_distribution(spec, tail_target=1e-15, max_cutoff=2000)
        series = float(np.polyval(dist.probs[::-1], z))
        assert series == pytest.approx(generating_function(spec, z), abs=1e-10)

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family.value)
    def test_mean_matches_closed_form(self, spec):
        mom = moments(photon_distribution(spec, tail_target=1e-14), 1)
        assert mom.mean() == pytest.approx(mean_photon_number(spec), rel=1e-10)

    def test_fixed_cutoff_reports_tail(self):
        dist = photon_distribution(StateSpec.coherent(2.0), cutoff=3)
        assert dist.cutoff == 3
        assert dist.tail_mass == pytest.approx(1 - sum(math.exp(-4) * 4**k / math.factorial(k) for k in range(4)))

    def test_truncation_error_for_bright_state(self):
        dist = photon_distribution(StateSpec.coherent(30.0), max_cutoff=200)
        with pytest.raises(TruncationError):
            moments(dist, 2)

    def test_negative_cutoff(self):
        with pytest.raises(ParameterError):
            photon_distribution(StateSpec.coherent(1.0), cutoff=-1)

    def test_squeezed_only_even(self):
        p = photon_distribution(StateSpec.squeezed_vacuum(1.0)).probs
        assert np.all(p[1::2] == 0)

    def test_spats_no_vacuum(self):
        assert photon_distribution(StateSpec.spats(0.5)).probs[0] == 0.0

    def test_rejects_negative_probabilities(self):
        with pytest.raises(ValueError):
            PhotonDistribution(np.array([0.5, -0.1, 0.6]))


class TestMoments:
    @pytest.mark.parametrize("mu", [0.2, 1.0, 5.0])
    def test_coherent_normal_ordered_powers(self, mu):
        mom = moments_from_probs(photon_distribution(StateSpec.coherent(math.sqrt(mu)), 300).probs, 4)
        np.testing.assert_allclose(mom.normal_ordered, [mu, mu**2, mu**3, mu**4], rtol=1e-10)

    @pytest.mark.parametrize("nbar", [0.3, 2.0])
    def test_thermal_factorial_moments(self, nbar):
        mom = moments_from_probs(photon_distribution(StateSpec.thermal(nbar), 600).probs, 3)
        np.testing.assert_allclose(mom.normal_ordered, [nbar, 2 * nbar**2, 6 * nbar**3], rtol=1e-9)

    @pytest.mark.parametrize("r", [0.2, 0.7, 1.1])
    def test_squeezed_variance(self, r):
        mom = moments_from_probs(photon_distribution(StateSpec.squeezed_vacuum(r), 600).probs, 2)
        s2, c2 = math.sinh(r) ** 2, math.cosh(r) ** 2
        assert mom.raw[1] - mom.raw[0] ** 2 == pytest.approx(2 * s2 * c2, rel=1e-10)

    def test_raw_vs_falling(self):
        mom = moments_from_probs(np.array([0.1, 0.2, 0.3, 0.4]), 3)
        n = np.arange(4)
        p = np.array([0.1, 0.2, 0.3, 0.4])
        assert mom.raw[2] == pytest.approx(p @ n**3)
        assert mom.normal_ordered[2] == pytest.approx(p @ (n * (n - 1) * (n - 2)))

    def test_empirical_standard_errors(self):
        rng = np.random.default_rng(5)
        x = rng.poisson(2.0, size=200_000)
        mom = empirical_moments(x, order=2)
        assert abs(mom.raw[0] - 2.0) < 5 * mom.raw_stderr[0]
        assert abs(mom.normal_ordered[1] - 4.0) < 5 * mom.normal_stderr[1]
        assert mom.raw_stderr[0] == pytest.approx(math.sqrt(2.0 / x.size), rel=0.02)

    def test_empirical_needs_two_samples(self):
        with pytest.raises(ValueError):
            empirical_moments(np.array([3]))
