import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qproc import (
    ArgumentError,
    BiasCorrection,
    DegenerateModelError,
    EstimationError,
    OneForm,
    OutcomeRecord,
    PauliZFamily,
    apportion_shots,
    branch_rng,
    corner_protocol,
    debias,
    estimate_q,
    fit_bias_correction,
    fit_bias_polynomial,
    hyperface_protocol,
    report,
    sample_estimates,
    simulate,
)


class TestApportionment:
    def test_exact_split(self):
        assert apportion_shots([0.75, 0.25], 100).tolist() == [75, 25]

    def test_largest_remainder(self):
        assert apportion_shots([1 / 3, 1 / 3, 1 / 3], 100).tolist() == [34, 33, 33]

    def test_remainder_goes_to_biggest_fraction(self):
        assert apportion_shots([0.55, 0.45], 9).tolist() == [5, 4]

    @given(
        st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=1, max_size=6),
        st.integers(min_value=1, max_value=10_000),
    )
    @settings(max_examples=200, deadline=None)
    def test_sums_to_total(self, raw, total):
        weights = np.array(raw) / np.sum(raw)
        counts = apportion_shots(weights, total)
        assert counts.sum() == total
        assert np.all(counts >= 0)


class TestDeterminism:
    def test_identical_runs(self):
        protocol = corner_protocol(OneForm([1.0, 0.5]))
        family = PauliZFamily(2)
        first = simulate(protocol, family, [0.0, 0.0], shots=1000, seed=7)
        second = simulate(protocol, family, [0.0, 0.0], shots=1000, seed=7)
        assert [r.counts for r in first] == [r.counts for r in second]

    def test_streams_independent_of_order(self):
        # drawing branch 1 before branch 0 reads the same keyed streams
        probs = np.array([0.5, 0.5])
        forward = [branch_rng(3, 0, b).multinomial(100, probs).tolist() for b in (0, 1)]
        backward = [branch_rng(3, 0, b).multinomial(100, probs).tolist() for b in (1, 0)]
        assert forward == backward[::-1]

    def test_different_seeds_differ(self):
        protocol = corner_protocol(OneForm([1.0, 0.5]))
        family = PauliZFamily(2)
        a = simulate(protocol, family, [0.0, 0.0], shots=1000, seed=1)
        b = simulate(protocol, family, [0.0, 0.0], shots=1000, seed=2)
        assert [r.counts for r in a] != [r.counts for r in b]

    def test_sample_estimates_reproducible(self):
        protocol = corner_protocol(OneForm([1.0, 0.5]))
        family = PauliZFamily(2)
        x = sample_estimates(protocol, family, [0.0, 0.0], 500, 40, seed=11)
        y = sample_estimates(protocol, family, [0.0, 0.0], 500, 40, seed=11)
        assert np.array_equal(x, y)


class TestSimulate:
    def test_fiducial_point_splits_evenly(self):
        protocol = hyperface_protocol([1, 1])
        family = PauliZFamily(2)
        records = simulate(protocol, family, [0.0, 0.0], shots=200_000, seed=5)
        frequency = records[0].counts["+"] / records[0].shots
        assert frequency == pytest.approx(0.5, abs=0.005)

    def test_pi_over_six_readout(self):
        protocol = hyperface_protocol([1, 1])
        family = PauliZFamily(2)
        records = simulate(protocol, family, [np.pi / 12, np.pi / 12], shots=200_000, seed=5)
        frequency = records[0].counts["+"] / records[0].shots
        assert frequency == pytest.approx(0.75, abs=0.005)

    def test_apportionment_is_deterministic(self):
        protocol = corner_protocol(OneForm([1.0, 0.5]))
        family = PauliZFamily(2)
        records = simulate(protocol, family, [0.0, 0.0], shots=1000, seed=0)
        assert [r.shots for r in records] == [750, 250]

    def test_warns_outside_linear_regime(self):
        protocol = hyperface_protocol([1])
        family = PauliZFamily(1)
        with pytest.warns(UserWarning, match="linearization"):
            simulate(protocol, family, [0.5], shots=10, seed=0)

    def test_wrong_theta_length(self):
        protocol = hyperface_protocol([1, 1])
        with pytest.raises(ArgumentError):
            simulate(protocol, PauliZFamily(2), [0.0], shots=10, seed=0)


class TestEstimateQ:
    def test_balanced_counts_give_zero(self):
        protocol = hyperface_protocol([1, 1])
        labels = protocol.branches[0].measurement.labels
        counts = {label: 0 for label in labels}
        counts["+"] = 50
        counts["-"] = 50
        records = [OutcomeRecord(branch=0, counts=counts, shots=100)]
        assert estimate_q(records, protocol) == pytest.approx(0.0)

    def test_single_branch_arcsine(self):
        protocol = hyperface_protocol([1, 1])
        labels = protocol.branches[0].measurement.labels
        counts = {label: 0 for label in labels}
        counts["+"] = 75
        counts["-"] = 25
        records = [OutcomeRecord(branch=0, counts=counts, shots=100)]
        assert estimate_q(records, protocol) == pytest.approx(np.pi / 6)

    def test_corner_estimator_tracks_target(self):
        family = PauliZFamily(2)
        dq = OneForm([1.0, 0.5])
        protocol = corner_protocol(dq)
        delta = 0.01
        samples = sample_estimates(protocol, family, [delta, 0.0], 10_000, 2000, seed=3)
        stderr = samples.std(ddof=1) / np.sqrt(samples.size)
        assert np.mean(samples) == pytest.approx(delta, abs=4 * stderr)

    def test_empty_branch_rejected(self):
        protocol = corner_protocol(OneForm([1.0, 0.5]))
        labels0 = protocol.branches[0].measurement.labels
        records = [
            OutcomeRecord(branch=0, counts={label: (10 if label == "+" else 0) for label in labels0}, shots=10),
            OutcomeRecord(branch=1, counts={label: 0 for label in protocol.branches[1].measurement.labels}, shots=0),
        ]
        with pytest.raises(EstimationError):
            estimate_q(records, protocol)

    def test_outcome_record_validates_totals(self):
        with pytest.raises(ArgumentError):
            OutcomeRecord(branch=0, counts={"+": 3, "-": 3}, shots=5)


class TestParameterEstimates:
    def test_square_readout_system(self):
        family = PauliZFamily(2)
        dq = OneForm([1.0, 0.5])
        protocol = corner_protocol(dq)
        q_hats, theta_hats = sample_estimates(
            protocol, family, [0.0, 0.0], 2000, 50, seed=9, return_parameter_estimates=True
        )
        assert theta_hats.shape == (50, 2)
        # q estimate is the target contraction of the parameter estimate
        recombined = theta_hats @ dq.components
        assert np.allclose(recombined, q_hats, atol=1e-12)


class TestDebias:
    def test_identity_correction(self, rng):
        samples = rng.standard_normal(100)
        out = debias([0.0], [[1.0]], samples)
        assert np.allclose(out, samples)

    def test_rescale(self, rng):
        samples = rng.standard_normal(100)
        out = debias([0.0], [[2.0]], samples)
        assert np.allclose(out, samples / 2.0)

    def test_offset_then_unmix(self):
        samples = np.array([[2.0, 1.0], [4.0, 3.0]])
        out = debias([1.0, 1.0], [[1.0, 0.0], [0.0, 2.0]], samples)
        assert np.allclose(out, [[1.0, 0.0], [3.0, 1.0]])

    def test_ill_conditioned_rejected(self, rng):
        with pytest.raises(DegenerateModelError):
            debias([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0 + 1e-12]], rng.standard_normal((5, 2)))

    def test_fitted_response_is_nearly_identity(self):
        family = PauliZFamily(2)
        dq = OneForm([1.0, 0.5])
        protocol = corner_protocol(dq)
        correction = fit_bias_correction(
            protocol, family, dq, direction=[1.0, 0.0], magnitude=0.05, shots=10_000, repetitions=2000, seed=21
        )
        assert correction.jacobian[0, 0] == pytest.approx(1.0, abs=0.01)
        assert abs(correction.offset[0]) < 1e-3

    def test_bias_correction_validates_shapes(self):
        with pytest.raises(ArgumentError):
            BiasCorrection(offset=np.zeros(2), jacobian=np.eye(3))


class TestReport:
    def test_summary_fields(self, rng):
        samples = rng.normal(0.0, 0.01, size=4000)
        summary = report(samples, bound_per_shot=1.0, shots=10_000)
        assert summary.repetitions == 4000
        assert summary.variance_times_shots == pytest.approx(1.0, rel=0.1)
        assert not summary.impossible_alarm

    def test_degenerate_samples_raise_alarm(self):
        summary = report(np.zeros(100), bound_per_shot=1.0, shots=100)
        assert summary.impossible_alarm
        assert summary.empirical_variance == 0.0

    def test_needs_two_samples(self):
        with pytest.raises(ArgumentError):
            report([1.0], bound_per_shot=1.0, shots=10)

    def test_marginal_ccrb_check(self, rng):
        from qproc import FisherMatrix

        samples = rng.normal(0.0, 0.011, size=5000)
        fisher = FisherMatrix(np.array([[1.0, 0.5], [0.5, 1.0]]))
        summary = report(samples, bound_per_shot=1.0, shots=10_000, fisher=fisher, dq=OneForm([1.0, 0.5]))
        assert summary.ccrb_psd is True

    def test_matrix_ccrb_check(self, rng):
        from qproc import FisherMatrix

        family = PauliZFamily(2)
        dq = OneForm([1.0, 0.5])
        protocol = corner_protocol(dq)
        q_hats, theta_hats = sample_estimates(
            protocol, family, [0.0, 0.0], 4000, 400, seed=13, return_parameter_estimates=True
        )
        from qproc import protocol_fisher

        fisher = protocol_fisher(protocol, family)
        covariance = np.cov(theta_hats.T)
        summary = report(q_hats, bound_per_shot=1.0, shots=4000, fisher=fisher, covariance=covariance)
        assert summary.ccrb_psd is True

    def test_csv_row_shape(self, rng):
        samples = rng.normal(0.0, 0.01, size=100)
        summary = report(samples, bound_per_shot=1.0, shots=10_000)
        row = summary.csv_row("corner", "1 0.5", 42)
        assert len(row) == len(summary.CSV_HEADER)


class TestBoundAttainmentAcrossShotBudgets:
    @pytest.mark.parametrize("shots", [100, 1000, 10_000])
    def test_variance_tracks_bound(self, shots):
        family = PauliZFamily(2)
        dq = OneForm([1.0, 0.5])
        protocol = corner_protocol(dq)
        samples = sample_estimates(protocol, family, [0.0, 0.0], shots, 2000, seed=17)
        summary = report(samples, bound_per_shot=1.0, shots=shots)
        # converges onto the bound and never dips impossibly below it
        assert abs(summary.variance_times_shots - 1.0) <= 5 * summary.variance_stderr * shots
        assert summary.variance_times_shots >= 1.0 - 5 * summary.variance_stderr * shots
        assert not summary.impossible_alarm
        assert summary.q_hat_samples.size == 2000


class TestBiasPolynomial:
    def test_recovers_exact_polynomial(self):
        q = np.array([-0.02, -0.01, -0.005, 0.005, 0.01, 0.02])
        y = 0.3 * q + 1.7 * q**2
        coeffs, cov = fit_bias_polynomial(q, y, np.full(q.size, 1e-6))
        assert coeffs[0] == pytest.approx(0.3, abs=1e-9)
        assert coeffs[1] == pytest.approx(1.7, abs=1e-6)
        assert cov.shape == (2, 2)

    def test_needs_three_points(self):
        with pytest.raises(ArgumentError):
            fit_bias_polynomial([0.01, 0.02], [0.0, 0.0], [1.0, 1.0])
