"""Monte-Carlo verification of protocols against their variance bounds.

Samples protocol outcomes at a true parameter point near the fiducial,
estimates the target by maximum likelihood per branch, applies the local
affine bias correction, and compares the empirical variance against the
dual-norm bound and the Cramer-Rao matrix inequality.

Randomness is counter-based: every (seed, repetition, branch) triple
keys its own Philox stream, so results are bit-identical regardless of
evaluation order or concurrency.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DegenerateModelError, EstimationError
from .families import ProcessFamily
from .operators import HermitianOperator, PureState, born_probabilities, evolve_density, evolve_pure
from .protocols import Branch, Protocol
from .tangent import FisherMatrix, OneForm, fisher_dual

LINEAR_REGIME_WARNING = 0.3
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class OutcomeRecord:
    """Measurement tallies for one branch of one simulated run."""

    branch: int
    counts: dict[str, int]
    shots: int

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.shots:
            raise ArgumentError(f"counts sum to {total}, expected {self.shots}")
        if any(c < 0 for c in self.counts.values()):
            raise ArgumentError("counts must be nonnegative")


def branch_rng(seed: int, repetition: int, branch: int) -> np.random.Generator:
    """Philox stream for one (seed, repetition, branch) cell."""
    key = np.array([int(seed) & _MASK64, 0], dtype=np.uint64)
    counter = np.array([0, 0, int(repetition) & _MASK64, int(branch) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def apportion_shots(weights, total: int) -> np.ndarray:
    """Largest-remainder apportionment of ``total`` shots to the weights."""
    weights = np.asarray(weights, dtype=float)
    if total < 1:
        raise ArgumentError("need at least one shot")
    raw = weights * total
    counts = np.floor(raw).astype(int)
    remainder = total - counts.sum()
    if remainder > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:remainder]] += 1
    return counts


def _extended_hamiltonian(branch: Branch, family: ProcessFamily, theta: np.ndarray) -> HermitianOperator:
    base = family.hamiltonian(theta)
    if branch.fiducial.dim == family.dim:
        return base
    return HermitianOperator(np.kron(np.eye(2, dtype=complex), base.entries))


def branch_distribution(branch: Branch, family: ProcessFamily, theta) -> np.ndarray:
    """Exact outcome probabilities of one branch at a parameter point,
    ordered like the branch's POVM labels."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != family.n_params:
        raise ArgumentError("parameter point length does not match the family")
    hamiltonian = _extended_hamiltonian(branch, family, theta)
    if isinstance(branch.fiducial, PureState):
        rho = evolve_pure(branch.fiducial, hamiltonian).density()
    else:
        rho = evolve_density(branch.fiducial, hamiltonian)
    table = born_probabilities(rho, branch.measurement)
    return np.array([table[label] for label in branch.measurement.labels])


def _check_linear_regime(theta: np.ndarray):
    worst = float(np.max(np.abs(theta))) if theta.size else 0.0
    if worst > LINEAR_REGIME_WARNING:
        warnings.warn(
            f"|theta| = {worst:.3g} rad is outside the linearization regime; "
            "bounds and estimators are derived for small deviations",
            stacklevel=3,
        )


def simulate(
    protocol: Protocol,
    family: ProcessFamily,
    theta_true,
    shots: int,
    seed: int,
    repetition: int = 0,
) -> list[OutcomeRecord]:
    """One simulated run: apportion shots over branches deterministically,
    then draw each branch's counts from its exact outcome distribution."""
    theta = np.asarray(theta_true, dtype=float).reshape(-1)
    if theta.size != family.n_params:
        raise ArgumentError("theta_true length does not match the family")
    _check_linear_regime(theta)
    weights = [branch.weight for branch in protocol.branches]
    per_branch = apportion_shots(weights, shots)
    records = []
    for index, branch in enumerate(protocol.branches):
        probs = branch_distribution(branch, family, theta)
        n = int(per_branch[index])
        if n > 0:
            counts = branch_rng(seed, repetition, index).multinomial(n, probs)
        else:
            counts = np.zeros(probs.size, dtype=int)
        records.append(
            OutcomeRecord(
                branch=index,
                counts={label: int(c) for label, c in zip(branch.measurement.labels, counts)},
                shots=n,
            )
        )
    return records


def _branch_estimate(record: OutcomeRecord, branch: Branch) -> float:
    if record.shots < 1:
        raise EstimationError(f"branch {record.branch} received no shots")
    if branch.readout_form is None or branch.estimator_weight is None:
        raise EstimationError(f"branch {record.branch} has no readout to estimate")
    plus = record.counts.get("+", 0)
    frequency = plus / record.shots
    return float(np.arcsin(np.clip(2.0 * frequency - 1.0, -1.0, 1.0)))


def estimate_q(records: list[OutcomeRecord], protocol: Protocol) -> float:
    """Maximum-likelihood estimate of the target from branch tallies.

    Each branch reads the sine of its linear combination; the arcsine of
    the clamped outcome frequency is the per-branch MLE, and the target
    estimate recombines them with the coefficients of the target's
    decomposition over the branch readouts.
    """
    if len(records) != len(protocol.branches):
        raise ArgumentError("record count does not match the protocol branches")
    total = 0.0
    for record, branch in zip(records, protocol.branches):
        total += branch.estimator_weight * _branch_estimate(record, branch)
    return float(total)


def sample_estimates(
    protocol: Protocol,
    family: ProcessFamily,
    theta_true,
    shots: int,
    repetitions: int,
    seed: int,
    return_parameter_estimates: bool = False,
):
    """Repeated runs of the estimator; returns the array of q estimates.

    Branch outcome distributions are computed once; each repetition then
    draws from its own keyed stream.  With ``return_parameter_estimates``
    and as many branches as parameters, the per-branch readouts are also
    solved for full parameter estimates (for covariance checks).
    """
    theta = np.asarray(theta_true, dtype=float).reshape(-1)
    if theta.size != family.n_params:
        raise ArgumentError("theta_true length does not match the family")
    if repetitions < 1:
        raise ArgumentError("need at least one repetition")
    _check_linear_regime(theta)
    branches = protocol.branches
    weights = [branch.weight for branch in branches]
    per_branch = apportion_shots(weights, shots)
    if np.any(per_branch < 1):
        raise EstimationError("a weighted branch received no shots; increase the shot budget")
    for branch in branches:
        if branch.readout_form is None or branch.estimator_weight is None:
            raise EstimationError("every branch needs a readout to run the estimator")
    distributions = [branch_distribution(branch, family, theta) for branch in branches]
    plus_index = [branch.measurement.labels.index("+") for branch in branches]
    coeffs = np.array([branch.estimator_weight for branch in branches])

    s_hat = np.empty((repetitions, len(branches)))
    for rep in range(repetitions):
        for b, branch in enumerate(branches):
            counts = branch_rng(seed, rep, b).multinomial(int(per_branch[b]), distributions[b])
            frequency = counts[plus_index[b]] / per_branch[b]
            s_hat[rep, b] = np.arcsin(np.clip(2.0 * frequency - 1.0, -1.0, 1.0))
    q_hats = s_hat @ coeffs
    if not return_parameter_estimates:
        return q_hats
    readouts = np.array([branch.readout_form.components for branch in branches])
    if readouts.shape[0] != readouts.shape[1]:
        raise EstimationError("parameter estimates need exactly one branch per parameter")
    theta_hats = np.linalg.solve(readouts, s_hat.T).T
    return q_hats, theta_hats


# ---------------------------------------------------------------------------
# Local debiasing (affine correction around the fiducial point).


@dataclass(frozen=True)
class BiasCorrection:
    """Affine response of the raw estimator around the fiducial point."""

    offset: np.ndarray
    jacobian: np.ndarray
    condition: float = field(init=False, default=0.0)

    def __post_init__(self):
        offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        jacobian = np.atleast_2d(np.asarray(self.jacobian, dtype=float))
        if jacobian.shape != (offset.size, offset.size):
            raise ArgumentError("jacobian shape must match the offset length")
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "jacobian", jacobian)
        object.__setattr__(self, "condition", float(np.linalg.cond(jacobian)))


def debias(raw_mean_at_fiducial, jacobian, raw_estimates) -> np.ndarray:
    """Remove first-order bias: subtract the fiducial mean, unmix with the
    inverse response Jacobian."""
    mean0 = np.atleast_1d(np.asarray(raw_mean_at_fiducial, dtype=float))
    jac = np.atleast_2d(np.asarray(jacobian, dtype=float))
    if jac.shape != (mean0.size, mean0.size):
        raise ArgumentError("jacobian shape must match the mean vector")
    condition = np.linalg.cond(jac)
    if not np.isfinite(condition) or condition > 1e8:
        raise DegenerateModelError(f"response jacobian condition number {condition:.3e} too large")
    raw = np.asarray(raw_estimates, dtype=float)
    flat = np.atleast_2d(raw if raw.ndim > 1 else raw[:, None])
    corrected = np.linalg.solve(jac, (flat - mean0).T).T
    return corrected[:, 0] if raw.ndim == 1 else corrected


def fit_bias_correction(
    protocol: Protocol,
    family: ProcessFamily,
    dq: OneForm,
    direction,
    magnitude: float,
    shots: int,
    repetitions: int,
    seed: int,
) -> BiasCorrection:
    """Calibrate the scalar estimator response by simulation.

    The offset is the mean estimate at the fiducial point; the response
    slope comes from a central difference across +/- the calibration
    displacement.  Distinct seeds key the three calibration runs.
    """
    direction = np.asarray(direction, dtype=float).reshape(-1)
    q_shift = float(dq.components @ (magnitude * direction))
    if q_shift == 0.0:
        raise ArgumentError("calibration direction does not change the target")
    mean0 = float(np.mean(sample_estimates(protocol, family, np.zeros(direction.size), shots, repetitions, seed)))
    mean_plus = float(
        np.mean(sample_estimates(protocol, family, magnitude * direction, shots, repetitions, seed + 1))
    )
    mean_minus = float(
        np.mean(sample_estimates(protocol, family, -magnitude * direction, shots, repetitions, seed + 2))
    )
    slope = (mean_plus - mean_minus) / (2.0 * q_shift)
    return BiasCorrection(offset=np.array([mean0]), jacobian=np.array([[slope]]))


def fit_bias_polynomial(q_values, mean_errors, stderrs) -> tuple[np.ndarray, np.ndarray]:
    """Weighted least-squares fit of mean error against (q, q^2).

    Returns the coefficient vector (linear, quadratic) and its covariance,
    so the caller can judge whether the linear term is statistically zero.
    """
    q_values = np.asarray(q_values, dtype=float)
    y = np.asarray(mean_errors, dtype=float)
    se = np.asarray(stderrs, dtype=float)
    if q_values.size < 3:
        raise ArgumentError("need at least three calibration points")
    design = np.column_stack([q_values, q_values**2])
    w = 1.0 / se**2
    normal = design.T @ (w[:, None] * design)
    coeffs = np.linalg.solve(normal, design.T @ (w * y))
    covariance = np.linalg.inv(normal)
    return coeffs, covariance


# ---------------------------------------------------------------------------
# Summary reports.


@dataclass(frozen=True)
class EstimatorReport:
    """Empirical performance of an estimator against its bound.

    The raw samples ride along for downstream analysis but stay out of
    the serialized summary.
    """

    q_hat_samples: np.ndarray
    repetitions: int
    shots: int
    mean: float
    empirical_variance: float
    variance_stderr: float
    bound_per_shot: float
    variance_times_shots: float
    z_score: float
    tolerance: float
    within_tolerance: bool
    ccrb_psd: bool | None
    ccrb_min_eigenvalue: float | None
    bias_fit: float | None
    impossible_alarm: bool

    CSV_HEADER = (
        "protocol",
        "dq",
        "shots",
        "repetitions",
        "variance",
        "bound",
        "z_score",
        "seed",
    )

    def to_dict(self) -> dict:
        return {
            "repetitions": self.repetitions,
            "shots": self.shots,
            "mean": self.mean,
            "empirical_variance": self.empirical_variance,
            "variance_stderr": self.variance_stderr,
            "bound_per_shot": self.bound_per_shot,
            "variance_times_shots": self.variance_times_shots,
            "z_score": self.z_score,
            "tolerance": self.tolerance,
            "within_tolerance": self.within_tolerance,
            "ccrb_psd": self.ccrb_psd,
            "ccrb_min_eigenvalue": self.ccrb_min_eigenvalue,
            "bias_fit": self.bias_fit,
            "impossible_alarm": self.impossible_alarm,
        }

    def csv_row(self, protocol_name: str, dq_text: str, seed: int) -> list:
        return [
            protocol_name,
            dq_text,
            self.shots,
            self.repetitions,
            repr(self.empirical_variance),
            repr(self.bound_per_shot),
            repr(self.z_score),
            seed,
        ]


def report(
    q_hat_samples,
    bound_per_shot: float,
    shots: int,
    fisher: FisherMatrix | None = None,
    dq: OneForm | None = None,
    covariance: np.ndarray | None = None,
    tolerance: float = 0.05,
    bias_fit: float | None = None,
) -> EstimatorReport:
    """Summarize estimator samples against the per-shot bound.

    The variance standard error uses the Gaussian chi-squared
    approximation sqrt(2/(R-1)) * variance.  With a Fisher matrix and
    either a full empirical covariance or the target form, the report
    also checks the Cramer-Rao matrix (or marginal) inequality with a
    three-standard-error slack.
    """
    samples = np.asarray(q_hat_samples, dtype=float).reshape(-1)
    reps = samples.size
    if reps < 2:
        raise ArgumentError("need at least two samples to estimate a variance")
    variance = float(np.var(samples, ddof=1))
    stderr = float(np.sqrt(2.0 / (reps - 1)) * variance)
    scaled = variance * shots
    if stderr > 0:
        z = (scaled - bound_per_shot) / (stderr * shots)
    else:
        z = 0.0 if scaled == bound_per_shot else float(np.sign(scaled - bound_per_shot)) * float("inf")
    within = abs(scaled - bound_per_shot) <= tolerance * bound_per_shot
    impossible = reps > 10 and (variance == 0.0 or (scaled < bound_per_shot and z < -5.0))

    ccrb_psd = None
    ccrb_min = None
    if fisher is not None and covariance is not None:
        covariance = np.asarray(covariance, dtype=float)
        if covariance.shape != fisher.entries.shape:
            raise ArgumentError("empirical covariance shape must match the Fisher matrix")
        limit = np.linalg.pinv(fisher.entries, rcond=fisher.rank_tolerance, hermitian=True) / shots
        gap = covariance - limit
        slack = 3.0 * np.sqrt(2.0 / (reps - 1)) * float(np.max(np.diag(covariance)))
        ccrb_min = float(np.linalg.eigvalsh(0.5 * (gap + gap.T)).min())
        ccrb_psd = bool(ccrb_min >= -slack)
    elif fisher is not None and dq is not None:
        marginal = fisher_dual(fisher, dq) / shots
        ccrb_min = float(variance - marginal)
        ccrb_psd = bool(ccrb_min >= -3.0 * stderr)

    return EstimatorReport(
        q_hat_samples=samples,
        repetitions=reps,
        shots=int(shots),
        mean=float(np.mean(samples)),
        empirical_variance=variance,
        variance_stderr=stderr,
        bound_per_shot=float(bound_per_shot),
        variance_times_shots=float(scaled),
        z_score=float(z),
        tolerance=float(tolerance),
        within_tolerance=bool(within),
        ccrb_psd=ccrb_psd,
        ccrb_min_eigenvalue=ccrb_min,
        bias_fit=bias_fit,
        impossible_alarm=bool(impossible),
    )
