"""Quantum side of the bound chain.

Symmetric-logarithmic-derivative solve, quantum Fisher information for
pure and mixed states, classical Fisher matrices from a measurement
model, and verification of the ordering

    F_bb  <=  Q_bb  <=  (spectral spread of the generator)^2.

The module also ships brute-force grids over single-qubit states and
projective measurements, used to check attainability of the quantum
bound empirically rather than by citation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ArgumentError,
    ChainViolation,
    InconsistentDerivativeError,
    InvariantViolation,
)
from .operators import DensityOperator, HermitianOperator, Povm, PureState
from .tangent import FisherMatrix

SLD_TRACE_TOL = 1e-10
SLD_RESIDUAL_TOL = 1e-9
SLD_EIGENVALUE_CUTOFF = 1e-10
DEFAULT_STEP = 1e-5
DEFAULT_P_FLOOR = 1e-12
CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class SldResult:
    """Symmetric logarithmic derivative together with its solve quality."""

    operator: HermitianOperator
    residual: float

    def __post_init__(self):
        if self.residual > SLD_RESIDUAL_TOL:
            raise InvariantViolation(f"SLD residual {self.residual:.3e} exceeds {SLD_RESIDUAL_TOL:g}")


def sld(rho: DensityOperator, drho: HermitianOperator) -> SldResult:
    """Solve (rho L + L rho)/2 = drho in the eigenbasis of rho.

    Matrix elements between eigenvectors whose eigenvalues sum to
    (numerically) zero are left at zero: the projection of L onto the
    null space of rho never enters any probability, so it is a gauge
    choice, not information.  A derivative with genuine support there is
    inconsistent with rho and raises.
    """
    if rho.dim != drho.dim:
        raise ArgumentError("state and derivative dimensions differ")
    trace = complex(np.trace(drho.entries))
    if abs(trace) > SLD_TRACE_TOL:
        raise ArgumentError(f"state derivative must be traceless, got trace {trace!r}")
    eigs, vecs = np.linalg.eigh(rho.entries)
    d_tilde = vecs.conj().T @ drho.entries @ vecs
    denom = eigs[:, None] + eigs[None, :]
    solvable = denom > SLD_EIGENVALUE_CUTOFF
    bad = np.max(np.abs(np.where(solvable, 0.0, d_tilde)))
    if bad > SLD_RESIDUAL_TOL:
        raise InconsistentDerivativeError(
            f"derivative has weight {bad:.3e} where rho has no support; "
            "the Lyapunov equation has no solution there"
        )
    l_tilde = np.where(solvable, 2.0 * d_tilde / np.where(solvable, denom, 1.0), 0.0)
    l_matrix = vecs @ l_tilde @ vecs.conj().T
    l_matrix = 0.5 * (l_matrix + l_matrix.conj().T)
    operator = HermitianOperator(l_matrix)
    defect = 0.5 * (rho.entries @ l_matrix + l_matrix @ rho.entries) - drho.entries
    residual = float(np.max(np.abs(defect)))
    mean = np.real(np.trace(rho.entries @ l_matrix))
    if abs(mean) > 1e-9:
        raise InvariantViolation(f"SLD has nonzero mean {mean:.3e} in the state")
    return SldResult(operator=operator, residual=residual)


def qfi_pure(psi: PureState, generator: HermitianOperator) -> float:
    """Quantum Fisher information 4 Var(Y) of a pure state under exp(-i phi Y)."""
    if psi.dim != generator.dim:
        raise ArgumentError("state and generator dimensions differ")
    amps = psi.amplitudes
    g_psi = generator.entries @ amps
    mean = np.real(np.vdot(amps, g_psi))
    second = np.real(np.vdot(g_psi, g_psi))
    return float(4.0 * (second - mean**2))


def qfi_from_sld(rho: DensityOperator, sld_operator: HermitianOperator) -> float:
    """Quantum Fisher information tr(rho L^2) from a precomputed SLD."""
    if rho.dim != sld_operator.dim:
        raise ArgumentError("state and SLD dimensions differ")
    l_entries = sld_operator.entries
    return float(np.real(np.trace(rho.entries @ l_entries @ l_entries)))


@dataclass(frozen=True)
class MeasurementModel:
    """Parametrized outcome distribution p(x | theta).

    ``probabilities`` maps a parameter vector to the outcome
    distribution.  When ``jacobian`` is supplied it must return the
    (n_outcomes, n_params) array of derivatives; otherwise central
    differences with ``step`` are used.
    """

    probabilities: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    fiducial: np.ndarray | None = None
    step: float = DEFAULT_STEP
    p_floor: float = DEFAULT_P_FLOOR

    def distribution(self, theta: np.ndarray) -> np.ndarray:
        probs = np.asarray(self.probabilities(theta), dtype=float).reshape(-1)
        if probs.min() < -1e-12:
            raise InvariantViolation(f"model produced negative probability {probs.min():.3e}")
        probs = np.clip(probs, 0.0, None)
        total = probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise InvariantViolation(f"model probabilities sum to {total!r}")
        return probs


def classical_fisher(model: MeasurementModel, n_params: int) -> FisherMatrix:
    """Fisher matrix sum_x (d_j p)(d_k p)/p at the fiducial point.

    Outcomes below ``p_floor`` are excluded: for the smooth models in
    scope a vanishing probability at an interior point forces a
    vanishing derivative, so those outcomes carry no information.
    """
    theta0 = np.zeros(n_params) if model.fiducial is None else np.asarray(model.fiducial, dtype=float)
    if theta0.size != n_params:
        raise ArgumentError("fiducial point length does not match parameter count")
    p0 = model.distribution(theta0)
    if model.jacobian is not None:
        jac = np.asarray(model.jacobian(theta0), dtype=float)
        if jac.shape != (p0.size, n_params):
            raise ArgumentError(f"jacobian shape {jac.shape} != {(p0.size, n_params)}")
    else:
        h = model.step
        cols = []
        for j in range(n_params):
            shift = np.zeros(n_params)
            shift[j] = h
            cols.append((model.distribution(theta0 + shift) - model.distribution(theta0 - shift)) / (2 * h))
        jac = np.column_stack(cols)
    keep = p0 > model.p_floor
    dkeep = jac[keep]
    fisher = (dkeep / p0[keep, None]).T @ dkeep
    fisher = 0.5 * (fisher + fisher.T)
    return FisherMatrix(fisher)


def sinusoid_model(form, p_floor: float = DEFAULT_P_FLOOR) -> MeasurementModel:
    """Two-outcome model p(+/-) = (1 +/- sin(form . theta))/2 with analytic derivatives."""
    coeffs = np.asarray(form, dtype=float).reshape(-1)

    def probs(theta):
        s = float(coeffs @ np.asarray(theta, dtype=float))
        return np.array([0.5 * (1 + np.sin(s)), 0.5 * (1 - np.sin(s))])

    def jac(theta):
        s = float(coeffs @ np.asarray(theta, dtype=float))
        row = 0.5 * np.cos(s) * coeffs
        return np.vstack([row, -row])

    return MeasurementModel(probabilities=probs, jacobian=jac, fiducial=np.zeros(coeffs.size), p_floor=p_floor)


@dataclass(frozen=True)
class ChainReport:
    """Slack in each link of the ordered bound chain."""

    fisher: float
    quantum_fisher: float
    norm: float
    slack_fisher: float
    slack_quantum: float


def verify_chain(f_bb: float, q_bb: float, norm: float) -> ChainReport:
    """Check F_bb <= Q_bb <= norm^2 and report the slack in each link."""
    if min(f_bb, q_bb, norm) < 0:
        raise ArgumentError("chain quantities must be nonnegative")
    slack_fisher = q_bb - f_bb
    slack_quantum = norm**2 - q_bb
    if slack_fisher < -CHAIN_TOL:
        raise ChainViolation(
            "fisher<=quantum",
            f"classical Fisher {f_bb!r} exceeds quantum Fisher {q_bb!r}",
        )
    if slack_quantum < -CHAIN_TOL:
        raise ChainViolation(
            "quantum<=norm",
            f"quantum Fisher {q_bb!r} exceeds squared norm {norm**2!r}",
        )
    return ChainReport(
        fisher=float(f_bb),
        quantum_fisher=float(q_bb),
        norm=float(norm),
        slack_fisher=float(slack_fisher),
        slack_quantum=float(slack_quantum),
    )


# ---------------------------------------------------------------------------
# Brute-force grids over single-qubit states and projective measurements.


def bloch_direction_grid(count: int) -> np.ndarray:
    """`count` directions spread quasi-uniformly over the sphere (Fibonacci)."""
    if count < 1:
        raise ArgumentError("need at least one direction")
    i = np.arange(count)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    z = 1.0 - 2.0 * (i + 0.5) / count
    radius = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
    angle = golden * i
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle), z])


def qubit_state(direction) -> PureState:
    """The +1 eigenstate of n . sigma for a unit Bloch direction n."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return PureState(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))


def _qubit_basis_vectors(directions: np.ndarray) -> np.ndarray:
    """(count, 2 outcomes, 2 dim) orthonormal basis pairs for each direction."""
    n = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    theta = np.arccos(np.clip(n[:, 2], -1.0, 1.0))
    phi = np.arctan2(n[:, 1], n[:, 0])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    plus = np.stack([c, np.exp(1j * phi) * s], axis=1)
    minus = np.stack([-s, np.exp(1j * phi) * c], axis=1)
    return np.stack([plus, minus], axis=1)


def qubit_projective_povm(direction) -> Povm:
    """Two-outcome projective measurement along a Bloch direction."""
    basis = _qubit_basis_vectors(np.asarray(direction, dtype=float)[None, :])[0]
    return Povm.from_basis(basis.T, ("+", "-"))


def qubit_fisher_scan(
    states: np.ndarray,
    generator: HermitianOperator,
    directions: np.ndarray,
    p_floor: float = DEFAULT_P_FLOOR,
) -> np.ndarray:
    """Scalar classical Fisher at the fiducial point for every
    (state, projective measurement) pair on a single qubit.

    ``states`` is (n_states, 2) of amplitudes; returns an array of shape
    (n_states, n_directions).  Derivatives are exact: the derivative of
    |<e|exp(-i phi Y)|psi>|^2 at phi = 0 is 2 Re[conj(<e|psi>) <e|-iY|psi>].
    """
    states = np.asarray(states, dtype=complex)
    bases = _qubit_basis_vectors(np.asarray(directions, dtype=float))
    d_states = (-1j * generator.entries) @ states.T  # (2, n_states)
    amp = np.einsum("dov,vs->dos", bases.conj(), states.T)
    damp = np.einsum("dov,vs->dos", bases.conj(), d_states)
    p = np.abs(amp) ** 2
    dp = 2.0 * np.real(np.conj(amp) * damp)
    contrib = np.where(p > p_floor, dp**2 / np.where(p > p_floor, p, 1.0), 0.0)
    return contrib.sum(axis=1).T  # (n_states, n_directions)


def brute_force_qubit_fisher(
    psi: PureState, generator: HermitianOperator, n_directions: int
) -> tuple[float, np.ndarray]:
    """Maximum classical Fisher over a grid of projective qubit measurements.

    Returns the maximum and the direction achieving it.
    """
    if psi.dim != 2 or generator.dim != 2:
        raise ArgumentError("brute force scan is specific to single qubits")
    directions = bloch_direction_grid(n_directions)
    values = qubit_fisher_scan(psi.amplitudes[None, :], generator, directions)[0]
    best = int(np.argmax(values))
    return float(values[best]), directions[best]
