"""Dense complex linear algebra over small Hilbert spaces.

Hermitian operators, pure and mixed states, POVMs, Kronecker products,
unitary evolution generated by a Hamiltonian, and the spectral-spread
seminorm.  Everything is a plain dense ``numpy`` array underneath; all
values are immutable after construction and safe to share between
concurrent tasks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, InvariantViolation, ResourceLimitError

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
STATE_NORM_TOL = 1e-12
PROB_SUM_TOL = 1e-9

DEFAULT_MAX_DIM = 2**12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def max_dim() -> int:
    """Hilbert-space dimension cap; override with the QPROC_MAX_DIM env var."""
    return int(os.environ.get("QPROC_MAX_DIM", DEFAULT_MAX_DIM))


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HermitianOperator:
    """A Hermitian matrix on a ``dim``-dimensional Hilbert space."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ArgumentError(f"operator must be a square matrix, got shape {entries.shape}")
        if entries.shape[0] < 1:
            raise ArgumentError("operator dimension must be at least 1")
        defect = np.max(np.abs(entries - entries.conj().T))
        if defect > HERMITICITY_TOL:
            raise InvariantViolation(
                f"matrix is not Hermitian: max |A - A^dag| = {defect:.3e} > {HERMITICITY_TOL:g}"
            )
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and an orthonormal eigenvector matrix."""
        return np.linalg.eigh(self.entries)

    def expectation(self, state: "PureState | DensityOperator") -> float:
        if isinstance(state, PureState):
            return float(np.real(np.vdot(state.amplitudes, self.entries @ state.amplitudes)))
        return float(np.real(np.trace(self.entries @ state.entries)))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if self.dim != other.dim:
            raise ArgumentError("dimension mismatch in operator sum")
        return HermitianOperator(self.entries + other.entries)

    def __rmul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(float(scalar) * self.entries)


@dataclass(frozen=True)
class PureState:
    """A normalized state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 1:
            raise ArgumentError("state vector must have at least one amplitude")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > STATE_NORM_TOL:
            raise InvariantViolation(f"state norm {norm!r} deviates from 1 by more than {STATE_NORM_TOL:g}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """A density matrix: Hermitian, positive semidefinite, unit trace."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ArgumentError(f"density matrix must be square, got shape {entries.shape}")
        defect = np.max(np.abs(entries - entries.conj().T))
        if defect > HERMITICITY_TOL:
            raise InvariantViolation(f"density matrix not Hermitian: defect {defect:.3e}")
        eigs = np.linalg.eigvalsh(entries)
        if eigs.min() < -PSD_TOL:
            raise InvariantViolation(f"density matrix has negative eigenvalue {eigs.min():.3e}")
        tr = np.real(np.trace(entries))
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"density matrix trace {tr!r} deviates from 1")
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Povm:
    """A positive operator-valued measure with named outcomes."""

    elements: tuple[HermitianOperator, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        labels = tuple(str(label) for label in self.labels)
        if not elements:
            raise ArgumentError("POVM needs at least one element")
        if len(labels) != len(elements):
            raise ArgumentError("POVM needs one label per element")
        if len(set(labels)) != len(labels):
            raise ArgumentError("POVM outcome labels must be distinct")
        dim = elements[0].dim
        total = np.zeros((dim, dim), dtype=complex)
        for el in elements:
            if el.dim != dim:
                raise ArgumentError("all POVM elements must share one dimension")
            if np.linalg.eigvalsh(el.entries).min() < -PSD_TOL:
                raise InvariantViolation("POVM element is not positive semidefinite")
            total += el.entries
        defect = np.max(np.abs(total - np.eye(dim)))
        if defect > TRACE_TOL:
            raise InvariantViolation(f"POVM elements sum to identity only within {defect:.3e}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    @classmethod
    def from_basis(cls, vectors: np.ndarray, labels) -> "Povm":
        """Projective POVM built from the columns of an orthonormal basis."""
        vectors = np.asarray(vectors, dtype=complex)
        elements = tuple(
            HermitianOperator(np.outer(vectors[:, k], vectors[:, k].conj()))
            for k in range(vectors.shape[1])
        )
        return cls(elements, tuple(labels))

    def stacked(self) -> np.ndarray:
        """All elements as one (n_outcomes, dim, dim) array."""
        return np.stack([el.entries for el in self.elements])


def identity(dim: int) -> HermitianOperator:
    return HermitianOperator(np.eye(dim, dtype=complex))


def matrix_to_pairs(matrix: np.ndarray) -> list:
    """Complex matrix as row-major nested [re, im] pairs (the JSON wire form)."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(matrix)]


def matrix_from_pairs(nested) -> np.ndarray:
    """Inverse of :func:`matrix_to_pairs`."""
    arr = np.asarray(nested, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ArgumentError("expected a nested array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def tensor(ops: list[HermitianOperator]) -> HermitianOperator:
    """Kronecker product of the operators, in list order."""
    if not ops:
        raise ArgumentError("tensor product of an empty operator list")
    out = ops[0].entries
    for op in ops[1:]:
        out = np.kron(out, op.entries)
    return HermitianOperator(out)


def pauli_z_generators(n_qubits: int) -> list[HermitianOperator]:
    """Single-qubit z rotations on an n-qubit register.

    Generator j is one half of the Pauli z operator acting on qubit j
    (qubit 1 leftmost in the Kronecker ordering) and the identity on the
    rest.  All generators commute.
    """
    if n_qubits < 1:
        raise ArgumentError("need at least one qubit")
    dim = 2**n_qubits
    cap = max_dim()
    if dim > cap:
        raise ResourceLimitError(f"dimension 2^{n_qubits} = {dim} exceeds the cap {cap}")
    gens = []
    for j in range(n_qubits):
        diag = np.ones(1)
        for k in range(n_qubits):
            factor = np.array([1.0, -1.0]) if k == j else np.array([1.0, 1.0])
            diag = np.kron(diag, factor)
        gens.append(HermitianOperator(np.diag(0.5 * diag).astype(complex)))
    return gens


def seminorm(op: HermitianOperator) -> float:
    """Spectral spread: largest minus smallest eigenvalue."""
    eigs = np.linalg.eigvalsh(op.entries)
    return float(eigs[-1] - eigs[0])


def evolve_pure(state: PureState, hamiltonian: HermitianOperator) -> PureState:
    """Apply exp(-iH) to a pure state via the eigendecomposition of H.

    The eigendecomposition route keeps the evolution exactly unitary, so
    the output renormalizes only round-off.
    """
    if state.dim != hamiltonian.dim:
        raise ArgumentError(f"state dim {state.dim} != operator dim {hamiltonian.dim}")
    eigs, vecs = hamiltonian.eigh()
    phases = np.exp(-1j * eigs)
    amps = vecs @ (phases * (vecs.conj().T @ state.amplitudes))
    amps = amps / np.linalg.norm(amps)
    return PureState(amps)


def evolve_density(rho: DensityOperator, hamiltonian: HermitianOperator) -> DensityOperator:
    """Apply exp(-iH) rho exp(iH) via the eigendecomposition of H."""
    if rho.dim != hamiltonian.dim:
        raise ArgumentError(f"state dim {rho.dim} != operator dim {hamiltonian.dim}")
    eigs, vecs = hamiltonian.eigh()
    unitary = vecs @ (np.exp(-1j * eigs)[:, None] * vecs.conj().T)
    out = unitary @ rho.entries @ unitary.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityOperator(out)


def born_probabilities(rho: DensityOperator, povm: Povm) -> dict[str, float]:
    """Outcome distribution p(x) = tr(E_x rho) over the POVM labels."""
    if rho.dim != povm.dim:
        raise ArgumentError(f"state dim {rho.dim} != POVM dim {povm.dim}")
    probs = np.real(np.einsum("xij,ji->x", povm.stacked(), rho.entries))
    probs = np.clip(probs, 0.0, 1.0)
    total = probs.sum()
    if abs(total - 1.0) >= PROB_SUM_TOL:
        raise InvariantViolation(f"Born probabilities sum to {total!r}; not a distribution")
    probs = probs / total
    return dict(zip(povm.labels, probs.tolist()))
