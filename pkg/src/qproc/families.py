"""Process families, the process norm, and its dual.

For a unitary family the norm of a direction b is the spectral spread of
the generator b^j X_j; its unit ball is a cross-polytope for commuting
Pauli-z generators, the Euclidean ball for the single-qubit Bloch
family, and develops rounded sides with persistent cusps for the
partially commuting pair family.  The dual norm of the target form gives
the attainable variance bound, reached by the shortest vector advancing
one unit of the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ConvergenceError, InvariantViolation, UnsupportedDimensionError
from .operators import SIGMA_X, SIGMA_Y, SIGMA_Z, HermitianOperator, pauli_z_generators, seminorm, tensor
from .tangent import OneForm, TangentVector, canonicalize, pair

CORNER_GAP = 1e-6
CONVERGENCE_TOL = 1e-10
STALL_WINDOW = 50
MAX_ITERATIONS = 2000


class ProcessFamily:
    """A parametrized unitary family given by its Hamiltonian generators."""

    kind = "custom-unitary"

    def __init__(self, generators: list[HermitianOperator], name: str | None = None):
        if not generators:
            raise ArgumentError("a process family needs at least one generator")
        dim = generators[0].dim
        for gen in generators:
            if gen.dim != dim:
                raise InvariantViolation("family generators must share one dimension")
        self._generators = tuple(generators)
        if name:
            self.kind = name

    @property
    def n_params(self) -> int:
        return len(self._generators)

    @property
    def dim(self) -> int:
        return self._generators[0].dim

    @property
    def generators(self) -> tuple[HermitianOperator, ...]:
        return self._generators

    def generator(self, b) -> HermitianOperator:
        """The change generator Y = b^j X_j for a tangent direction b."""
        comps = _components(b)
        if comps.size != self.n_params:
            raise ArgumentError(f"direction length {comps.size} != parameter count {self.n_params}")
        entries = np.zeros((self.dim, self.dim), dtype=complex)
        for coeff, gen in zip(comps, self._generators):
            entries += coeff * gen.entries
        return HermitianOperator(entries)

    def hamiltonian(self, theta) -> HermitianOperator:
        return self.generator(theta)

    def norm(self, b) -> float:
        """Process norm of the direction: spectral spread of its generator."""
        return seminorm(self.generator(b))

    def describe(self) -> dict:
        return {"kind": self.kind, "n_params": self.n_params, "dim": self.dim}


class PauliZFamily(ProcessFamily):
    """Commuting z rotations on independent qubits; the norm is the 1-norm."""

    kind = "pauli-z"

    def __init__(self, n_qubits: int):
        super().__init__(pauli_z_generators(n_qubits))
        self.n_qubits = n_qubits

    def norm(self, b) -> float:
        comps = _components(b)
        if comps.size != self.n_params:
            raise ArgumentError("direction length does not match qubit count")
        return float(np.sum(np.abs(comps)))


class BlochFamily(ProcessFamily):
    """All rotations of a single qubit; the norm is the Euclidean length."""

    kind = "bloch"

    def __init__(self):
        super().__init__(
            [
                HermitianOperator(0.5 * SIGMA_X),
                HermitianOperator(0.5 * SIGMA_Y),
                HermitianOperator(0.5 * SIGMA_Z),
            ]
        )

    def norm(self, b) -> float:
        comps = _components(b)
        if comps.size != 3:
            raise ArgumentError("Bloch directions have three components")
        return float(np.linalg.norm(comps))


class EpsilonPairFamily(ProcessFamily):
    """Two-qubit pair whose generators fail to commute by a tunable amount.

    At epsilon = 0 the unit ball is the cross-polytope of the commuting
    case; growing epsilon rounds the two side corners while the cusps on
    the second axis persist.
    """

    kind = "epsilon-pair"

    def __init__(self, epsilon: float):
        if epsilon < 0:
            raise ArgumentError("epsilon must be nonnegative")
        self.epsilon = float(epsilon)
        eye = HermitianOperator(np.eye(2, dtype=complex))
        first = tensor([HermitianOperator(0.5 * SIGMA_Z), eye]).entries + np.sqrt(
            2 * self.epsilon
        ) * tensor([eye, HermitianOperator(0.5 * SIGMA_X)]).entries
        second = tensor([eye, HermitianOperator(0.5 * SIGMA_Z)]).entries
        super().__init__([HermitianOperator(first), HermitianOperator(second)])

    def norm(self, b) -> float:
        comps = _components(b)
        if comps.size != 2:
            raise ArgumentError("pair directions have two components")
        return float(abs(comps[0]) + np.sqrt(comps[1] ** 2 + 2 * self.epsilon * comps[0] ** 2))


def _components(b) -> np.ndarray:
    if isinstance(b, TangentVector):
        return b.components
    if isinstance(b, OneForm):
        return b.components
    return np.asarray(b, dtype=float).reshape(-1)


def generator(family: ProcessFamily, b) -> HermitianOperator:
    return family.generator(b)


def process_norm(family: ProcessFamily, b) -> float:
    return family.norm(b)


def cross_polytope_decomposition(canonical_components) -> tuple[np.ndarray, np.ndarray]:
    """Faces adjacent to the leading vertex and the mixing weights.

    For a canonical form c (1 = c_1 >= |c_2| >= ... > 0) returns sign
    strings z^(k) (rows) and weights p_k with sum_k p_k z^(k) = c: the
    first string takes the signs of c, string k flips every sign from
    slot k onward, and the weights are p_1 = (1 + |c_m|)/2,
    p_k = (|c_{k-1}| - |c_k|)/2.
    """
    c = np.asarray(canonical_components, dtype=float).reshape(-1)
    m = c.size
    signs = np.where(c >= 0, 1, -1).astype(int)
    strings = np.tile(signs, (m, 1))
    for k in range(1, m):
        strings[k, k:] *= -1
    mags = np.abs(c)
    weights = np.empty(m)
    weights[0] = 0.5 * (1.0 + mags[-1])
    if m > 1:
        weights[1:] = 0.5 * (mags[:-1] - mags[1:])
    return strings, weights


@dataclass(frozen=True)
class NormMinimizer:
    """Shortest direction advancing one unit of the target, and the bound.

    ``dual_norm`` squared is the attainable variance bound per
    interaction; ``at_corner`` flags a kink of the unit surface at the
    minimizer, where saturating measurements must be mixed
    probabilistically.
    """

    vector: TangentVector
    norm: float
    dual_norm: float
    at_corner: bool
    adjacent_faces: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if abs(self.dual_norm * self.norm - 1.0) > 1e-10:
            raise InvariantViolation("dual norm must invert the minimal norm")


def minimize_norm(family: ProcessFamily, dq: OneForm) -> NormMinimizer:
    """Minimize the process norm over the plane of unit advance in q.

    Closed-form solutions cover the commuting and Bloch families; the
    partially commuting pair and custom families run a projected descent
    over the constraint plane with golden-section refinement.
    """
    q = dq.components
    if q.size != family.n_params:
        raise ArgumentError("form length does not match the family parameter count")
    if not np.any(q != 0.0):
        raise ArgumentError("cannot minimize against the zero form")

    if isinstance(family, PauliZFamily):
        result = _polytope_minimizer(q)
    elif isinstance(family, BlochFamily):
        vec = q / (q @ q)
        norm = float(np.linalg.norm(vec))
        result = NormMinimizer(
            vector=TangentVector(vec),
            norm=norm,
            dual_norm=1.0 / norm,
            at_corner=False,
        )
    else:
        result = _numeric_minimizer(family, q)
    advance = pair(dq, result.vector)
    if abs(advance - 1.0) > 1e-9:
        raise InvariantViolation(f"minimizer advances {advance!r} units of the target, not one")
    return result


def _polytope_minimizer(q: np.ndarray) -> NormMinimizer:
    canonical = canonicalize(OneForm(q))
    lead_index = canonical.permutation[0]
    vec = np.zeros(q.size)
    vec[lead_index] = 1.0 / q[lead_index]
    mags = np.abs(canonical.canonical.components)
    at_corner = bool(np.any(np.abs(mags - 1.0) > 1e-12))
    faces = None
    if at_corner:
        strings, _ = cross_polytope_decomposition(canonical.canonical.components)
        faces = tuple(tuple(int(s) for s in canonical.embed_signs(row)) for row in strings)
    norm = float(np.abs(vec).sum())
    return NormMinimizer(
        vector=TangentVector(vec),
        norm=norm,
        dual_norm=1.0 / norm,
        at_corner=at_corner,
        adjacent_faces=faces,
    )


def dual_norm(family: ProcessFamily, dq: OneForm) -> float:
    """Dual process norm of the target form; zero for the zero form."""
    if not np.any(dq.components != 0.0):
        return 0.0
    return minimize_norm(family, dq).dual_norm


# ---------------------------------------------------------------------------
# Numerical minimization over the constraint plane.


def _null_space_basis(q: np.ndarray) -> np.ndarray:
    _, _, vt = np.linalg.svd(q[None, :])
    return vt[1:].T


def _golden_section(f, lo: float, hi: float, tol: float = 1e-13, max_iter: int = 200):
    """Minimize a unimodal scalar function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a < tol * (1.0 + abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _line_minimize(f, span: float):
    """Minimize f(s) for s in an expanding symmetric bracket around 0."""
    s = span
    f0 = f(0.0)
    for _ in range(60):
        if f(s) > f0 and f(-s) > f0:
            break
        s *= 2.0
    return _golden_section(f, -s, s)


def _norm_subgradient(family: ProcessFamily, b: np.ndarray) -> np.ndarray:
    eigs, vecs = family.generator(b).eigh()
    vmax = vecs[:, -1]
    vmin = vecs[:, 0]
    return np.array(
        [
            float(np.real(np.vdot(vmax, gen.entries @ vmax) - np.vdot(vmin, gen.entries @ vmin)))
            for gen in family.generators
        ]
    )


def _numeric_minimizer(family: ProcessFamily, q: np.ndarray) -> NormMinimizer:
    n = q.size
    base = q / (q @ q)
    if n == 1:
        vec = base
        norm = family.norm(vec)
        return NormMinimizer(
            vector=TangentVector(vec),
            norm=norm,
            dual_norm=1.0 / norm,
            at_corner=False,
        )
    plane = _null_space_basis(q)
    rng = np.random.default_rng(0)

    def cost(t: np.ndarray) -> float:
        return family.norm(base + plane @ t)

    starts = [np.zeros(n - 1)]
    for j in range(n):
        if q[j] != 0.0:
            for sign in (1.0, -1.0):
                b = np.zeros(n)
                b[j] = sign / q[j]
                starts.append(plane.T @ (b - base))
    while len(starts) < 2 * n + 2:
        starts.append(rng.standard_normal(n - 1))

    candidates = []
    for start in starts:
        t, value = _descend(family, cost, start, plane, base, rng)
        candidates.append((value, base + plane @ t))
    best_value = min(value for value, _ in candidates)
    tied = sorted(
        (tuple(vec) for value, vec in candidates if value <= best_value + 1e-9),
    )
    vec = np.array(tied[0])
    norm = family.norm(vec)
    at_corner = _corner_test(family, vec, plane)
    faces = None
    if at_corner and isinstance(family, EpsilonPairFamily):
        canonical = canonicalize(OneForm(q))
        strings, _ = cross_polytope_decomposition(canonical.canonical.components)
        faces = tuple(tuple(int(s) for s in canonical.embed_signs(row)) for row in strings)
    return NormMinimizer(
        vector=TangentVector(vec),
        norm=norm,
        dual_norm=1.0 / norm,
        at_corner=at_corner,
        adjacent_faces=faces,
    )


def _descend(family, cost, start, plane, base, rng):
    """Projected descent: golden-section line searches along the
    subgradient and random plane directions until improvement stalls."""
    t = np.array(start, dtype=float)
    value = cost(t)
    stalled = 0
    k = plane.shape[1]
    for iteration in range(MAX_ITERATIONS):
        directions = []
        grad = _norm_subgradient(family, base + plane @ t)
        reduced = plane.T @ grad
        if np.linalg.norm(reduced) > 1e-14:
            directions.append(-reduced / np.linalg.norm(reduced))
        directions.extend(np.eye(k))
        if k > 1:
            extra = rng.standard_normal((2, k))
            directions.extend(extra / np.linalg.norm(extra, axis=1, keepdims=True))
        best_step, best_value = None, value
        for direction in directions:
            s, candidate = _line_minimize(lambda s: cost(t + s * direction), 0.25 * (1 + np.linalg.norm(t)))
            if candidate < best_value - 1e-16:
                best_step, best_value = s * direction, candidate
        if best_step is None or value - best_value < CONVERGENCE_TOL:
            stalled += 1
            if stalled >= STALL_WINDOW or best_step is None:
                if best_step is not None:
                    t, value = t + best_step, best_value
                return t, value
        else:
            stalled = 0
        if best_step is not None:
            t, value = t + best_step, best_value
    raise ConvergenceError(
        f"norm minimization did not converge in {MAX_ITERATIONS} iterations",
        best=TangentVector(base + plane @ t),
    )


def _corner_test(family, vec: np.ndarray, plane: np.ndarray, h: float = 1e-7) -> bool:
    """Subdifferential width test: a kink shows one-sided directional
    derivatives along the constraint plane that do not cancel."""
    f0 = family.norm(vec)
    width = 0.0
    directions = list(plane.T)
    if plane.shape[1] > 1:
        rng = np.random.default_rng(1)
        extra = rng.standard_normal((3, plane.shape[1]))
        directions.extend((plane @ (d / np.linalg.norm(d)) for d in extra))
    for direction in directions:
        forward = (family.norm(vec + h * direction) - f0) / h
        backward = (family.norm(vec - h * direction) - f0) / h
        width = max(width, forward + backward)
    return width > CORNER_GAP


# ---------------------------------------------------------------------------
# Unit-ball geometry export.


@dataclass(frozen=True)
class GeometryExport:
    """Sampled unit surface of a process norm, plus exact polytope vertices."""

    norm_name: str
    samples: np.ndarray
    vertices: np.ndarray

    def to_dict(self) -> dict:
        return {
            "norm": self.norm_name,
            "vertices": [list(map(float, v)) for v in self.vertices],
            "samples": [list(map(float, s)) for s in self.samples],
        }


def unit_ball_mesh(family: ProcessFamily, resolution: int) -> GeometryExport:
    """Scale rays of a uniform sphere sampling onto the unit norm surface."""
    if resolution < 1:
        raise ArgumentError("resolution must be positive")
    n = family.n_params
    if n == 2:
        angles = 2 * np.pi * np.arange(resolution) / resolution
        rays = np.column_stack([np.cos(angles), np.sin(angles)])
    elif n == 3:
        i = np.arange(resolution)
        golden = np.pi * (3.0 - np.sqrt(5.0))
        z = 1.0 - 2.0 * (i + 0.5) / resolution
        radius = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
        rays = np.column_stack([radius * np.cos(golden * i), radius * np.sin(golden * i), z])
    else:
        raise UnsupportedDimensionError(f"mesh export supports 2 or 3 parameters, not {n}")
    samples = np.array([ray / family.norm(ray) for ray in rays])
    if isinstance(family, PauliZFamily):
        vertices = np.concatenate([np.eye(n), -np.eye(n)])
    else:
        vertices = np.zeros((0, n))
    return GeometryExport(norm_name=family.kind, samples=samples, vertices=vertices)
