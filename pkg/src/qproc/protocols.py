"""Explicit measurement protocols saturating the process bound.

Hyperface and hyperedge measurements prepare Schroedinger-cat
superpositions of opposite computational basis states and read them in
the conjugate cat basis; the corner strategy mixes the hyperfaces
adjacent to a polytope vertex with weights built from the ordered
target coefficients; the ancilla ("zoo") construction spreads one
protocol over many faces at once; and the Bloch protocol is ordinary
single-qubit interferometry along the target axis.

Every constructor records, per branch, the linear combination of
parameters whose sine the branch reads and the coefficient with which
that readout enters the target, which is all an estimator downstream
needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ArgumentError, InvariantViolation, UnsupportedProtocolError
from .families import (
    BlochFamily,
    EpsilonPairFamily,
    PauliZFamily,
    ProcessFamily,
    cross_polytope_decomposition,
)
from .operators import (
    SIGMA_X,
    SIGMA_Y,
    DensityOperator,
    HermitianOperator,
    Povm,
    PureState,
    matrix_to_pairs,
    tensor,
)
from .tangent import FisherMatrix, OneForm, TangentVector, canonicalize, pair

WEIGHT_SUM_TOL = 1e-12
WEIGHT_FLOOR = 1e-15
DEFAULT_STEP = 1e-5
DEFAULT_P_FLOOR = 1e-12


@dataclass(frozen=True)
class SignString:
    """A string over {+1, 0, -1} labeling faces and edges of the cross-polytope."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise ArgumentError("sign string must be nonempty")
        if any(e not in (-1, 0, 1) for e in entries):
            raise ArgumentError("sign string entries must be -1, 0, or +1")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, value) -> "SignString":
        if isinstance(value, SignString):
            return value
        if isinstance(value, str):
            table = {"+": 1, "-": -1, "0": 0, "1": 1}
            try:
                return cls(tuple(table[ch] for ch in value))
            except KeyError as exc:
                raise ArgumentError(f"cannot parse sign string {value!r}") from exc
        return cls(tuple(value))

    @property
    def has_zeros(self) -> bool:
        return 0 in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return "".join("+" if e > 0 else "-" if e < 0 else "0" for e in self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


@dataclass(frozen=True)
class Branch:
    """One deterministic protocol inside a probabilistic mixture.

    ``readout_form`` is the combination s of parameters whose sine the
    branch estimates; ``estimator_weight`` is the coefficient of s in the
    target, so that the target decomposes as sum_n estimator_weight_n s_n
    across branches.
    """

    weight: float
    fiducial: PureState | DensityOperator
    measurement: Povm
    readout_form: OneForm | None = None
    estimator_weight: float | None = None
    sign_string: SignString | None = None

    def __post_init__(self):
        if not (0.0 <= self.weight <= 1.0 + 1e-12):
            raise ArgumentError(f"branch weight {self.weight!r} outside [0, 1]")
        if self.fiducial.dim != self.measurement.dim:
            raise ArgumentError("branch state and measurement dimensions differ")

    def density_entries(self) -> np.ndarray:
        if isinstance(self.fiducial, PureState):
            return np.outer(self.fiducial.amplitudes, self.fiducial.amplitudes.conj())
        return self.fiducial.entries


@dataclass(frozen=True)
class Protocol:
    """A probabilistic mixture of preparation/measurement branches."""

    kind: str
    branches: tuple[Branch, ...]
    family_dim: int

    def __post_init__(self):
        if not self.branches:
            raise ArgumentError("protocol needs at least one branch")
        total = sum(branch.weight for branch in self.branches)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InvariantViolation(f"branch weights sum to {total!r}")
        for branch in self.branches:
            dim = branch.fiducial.dim
            if dim not in (self.family_dim, 2 * self.family_dim):
                raise ArgumentError(
                    f"branch dimension {dim} matches neither the family dimension "
                    f"{self.family_dim} nor its single-ancilla extension"
                )

    @property
    def n_params(self) -> int:
        for branch in self.branches:
            if branch.readout_form is not None:
                return len(branch.readout_form)
        raise ArgumentError("protocol carries no readout forms")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "family_dim": self.family_dim,
            "branches": [_branch_to_dict(branch) for branch in self.branches],
        }


def _branch_to_dict(branch: Branch) -> dict:
    if isinstance(branch.fiducial, PureState):
        fiducial = {
            "type": "pure",
            "amplitudes": [[float(z.real), float(z.imag)] for z in branch.fiducial.amplitudes],
        }
    else:
        fiducial = {"type": "mixed", "entries": matrix_to_pairs(branch.fiducial.entries)}
    return {
        "weight": float(branch.weight),
        "fiducial": fiducial,
        "measurement": {
            "labels": list(branch.measurement.labels),
            "elements": [matrix_to_pairs(el.entries) for el in branch.measurement.elements],
        },
        "readout_form": None
        if branch.readout_form is None
        else [float(x) for x in branch.readout_form.components],
        "estimator_weight": None if branch.estimator_weight is None else float(branch.estimator_weight),
        "sign_string": None if branch.sign_string is None else str(branch.sign_string),
    }


# ---------------------------------------------------------------------------
# Cat-state machinery.


def _basis_index(signs: np.ndarray) -> int:
    """Computational index of the product state with the given z signs."""
    index = 0
    for s in signs:
        index = (index << 1) | (0 if s > 0 else 1)
    return index


def _cat_pair_branch(
    idx_plus: int,
    idx_minus: int,
    dim: int,
    readout: np.ndarray,
    weight: float,
    estimator_weight: float,
    sign_string: SignString,
) -> Branch:
    """Branch preparing (|a> + |b>)/sqrt2 and reading the conjugate pair.

    The measurement basis holds the two conjugate superpositions plus the
    untouched computational basis of the orthogonal complement; the extra
    outcomes never fire for this fiducial but keep the POVM complete.
    """
    cat = np.zeros(dim, dtype=complex)
    cat[idx_plus] = 1 / np.sqrt(2)
    cat[idx_minus] = 1 / np.sqrt(2)
    plus = np.zeros(dim, dtype=complex)
    plus[idx_plus] = 1 / np.sqrt(2)
    plus[idx_minus] = 1j / np.sqrt(2)
    minus = np.zeros(dim, dtype=complex)
    minus[idx_plus] = 1 / np.sqrt(2)
    minus[idx_minus] = -1j / np.sqrt(2)
    rest = [k for k in range(dim) if k not in (idx_plus, idx_minus)]
    basis = np.zeros((dim, dim), dtype=complex)
    basis[:, 0] = plus
    basis[:, 1] = minus
    for col, k in enumerate(rest, start=2):
        basis[k, col] = 1.0
    labels = ["+", "-"] + [f"null{k}" for k in rest]
    return Branch(
        weight=weight,
        fiducial=PureState(cat),
        measurement=Povm.from_basis(basis, labels),
        readout_form=OneForm(readout),
        estimator_weight=estimator_weight,
        sign_string=sign_string,
    )


def _edge_branch(signs: np.ndarray, weight: float, estimator_weight: float) -> Branch:
    """Cat branch for a face or edge string; zero slots sit in |+1>."""
    signs = np.asarray(signs, dtype=int)
    filled_plus = np.where(signs == 0, 1, signs)
    filled_minus = np.where(signs == 0, 1, -signs)
    dim = 2 ** signs.size
    return _cat_pair_branch(
        _basis_index(filled_plus),
        _basis_index(filled_minus),
        dim,
        signs.astype(float),
        weight,
        estimator_weight,
        SignString(tuple(int(s) for s in signs)),
    )


def hyperface_protocol(z) -> Protocol:
    """Optimal deterministic protocol for a target aligned with one face.

    Prepares the cat superposition of the two product states singled out
    by the sign string, reads it in the conjugate-cat basis, and sees
    outcome probabilities (1 +/- sin(z_j theta^j))/2, for an information
    matrix equal to the outer product of the string with itself.
    """
    z = SignString.parse(z)
    if z.has_zeros:
        raise ArgumentError("face strings contain no zeros; use hyperedge_protocol instead")
    branch = _edge_branch(z.as_array().astype(int), weight=1.0, estimator_weight=1.0)
    return Protocol(kind="hyperface", branches=(branch,), family_dim=2 ** len(z))


def hyperedge_protocol(w) -> Protocol:
    """Protocol sensitive only to the parameters on a polytope edge.

    Zero slots of the string put their qubits in the +1 eigenstate, so
    the branch reads sin(w_j theta^j) and is exactly insensitive to the
    remaining parameters.
    """
    w = SignString.parse(w)
    if all(e == 0 for e in w.entries):
        raise ArgumentError("edge string needs at least one nonzero entry")
    branch = _edge_branch(w.as_array().astype(int), weight=1.0, estimator_weight=1.0)
    return Protocol(kind="hyperedge", branches=(branch,), family_dim=2 ** len(w))


def corner_strategy(dq: OneForm) -> Protocol:
    """Probabilistic mixture saturating the bound at a polytope vertex.

    Requires the target in canonical shape 1 = q_1 >= |q_2| >= ... > 0.
    The mixture runs the face adjacent to the vertex on each side, with
    weights p_1 = (1 + |q_N|)/2 and p_k = (|q_{k-1}| - |q_k|)/2, which
    reproduce the target exactly: dq = sum_k p_k dz(k).
    """
    comps = dq.components
    if abs(comps[0] - 1.0) > 1e-12:
        raise ArgumentError("canonical forms lead with coefficient +1")
    mags = np.abs(comps)
    if np.any(mags[1:] - mags[:-1] > 1e-12):
        raise ArgumentError("canonical coefficients must not increase in magnitude")
    if mags[-1] == 0.0:
        raise ArgumentError("canonical forms have no zero coefficients; canonicalize first")
    strings, weights = cross_polytope_decomposition(comps)
    branches = tuple(
        _edge_branch(strings[k], weight=float(weights[k]), estimator_weight=float(weights[k]))
        for k in range(strings.shape[0])
        if weights[k] >= WEIGHT_FLOOR
    )
    return Protocol(kind="corner", branches=branches, family_dim=2 ** comps.size)


def corner_protocol(dq: OneForm) -> Protocol:
    """Corner strategy for an arbitrary target form.

    Canonicalizes internally: zero coefficients become insensitive edge
    slots, the branch strings come back in the original indexing, and the
    estimator weights absorb the overall scale of the target.
    """
    canonical = canonicalize(dq)
    strings, weights = cross_polytope_decomposition(canonical.canonical.components)
    branches = []
    for k in range(strings.shape[0]):
        if weights[k] < WEIGHT_FLOOR:
            continue
        embedded = canonical.embed_signs(strings[k])
        branches.append(
            _edge_branch(
                embedded,
                weight=float(weights[k]),
                estimator_weight=float(weights[k] * canonical.scale),
            )
        )
    return Protocol(kind="corner", branches=tuple(branches), family_dim=2 ** len(dq))


# ---------------------------------------------------------------------------
# Ancilla-assisted ("zoo") protocols.


@dataclass(frozen=True)
class ZooAmplitudes:
    """Per-qubit marginals a_j of a factorized face distribution."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.size == 0:
            raise ArgumentError("need at least one marginal")
        if np.any(np.abs(a) > 1.0 + 1e-12):
            raise InvariantViolation("marginals must lie in [-1, 1]")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.size

    def distribution(self) -> dict[tuple[int, ...], float]:
        """Factorized probabilities over full sign strings, p(z) = prod_j (1 + a_j z_j)/2."""
        out = {}
        for signs in product((1, -1), repeat=self.n):
            p = float(np.prod([(1 + aj * zj) / 2 for aj, zj in zip(self.a, signs)]))
            out[signs] = p
        return out

    def fisher(self) -> FisherMatrix:
        """Closed-form information matrix delta_jk (1 - a_j^2) + a_j a_k."""
        a = self.a
        return FisherMatrix(np.diag(1.0 - a**2) + np.outer(a, a))

    @classmethod
    def for_vertex(cls, dq_canonical: np.ndarray) -> "ZooAmplitudes":
        """Marginals (1, q_2, ..., q_N) tangent at the leading vertex."""
        a = np.array(dq_canonical, dtype=float)
        a[0] = 1.0
        return cls(a)

    @classmethod
    def for_edge(cls, dq_canonical: np.ndarray, edge_size: int) -> "ZooAmplitudes":
        """Marginals 1 on the first ``edge_size`` slots, q_j beyond."""
        a = np.array(dq_canonical, dtype=float)
        a[:edge_size] = 1.0
        return cls(a)


def _zoo_distribution(weights, n_params: int | None) -> tuple[list[tuple[int, ...]], np.ndarray]:
    if isinstance(weights, ZooAmplitudes):
        table = weights.distribution()
    elif isinstance(weights, dict):
        table = {SignString.parse(key).entries: float(value) for key, value in weights.items()}
    else:
        arr = np.asarray(weights, dtype=float).reshape(-1)
        if n_params is None:
            n_params = int(np.round(np.log2(arr.size)))
        if arr.size != 2**n_params:
            raise ArgumentError("distribution length must be 2^N over full sign strings")
        table = dict(zip(product((1, -1), repeat=n_params), arr.tolist()))
    strings = sorted(table, reverse=True)
    n = len(strings[0])
    if any(len(s) != n for s in strings) or any(0 in s for s in strings):
        raise ArgumentError("zoo distributions run over full sign strings of one length")
    probs = np.array([table[s] for s in strings])
    if np.any(probs < -1e-15):
        raise ArgumentError("zoo distribution has negative weights")
    probs = np.clip(probs, 0.0, None)
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ArgumentError(f"zoo distribution sums to {probs.sum()!r}")
    return strings, probs


def _ancilla_cat_indices(signs: tuple[int, ...]) -> tuple[int, int, int]:
    n = len(signs)
    offset = (0 if signs[0] > 0 else 1) << n
    arr = np.array(signs, dtype=int)
    return offset + _basis_index(arr), offset + _basis_index(-arr), 2 ** (n + 1)


def _zoo_basis(strings: list[tuple[int, ...]]) -> tuple[np.ndarray, list[str]]:
    """The shared ancilla-tagged conjugate-cat measurement basis."""
    n = len(strings[0])
    dim = 2 ** (n + 1)
    basis = np.zeros((dim, dim), dtype=complex)
    labels = []
    col = 0
    for signs in product((1, -1), repeat=n):
        idx_plus, idx_minus, _ = _ancilla_cat_indices(signs)
        for sign, tag in ((1j, "+"), (-1j, "-")):
            basis[idx_plus, col] = 1 / np.sqrt(2)
            basis[idx_minus, col] = sign / np.sqrt(2)
            labels.append(f"{SignString(signs)}:{tag}")
            col += 1
    return basis, labels


def zoo_protocol(weights, n_params: int | None = None, variant: str = "branched") -> Protocol:
    """Ancilla-assisted protocol spreading one measurement over many faces.

    ``weights`` is a distribution over full sign strings (dict, flat
    array, or factorized ZooAmplitudes).  The default "branched" variant
    exposes one branch per string, which is what sampling and estimation
    consume; "pure" builds the single entangled-ancilla preparation and
    "mixed" its decohered counterpart, both measured in the shared
    ancilla-tagged basis.  All three give the same information matrix.
    """
    strings, probs = _zoo_distribution(weights, n_params)
    n = len(strings[0])
    dim = 2 ** (n + 1)
    if variant == "branched":
        branches = []
        for signs, p in zip(strings, probs):
            if p < WEIGHT_FLOOR:
                continue
            idx_plus, idx_minus, _ = _ancilla_cat_indices(signs)
            branches.append(
                _cat_pair_branch(
                    idx_plus,
                    idx_minus,
                    dim,
                    np.array(signs, dtype=float),
                    weight=float(p),
                    estimator_weight=float(p),
                    sign_string=SignString(signs),
                )
            )
        return Protocol(kind="zoo", branches=tuple(branches), family_dim=2**n)
    basis, labels = _zoo_basis(strings)
    povm = Povm.from_basis(basis, labels)
    if variant == "pure":
        amplitudes = np.zeros(dim, dtype=complex)
        for signs, p in zip(strings, probs):
            idx_plus, idx_minus, _ = _ancilla_cat_indices(signs)
            amplitudes[idx_plus] += np.sqrt(p / 2)
            amplitudes[idx_minus] += np.sqrt(p / 2)
        fiducial = PureState(amplitudes / np.linalg.norm(amplitudes))
    elif variant == "mixed":
        entries = np.zeros((dim, dim), dtype=complex)
        for signs, p in zip(strings, probs):
            idx_plus, idx_minus, _ = _ancilla_cat_indices(signs)
            vec = np.zeros(dim, dtype=complex)
            vec[idx_plus] = 1 / np.sqrt(2)
            vec[idx_minus] = 1 / np.sqrt(2)
            entries += p * np.outer(vec, vec.conj())
        fiducial = DensityOperator(entries)
    else:
        raise ArgumentError(f"unknown zoo variant {variant!r}")
    branch = Branch(weight=1.0, fiducial=fiducial, measurement=povm)
    return Protocol(kind=f"zoo-{variant}", branches=(branch,), family_dim=2**n)


# ---------------------------------------------------------------------------
# Bloch-sphere protocol.


def _bloch_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = np.arccos(np.clip(direction[2], -1.0, 1.0))
    phi = np.arctan2(direction[1], direction[0])
    plus = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    minus = np.array([-np.sin(theta / 2), np.exp(1j * phi) * np.cos(theta / 2)])
    return plus, minus


def bloch_protocol(dq: OneForm) -> Protocol:
    """Single-qubit interferometry along the target rotation axis.

    The fiducial is the equal superposition of the +/- eigenstates of
    the target-axis spin; the conjugate superpositions read out the
    rotation angle along that axis, whose coefficient in the target is
    the Euclidean length of the form.
    """
    q = dq.components
    if q.size != 3:
        raise ArgumentError("the Bloch protocol lives on three rotation parameters")
    length = float(np.linalg.norm(q))
    if length == 0.0:
        raise ArgumentError("cannot build a protocol for the zero form")
    axis = q / length
    plus, minus = _bloch_basis(axis)
    cat = (plus + minus) / np.sqrt(2)
    icat_plus = (plus + 1j * minus) / np.sqrt(2)
    icat_minus = (plus - 1j * minus) / np.sqrt(2)
    basis = np.column_stack([icat_plus, icat_minus])
    branch = Branch(
        weight=1.0,
        fiducial=PureState(cat),
        measurement=Povm.from_basis(basis, ("+", "-")),
        readout_form=OneForm(axis),
        estimator_weight=length,
    )
    return Protocol(kind="bloch", branches=(branch,), family_dim=2)


# ---------------------------------------------------------------------------
# Information matrices and saturation checks.


def _branch_generators(branch: Branch, family: ProcessFamily) -> list[np.ndarray]:
    dim = branch.fiducial.dim
    if dim == family.dim:
        return [gen.entries for gen in family.generators]
    if dim == 2 * family.dim:
        eye = np.eye(2, dtype=complex)
        return [np.kron(eye, gen.entries) for gen in family.generators]
    raise ArgumentError(f"branch dimension {dim} incompatible with family dimension {family.dim}")


def _branch_fisher(
    branch: Branch,
    family: ProcessFamily,
    derivative: str,
    step: float,
    p_floor: float,
) -> np.ndarray:
    rho = branch.density_entries()
    gens = _branch_generators(branch, family)
    elements = branch.measurement.stacked()
    probs = np.real(np.einsum("xij,ji->x", elements, rho))
    if derivative == "exact":
        derivs = []
        for gen in gens:
            commutator = -1j * (gen @ rho - rho @ gen)
            derivs.append(np.real(np.einsum("xij,ji->x", elements, commutator)))
        dp = np.stack(derivs, axis=1)
    elif derivative == "central":
        dp_cols = []
        for gen in gens:
            eigs, vecs = np.linalg.eigh(gen)
            shifted = []
            for s in (step, -step):
                unitary = vecs @ (np.exp(-1j * s * eigs)[:, None] * vecs.conj().T)
                evolved = unitary @ rho @ unitary.conj().T
                shifted.append(np.real(np.einsum("xij,ji->x", elements, evolved)))
            dp_cols.append((shifted[0] - shifted[1]) / (2 * step))
        dp = np.stack(dp_cols, axis=1)
    else:
        raise ArgumentError(f"unknown derivative mode {derivative!r}")
    keep = probs > p_floor
    dkeep = dp[keep]
    fisher = (dkeep / probs[keep, None]).T @ dkeep
    return 0.5 * (fisher + fisher.T)


def protocol_fisher(
    protocol: Protocol,
    family: ProcessFamily,
    derivative: str = "exact",
    step: float = DEFAULT_STEP,
    p_floor: float = DEFAULT_P_FLOOR,
) -> FisherMatrix:
    """Information matrix of a protocol at the fiducial point.

    Per branch the Born probabilities are differentiated, then the
    branch matrices are mixed with the branch weights.  The "exact" mode
    differentiates the evolved state directly (the derivative of
    exp(-i t X) rho exp(i t X) at t = 0 is -i[X, rho]); "central" uses
    central differences with ``step`` as an independent cross-check.
    """
    if family.dim != protocol.family_dim:
        raise ArgumentError(
            f"protocol built for dimension {protocol.family_dim}, family has {family.dim}"
        )
    total = np.zeros((family.n_params, family.n_params))
    for branch in protocol.branches:
        total += branch.weight * _branch_fisher(branch, family, derivative, step, p_floor)
    return FisherMatrix(0.5 * (total + total.T))


def mixture(protocols: list[Protocol], weights) -> Protocol:
    """Probabilistic combination of protocols; information mixes linearly."""
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.size != len(protocols) or not protocols:
        raise ArgumentError("need one weight per protocol")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ArgumentError("mixture weights must be a distribution")
    family_dim = protocols[0].family_dim
    if any(p.family_dim != family_dim for p in protocols):
        raise ArgumentError("mixture components must share the family dimension")
    branches = []
    for protocol, w in zip(protocols, weights):
        for branch in protocol.branches:
            if w * branch.weight < WEIGHT_FLOOR:
                continue
            branches.append(
                Branch(
                    weight=float(w * branch.weight),
                    fiducial=branch.fiducial,
                    measurement=branch.measurement,
                    readout_form=branch.readout_form,
                    estimator_weight=None
                    if branch.estimator_weight is None
                    else float(w * branch.estimator_weight),
                    sign_string=branch.sign_string,
                )
            )
    return Protocol(kind="mixture", branches=tuple(branches), family_dim=family_dim)


def kissing_residual(
    fisher: FisherMatrix, b: TangentVector, family: ProcessFamily, dq: OneForm
) -> float:
    """How far F b falls from ||b||^2 dq; zero certifies joint saturation
    of the one-from-many inequality and the process bound at b."""
    advance = pair(dq, b)
    if abs(advance - 1.0) > 1e-9:
        raise ArgumentError(f"b advances {advance!r} units of q; the check needs exactly one")
    norm = family.norm(b)
    gap = fisher.entries @ b.components - norm**2 * dq.components
    return float(np.max(np.abs(gap)))


def optimal_protocol(family: ProcessFamily, dq: OneForm) -> Protocol:
    """Saturating protocol for the family/target pair, where one is known.

    Commuting families always admit the corner mixture.  The pair family
    admits it exactly when the target kisses at a persistent cusp (the
    second-axis coefficient dominates); its smooth points, and corners of
    arbitrary custom families, have no constructive recipe here.
    """
    if isinstance(family, PauliZFamily):
        return corner_protocol(dq)
    if isinstance(family, BlochFamily):
        return bloch_protocol(dq)
    if isinstance(family, EpsilonPairFamily):
        if family.epsilon == 0.0:
            return corner_protocol(dq)
        q = dq.components
        if abs(q[0]) <= abs(q[1]):
            return corner_protocol(dq)
        raise UnsupportedProtocolError(
            "the minimizer sits on a smooth stretch of the pair family's unit "
            "surface; only its cusp protocols are constructed"
        )
    raise UnsupportedProtocolError(
        f"no constructive saturating protocol for family kind {family.kind!r}"
    )


# ---------------------------------------------------------------------------
# Local parity realization of the conjugate-cat measurement.


def parity_operator(n_qubits: int) -> HermitianOperator:
    """Product observable whose eigenbasis realizes the conjugate-cat
    measurement locally: all-y for odd registers, y...yx for even ones."""
    if n_qubits < 1:
        raise ArgumentError("need at least one qubit")
    ops = [HermitianOperator(SIGMA_Y)] * n_qubits
    if n_qubits % 2 == 0:
        ops[-1] = HermitianOperator(SIGMA_X)
    return tensor(ops)


def parity_eigenvalue(z, branch_sign: int) -> int:
    """Parity eigenvalue of the conjugate-cat state for outcome +/-."""
    z = SignString.parse(z)
    if z.has_zeros:
        raise ArgumentError("parity eigenvalues are defined for full sign strings")
    if branch_sign not in (1, -1):
        raise ArgumentError("branch sign must be +1 or -1")
    n = len(z)
    if n % 2 == 1:
        value = -branch_sign * (-1) ** ((n + 1) // 2) * int(np.prod(z.entries))
    else:
        value = -branch_sign * (-1) ** (n // 2) * int(np.prod(z.entries[:-1]))
    return int(value)
