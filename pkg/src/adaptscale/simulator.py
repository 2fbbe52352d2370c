"""Exact statevector engine.

Pauli strings act on amplitude arrays through gather/sign sweeps:
(P psi)[j] = c * (-i)^|x&z| * (-1)^parity(j&z) * psi[j^x].  Hamiltonians
applied repeatedly are compiled into per-x-mask diagonal vectors so one
application costs one gather per distinct flip mask instead of one per term.

Generator exponentials use closed forms (no Trotterization): a single
Pauli-string generator i*b*P gives cos(b t) I + i sin(b t) P; qubit-
excitation generators G with G^3 = -G give I + sin(t) G + (1 - cos(t)) G^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import QubitHamiltonian, spin_squared_operator


class DimensionError(ValueError):
    """State and operator qubit counts disagree."""


class ArityError(ValueError):
    """Parameter count does not match the operator's slot count."""


class OrderingError(ValueError):
    """State size incompatible with alternating alpha/beta ordering."""


_INDEX_CACHE = {}


def _indices(n_qubits):
    idx = _INDEX_CACHE.get(n_qubits)
    if idx is None:
        idx = np.arange(1 << n_qubits, dtype=np.int64)
        _INDEX_CACHE[n_qubits] = idx
    return idx


@dataclass
class Statevector:
    amplitudes: np.ndarray
    n_qubits: int

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def copy(self):
        return Statevector(self.amplitudes.copy(), self.n_qubits)


def prepare_reference(occupation: int, n_qubits: int) -> Statevector:
    """Computational basis state with the given occupation bitset."""
    if occupation >> n_qubits:
        raise DimensionError(f"occupation {occupation:b} exceeds {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[occupation] = 1.0
    return Statevector(amps, n_qubits)


def _apply_term(amps, x, z, coeff, idx):
    """coeff * P(x, z) applied to an amplitude array (returns new array)."""
    scalar = coeff * (-1j) ** ((x & z).bit_count() % 4)
    out = amps[idx ^ x] if x else amps.copy()
    if z:
        out *= 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
    out *= scalar
    return out


def _apply_term_sum(amps, terms, idx):
    out = None
    for t in terms:
        piece = _apply_term(amps, t.x_mask, t.z_mask, t.coefficient, idx)
        out = piece if out is None else out + piece
    if out is None:
        out = np.zeros_like(amps)
    return out


class CompiledOperator:
    """Pauli-sum compiled into per-flip-mask diagonal vectors.

    Application gathers in chunks of flip masks, so one H|psi> costs a few
    fancy-indexing sweeps instead of one per term.
    """

    _CHUNK = 64

    def __init__(self, operator: QubitHamiltonian, memory_budget: int = 1 << 28):
        self.n_qubits = operator.n_qubits
        dim = 1 << self.n_qubits
        groups = {}
        for t in operator.terms:
            groups.setdefault(t.x_mask, []).append(t)
        self._fallback = None
        if len(groups) * dim * 16 > memory_budget:
            self._fallback = list(operator.terms)
            self._flips = None
            return
        idx = _indices(self.n_qubits)
        flips = np.array(sorted(groups), dtype=np.int64)
        diags = np.zeros((flips.size, dim), dtype=complex)
        for row, x in enumerate(flips.tolist()):
            for t in groups[x]:
                sc = t.coefficient * (-1j) ** ((x & t.z_mask).bit_count() % 4)
                if t.z_mask:
                    diags[row] += sc * (
                        1.0 - 2.0 * (np.bitwise_count(idx & t.z_mask) & 1)
                    )
                else:
                    diags[row] += sc
        self._flips = flips
        self._diags = diags

    def apply(self, amps):
        idx = _indices(self.n_qubits)
        if self._flips is None:
            return _apply_term_sum(amps, self._fallback, idx)
        out = np.zeros_like(amps)
        for start in range(0, self._flips.size, self._CHUNK):
            xs = self._flips[start : start + self._CHUNK]
            gathered = amps[idx[None, :] ^ xs[:, None]]
            gathered *= self._diags[start : start + self._CHUNK]
            out += gathered.sum(axis=0)
        return out

    def expectation(self, amps):
        val = complex(np.vdot(amps, self.apply(amps)))
        if abs(val.imag) > 1e-10:
            raise ValueError(f"expectation has imaginary part {val.imag:g}")
        return val.real


def _as_compiled(h):
    if isinstance(h, CompiledOperator):
        return h
    return CompiledOperator(h)


def expectation(state: Statevector, h) -> float:
    """Real part of <psi|H|psi>; raises if the imaginary part survives."""
    hc = _as_compiled(h)
    if hc.n_qubits != state.n_qubits:
        raise DimensionError(
            f"operator on {hc.n_qubits} qubits, state on {state.n_qubits}"
        )
    return hc.expectation(state.amplitudes)


# ---------------------------------------------------------------------------
# Small-support fast path: pool generators act on <= 4 qubits, so their
# exponentials reduce to one dense matrix on the support applied with a
# single matmul after an axis reshuffle.
# ---------------------------------------------------------------------------

_SUPPORT_LIMIT = 6


def _support_qubits(support):
    qs = []
    q = 0
    while support >> q:
        if (support >> q) & 1:
            qs.append(q)
        q += 1
    return qs


def _remap_small(terms, qubits):
    """Project terms onto their support: global qubit q_j -> small bit j."""
    from .pauli import PauliTerm

    out = []
    for t in terms:
        x = z = 0
        for j, q in enumerate(qubits):
            x |= ((t.x_mask >> q) & 1) << j
            z |= ((t.z_mask >> q) & 1) << j
        out.append(PauliTerm(x, z, t.coefficient))
    return out


class _CompiledGenerators:
    """Per-slot dense generator matrices on the operator's support."""

    def __init__(self, op):
        from .pauli import dense_matrix

        self.qubits = _support_qubits(op.support)
        k = len(self.qubits)
        self.dim = 1 << k
        self.slot_matrices = [
            dense_matrix(_remap_small(terms, self.qubits), k)
            for terms in op.generators
        ]
        self.slot_squares = [g @ g for g in self.slot_matrices]

    def unitary(self, op, thetas):
        u = np.eye(self.dim, dtype=complex)
        if op.kind == "pauli_string":
            b = op.generators[0][0].coefficient.imag
            p_small = self.slot_matrices[0] / (1j * b)
            angle = float(thetas[0]) * b
            return np.cos(angle) * u + 1j * np.sin(angle) * p_small
        for g, g2, theta in zip(self.slot_matrices, self.slot_squares, thetas):
            if theta != 0.0:
                u = (np.eye(self.dim) + np.sin(theta) * g
                     + (1.0 - np.cos(theta)) * g2) @ u
        return u


_GENERATOR_CACHE = {}


def _compiled_generators(op):
    cached = _GENERATOR_CACHE.get(id(op))
    if cached is None or cached[0] is not op:
        cached = (op, _CompiledGenerators(op))
        _GENERATOR_CACHE[id(op)] = cached
    return cached[1]


def _to_support_major(amps, n_qubits, qubits):
    """View amplitudes as (2^k, 2^(n-k)) with the support bits leading."""
    k = len(qubits)
    tensor = amps.reshape([2] * n_qubits)
    # axis of qubit q is n-1-q; small bit j = qubit qubits[j], j=k-1 leading
    axes = [n_qubits - 1 - q for q in reversed(qubits)]
    rest = [a for a in range(n_qubits) if a not in axes]
    perm = axes + rest
    return np.transpose(tensor, perm).reshape(1 << k, -1), perm


def _from_support_major(block, n_qubits, perm):
    tensor = block.reshape([2] * n_qubits)
    inverse = np.argsort(perm)
    return np.transpose(tensor, inverse).reshape(-1)


def _apply_small_matrix(amps, n_qubits, qubits, matrix):
    block, perm = _to_support_major(amps, n_qubits, qubits)
    return _from_support_major(matrix @ block, n_qubits, perm)


# ---------------------------------------------------------------------------
# Generator exponentials
# ---------------------------------------------------------------------------

def _exp_pauli_generator(amps, term, theta, idx):
    """exp(theta * i*b*P) for a single-string generator with coefficient i*b."""
    b = term.coefficient.imag
    if term.coefficient.real != 0.0:
        raise ValueError("pauli_string generator must have imaginary coefficient")
    angle = theta * b
    rotated = _apply_term(amps, term.x_mask, term.z_mask, 1.0, idx)
    return np.cos(angle) * amps + 1j * np.sin(angle) * rotated


def _exp_excitation_generator(amps, terms, theta, idx):
    """exp(theta G) for G^3 = -G: I + sin(t) G + (1 - cos(t)) G^2."""
    g1 = _apply_term_sum(amps, terms, idx)
    g2 = _apply_term_sum(g1, terms, idx)
    return amps + np.sin(theta) * g1 + (1.0 - np.cos(theta)) * g2


def apply_generator_exponential(state: Statevector, op, thetas) -> Statevector:
    """state <- exp(sum_s theta_s A_s)|state>, exactly, in place."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if thetas.size != op.slot_count:
        raise ArityError(
            f"{op.slot_count}-slot operator given {thetas.size} parameters"
        )
    if 0 < op.support.bit_count() <= _SUPPORT_LIMIT:
        gens = _compiled_generators(op)
        state.amplitudes = _apply_small_matrix(
            state.amplitudes, state.n_qubits, gens.qubits, gens.unitary(op, thetas)
        )
        return state
    idx = _indices(state.n_qubits)
    amps = state.amplitudes
    if op.kind == "pauli_string":
        amps = _exp_pauli_generator(amps, op.generators[0][0], float(thetas[0]), idx)
    else:
        # commuting slots: product of closed-form slot exponentials
        for slot_terms, theta in zip(op.generators, thetas):
            if theta != 0.0:
                amps = _exp_excitation_generator(amps, slot_terms, float(theta), idx)
    state.amplitudes = amps
    return state


# ---------------------------------------------------------------------------
# Pool gradient screening
# ---------------------------------------------------------------------------

def _slot_overlaps(psi, phi, op, n_qubits, idx):
    """<phi|A_s|psi> for each slot, using the support block when small."""
    if 0 < op.support.bit_count() <= _SUPPORT_LIMIT:
        gens = _compiled_generators(op)
        psi_block, _ = _to_support_major(psi, n_qubits, gens.qubits)
        phi_block, _ = _to_support_major(phi, n_qubits, gens.qubits)
        return [
            complex(np.sum(phi_block.conj() * (g @ psi_block)))
            for g in gens.slot_matrices
        ]
    return [
        complex(np.vdot(phi, _apply_term_sum(psi, terms, idx)))
        for terms in op.generators
    ]


def slot_gradients(state: Statevector, h, op):
    """d E / d theta_s at theta = 0 for each slot: 2 Re <H psi|A_s|psi>."""
    hc = _as_compiled(h)
    phi = hc.apply(state.amplitudes)
    idx = _indices(state.n_qubits)
    overlaps = _slot_overlaps(state.amplitudes, phi, op, state.n_qubits, idx)
    return np.array([2.0 * v.real for v in overlaps])


def pool_gradients(state: Statevector, h, pool_ops) -> np.ndarray:
    """Screening gradient magnitude for every pool entry at theta = 0.

    One H|psi> action is shared across the whole pool.  Multi-slot entries
    aggregate constituent-slot derivatives by Euclidean norm.
    """
    hc = _as_compiled(h)
    phi = hc.apply(state.amplitudes)
    idx = _indices(state.n_qubits)
    amps = state.amplitudes
    out = np.empty(len(pool_ops))
    for j, op in enumerate(pool_ops):
        overlaps = _slot_overlaps(amps, phi, op, state.n_qubits, idx)
        if op.slot_count == 1:
            out[j] = abs(2.0 * overlaps[0].real)
        else:
            out[j] = float(np.linalg.norm([2.0 * v.real for v in overlaps]))
    return out


# ---------------------------------------------------------------------------
# Ansatz replay and analytic gradients
# ---------------------------------------------------------------------------

@dataclass
class AnsatzState:
    """Ordered operator structure with a flat parameter vector."""

    structure: list  # [(PoolOperator, [parameter slots])]
    parameters: np.ndarray
    reference_occupation: int
    n_qubits: int

    def parameter_count(self):
        return sum(len(slots) for _, slots in self.structure)

    def copy(self):
        return AnsatzState(
            list(self.structure),
            self.parameters.copy(),
            self.reference_occupation,
            self.n_qubits,
        )


def prepare_ansatz_state(ansatz: AnsatzState) -> Statevector:
    """Replay the full structure from the reference determinant."""
    state = prepare_reference(ansatz.reference_occupation, ansatz.n_qubits)
    theta = ansatz.parameters
    for op, slots in ansatz.structure:
        apply_generator_exponential(state, op, theta[slots])
    return state


def ansatz_energy(h, ansatz: AnsatzState) -> float:
    return _as_compiled(h).expectation(prepare_ansatz_state(ansatz).amplitudes)


def ansatz_energy_gradient(h, ansatz: AnsatzState):
    """Energy and dE/d(theta) by one forward replay and one adjoint sweep."""
    hc = _as_compiled(h)
    state = prepare_ansatz_state(ansatz)
    idx = _indices(ansatz.n_qubits)
    lam = hc.apply(state.amplitudes)
    energy = complex(np.vdot(state.amplitudes, lam))
    if abs(energy.imag) > 1e-10:
        raise ValueError(f"energy has imaginary part {energy.imag:g}")
    grad = np.zeros(ansatz.parameter_count())
    psi = state.amplitudes
    theta = ansatz.parameters
    for op, slots in reversed(ansatz.structure):
        overlaps = _slot_overlaps(psi, lam, op, ansatz.n_qubits, idx)
        for v, s in zip(overlaps, slots):
            grad[s] += 2.0 * v.real
        # peel this operator off both sweeps
        inverse = Statevector(psi, ansatz.n_qubits)
        apply_generator_exponential(inverse, op, -theta[slots])
        psi = inverse.amplitudes
        inverse = Statevector(lam, ansatz.n_qubits)
        apply_generator_exponential(inverse, op, -theta[slots])
        lam = inverse.amplitudes
    return energy.real, grad


# ---------------------------------------------------------------------------
# Diagnostics and state dumps
# ---------------------------------------------------------------------------

_S2_CACHE = {}


def compiled_spin_squared(n_orbitals):
    op = _S2_CACHE.get(n_orbitals)
    if op is None:
        op = CompiledOperator(spin_squared_operator(n_orbitals))
        _S2_CACHE[n_orbitals] = op
    return op


def spin_squared(state: Statevector, n_orbitals: int) -> float:
    """<S^2> under the alternating alpha/beta spin-orbital ordering."""
    if state.n_qubits != 2 * n_orbitals:
        raise OrderingError(
            f"{state.n_qubits} qubits cannot encode {n_orbitals} spatial orbitals"
        )
    return compiled_spin_squared(n_orbitals).expectation(state.amplitudes)


_DUMP_MAGIC = b"ADSCSV01"


def dump_statevector(state: Statevector, path):
    """Binary dump: 16-byte header (magic + n_qubits), then complex128 LE."""
    header = _DUMP_MAGIC + np.uint32(state.n_qubits).tobytes() + b"\x00" * 4
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(state.amplitudes, dtype="<c16").tobytes())


def load_statevector(path) -> Statevector:
    with open(path, "rb") as f:
        header = f.read(16)
        if header[:8] != _DUMP_MAGIC:
            raise ValueError("bad statevector dump magic")
        n_qubits = int(np.frombuffer(header[8:12], dtype="<u4")[0])
        amps = np.frombuffer(f.read(), dtype="<c16").astype(complex)
    if amps.size != 1 << n_qubits:
        raise ValueError("statevector dump length mismatch")
    return Statevector(amps, n_qubits)
