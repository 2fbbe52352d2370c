"""Qubit, QEB, and CEO operator pools with circuit-cost metadata.

All pools are generalized (index-based, not occupation-restricted) and
conserve S_z by construction: under the alternating ordering a spin-orbital
index is alpha when even, beta when odd, so same-spin means same parity.

Qubit pool: individual Pauli strings obtained by expanding spin-preserving
fermionic single/double excitations under Jordan-Wigner and dropping the
Z chains, each string parametrized independently.

QEB pool: qubit excitations q^dag_a q_i - h.c. (no Z chains), singles and
doubles; every generator G satisfies G^3 = -G on its support.

CEO pool: QEB doubles grouped by identical 4-qubit support into one
multi-slot operator ("OVP-style, all slots free"); singles carry over.
The screening gradient of a combined operator is the Euclidean norm of its
constituent-slot gradients.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .pauli import PauliTerm, ladder_terms, multiply_term_sums


class EmptySubpool(ValueError):
    """Random subsetting produced no operators."""


class CostTableError(KeyError):
    """Operator kind missing from the CNOT cost table."""


KIND_PAULI = "pauli_string"
KIND_QEB_SINGLE = "qubit_excitation_single"
KIND_QEB_DOUBLE = "qubit_excitation_double"
KIND_CEO = "ceo_combined"


@dataclass(frozen=True)
class CostTable:
    """Per-operator CNOT counts.  The staircase rule 2(w-1) covers weight-w
    Pauli strings; excitation-circuit counts follow the standard
    literature values and are configurable because they are a convention,
    not a measured quantity."""

    qeb_single: int = 2
    qeb_double: int = 13
    ceo_base: int = 13
    ceo_extra_per_slot: int = 1

    def as_dict(self):
        return {
            "pauli_string": "2*(weight-1)",
            "qeb_single": self.qeb_single,
            "qeb_double": self.qeb_double,
            "ceo_base": self.ceo_base,
            "ceo_extra_per_slot": self.ceo_extra_per_slot,
        }


DEFAULT_COST_TABLE = CostTable()


def load_cost_table(path) -> CostTable:
    """key=value override file; unknown keys rejected."""
    values = {}
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in CostTable.__dataclass_fields__:
                raise CostTableError(f"unknown cost-table key {key!r}")
            values[key] = int(value.strip())
    return replace(DEFAULT_COST_TABLE, **values)


@dataclass(frozen=True)
class PoolOperator:
    """Anti-Hermitian generator bundle: one term tuple per parameter slot."""

    kind: str
    generators: tuple  # tuple of tuples of PauliTerm, one per slot
    support: int
    cnot_cost: int
    label: str

    @property
    def slot_count(self):
        return len(self.generators)

    @property
    def param_cost(self):
        return self.slot_count


@dataclass
class OperatorPool:
    operators: list
    kind_label: str  # qubit | qeb | ceo
    n_qubits: int

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i):
        return self.operators[i]

    @property
    def size(self):
        return len(self.operators)


def cnot_cost(op: PoolOperator, table: CostTable = DEFAULT_COST_TABLE) -> int:
    if op.kind == KIND_PAULI:
        weight = op.generators[0][0].weight
        return 2 * (weight - 1) if weight > 1 else 0
    if op.kind == KIND_QEB_SINGLE:
        return table.qeb_single
    if op.kind == KIND_QEB_DOUBLE:
        return table.qeb_double
    if op.kind == KIND_CEO:
        return table.ceo_base + table.ceo_extra_per_slot * (op.slot_count - 1)
    raise CostTableError(f"no cost rule for operator kind {op.kind!r}")


def _validate_sector(n_orbitals, n_alpha, n_beta):
    if not (0 <= n_alpha <= n_orbitals and 0 <= n_beta <= n_orbitals):
        raise ValueError("invalid sector")


def _terms_from_accumulator(acc, drop=1e-14):
    terms = tuple(
        PauliTerm(x, z, c)
        for (x, z), c in sorted(acc.items())
        if abs(c) > drop
    )
    for t in terms:
        if abs(complex(t.coefficient).real) > 1e-12:
            raise ValueError("generator is not anti-Hermitian")
    return terms


def _qubit_ladder(mode, dagger):
    """Qubit (Z-chain-free) ladder operator: q^dag = |1><0|, q = |0><1|."""
    x = 1 << mode
    sign = -1j if dagger else 1j
    return [PauliTerm(x, 0, 0.5), PauliTerm(x, x, 0.5 * sign)]


def _anti_hermitian_product(ladders_ordered):
    """T - T^dag for T a product of ladder operators (qubit or fermionic).

    Each encoded string is Hermitian, so conjugating only the coefficient
    yields the adjoint term."""
    from collections import defaultdict

    product = multiply_term_sums(*ladders_ordered)
    acc = defaultdict(complex)
    for (x, z), c in product.items():
        acc[(x, z)] += c - c.conjugate()
    return acc


def _single_excitation_terms(i, a, qubit_ladder):
    lad = _qubit_ladder if qubit_ladder else ladder_terms
    return _terms_from_accumulator(
        _anti_hermitian_product([lad(a, True), lad(i, False)])
    )


def _double_excitation_terms(i, j, a, b, qubit_ladder):
    lad = _qubit_ladder if qubit_ladder else ladder_terms
    return _terms_from_accumulator(
        _anti_hermitian_product(
            [lad(a, True), lad(b, True), lad(j, False), lad(i, False)]
        )
    )


def _support_of(terms):
    s = 0
    for t in terms:
        s |= t.support
    return s


def _double_index_pairings(quad):
    """S_z-conserving (sources, targets) pairings of a 4-index set.

    Each unordered partition {pair1, pair2} with equal spin content counts
    once (reversing source/target only flips the generator's sign).
    """
    p, q, r, s = quad
    candidates = [
        ((p, q), (r, s)),
        ((p, r), (q, s)),
        ((p, s), (q, r)),
    ]
    out = []
    for left, right in candidates:
        if sorted(x & 1 for x in left) == sorted(x & 1 for x in right):
            out.append((left, right))
    return out


def _sort_pool(ops):
    def key(op):
        masks = tuple((t.x_mask, t.z_mask) for slot in op.generators for t in slot)
        return (op.support, op.kind, masks)

    return sorted(ops, key=key)


def build_qeb_pool(n_orbitals, n_alpha, n_beta, cost_table=DEFAULT_COST_TABLE):
    """All S_z-conserving single and double qubit excitations."""
    _validate_sector(n_orbitals, n_alpha, n_beta)
    n_q = 2 * n_orbitals
    ops = []
    for i, a in itertools.combinations(range(n_q), 2):
        if (i & 1) != (a & 1):
            continue
        terms = _single_excitation_terms(i, a, qubit_ladder=True)
        ops.append(
            PoolOperator(
                KIND_QEB_SINGLE,
                (terms,),
                _support_of(terms),
                cost_table.qeb_single,
                f"qeb_s({i}->{a})",
            )
        )
    for quad in itertools.combinations(range(n_q), 4):
        for (i, j), (a, b) in _double_index_pairings(quad):
            terms = _double_excitation_terms(i, j, a, b, qubit_ladder=True)
            ops.append(
                PoolOperator(
                    KIND_QEB_DOUBLE,
                    (terms,),
                    _support_of(terms),
                    cost_table.qeb_double,
                    f"qeb_d({i},{j}->{a},{b})",
                )
            )
    return OperatorPool(_sort_pool(ops), "qeb", n_q)


def build_ceo_pool(n_orbitals, n_alpha, n_beta, cost_table=DEFAULT_COST_TABLE):
    """QEB doubles merged per 4-qubit support into multi-slot operators."""
    qeb = build_qeb_pool(n_orbitals, n_alpha, n_beta, cost_table)
    singles = [op for op in qeb if op.kind == KIND_QEB_SINGLE]
    groups = {}
    for op in qeb:
        if op.kind == KIND_QEB_DOUBLE:
            groups.setdefault(op.support, []).append(op)
    combined = []
    for support in sorted(groups):
        members = groups[support]
        slots = tuple(m.generators[0] for m in members)
        combined.append(
            PoolOperator(
                KIND_CEO,
                slots,
                support,
                cost_table.ceo_base + cost_table.ceo_extra_per_slot * (len(slots) - 1),
                "ceo(" + "|".join(m.label for m in members) + ")",
            )
        )
    return OperatorPool(_sort_pool(singles + combined), "ceo", 2 * n_orbitals)


def build_qubit_pool(n_orbitals, n_alpha, n_beta, cost_table=DEFAULT_COST_TABLE):
    """Individual Pauli strings: JW images of spin-preserving fermionic
    singles/doubles with their Z chains dropped, deduplicated."""
    _validate_sector(n_orbitals, n_alpha, n_beta)
    n_q = 2 * n_orbitals
    seen = {}

    def harvest(terms, excitation_label):
        for t in terms:
            x, z = t.x_mask, t.z_mask & t.x_mask  # keep Y content, drop Z chains
            if (x, z) not in seen:
                weight = (x | z).bit_count()
                cost = 2 * (weight - 1) if weight > 1 else 0
                seen[(x, z)] = PoolOperator(
                    KIND_PAULI,
                    ((PauliTerm(x, z, 1j),),),
                    x | z,
                    cost,
                    f"pauli[{PauliTerm(x, z, 1j).label()}]<-{excitation_label}",
                )

    for i, a in itertools.combinations(range(n_q), 2):
        if (i & 1) != (a & 1):
            continue
        harvest(_single_excitation_terms(i, a, qubit_ladder=False), f"s({i}->{a})")
    for quad in itertools.combinations(range(n_q), 4):
        for (i, j), (a, b) in _double_index_pairings(quad):
            harvest(
                _double_excitation_terms(i, j, a, b, qubit_ladder=False),
                f"d({i},{j}->{a},{b})",
            )
    return OperatorPool(_sort_pool(seen.values()), "qubit", n_q)


def build_pool(kind_label, n_orbitals, n_alpha, n_beta, cost_table=DEFAULT_COST_TABLE):
    builders = {
        "qubit": build_qubit_pool,
        "qeb": build_qeb_pool,
        "ceo": build_ceo_pool,
    }
    try:
        builder = builders[kind_label]
    except KeyError:
        raise ValueError(f"unknown pool kind {kind_label!r}") from None
    return builder(n_orbitals, n_alpha, n_beta, cost_table)


def random_subpool(pool: OperatorPool, fraction: float, seed: int) -> OperatorPool:
    """Uniform subset without replacement of ceil(fraction * size) entries."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    k = math.ceil(fraction * pool.size)
    if k < 1 or pool.size == 0:
        raise EmptySubpool("subset would be empty")
    rng = np.random.default_rng(seed)
    picked = sorted(rng.choice(pool.size, size=k, replace=False).tolist())
    return OperatorPool([pool.operators[i] for i in picked], pool.kind_label, pool.n_qubits)
