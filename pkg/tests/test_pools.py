import itertools

import numpy as np
import pytest

from adaptscale import simulator
from adaptscale.pauli import PauliTerm, QubitHamiltonian, commutes_with, number_operator, sz_operator
from adaptscale.pools import (
    CostTable,
    CostTableError,
    DEFAULT_COST_TABLE,
    EmptySubpool,
    PoolOperator,
    build_ceo_pool,
    build_pool,
    build_qeb_pool,
    build_qubit_pool,
    cnot_cost,
    load_cost_table,
    random_subpool,
)

from conftest import kron_sum


def test_one_orbital_pools_empty():
    assert build_qubit_pool(1, 1, 0).size == 0
    assert build_qeb_pool(1, 1, 0).size == 0
    assert build_ceo_pool(1, 1, 0).size == 0


def test_qubit_pool_contains_alpha_single_strings():
    pool = build_qubit_pool(2, 1, 1)
    labels = {op.generators[0][0].label() for op in pool}
    assert "X0 Y2" in labels
    assert "Y0 X2" in labels


def test_qubit_pool_entries_anti_hermitian_and_xy_only():
    pool = build_qubit_pool(3, 2, 1)
    for op in pool:
        term = op.generators[0][0]
        assert term.coefficient == 1j
        # qubit-pool convention: no bare-Z content left after chain removal
        assert term.z_mask & ~term.x_mask == 0
        # odd Y count keeps i*P anti-Hermitian with P Hermitian
        assert (term.x_mask & term.z_mask).bit_count() % 2 == 1
        # particle-number pattern: flips per spin channel come in pairs
        alpha_flips = bin(term.x_mask & 0x55555555).count("1")
        beta_flips = bin(term.x_mask & 0xAAAAAAAA).count("1")
        assert alpha_flips % 2 == 0 and beta_flips % 2 == 0
        assert op.slot_count == 1


def test_qeb_single_expansion():
    pool = build_qeb_pool(2, 1, 1)
    singles = [op for op in pool if op.kind == "qubit_excitation_single"]
    # 1/2 (X_i Y_a - Y_i X_a)-type: two strings, coefficients +-i/2
    for op in singles:
        terms = op.generators[0]
        assert len(terms) == 2
        assert sorted(abs(t.coefficient) for t in terms) == [0.5, 0.5]
        for t in terms:
            assert abs(t.coefficient.real) < 1e-14


def test_qeb_double_cube_identity():
    """Every double-excitation generator satisfies G^3 = -G."""
    pool = build_qeb_pool(2, 1, 1)
    for op in pool:
        if op.kind != "qubit_excitation_double":
            continue
        g = kron_sum(op.generators[0], 4)
        assert np.max(np.abs(g @ g @ g + g)) < 1e-12


def test_qeb_pool_combinatorial_count():
    """Pool size equals the independent S_z-conserving enumeration."""
    for n_orb, n_a, n_b in [(2, 1, 1), (3, 2, 1), (4, 2, 2)]:
        n_so = 2 * n_orb
        singles = sum(
            1
            for i, a in itertools.combinations(range(n_so), 2)
            if i % 2 == a % 2
        )
        doubles = 0
        seen = set()
        for quad in itertools.combinations(range(n_so), 4):
            for src in itertools.combinations(quad, 2):
                tgt = tuple(q for q in quad if q not in src)
                if sorted(q % 2 for q in src) != sorted(q % 2 for q in tgt):
                    continue
                key = frozenset((frozenset(src), frozenset(tgt)))
                if key not in seen:
                    seen.add(key)
                    doubles += 1
        pool = build_qeb_pool(n_orb, n_a, n_b)
        assert pool.size == singles + doubles


def test_ceo_grouping_partitions_doubles():
    qeb = build_qeb_pool(4, 2, 2)
    ceo = build_ceo_pool(4, 2, 2)
    qeb_doubles = [op for op in qeb if op.kind == "qubit_excitation_double"]
    combined = [op for op in ceo if op.kind == "ceo_combined"]
    # grouping is a partition: every 4-qubit support hosts exactly one op
    supports = [op.support for op in combined]
    assert len(supports) == len(set(supports))
    assert sum(op.slot_count for op in combined) == len(qeb_doubles)
    singles = [op for op in ceo if op.kind == "qubit_excitation_single"]
    assert len(singles) == sum(1 for op in qeb if op.kind == "qubit_excitation_single")


def test_ceo_multi_slot_generators_commute():
    """Slots within a combined operator act on disjoint 2-dim subspaces."""
    ceo = build_ceo_pool(2, 1, 1)
    for op in ceo:
        if op.slot_count < 2:
            continue
        mats = [kron_sum(terms, 4) for terms in op.generators]
        for a, b in itertools.combinations(mats, 2):
            assert np.max(np.abs(a @ b - b @ a)) < 1e-12


def test_qeb_ceo_commute_with_sz():
    """QEB and CEO generators conserve S_z exactly.  (Individual qubit-pool
    strings cannot: X0 Y2 alone changes S_z; only per-channel flip parity
    survives the per-string split, checked above.)"""
    sz = sz_operator(3)
    for kind in ("qeb", "ceo"):
        pool = build_pool(kind, 3, 2, 1)
        for op in pool.operators[:: max(1, pool.size // 10)]:
            for terms in op.generators:
                g = QubitHamiltonian(list(terms), 6)
                assert commutes_with(g, sz)


def test_qeb_ceo_conserve_particle_number():
    rng = np.random.default_rng(4)
    n_op = number_operator(6)
    for kind in ("qeb", "ceo"):
        pool = build_pool(kind, 3, 2, 1)
        sv = simulator.prepare_reference(0b000111, 6)
        for _ in range(20):
            op = pool[int(rng.integers(pool.size))]
            simulator.apply_generator_exponential(sv, op, rng.standard_normal(op.slot_count))
        n = simulator.expectation(sv, n_op)
        assert n == pytest.approx(3.0, abs=1e-10)


def test_pool_construction_deterministic():
    a = build_ceo_pool(3, 2, 1)
    b = build_ceo_pool(3, 2, 1)
    assert [op.label for op in a] == [op.label for op in b]
    assert [op.support for op in a] == [op.support for op in b]
    key = [(op.support, op.kind) for op in a]
    assert key == sorted(key)


def test_cnot_cost_examples():
    w1 = PoolOperator("pauli_string", ((PauliTerm(1, 1, 1j),),), 1, 0, "Y0")
    assert cnot_cost(w1) == 0
    mask = 0b1111
    w4 = PoolOperator("pauli_string", ((PauliTerm(mask, 0b0001, 1j),),), mask, 6, "w4")
    assert cnot_cost(w4) == 6  # ladder formula 2(w-1)


def test_cnot_cost_defaults_match_table():
    pool = build_ceo_pool(2, 1, 1)
    for op in pool:
        if op.kind == "qubit_excitation_single":
            assert cnot_cost(op) == DEFAULT_COST_TABLE.qeb_single
        elif op.kind == "ceo_combined":
            expected = DEFAULT_COST_TABLE.ceo_base + (op.slot_count - 1)
            assert cnot_cost(op) == expected
        assert op.cnot_cost == cnot_cost(op)


def test_cnot_cost_unknown_kind():
    bogus = PoolOperator("mystery", ((PauliTerm(1, 0, 1j),),), 1, 0, "?")
    with pytest.raises(CostTableError):
        cnot_cost(bogus)


def test_cost_table_override(tmp_path):
    path = tmp_path / "costs.cfg"
    path.write_text("qeb_double = 11\nceo_base=9  # comment\n")
    table = load_cost_table(path)
    assert table.qeb_double == 11
    assert table.ceo_base == 9
    assert table.qeb_single == DEFAULT_COST_TABLE.qeb_single

    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense=1\n")
    with pytest.raises(CostTableError):
        load_cost_table(bad)


def test_random_subpool_full_fraction():
    pool = build_qeb_pool(2, 1, 1)
    for seed in (0, 7, 123):
        sub = random_subpool(pool, 1.0, seed)
        assert [op.label for op in sub] == [op.label for op in pool]


def test_random_subpool_deterministic():
    pool = build_qeb_pool(3, 2, 1)
    a = random_subpool(pool, 0.5, seed=11)
    b = random_subpool(pool, 0.5, seed=11)
    c = random_subpool(pool, 0.5, seed=12)
    assert [op.label for op in a] == [op.label for op in b]
    assert a.size == int(np.ceil(0.5 * pool.size))
    assert [op.label for op in a] != [op.label for op in c]


def test_random_subpool_empty():
    pool = build_qeb_pool(2, 1, 1)
    with pytest.raises(ValueError):
        random_subpool(pool, 0.0, 1)
    empty = build_qeb_pool(1, 1, 0)
    with pytest.raises(EmptySubpool):
        random_subpool(empty, 0.5, 1)
