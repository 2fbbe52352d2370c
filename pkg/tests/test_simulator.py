import numpy as np
import pytest
from scipy.linalg import expm

from adaptscale import simulator
from adaptscale.pauli import PauliTerm, QubitHamiltonian, jordan_wigner
from adaptscale.pools import build_pool, build_qeb_pool
from adaptscale.simulator import (
    AnsatzState,
    ArityError,
    CompiledOperator,
    DimensionError,
    OrderingError,
    Statevector,
    apply_generator_exponential,
    dump_statevector,
    expectation,
    load_statevector,
    pool_gradients,
    prepare_ansatz_state,
    prepare_reference,
    spin_squared,
)

from conftest import kron_sum, random_problem, random_state


def test_prepare_reference_examples():
    sv = prepare_reference(0b0011, 4)
    assert sv.amplitudes[3] == 1.0
    assert np.sum(np.abs(sv.amplitudes)) == 1.0

    vac = prepare_reference(0, 2)
    assert vac.amplitudes[0] == 1.0


def test_reference_number_expectation():
    from adaptscale.pauli import number_operator

    rng = np.random.default_rng(1)
    for _ in range(5):
        occ = int(rng.integers(16))
        sv = prepare_reference(occ, 4)
        n = expectation(sv, number_operator(4))
        assert n == pytest.approx(occ.bit_count(), abs=1e-12)


def test_prepare_reference_too_wide():
    with pytest.raises(DimensionError):
        prepare_reference(0b10000, 4)


def test_expectation_eigenstate():
    z0 = QubitHamiltonian([PauliTerm(0, 1, 1.0)], 1)
    assert expectation(prepare_reference(0, 1), z0) == pytest.approx(1.0)


def test_expectation_identity_scale():
    h = QubitHamiltonian([PauliTerm(0, 0, 2.5)], 3)
    rng = np.random.default_rng(0)
    assert expectation(random_state(rng, 3), h) == pytest.approx(2.5, abs=1e-12)


def test_expectation_matches_dense_quadratic_form():
    # real coefficients on the (x, z)-encoded strings are Hermitian by
    # construction, so the quadratic form is real
    rng = np.random.default_rng(5)
    for _ in range(20):
        terms = [
            PauliTerm(int(rng.integers(8)), int(rng.integers(8)),
                      float(rng.standard_normal()))
            for _ in range(8)
        ]
        h = QubitHamiltonian(terms, 3)
        dense = kron_sum(terms, 3)
        sv = random_state(rng, 3)
        quad = float(np.real(sv.amplitudes.conj() @ dense @ sv.amplitudes))
        assert expectation(sv, h) == pytest.approx(quad, abs=1e-12)


def test_expectation_dimension_mismatch():
    h = QubitHamiltonian([PauliTerm(0, 1, 1.0)], 2)
    with pytest.raises(DimensionError):
        expectation(prepare_reference(0, 3), h)


def test_compiled_operator_fallback_matches():
    rng = np.random.default_rng(8)
    terms = [
        PauliTerm(int(rng.integers(16)), int(rng.integers(16)),
                  float(rng.standard_normal()))
        for _ in range(10)
    ]
    h = QubitHamiltonian(terms, 4)
    fast = CompiledOperator(h)
    slow = CompiledOperator(h, memory_budget=0)
    psi = random_state(rng, 4).amplitudes
    assert np.allclose(fast.apply(psi), slow.apply(psi), atol=1e-12)


def test_exponential_zero_angle_is_identity():
    pool = build_qeb_pool(2, 1, 1)
    rng = np.random.default_rng(2)
    sv = random_state(rng, 4)
    before = sv.amplitudes.copy()
    for op in pool:
        apply_generator_exponential(sv, op, np.zeros(op.slot_count))
    assert np.max(np.abs(sv.amplitudes - before)) < 1e-15


def test_exponential_inverse_roundtrip():
    rng = np.random.default_rng(3)
    pool = build_pool("qubit", 2, 1, 1)
    sv = random_state(rng, 4)
    before = sv.amplitudes.copy()
    thetas = rng.standard_normal(len(pool.operators))
    for op, t in zip(pool, thetas):
        apply_generator_exponential(sv, op, [t])
    for op, t in zip(reversed(pool.operators), reversed(thetas)):
        apply_generator_exponential(sv, op, [-t])
    assert np.max(np.abs(sv.amplitudes - before)) < 1e-12


def test_qeb_double_swaps_occupation():
    """The paired double excitation maps |occ 0,1> to |occ 2,3> at theta
    giving a quarter rotation."""
    pool = build_qeb_pool(2, 1, 1)
    doubles = [op for op in pool if op.kind == "qubit_excitation_double"]
    target = None
    for op in doubles:
        sv = prepare_reference(0b0011, 4)
        apply_generator_exponential(sv, op, [np.pi / 2])
        if abs(abs(sv.amplitudes[0b1100]) - 1.0) < 1e-12:
            target = op
    assert target is not None, "no double maps 0b0011 -> 0b1100 at pi/2"


def test_exponential_matches_dense_expm():
    rng = np.random.default_rng(4)
    from conftest import kron_sum as oracle_sum

    for kind in ("qubit", "qeb", "ceo"):
        pool = build_pool(kind, 2, 1, 1)
        for _ in range(4):
            op = pool[int(rng.integers(pool.size))]
            thetas = rng.standard_normal(op.slot_count)
            sv = random_state(rng, 4)
            before = sv.amplitudes.copy()
            apply_generator_exponential(sv, op, thetas)
            gen = np.zeros((16, 16), dtype=complex)
            for terms, th in zip(op.generators, np.atleast_1d(thetas)):
                gen += th * oracle_sum(terms, 4)
            assert np.max(np.abs(sv.amplitudes - expm(gen) @ before)) < 1e-12


def test_exponential_arity_error():
    pool = build_pool("ceo", 2, 1, 1)
    multi = [op for op in pool if op.slot_count > 1][0]
    sv = prepare_reference(0b0011, 4)
    with pytest.raises(ArityError):
        apply_generator_exponential(sv, multi, [0.1])


def test_norm_preserved_over_many_applications():
    rng = np.random.default_rng(6)
    pool = build_pool("qeb", 3, 2, 1)
    sv = random_state(rng, 6)
    for _ in range(1000):
        op = pool[int(rng.integers(pool.size))]
        apply_generator_exponential(sv, op, rng.standard_normal(op.slot_count))
    assert abs(sv.norm() - 1.0) < 1e-9


def test_pool_gradient_commuting_vanishes():
    # eigenstate of H: all screening gradients vanish
    h = QubitHamiltonian([PauliTerm(0, 1, 1.0)], 4)  # Z0
    pool = build_pool("qeb", 2, 1, 1)
    grads = pool_gradients(prepare_reference(0, 4), h, pool.operators)
    assert np.max(grads) < 1e-12


def test_pool_gradient_textbook_value():
    """Hand oracle: H = X0, A = iY0, state |0>.  [X, iY] = -2Z, so the
    screening gradient is |<0|-2Z|0>| = 2.  (For H = Z0 the same state is
    an eigenstate and every gradient vanishes, per the commuting case.)"""
    from adaptscale.pools import PoolOperator

    op = PoolOperator("pauli_string", ((PauliTerm(1, 1, 1j),),), 1, 0, "iY0")

    h_x = QubitHamiltonian([PauliTerm(1, 0, 1.0)], 1)
    grads = pool_gradients(prepare_reference(0, 1), h_x, [op])
    assert grads[0] == pytest.approx(2.0, abs=1e-12)

    h_z = QubitHamiltonian([PauliTerm(0, 1, 1.0)], 1)
    grads = pool_gradients(prepare_reference(0, 1), h_z, [op])
    assert grads[0] == pytest.approx(0.0, abs=1e-12)


def _finite_difference(h, base_ansatz, op, delta=1e-5):
    import copy

    out = []
    for s in range(op.slot_count):
        es = []
        for sign in (+1, -1):
            ans = base_ansatz.copy()
            slots = np.arange(ans.parameters.size, ans.parameters.size + op.slot_count)
            ans.structure = list(ans.structure) + [(op, slots)]
            theta = np.zeros(op.slot_count)
            theta[s] = sign * delta
            ans.parameters = np.concatenate([ans.parameters, theta])
            es.append(simulator.ansatz_energy(h, ans))
        out.append((es[0] - es[1]) / (2 * delta))
    return np.array(out)


def test_pool_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    problem = random_problem(rng, 2, 1, 1)
    h = jordan_wigner(problem)
    checked = 0
    for kind in ("qubit", "qeb", "ceo"):
        pool = build_pool(kind, 2, 1, 1)
        base = AnsatzState([], np.zeros(0), 0b0011, 4)
        # random but normalized start: apply a few pool ops at random angles
        ops = [pool[int(rng.integers(pool.size))] for _ in range(3)]
        slots, params = [], []
        k = 0
        for op in ops:
            slots.append((op, np.arange(k, k + op.slot_count)))
            params.extend(rng.standard_normal(op.slot_count) * 0.3)
            k += op.slot_count
        base.structure = slots
        base.parameters = np.array(params)
        state = prepare_ansatz_state(base)
        grads = pool_gradients(state, h, pool.operators)
        for j in [0, pool.size // 2, pool.size - 1]:
            fd = _finite_difference(h, base, pool[j])
            agg = abs(fd[0]) if pool[j].slot_count == 1 else float(np.linalg.norm(fd))
            assert grads[j] == pytest.approx(agg, rel=1e-6, abs=1e-9)
            checked += 1
    assert checked == 9


def test_spin_squared_reference_states():
    assert spin_squared(prepare_reference(0b0011, 4), 2) == pytest.approx(0.0, abs=1e-12)
    assert spin_squared(prepare_reference(0b0001, 4), 2) == pytest.approx(0.75, abs=1e-12)
    assert spin_squared(prepare_reference(0b0101, 4), 2) == pytest.approx(2.0, abs=1e-12)


def test_spin_squared_ordering_error():
    with pytest.raises(OrderingError):
        spin_squared(prepare_reference(0, 3), 2)


def test_statevector_dump_roundtrip(tmp_path):
    rng = np.random.default_rng(12)
    sv = random_state(rng, 5)
    path = tmp_path / "state.bin"
    dump_statevector(sv, path)
    back = load_statevector(path)
    assert back.n_qubits == 5
    assert np.array_equal(back.amplitudes, sv.amplitudes)


def test_ansatz_gradient_matches_finite_differences():
    """Adjoint-sweep gradient vs central differences on a random 8-qubit
    ansatz, componentwise relative error < 1e-6."""
    rng = np.random.default_rng(13)
    problem = random_problem(rng, 4, 2, 2)
    h = jordan_wigner(problem)
    pool = build_pool("ceo", 4, 2, 2)
    structure, params = [], []
    k = 0
    for _ in range(5):
        op = pool[int(rng.integers(pool.size))]
        structure.append((op, np.arange(k, k + op.slot_count)))
        params.extend(rng.standard_normal(op.slot_count) * 0.4)
        k += op.slot_count
    ansatz = AnsatzState(structure, np.array(params), 0b00001111, 8)
    energy, grad = simulator.ansatz_energy_gradient(h, ansatz)

    delta = 1e-5
    for i in range(len(params)):
        for_p = ansatz.copy()
        for_p.parameters = ansatz.parameters.copy()
        for_p.parameters[i] += delta
        e_plus = simulator.ansatz_energy(h, for_p)
        for_p.parameters[i] -= 2 * delta
        e_minus = simulator.ansatz_energy(h, for_p)
        fd = (e_plus - e_minus) / (2 * delta)
        assert grad[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)
    assert energy == pytest.approx(simulator.ansatz_energy(h, ansatz), abs=1e-12)
