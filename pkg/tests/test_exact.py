import numpy as np
import pytest

from adaptscale import exact
from adaptscale.exact import (
    CiDistribution,
    CiVector,
    SectorSpec,
    SectorTooLarge,
    ci_distribution,
    determinant_count,
    fci_ground_state,
    hartree_fock_energy,
    interleave,
    lanczos_lowest,
    sector_determinants,
    spin_squared_ci,
)
from adaptscale.pauli import jordan_wigner

from conftest import kron_sum, random_problem


def test_single_determinant_energy():
    # 1 orbital, (1,1): E = core + 2 h00 + (00|00)
    h1 = np.array([[0.5]])
    g = np.full((1, 1, 1, 1), 0.25)
    from adaptscale.hamio import MolecularProblem

    p = MolecularProblem(1, 1, 1, 1, 0.1, h1, g)
    ci = fci_ground_state(p)
    assert ci.energy == pytest.approx(0.1 + 2 * 0.5 + 0.25, abs=1e-14)
    assert len(ci.determinants) == 1


def test_determinant_count_examples():
    assert determinant_count(SectorSpec(6, 3, 3)) == 400
    assert determinant_count(SectorSpec(5, 0, 0)) == 1
    assert determinant_count(SectorSpec(15, 8, 7)) == 41_409_225


def test_determinant_count_vs_bigint():
    import math

    spec = SectorSpec(15, 8, 7)
    brute = math.factorial(15) // (math.factorial(8) * math.factorial(7))
    brute *= math.factorial(15) // (math.factorial(7) * math.factorial(8))
    assert determinant_count(spec) == brute


def test_sector_cap():
    from adaptscale.hamio import MolecularProblem

    p = MolecularProblem(15, 8, 7, 2, 0.0, np.zeros((15, 15)), np.zeros((15,) * 4))
    with pytest.raises(SectorTooLarge):
        fci_ground_state(p, det_cap=10**6)


def test_determinant_ordering():
    dets = sector_determinants(SectorSpec(3, 2, 1))
    # alpha-major, lexicographic bitset order
    assert dets[0] == (0b011, 0b001)
    assert dets[1] == (0b011, 0b010)
    alphas = [a for a, _ in dets]
    assert alphas == sorted(alphas)


def test_dense_vs_lanczos(h2_problem):
    dense = fci_ground_state(h2_problem, dense_cutoff=2000)
    lanczos = fci_ground_state(h2_problem, dense_cutoff=1)
    assert dense.energy == pytest.approx(lanczos.energy, abs=1e-10)
    overlap = abs(np.dot(dense.coefficients, lanczos.coefficients))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_lanczos_on_random_matrix():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((60, 60))
    m = (m + m.T) / 2
    evals, evecs = lanczos_lowest(lambda v: m @ v, 60, n_pairs=3)
    ref = np.linalg.eigvalsh(m)[:3]
    assert np.allclose(evals, ref, atol=1e-9)


def test_h4_sector_matches_dense_qubit_oracle(h4_problem):
    spec = SectorSpec(4, 2, 2)
    assert determinant_count(spec) == 36
    ci = fci_ground_state(h4_problem)
    h = jordan_wigner(h4_problem)
    dense = kron_sum(h.terms, 8).real
    idx = [interleave(a, b) for a, b in sector_determinants(spec)]
    sector_lowest = np.linalg.eigvalsh(dense[np.ix_(idx, idx)])[0]
    assert ci.energy == pytest.approx(sector_lowest, abs=1e-10)


def test_variational_bound(h4_problem):
    assert fci_ground_state(h4_problem).energy <= hartree_fock_energy(h4_problem) + 1e-12


def test_ci_distribution_examples():
    spec = SectorSpec(1, 1, 1)
    v = CiVector([(1, 1)], np.array([1.0]), -1.0, spec)
    assert np.allclose(ci_distribution(v).probabilities, [1.0])

    spec2 = SectorSpec(2, 1, 1)
    dets = sector_determinants(spec2)
    c = np.zeros(len(dets))
    c[0] = c[1] = 1 / np.sqrt(2)
    v2 = CiVector(dets, c, -1.0, spec2)
    assert np.allclose(ci_distribution(v2).probabilities[:2], [0.5, 0.5])


def test_ci_distribution_normalization_and_order():
    rng = np.random.default_rng(21)
    spec = SectorSpec(3, 2, 1)
    dets = sector_determinants(spec)
    c = rng.standard_normal(len(dets))
    c /= np.linalg.norm(c)
    p = ci_distribution(CiVector(dets, c, 0.0, spec)).probabilities
    assert float(np.sum(p)) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(p) <= 1e-15)


def test_ci_distribution_phase_invariance():
    spec = SectorSpec(2, 1, 1)
    dets = sector_determinants(spec)
    c = np.array([0.8, -0.4, 0.4, 0.2])
    c /= np.linalg.norm(c)
    p1 = ci_distribution(CiVector(dets, c, 0.0, spec)).probabilities
    p2 = ci_distribution(CiVector(dets, -c, 0.0, spec)).probabilities
    assert np.allclose(p1, p2)


def test_spin_squared_closed_shell():
    spec = SectorSpec(2, 1, 1)
    dets = sector_determinants(spec)
    c = np.zeros(len(dets))
    c[dets.index((1, 1))] = 1.0
    assert spin_squared_ci(CiVector(dets, c, 0.0, spec)) == pytest.approx(0.0, abs=1e-12)


def test_spin_squared_open_shell():
    spec = SectorSpec(1, 1, 0)
    v = CiVector([(1, 0)], np.array([1.0]), 0.0, spec)
    assert spin_squared_ci(v) == pytest.approx(0.75, abs=1e-12)

    spec2 = SectorSpec(2, 2, 0)
    v2 = CiVector([(0b11, 0)], np.array([1.0]), 0.0, spec2)
    assert spin_squared_ci(v2) == pytest.approx(2.0, abs=1e-12)


def test_spin_squared_matches_statevector(h4_problem):
    from adaptscale import simulator

    ci = fci_ground_state(h4_problem)
    sv = simulator.Statevector(ci.to_statevector_array(), 8)
    s2_sv = simulator.spin_squared(sv, 4)
    assert spin_squared_ci(ci) == pytest.approx(s2_sv, abs=1e-10)


def test_spin_filtering_selects_triplet():
    """In an MS2=0 sector, asking for S=1 returns the lowest triplet."""
    rng = np.random.default_rng(2)
    p = random_problem(rng, 3, 1, 1)
    singlet = fci_ground_state(p, target_spin=0.0)
    triplet = fci_ground_state(p, target_spin=1.0)
    assert spin_squared_ci(triplet) == pytest.approx(2.0, abs=0.01)
    assert triplet.energy >= singlet.energy - 1e-12


def test_statevector_energy_consistency(h2_problem, expected):
    from adaptscale import simulator

    ci = fci_ground_state(h2_problem)
    sv = simulator.Statevector(ci.to_statevector_array(), 4)
    e = simulator.expectation(sv, jordan_wigner(h2_problem))
    assert e == pytest.approx(ci.energy, abs=1e-10)
