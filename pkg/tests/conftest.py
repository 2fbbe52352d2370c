import json
import os

import numpy as np
import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_matrix(term, n_qubits):
    """Independent dense oracle: per-qubit 2x2 letters combined with kron.

    Qubit 0 is the least significant bit of the basis index, so it sits at
    the right end of the kron chain.
    """
    letters = []
    for q in range(n_qubits):
        x = (term.x_mask >> q) & 1
        z = (term.z_mask >> q) & 1
        letters.append(_Y if (x and z) else _X if x else _Z if z else _I)
    out = np.array([[term.coefficient]], dtype=complex)
    for letter in reversed(letters):
        out = np.kron(out, letter)
    return out


def kron_sum(terms, n_qubits):
    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        out += kron_matrix(t, n_qubits)
    return out


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def expected():
    with open(os.path.join(FIXTURES, "expected.json")) as f:
        return json.load(f)


def load_fixture_problem(tag):
    from adaptscale.hamio import parse_fcidump

    with open(os.path.join(FIXTURES, f"{tag}.fcidump")) as f:
        return parse_fcidump(f.read(), tag)


@pytest.fixture(scope="session")
def h2_problem():
    return load_fixture_problem("h2_sto3g")


@pytest.fixture(scope="session")
def h4_problem():
    return load_fixture_problem("h4_eq")


def random_problem(rng, n_orbitals, n_alpha, n_beta, core=0.0):
    """Random symmetric integrals over n_orbitals orbitals."""
    from adaptscale.hamio import MolecularProblem

    h1 = rng.standard_normal((n_orbitals,) * 2)
    h1 = (h1 + h1.T) / 2
    g = rng.standard_normal((n_orbitals,) * 4)
    for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
        g = (g + g.transpose(perm)) / 2
    return MolecularProblem(
        n_orbitals, n_alpha, n_beta, abs(n_alpha - n_beta) + 1, core, h1, g
    )


def random_state(rng, n_qubits):
    from adaptscale.simulator import Statevector

    amps = rng.standard_normal(1 << n_qubits) + 1j * rng.standard_normal(1 << n_qubits)
    amps /= np.linalg.norm(amps)
    return Statevector(amps, n_qubits)
