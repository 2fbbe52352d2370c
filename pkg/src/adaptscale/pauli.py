"""Pauli-string algebra and the Jordan-Wigner map to qubit operators.

Pauli strings are encoded symplectically as a pair of bitmasks ``(x_mask,
z_mask)``: qubit q carries X if only bit q of ``x_mask`` is set, Z if only
bit q of ``z_mask`` is set, and Y if both are set.  With this convention
every encoded string is itself a Hermitian operator, so Hermitian operator
sums carry purely real coefficients -- which makes Hermiticity directly
inspectable.

Spin-orbital ordering is interleaved: spatial orbital p maps to qubit 2p
(alpha) and qubit 2p+1 (beta), lowest orbital first.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np


class EmptyProblem(ValueError):
    """Raised when a molecular problem has no orbitals to map."""


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string: ``coefficient * P(x_mask, z_mask)``."""

    x_mask: int
    z_mask: int
    coefficient: complex

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def label(self, n_qubits=None) -> str:
        """Human-readable form like ``X0 Z3 Y5`` (empty string = identity)."""
        parts = []
        support = self.support
        q = 0
        while support >> q:
            x = (self.x_mask >> q) & 1
            z = (self.z_mask >> q) & 1
            if x and z:
                parts.append(f"Y{q}")
            elif x:
                parts.append(f"X{q}")
            elif z:
                parts.append(f"Z{q}")
            q += 1
        return " ".join(parts)


def pauli_product(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product a*b with the phase from the symplectic overlap of the masks.

    Uses P(x1,z1) P(x2,z2) = i^k P(x1^x2, z1^z2) with
    k = |x1&z1| + |x2&z2| - |x3&z3| + 2|z1&x2|  (mod 4).
    """
    x3 = a.x_mask ^ b.x_mask
    z3 = a.z_mask ^ b.z_mask
    k = (
        (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
    ) % 4
    return PauliTerm(x3, z3, a.coefficient * b.coefficient * (1j) ** k)


class QubitHamiltonian:
    """Weighted sum of Pauli strings on ``n_qubits`` qubits."""

    def __init__(self, terms, n_qubits):
        self.terms = list(terms)
        self.n_qubits = n_qubits

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def max_imag(self):
        if not self.terms:
            return 0.0
        return max(abs(complex(t.coefficient).imag) for t in self.terms)

    def to_text(self):
        """One term per line, ``<coeff> <string>`` (identity: bare coeff)."""
        lines = []
        for t in sorted(self.terms, key=lambda t: (t.weight, t.x_mask, t.z_mask)):
            c = complex(t.coefficient)
            coeff = repr(c.real) if c.imag == 0.0 else repr(c)
            body = t.label()
            lines.append(f"{coeff} {body}".rstrip())
        return "\n".join(lines) + "\n"


def simplify(h: QubitHamiltonian, threshold: float = 1e-12) -> QubitHamiltonian:
    """Merge like terms and drop terms with |coefficient| <= threshold."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    acc = defaultdict(complex)
    for t in h.terms:
        acc[(t.x_mask, t.z_mask)] += t.coefficient
    kept = [
        PauliTerm(x, z, c)
        for (x, z), c in sorted(acc.items())
        if abs(c) > threshold
    ]
    return QubitHamiltonian(kept, h.n_qubits)


# ---------------------------------------------------------------------------
# Jordan-Wigner ladder operators and operator products
# ---------------------------------------------------------------------------

def ladder_terms(mode: int, dagger: bool) -> list[PauliTerm]:
    """JW image of a creation/annihilation operator on spin-orbital `mode`.

    a^dag_m = 1/2 (X_m - iY_m) Z_{m-1} ... Z_0,  a_m the conjugate.
    """
    x = 1 << mode
    chain = x - 1
    sign = -1j if dagger else 1j
    return [
        PauliTerm(x, chain, 0.5),
        PauliTerm(x, chain | x, 0.5 * sign),
    ]


def multiply_term_sums(*factors):
    """Expand a product of Pauli-term sums into a merged coefficient dict."""
    acc = {(0, 0): 1.0 + 0.0j}
    for factor in factors:
        nxt = defaultdict(complex)
        for (x, z), c in acc.items():
            left = PauliTerm(x, z, c)
            for t in factor:
                p = pauli_product(left, t)
                nxt[(p.x_mask, p.z_mask)] += p.coefficient
        acc = nxt
    return acc


def _accumulate(acc, factors, scale):
    for (x, z), c in multiply_term_sums(*factors).items():
        acc[(x, z)] += scale * c


def jordan_wigner(problem, merge_threshold: float = 1e-14) -> QubitHamiltonian:
    """Map a MolecularProblem to a qubit operator under Jordan-Wigner.

    Spatial orbital p becomes qubits 2p (alpha) and 2p+1 (beta).  Two-body
    integrals are chemists' notation (ij|kl), contributing
    1/2 (ij|kl) a^dag_{i,s} a^dag_{k,t} a_{l,t} a_{j,s} summed over spins.
    The core energy enters as an identity term.
    """
    n_orb = problem.n_orbitals
    if n_orb == 0:
        raise EmptyProblem("problem has no active orbitals")
    n_q = 2 * n_orb

    acc = defaultdict(complex)
    acc[(0, 0)] += problem.core_energy

    h1 = problem.one_body
    for p in range(n_orb):
        for q in range(n_orb):
            if h1[p, q] == 0.0:
                continue
            for s in (0, 1):
                _accumulate(
                    acc,
                    (ladder_terms(2 * p + s, True), ladder_terms(2 * q + s, False)),
                    h1[p, q],
                )

    g = problem.two_body
    for i in range(n_orb):
        for j in range(n_orb):
            for k in range(n_orb):
                for l in range(n_orb):
                    v = g[i, j, k, l]
                    if v == 0.0:
                        continue
                    for s in (0, 1):
                        for t in (0, 1):
                            _accumulate(
                                acc,
                                (
                                    ladder_terms(2 * i + s, True),
                                    ladder_terms(2 * k + t, True),
                                    ladder_terms(2 * l + t, False),
                                    ladder_terms(2 * j + s, False),
                                ),
                                0.5 * v,
                            )

    terms = []
    for (x, z), c in sorted(acc.items()):
        if abs(c) <= merge_threshold:
            continue
        if abs(c.imag) > 1e-10:
            raise ValueError(
                f"non-Hermitian JW output: coefficient {c} on masks {(x, z)}"
            )
        terms.append(PauliTerm(x, z, c.real))
    return QubitHamiltonian(terms, n_q)


# ---------------------------------------------------------------------------
# Symmetry operators (same encoding, used for diagnostics)
# ---------------------------------------------------------------------------

def number_operator(n_qubits: int) -> QubitHamiltonian:
    """Total particle number: sum_q (I - Z_q)/2."""
    acc = defaultdict(complex)
    acc[(0, 0)] += 0.5 * n_qubits
    for q in range(n_qubits):
        acc[(0, 1 << q)] -= 0.5
    return QubitHamiltonian(
        [PauliTerm(x, z, c.real) for (x, z), c in sorted(acc.items())], n_qubits
    )


def sz_operator(n_orbitals: int) -> QubitHamiltonian:
    """S_z = 1/2 sum_p (n_{p,alpha} - n_{p,beta}) under alternating ordering."""
    acc = defaultdict(complex)
    for p in range(n_orbitals):
        acc[(0, 1 << (2 * p))] -= 0.25
        acc[(0, 1 << (2 * p + 1))] += 0.25
    return QubitHamiltonian(
        [PauliTerm(x, z, c.real) for (x, z), c in sorted(acc.items())],
        2 * n_orbitals,
    )


def spin_squared_operator(n_orbitals: int) -> QubitHamiltonian:
    """S^2 = S_- S_+ + S_z (S_z + 1) as a qubit operator."""
    acc = defaultdict(complex)
    # S+ = sum_p a^dag_{p,alpha} a_{p,beta}; S- its conjugate.
    for p in range(n_orbitals):
        for q in range(n_orbitals):
            _accumulate(
                acc,
                (
                    ladder_terms(2 * q + 1, True),   # beta^dag   (S- piece)
                    ladder_terms(2 * q, False),      # alpha
                    ladder_terms(2 * p, True),       # alpha^dag  (S+ piece)
                    ladder_terms(2 * p + 1, False),  # beta
                ),
                1.0,
            )
    sz = sz_operator(n_orbitals)
    sz_terms = [(t.x_mask, t.z_mask, t.coefficient) for t in sz.terms]
    for x1, z1, c1 in sz_terms:
        acc[(x1, z1)] += c1  # S_z
        for x2, z2, c2 in sz_terms:  # S_z^2
            p = pauli_product(PauliTerm(x1, z1, c1), PauliTerm(x2, z2, c2))
            acc[(p.x_mask, p.z_mask)] += p.coefficient
    terms = [
        PauliTerm(x, z, c.real)
        for (x, z), c in sorted(acc.items())
        if abs(c) > 1e-14
    ]
    return QubitHamiltonian(terms, 2 * n_orbitals)


def commutes_with(h: QubitHamiltonian, g: QubitHamiltonian) -> bool:
    """Symbolic check that [h, g] = 0 (exact term cancellation)."""
    acc = defaultdict(complex)
    for a in h.terms:
        for b in g.terms:
            ab = pauli_product(a, b)
            ba = pauli_product(b, a)
            acc[(ab.x_mask, ab.z_mask)] += ab.coefficient
            acc[(ba.x_mask, ba.z_mask)] -= ba.coefficient
    return all(abs(c) < 1e-10 for c in acc.values())


def dense_matrix(terms, n_qubits: int) -> np.ndarray:
    """Dense matrix of a term iterable; for testing and small oracles only."""
    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for t in terms:
        phase = (1j) ** ((t.x_mask & t.z_mask).bit_count())
        src = idx ^ t.x_mask
        signs = 1.0 - 2.0 * (np.bitwise_count(src & t.z_mask) & 1)
        out[idx, src] += t.coefficient * phase * signs
    return out
