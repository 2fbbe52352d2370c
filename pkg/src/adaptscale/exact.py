"""Sector-restricted exact diagonalization in the determinant basis.

Determinants are labeled by (alpha, beta) occupation bitsets over spatial
orbitals.  Internally every determinant is an interleaved spin-orbital
bitstring (orbital p: alpha -> bit 2p, beta -> bit 2p+1) with creation
operators ordered by increasing spin-orbital index; this makes determinant
phases coincide with the Jordan-Wigner computational basis, so CI vectors
convert to statevectors without sign juggling.

This path is built directly from the integrals -- independently of the
Pauli/statevector route -- so the two can cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class SectorTooLarge(ValueError):
    """Determinant count exceeds the configured cap."""


class IterationLimit(RuntimeError):
    """Lanczos failed to converge within the iteration budget."""


@dataclass(frozen=True)
class SectorSpec:
    n_orbitals: int
    n_alpha: int
    n_beta: int
    target_spin: float = 0.0

    def __post_init__(self):
        if self.n_alpha + self.n_beta > 2 * self.n_orbitals:
            raise ValueError("more electrons than spin-orbitals")
        if min(self.n_alpha, self.n_beta, self.n_orbitals) < 0:
            raise ValueError("negative sector entry")


def determinant_count(spec: SectorSpec) -> int:
    """N_det = C(n_orb, n_alpha) * C(n_orb, n_beta), exactly."""
    return math.comb(spec.n_orbitals, spec.n_alpha) * math.comb(
        spec.n_orbitals, spec.n_beta
    )


@dataclass
class CiVector:
    """Eigenvector over sector determinants, with its energy."""

    determinants: list  # [(alpha_bits, beta_bits)]
    coefficients: np.ndarray
    energy: float
    sector: SectorSpec

    def to_statevector_array(self) -> np.ndarray:
        """Amplitudes over the 2^(2 n_orb) qubit basis (interleaved JW order)."""
        dim = 1 << (2 * self.sector.n_orbitals)
        amps = np.zeros(dim, dtype=complex)
        for (alpha, beta), c in zip(self.determinants, self.coefficients):
            amps[interleave(alpha, beta)] = c
        return amps


@dataclass
class CiDistribution:
    """Probabilities p_i = |C_i|^2 sorted in descending order."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.size and (np.min(p) < -1e-14 or abs(float(np.sum(p)) - 1.0) > 1e-10):
            raise ValueError("not a normalized probability vector")
        self.probabilities = np.sort(np.clip(p, 0.0, None))[::-1]


def ci_distribution(v: CiVector) -> CiDistribution:
    return CiDistribution(np.abs(np.asarray(v.coefficients)) ** 2)


def interleave(alpha_bits: int, beta_bits: int) -> int:
    det = 0
    p = 0
    while (alpha_bits >> p) or (beta_bits >> p):
        det |= ((alpha_bits >> p) & 1) << (2 * p)
        det |= ((beta_bits >> p) & 1) << (2 * p + 1)
        p += 1
    return det


def _bit_combinations(n_bits, n_set):
    """All n_bits-wide ints with n_set bits, in increasing numeric order."""
    out = []
    for positions in _combinations_sorted(n_bits, n_set):
        bits = 0
        for q in positions:
            bits |= 1 << q
        out.append(bits)
    return sorted(out)


def _combinations_sorted(n, k):
    import itertools

    return itertools.combinations(range(n), k)


def sector_determinants(spec: SectorSpec):
    """Alpha-major, beta-minor, each in lexicographic bitset order."""
    alphas = _bit_combinations(spec.n_orbitals, spec.n_alpha)
    betas = _bit_combinations(spec.n_orbitals, spec.n_beta)
    return [(a, b) for a in alphas for b in betas]


# ---------------------------------------------------------------------------
# Slater-Condon matrix elements on interleaved bitstrings
# ---------------------------------------------------------------------------

def _parity_between(bits, i, j):
    """(-1)^(number of occupied spin-orbitals strictly between i and j)."""
    lo, hi = (i, j) if i < j else (j, i)
    mask = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return -1.0 if (bits & mask).bit_count() & 1 else 1.0


def _occ_list(bits):
    out = []
    q = 0
    while bits >> q:
        if (bits >> q) & 1:
            out.append(q)
        q += 1
    return out


class SectorHamiltonian:
    """H restricted to one (n_alpha, n_beta) sector, with matvec support."""

    def __init__(self, problem, spec):
        self.problem = problem
        self.spec = spec
        self.dets = sector_determinants(spec)
        self.index = {interleave(a, b): i for i, (a, b) in enumerate(self.dets)}
        self.dim = len(self.dets)
        self._matrix = None  # scipy CSR, built lazily

    def diagonal_element(self, det):
        h, g = self.problem.one_body, self.problem.two_body
        occ = _occ_list(det)
        e = self.problem.core_energy
        for m in occ:
            e += h[m >> 1, m >> 1]
        for a_i, m in enumerate(occ):
            pm, sm = m >> 1, m & 1
            for n in occ[: a_i + 1]:
                pn, sn = n >> 1, n & 1
                if n == m:
                    continue
                e += g[pm, pm, pn, pn]
                if sm == sn:
                    e -= g[pm, pn, pn, pm]
        return e

    def connections(self, det):
        """Yield (other_det, element) over single and double excitations."""
        h, g = self.problem.one_body, self.problem.two_body
        occ = _occ_list(det)
        n_so = 2 * self.problem.n_orbitals
        virt = [q for q in range(n_so) if not (det >> q) & 1]

        # singles: m -> p, same spin
        for m in occ:
            pm, sm = m >> 1, m & 1
            for p in virt:
                if p & 1 != sm:
                    continue
                pp = p >> 1
                val = h[pp, pm]
                for n in occ:
                    if n == m:
                        continue
                    pn, sn = n >> 1, n & 1
                    val += g[pp, pm, pn, pn]
                    if sn == sm:
                        val -= g[pp, pn, pn, pm]
                if val != 0.0:
                    yield det ^ (1 << m) ^ (1 << p), _parity_between(det, m, p) * val

        # doubles: {m<n} -> {p<q}, spin multisets equal
        for a_i in range(len(occ)):
            m = occ[a_i]
            for n in occ[a_i + 1 :]:
                sm, sn = m & 1, n & 1
                for b_i in range(len(virt)):
                    p = virt[b_i]
                    for q in virt[b_i + 1 :]:
                        sp, sq = p & 1, q & 1
                        # pairing m->p, n->q  (direct)
                        direct = 0.0
                        if sp == sm and sq == sn:
                            direct = g[p >> 1, m >> 1, q >> 1, n >> 1]
                        # pairing m->q, n->p  (exchange)
                        exch = 0.0
                        if sq == sm and sp == sn:
                            exch = g[q >> 1, m >> 1, p >> 1, n >> 1]
                        if direct == 0.0 and exch == 0.0:
                            continue
                        inter = det ^ (1 << m) ^ (1 << p)
                        sign = _parity_between(det, m, p) * _parity_between(
                            inter, n, q
                        )
                        val = sign * (direct - exch)
                        if val != 0.0:
                            yield inter ^ (1 << n) ^ (1 << q), val

    def build_matrix(self):
        if self._matrix is not None:
            return self._matrix
        from scipy.sparse import coo_matrix

        rows, cols, vals = [], [], []
        for i, (a, b) in enumerate(self.dets):
            det = interleave(a, b)
            rows.append(i)
            cols.append(i)
            vals.append(self.diagonal_element(det))
            for other, val in self.connections(det):
                j = self.index[other]
                if j > i:
                    rows.extend((i, j))
                    cols.extend((j, i))
                    vals.extend((val, val))
        self._matrix = coo_matrix(
            (vals, (rows, cols)), shape=(self.dim, self.dim)
        ).tocsr()
        return self._matrix

    def matvec(self, v):
        return self.build_matrix() @ v

    def dense(self):
        return self.build_matrix().toarray()


# ---------------------------------------------------------------------------
# Eigensolvers
# ---------------------------------------------------------------------------

def lanczos_lowest(matvec, dim, n_pairs=6, tol=1e-10, max_iter=None, seed=11):
    """Lowest eigenpairs by Lanczos with full reorthogonalization.

    Block size 1; converged when the Ritz residual estimate |beta * s_last|
    drops below tol for each requested pair.
    """
    if max_iter is None:
        max_iter = min(dim, max(60, 12 * n_pairs))
    n_pairs = min(n_pairs, dim)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    basis = [v]
    alphas, betas = [], []
    for it in range(max_iter):
        w = matvec(basis[-1])
        a = float(np.dot(basis[-1], w))
        alphas.append(a)
        w = w - a * basis[-1]
        if len(basis) > 1:
            w = w - betas[-1] * basis[-2]
        # full reorthogonalization, twice for safety
        vmat = np.asarray(basis)
        for _ in range(2):
            w = w - vmat.T @ (vmat @ w)
        b = float(np.linalg.norm(w))
        t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        evals, evecs = np.linalg.eigh(t)
        if len(alphas) >= n_pairs:
            residuals = abs(b) * np.abs(evecs[-1, :n_pairs])
            if np.all(residuals < tol) or b < 1e-13 or len(basis) == dim:
                vecs = vmat.T @ evecs[:, :n_pairs]
                vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
                return evals[:n_pairs], vecs
        if b < 1e-13:
            # invariant subspace before n_pairs converged: restart direction
            w = rng.standard_normal(dim)
            for _ in range(2):
                w = w - vmat.T @ (vmat @ w)
            b = float(np.linalg.norm(w))
            if b < 1e-13:
                vecs = vmat.T @ evecs[:, : min(n_pairs, len(alphas))]
                return evals[: min(n_pairs, len(alphas))], vecs
        betas.append(b)
        basis.append(w / b)
    raise IterationLimit(f"Lanczos did not converge in {max_iter} iterations")


def spin_squared_values(dets, vectors, spec):
    """<S^2> for each column of `vectors` over determinant list `dets`."""
    index = {d: i for i, d in enumerate(dets)}
    dim = len(dets)
    sz = 0.5 * (spec.n_alpha - spec.n_beta)
    out = []
    for col in range(vectors.shape[1]):
        v = vectors[:, col]
        acc = np.zeros(dim)
        for i, (a, b) in enumerate(dets):
            if v[i] == 0.0:
                continue
            # S-S+ action: raise beta_p -> alpha_p, then lower alpha_q -> beta_q
            ps = [p for p in range(spec.n_orbitals) if (b >> p) & 1 and not (a >> p) & 1]
            acc[i] += len(ps) * v[i]
            for p in ps:
                a1 = a | (1 << p)
                b1 = b & ~(1 << p)
                for q in range(spec.n_orbitals):
                    if q == p:
                        continue
                    if (a1 >> q) & 1 and not (b1 >> q) & 1:
                        j = index[(a1 & ~(1 << q), b1 | (1 << q))]
                        acc[j] += v[i]
        out.append(float(v @ acc) + sz * (sz + 1.0))
    return np.array(out)


def spin_squared_ci(v: CiVector) -> float:
    dets = list(v.determinants)
    vec = np.asarray(v.coefficients, dtype=float).reshape(-1, 1)
    return float(spin_squared_values(dets, vec, v.sector)[0])


def fci_ground_state(
    problem,
    target_spin=None,
    det_cap: int = 10**7,
    dense_cutoff: int = 2000,
    spin_tolerance: float = 0.01,
    n_eigenpairs: int = 8,
) -> CiVector:
    """Lowest sector eigenstate with the requested spin.

    Dense diagonalization below `dense_cutoff` determinants, Lanczos with
    full reorthogonalization above.  If the sector's lowest state has the
    wrong <S^2>, the lowest computed eigenvector with
    |<S^2> - S(S+1)| < spin_tolerance is returned instead.
    """
    if target_spin is None:
        target_spin = 0.5 * (problem.spin_multiplicity_target - 1)
    spec = SectorSpec(
        problem.n_orbitals, problem.n_alpha, problem.n_beta, target_spin
    )
    n_det = determinant_count(spec)
    if n_det > det_cap:
        raise SectorTooLarge(f"{n_det} determinants exceed cap {det_cap}")

    ham = SectorHamiltonian(problem, spec)
    want = target_spin * (target_spin + 1.0)

    if ham.dim <= dense_cutoff:
        evals, evecs = np.linalg.eigh(ham.dense())
        spins = None
        for k in range(ham.dim):
            vec = evecs[:, k : k + 1]
            s2 = spin_squared_values(ham.dets, vec, spec)[0]
            if abs(s2 - want) < spin_tolerance:
                c = evecs[:, k]
                return CiVector(ham.dets, c / np.linalg.norm(c), float(evals[k]), spec)
        raise ValueError(
            f"no eigenstate with S={target_spin} found in sector "
            f"({spec.n_alpha},{spec.n_beta})"
        )

    k = min(n_eigenpairs, ham.dim)
    while True:
        evals, evecs = lanczos_lowest(ham.matvec, ham.dim, n_pairs=k)
        s2 = spin_squared_values(ham.dets, evecs, spec)
        hits = np.nonzero(np.abs(s2 - want) < spin_tolerance)[0]
        if hits.size:
            j = hits[0]
            c = evecs[:, j]
            return CiVector(ham.dets, c / np.linalg.norm(c), float(evals[j]), spec)
        if k >= min(ham.dim, 32):
            raise ValueError(
                f"no eigenstate with S={target_spin} among the {k} lowest"
            )
        k = min(ham.dim, 2 * k)


def hartree_fock_energy(problem) -> float:
    """Energy of the aufbau reference determinant (lowest orbitals filled)."""
    spec = SectorSpec(problem.n_orbitals, problem.n_alpha, problem.n_beta)
    ham = SectorHamiltonian(problem, spec)
    alpha = (1 << problem.n_alpha) - 1
    beta = (1 << problem.n_beta) - 1
    return ham.diagonal_element(interleave(alpha, beta))


def reference_occupation(problem) -> int:
    """Aufbau occupation bitset in interleaved spin-orbital order."""
    return interleave((1 << problem.n_alpha) - 1, (1 << problem.n_beta) - 1)
