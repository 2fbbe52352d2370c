"""FCIDUMP parsing into an active-space molecular problem.

Integrals are stored in chemists' notation: ``two_body[i,j,k,l] = (ij|kl)``,
the dominant FCIDUMP convention.  Misreading this silently corrupts
energies, so it is worth stating twice: (ij|kl) puts indices i,j on
electron 1 and k,l on electron 2.

ORBSYM/ISYM are parsed but ignored (no spatial symmetry is exploited).
The orbital order of the file is kept as-is, lowest to highest.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np


class ParseError(ValueError):
    """Malformed FCIDUMP content; carries a 1-based line number."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class InconsistentSector(ValueError):
    """NELEC and MS2 imply non-integer per-spin electron counts."""


@dataclass
class MolecularProblem:
    """Second-quantized active-space Hamiltonian and sector metadata."""

    n_orbitals: int
    n_alpha: int
    n_beta: int
    spin_multiplicity_target: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    label: str = ""

    def __post_init__(self):
        n = self.n_orbitals
        if self.one_body.shape != (n, n):
            raise ValueError("one_body shape mismatch")
        if self.two_body.shape != (n, n, n, n):
            raise ValueError("two_body shape mismatch")
        if not (0 <= self.n_alpha <= n and 0 <= self.n_beta <= n):
            raise ValueError("electron counts outside [0, n_orbitals]")

    @property
    def n_electrons(self):
        return self.n_alpha + self.n_beta

    @property
    def n_qubits(self):
        return 2 * self.n_orbitals

    def validate_symmetries(self, tol=1e-12):
        """Check hermiticity of h and the 8 permutation symmetries of (ij|kl)."""
        h, g = self.one_body, self.two_body
        if np.max(np.abs(h - h.T)) > tol:
            raise ValueError("one_body not symmetric")
        for perm in _EIGHTFOLD:
            if np.max(np.abs(g - g.transpose(perm))) > tol:
                raise ValueError(f"two_body violates permutation {perm}")


# (ij|kl) = (ji|kl) = (ij|lk) = (ji|lk) = (kl|ij) = (lk|ij) = (kl|ji) = (lk|ji)
_EIGHTFOLD = [
    (1, 0, 2, 3),
    (0, 1, 3, 2),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (3, 2, 0, 1),
    (2, 3, 1, 0),
    (3, 2, 1, 0),
]


def _read_namelist(lines):
    """Collect the &FCI ... (&END or /) header; returns (fields, body_start)."""
    header_parts = []
    end_line = None
    for ln, raw in enumerate(lines, start=1):
        text = raw.strip()
        if ln == 1:
            if not text.upper().startswith("&FCI"):
                raise ParseError("expected '&FCI' namelist header", 1)
            text = text[4:]
        if "&END" in text.upper():
            header_parts.append(text[: text.upper().index("&END")])
            end_line = ln
            break
        if text.endswith("/"):
            header_parts.append(text[:-1])
            end_line = ln
            break
        header_parts.append(text)
    if end_line is None:
        raise ParseError("namelist not terminated by '&END' or '/'", len(lines))

    blob = " ".join(header_parts)
    fields = {}
    for m in re.finditer(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=(?:[A-Za-z0-9_]+\s*=)|$)", blob):
        key = m.group(1).upper()
        value = m.group(2).strip().rstrip(",").strip()
        fields[key] = value
    return fields, end_line


def parse_fcidump(text: str, label: str = "") -> MolecularProblem:
    """Parse FCIDUMP text into a MolecularProblem.

    Data lines are ``value i j k l`` with 1-based indices; ``i j 0 0`` is a
    one-body element, ``0 0 0 0`` the core energy, four nonzero indices a
    two-body element.  Every stored representative fills all its
    permutation-symmetric slots.
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input", 1)
    fields, body_start = _read_namelist(lines)

    try:
        n_orb = int(fields["NORB"])
        n_elec = int(fields["NELEC"])
        ms2 = int(fields.get("MS2", "0"))
    except KeyError as missing:
        raise ParseError(f"header missing {missing}", body_start) from None
    except ValueError as bad:
        raise ParseError(f"malformed header field: {bad}", body_start) from None
    if n_orb < 0 or n_elec < 0:
        raise ParseError("negative NORB/NELEC", body_start)
    if (n_elec + ms2) % 2 != 0:
        raise InconsistentSector(
            f"NELEC={n_elec} and MS2={ms2} give non-integer spin populations"
        )
    n_alpha = (n_elec + ms2) // 2
    n_beta = (n_elec - ms2) // 2

    core = 0.0
    h = np.zeros((n_orb, n_orb))
    g = np.zeros((n_orb, n_orb, n_orb, n_orb))

    for ln in range(body_start + 1, len(lines) + 1):
        raw = lines[ln - 1].strip()
        if not raw:
            continue
        parts = raw.split()
        if len(parts) != 5:
            raise ParseError(f"expected 'value i j k l', got {raw!r}", ln)
        try:
            value = float(parts[0])
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError:
            raise ParseError(f"unparseable data line {raw!r}", ln) from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > n_orb:
                raise IndexError(f"line {ln}: orbital index {idx} outside [0, {n_orb}]")
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise ParseError(f"mixed zero/nonzero indices in {raw!r}", ln)
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        elif 0 in (i, j, k, l):
            raise ParseError(f"mixed zero/nonzero indices in {raw!r}", ln)
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            g[a, b, c, d] = value
            g[b, a, c, d] = value
            g[a, b, d, c] = value
            g[b, a, d, c] = value
            g[c, d, a, b] = value
            g[d, c, a, b] = value
            g[c, d, b, a] = value
            g[d, c, b, a] = value

    problem = MolecularProblem(
        n_orbitals=n_orb,
        n_alpha=n_alpha,
        n_beta=n_beta,
        spin_multiplicity_target=abs(ms2) + 1,
        core_energy=core,
        one_body=h,
        two_body=g,
        label=label,
    )
    problem.validate_symmetries()
    return problem


def write_fcidump(problem: MolecularProblem, threshold: float = 0.0) -> str:
    """Serialize back to FCIDUMP text (canonical representatives only)."""
    n = problem.n_orbitals
    ms2 = problem.n_alpha - problem.n_beta
    out = [
        f"&FCI NORB={n},NELEC={problem.n_electrons},MS2={ms2},",
        " ORBSYM=" + ",".join(["1"] * n) + ",",
        " ISYM=1,",
        "&END",
    ]

    def fmt(value, i, j, k, l):
        return f" {value: .16e} {i:4d} {j:4d} {k:4d} {l:4d}"

    g = problem.two_body
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    v = g[i, j, k, l]
                    if abs(v) > threshold:
                        out.append(fmt(v, i + 1, j + 1, k + 1, l + 1))
    h = problem.one_body
    for i in range(n):
        for j in range(i + 1):
            if abs(h[i, j]) > threshold:
                out.append(fmt(h[i, j], i + 1, j + 1, 0, 0))
    out.append(fmt(problem.core_energy, 0, 0, 0, 0))
    return "\n".join(out) + "\n"
