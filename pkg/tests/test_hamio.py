import numpy as np
import pytest

from adaptscale.hamio import (
    InconsistentSector,
    MolecularProblem,
    ParseError,
    parse_fcidump,
    write_fcidump,
)

MINIMAL = """&FCI NORB=1,NELEC=2,MS2=0,
 ORBSYM=1,
 ISYM=1,
&END
 0.5 1 1 0 0
 0.25 1 1 1 1
 0.1 0 0 0 0
"""


def test_minimal_file():
    p = parse_fcidump(MINIMAL)
    assert p.n_orbitals == 1
    assert p.n_alpha == 1 and p.n_beta == 1
    assert p.core_energy == 0.1
    assert p.one_body[0, 0] == 0.5
    assert p.two_body[0, 0, 0, 0] == 0.25


def test_slash_terminated_namelist():
    text = MINIMAL.replace("&END", "/")
    p = parse_fcidump(text)
    assert p.n_orbitals == 1


def test_symmetry_completion_one_body():
    text = "&FCI NORB=2,NELEC=2,MS2=0,&END\n 1.0 2 1 0 0\n"
    p = parse_fcidump(text)
    assert p.one_body[0, 1] == 1.0
    assert p.one_body[1, 0] == 1.0


def test_symmetry_completion_two_body():
    text = "&FCI NORB=2,NELEC=2,MS2=0,&END\n 0.7 2 1 1 1\n"
    p = parse_fcidump(text)
    value = p.two_body[1, 0, 0, 0]
    for perm in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]:
        assert p.two_body[perm] == value
    p.validate_symmetries()


def test_open_shell_sector():
    text = "&FCI NORB=3,NELEC=3,MS2=1,&END\n 0.0 0 0 0 0\n"
    p = parse_fcidump(text)
    assert (p.n_alpha, p.n_beta) == (2, 1)
    assert p.spin_multiplicity_target == 2


def test_h2_energy_matches_generator(h2_problem, expected):
    """Parsed integrals reproduce the frozen FCI energy of the generating
    pipeline to 1e-8 (round-trip through the text format included)."""
    from adaptscale.exact import fci_ground_state

    ci = fci_ground_state(h2_problem)
    assert ci.energy == pytest.approx(expected["h2_sto3g"]["fci_energy"], abs=1e-8)


def test_roundtrip_identity(h4_problem):
    text = write_fcidump(h4_problem)
    again = parse_fcidump(text, h4_problem.label)
    assert np.max(np.abs(again.one_body - h4_problem.one_body)) < 1e-14
    assert np.max(np.abs(again.two_body - h4_problem.two_body)) < 1e-14
    assert again.core_energy == pytest.approx(h4_problem.core_energy, abs=1e-14)


def test_permutation_image_invariance():
    """Storing a different symmetry representative never changes the
    spectrum (checked by diagonalization on a 2-orbital case)."""
    from adaptscale.exact import fci_ground_state

    base = "&FCI NORB=2,NELEC=2,MS2=0,&END\n"
    lines = " 0.9 1 1 0 0\n 0.7 2 2 0 0\n 0.2 2 1 0 0\n 0.6 1 1 1 1\n 0.55 2 2 2 2\n 0.5 1 1 2 2\n 0.12 2 1 1 1\n"
    e1 = fci_ground_state(parse_fcidump(base + lines)).energy
    swapped = lines.replace(" 0.12 2 1 1 1\n", " 0.12 1 1 2 1\n")  # (21|11)=(11|21)
    e2 = fci_ground_state(parse_fcidump(base + swapped)).energy
    assert e1 == pytest.approx(e2, abs=1e-12)


def test_malformed_header_line_number():
    with pytest.raises(ParseError) as err:
        parse_fcidump("NOT A HEADER\n")
    assert err.value.line_number == 1


def test_unterminated_namelist():
    with pytest.raises(ParseError):
        parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,\n 0.1 0 0 0 0\n")


def test_inconsistent_sector():
    with pytest.raises(InconsistentSector):
        parse_fcidump("&FCI NORB=2,NELEC=2,MS2=1,&END\n 0.0 0 0 0 0\n")


def test_index_out_of_range():
    with pytest.raises(IndexError):
        parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,&END\n 0.5 2 1 0 0\n")


def test_mixed_zero_indices_rejected():
    with pytest.raises(ParseError):
        parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,&END\n 0.5 1 0 1 0\n")


def test_bad_data_line_reports_line_number():
    with pytest.raises(ParseError) as err:
        parse_fcidump("&FCI NORB=1,NELEC=2,MS2=0,&END\n banana\n")
    assert err.value.line_number == 2


def test_orbsym_isym_ignored():
    text = "&FCI NORB=1,NELEC=2,MS2=0,ORBSYM=7,ISYM=4,&END\n 0.1 0 0 0 0\n"
    p = parse_fcidump(text)
    assert p.core_energy == 0.1


def test_validation_rejects_asymmetric():
    h1 = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        MolecularProblem(2, 1, 1, 1, 0.0, h1, np.zeros((2,) * 4)).validate_symmetries()
