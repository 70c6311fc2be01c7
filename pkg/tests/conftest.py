import pytest

from homhardy.group_core import QuasiNormSpec, abelian, heisenberg

R1 = abelian([1])
R2 = abelian([1, 1])
R3 = abelian([1, 1, 1])
ANISO = abelian([1, 2])
HEIS = heisenberg()
EUC = QuasiNormSpec("euclidean")
KOR = QuasiNormSpec("koranyi")
AMAX = QuasiNormSpec("aniso_max")
ASMOOTH = QuasiNormSpec("aniso_smooth")

# every built-in (group, quasi-norm) pair exercised by the suite
PAIRS = [
    ("R1", R1, EUC),
    ("R2", R2, EUC),
    ("R3", R3, EUC),
    ("aniso_max_12", ANISO, AMAX),
    ("aniso_smooth_12", ANISO, ASMOOTH),
    ("heisenberg", HEIS, KOR),
]


@pytest.fixture(params=PAIRS, ids=[p[0] for p in PAIRS])
def pair(request):
    return request.param[1], request.param[2]


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
