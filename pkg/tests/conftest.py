import pathlib
import random

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from seqflow.instance import load_instance, make_instance
from seqflow.mm_algebra import OMEGA, AbstractMatrix

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

W = OMEGA


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


@pytest.fixture(scope="session")
def fig1():
    return load_instance(fixture_path("fig1.json"))


@pytest.fixture(scope="session")
def intro():
    return load_instance(fixture_path("intro.json"))


@pytest.fixture(scope="session")
def nested():
    return load_instance(fixture_path("nested.json"))


def mm(rows):
    """Abstract matrix from rows written with 0, 1 and W."""
    return AbstractMatrix.from_rows(rows)


# ---------------------------------------------------------------- strategies

def abstract_matrices(n=None, max_n=4):
    sizes = st.just(n) if n is not None else st.integers(1, max_n)
    return sizes.flatmap(lambda k: st.lists(
        st.lists(st.sampled_from([0, 1, 2]), min_size=k, max_size=k),
        min_size=k, max_size=k).map(AbstractMatrix.from_rows))


def matrix_tuples(count, max_n=4):
    return st.integers(1, max_n).flatmap(
        lambda k: st.tuples(*[abstract_matrices(k) for _ in range(count)]))


def random_instance(rng: random.Random, n: int, letters: int, max_cap: int = 2,
                    omega_weight: float = 0.2, zero_weight: float = 0.45):
    """Random valid instance: no edge into the source, none out of the target."""
    caps = {}
    for a in "abcdefgh"[:letters]:
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if j == 0 or i == n - 1:
                    row.append(0)
                    continue
                r = rng.random()
                if r < zero_weight:
                    row.append(0)
                elif r < zero_weight + omega_weight:
                    row.append(OMEGA)
                else:
                    row.append(rng.randint(1, max_cap))
            rows.append(row)
        caps[a] = rows
    return make_instance(n, caps)


@st.composite
def instances(draw, max_n=4, max_letters=2, max_cap=2):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(1, max_letters))
    return random_instance(random.Random(seed), n, k, max_cap)


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")
