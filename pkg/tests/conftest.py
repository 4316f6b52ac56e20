import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from bifixsearch import validate_problem


def random_problem(rng: random.Random, *, exact: bool = True, max_L=3, max_N=4, max_M=3, min_weight=1):
    """Small random problem: L <= 3, N <= 4, M <= 3, strictly positive probabilities.

    Probabilities are integer weights in [min_weight, 9] normalised, so exact
    mode has small denominators.
    """
    L = rng.randint(2, max_L)
    N = rng.randint(1, max_N)
    M = rng.randint(1, min(max_M, L**N))
    weights = [rng.randint(min_weight, 9) for _ in range(L)]
    total = sum(weights)
    probs = [Fraction(w, total) for w in weights]
    symbols = "abc"[:L]
    seqs = set()
    while len(seqs) < M:
        seqs.add("".join(rng.choice(symbols) for _ in range(N)))
    sequences = sorted(seqs)
    if exact:
        return validate_problem(symbols, [str(p) for p in probs], sequences, exact=True)
    return validate_problem(symbols, [float(p) for p in probs], sequences)


def random_family(n: int, seed: int, **kw):
    rng = random.Random(seed)
    return [random_problem(rng, **kw) for _ in range(n)]


#: (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def worked_pair():
    return validate_problem("01", [0.5, 0.5], ["010", "100"])


@pytest.fixture
def worked_pair_skewed():
    # Pr{1} = p = 0.3, Pr{0} = q = 0.7
    return validate_problem("10", [0.3, 0.7], ["010", "100"])


def binary(seqs, p=0.5, exact=False):
    """Problem over symbols '1','0' with Pr{'1'} = p."""
    if exact:
        p = Fraction(str(p))
        return validate_problem("10", [str(p), str(1 - p)], seqs, exact=True)
    return validate_problem("10", [p, 1 - p], seqs)



@st.composite
def problems(draw, max_L=3, max_N=4, max_M=3, exact=False):
    """Hypothesis strategy for small problems with strictly positive probabilities."""
    L = draw(st.integers(2, max_L))
    N = draw(st.integers(1, max_N))
    M = draw(st.integers(1, min(max_M, L**N)))
    weights = draw(st.lists(st.integers(1, 9), min_size=L, max_size=L))
    total = sum(weights)
    symbols = "abc"[:L]
    seqs = draw(
        st.lists(
            st.text(alphabet=symbols, min_size=N, max_size=N),
            min_size=M,
            max_size=M,
            unique=True,
        )
    )
    if exact:
        probs = [f"{w}/{total}" for w in weights]
        return validate_problem(symbols, probs, seqs, exact=True)
    return validate_problem(symbols, [w / total for w in weights[:-1]] + [1 - sum(w / total for w in weights[:-1])], seqs)
