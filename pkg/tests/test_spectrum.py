from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from bifixsearch import (
    build_spectrum,
    build_tail_vectors,
    cross_bifix_indicator,
    is_cross_bifix_free,
    sequence_probability,
    validate_problem,
)
from bifixsearch.model import Problem

from conftest import binary, problems

WORKED_H = [
    [[1, 1], [1, 1]],
    [[1, 0], [1, 0]],
    [[0, 1], [0, 0]],
    [[1, 0], [0, 1]],
]


def test_worked_pair_matrices(worked_pair):
    assert build_spectrum(worked_pair).to_json() == WORKED_H


def test_indicator_entries(worked_pair):
    assert cross_bifix_indicator(worked_pair, 0, 1, 2) == 1
    assert cross_bifix_indicator(worked_pair, 1, 0, 1) == 1
    assert cross_bifix_indicator(worked_pair, 1, 1, 3) == 1
    with pytest.raises(IndexError):
        cross_bifix_indicator(worked_pair, 0, 2, 1)
    with pytest.raises(IndexError):
        cross_bifix_indicator(worked_pair, 0, 0, 4)


def test_worked_pair_tails():
    p, q = 0.3, 0.7
    tails = build_tail_vectors(binary(["010", "100"], p))
    assert tails.r[0] == pytest.approx([1, q, p * q, p * q * q], abs=1e-15)
    assert tails.r[1] == pytest.approx([1, q, q * q, p * q * q], abs=1e-15)
    assert tails.r[0] == pytest.approx([1, 0.7, 0.21, 0.147], abs=1e-15)
    assert tails.r[1] == pytest.approx([1, 0.7, 0.49, 0.147], abs=1e-15)


@pytest.mark.parametrize("seq, h", [("10", [1, 0, 1]), ("11", [1, 1, 1])])
def test_single_sequence_scalars(seq, h):
    assert build_spectrum(binary([seq])).h[:, 0, 0].tolist() == h


@pytest.mark.parametrize(
    "seqs, free",
    [(["010", "100"], False), (["10"], True), (["11"], False), (["1"], True)],
)
def test_cross_bifix_free_verdict(seqs, free):
    assert is_cross_bifix_free(build_spectrum(binary(seqs))) is free


@settings(max_examples=150, deadline=None)
@given(problems())
def test_default_matrices(problem):
    h = build_spectrum(problem).h
    M = problem.M
    assert (h[0] == 1).all()
    assert (h[problem.N] == np.eye(M, dtype=np.uint8)).all()


@settings(max_examples=150, deadline=None)
@given(problems())
def test_indicator_by_direct_comparison(problem):
    h = build_spectrum(problem).h
    N = problem.N
    for n in range(1, N):
        for i, a in enumerate(problem.sequences):
            for j, b in enumerate(problem.sequences):
                assert h[n, i, j] == (list(a)[-n:] == list(b)[:n])


@settings(max_examples=150, deadline=None)
@given(problems())
def test_tail_chain(problem):
    r = build_tail_vectors(problem).r
    N = problem.N
    for i, seq in enumerate(problem.sequences):
        assert r[i][0] == 1
        for n in range(1, N + 1):
            assert r[i][n] == r[i][n - 1] * problem.probs[seq[N - n]]
            assert 0 <= r[i][n] <= r[i][n - 1]
        assert r[i][N] == sequence_probability(problem, i)


@settings(max_examples=100, deadline=None)
@given(problems())
def test_reversal_transposes(problem):
    reversed_problem = Problem(problem.dist, tuple(tuple(reversed(s)) for s in problem.sequences))
    h = build_spectrum(problem).h
    hr = build_spectrum(reversed_problem).h
    assert (hr == h.transpose(0, 2, 1)).all()


def test_equiprobable_tails():
    problem = validate_problem("abc", ["1/3"] * 3, ["abca", "ccab"], exact=True)
    for row in build_tail_vectors(problem).r:
        assert list(row) == [Fraction(1, 3**n) for n in range(5)]
