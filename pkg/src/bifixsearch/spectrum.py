"""Cross-bifix spectrum and tail vectors of a sequence set.

Index conventions: ``h[n, i, j]`` is 1 when the last ``n`` symbols of
sequence ``i`` equal the first ``n`` symbols of sequence ``j``; ``r[i][n]`` is
the probability of the last ``n`` symbols of sequence ``i``. Position
``N - n + 1`` counted from 1 is index ``N - n`` in the 0-based tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Number, Problem


@dataclass(frozen=True)
class CrossBifixSpectrum:
    h: np.ndarray  # shape (N+1, M, M), uint8

    @property
    def N(self) -> int:
        return self.h.shape[0] - 1

    @property
    def M(self) -> int:
        return self.h.shape[1]

    def to_json(self) -> list:
        return self.h.astype(int).tolist()


@dataclass(frozen=True)
class TailVectors:
    r: tuple[tuple[Number, ...], ...]  # M rows of length N+1

    def array(self) -> np.ndarray:
        """Tails as an (M, N+1) array; object dtype in exact mode."""
        exact = not isinstance(self.r[0][0], float)
        return np.array(self.r, dtype=object if exact else float)

    def full(self, i: int) -> Number:
        return self.r[i][-1]


def cross_bifix_indicator(problem: Problem, i: int, j: int, n: int) -> int:
    """1 iff the length-``n`` suffix of sequence ``i`` is the length-``n`` prefix of sequence ``j``."""
    N = problem.N
    if not (0 <= i < problem.M and 0 <= j < problem.M):
        raise IndexError(f"sequence indices ({i}, {j}) out of range for M={problem.M}")
    if not 0 <= n <= N:
        raise IndexError(f"overlap length {n} out of range 0..{N}")
    if n == 0:
        return 1
    if n == N:
        return int(i == j)
    return int(problem.sequences[i][N - n:] == problem.sequences[j][:n])


def build_spectrum(problem: Problem) -> CrossBifixSpectrum:
    N, M = problem.N, problem.M
    h = np.zeros((N + 1, M, M), dtype=np.uint8)
    for n in range(N + 1):
        for i in range(M):
            for j in range(M):
                h[n, i, j] = cross_bifix_indicator(problem, i, j, n)
    h.setflags(write=False)
    return CrossBifixSpectrum(h)


def build_tail_vectors(problem: Problem) -> TailVectors:
    N = problem.N
    rows = []
    for seq in problem.sequences:
        row = [problem.one()]
        for n in range(1, N + 1):
            row.append(row[-1] * problem.probs[seq[N - n]])
        rows.append(tuple(row))
    return TailVectors(tuple(rows))


def is_cross_bifix_free(spectrum: CrossBifixSpectrum) -> bool:
    """True when no indicator outside the defaults (overlap 0 and N) is set."""
    return not spectrum.h[1:spectrum.N].any()
