"""Exact search-duration statistics from the cross-bifix spectrum.

The search examines the window of symbols ``k .. k+N-1`` at test ``k`` and
stops at the first window equal to any target sequence. Everything here is a
closed form or a finite recursion in the indicators ``h`` and the tails
``r``; no automaton or enumeration is involved (see :mod:`.oracle` for
those).

Moments are computed in one canonical order for every M, including M = 1:
coefficients C and W, the termination split S, the mean T, the partial
means T_i, then the second moment.

S_i is read as the probability that the search ends on sequence i and
T_i as ``sum_k k * Pr_i{k}``. Both readings satisfy the normalizations
``sum S_i = 1`` and ``sum T_i = T`` and agree with the absorbing-chain
oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import InsufficientTruncation, NegativeVariance, TruncationWarning
from .model import Number, Problem, sequence_probability
from .spectrum import build_spectrum, build_tail_vectors, is_cross_bifix_free

DEFAULT_TAIL_TOL = 1e-9
DEFAULT_K_CAP = 10**7
NEGATIVE_SLACK = 1e-12
VARIANCE_SLACK = 1e-9
IDENTITY_RTOL = 1e-9

CANONICAL_METHOD = "multi-sequence moment system"
SINGLE_METHOD = "single-sequence closed form (corrected weights)"


@dataclass(frozen=True)
class SearchDistribution:
    """``per_seq[j, k-1]`` is the probability that test k is the first success and finds sequence j."""

    k_max: int
    per_seq: np.ndarray  # (M, k_max)
    total: np.ndarray  # (k_max,)
    cumulative: np.ndarray  # (k_max,)
    exact: bool = False
    tail_tol: float = DEFAULT_TAIL_TOL
    truncated: bool = False

    def pr(self, k: int) -> Number:
        """Pr{k} for 1 <= k <= k_max."""
        if not 1 <= k <= self.k_max:
            raise IndexError(f"test index {k} outside 1..{self.k_max}")
        return self.total[k - 1]


@dataclass(frozen=True)
class SplitSystem:
    A: list  # (M-1) x M
    B: list | None = None  # length M-1


@dataclass(frozen=True)
class MomentReport:
    T: Number
    second_moment: Number
    variance: Number
    split: list
    partial_means: list
    C: np.ndarray
    W: np.ndarray
    cross_bifix_free: bool
    exact: bool
    method: str = CANONICAL_METHOD


# ---------------------------------------------------------------------------
# distribution recursion
# ---------------------------------------------------------------------------


def _recursion_kernel(problem: Problem) -> np.ndarray:
    """Signed kernel D[m-1, i, j] = h_ij(N-m+1) r_j(m-1) - h_ij(N-m) r_j(m), m = 1..N."""
    h = build_spectrum(problem).h
    r = build_tail_vectors(problem).r
    N, M = problem.N, problem.M
    dtype = object if problem.exact else float
    D = np.empty((N, M, M), dtype=dtype)
    for m in range(1, N + 1):
        for i in range(M):
            for j in range(M):
                D[m - 1, i, j] = h[N - m + 1, i, j] * r[j][m - 1] - h[N - m, i, j] * r[j][m]
    return D


def _terms(D: np.ndarray) -> list[list[tuple]]:
    """Non-zero kernel entries grouped by target sequence: ``(coef, i, m)``."""
    N, M, _ = D.shape
    return [
        [(D[m - 1, i, j], i, m) for m in range(1, N + 1) for i in range(M) if D[m - 1, i, j]]
        for j in range(M)
    ]


def _extend(cols: list[list], terms: list[list[tuple]], stop: int, zero: Number) -> None:
    """Append test-index columns to ``cols`` (one list per sequence) until length ``stop``."""
    M = len(cols)
    for kk in range(len(cols[0]), stop):
        new = []
        for j in range(M):
            acc = zero
            for coef, i, m in terms[j]:
                if m <= kk:
                    acc += coef * cols[i][kk - m]
            new.append(acc)
        for j in range(M):
            cols[j].append(new[j])


def distribution(
    problem: Problem,
    k_max: int | None = None,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    k_cap: int = DEFAULT_K_CAP,
) -> SearchDistribution:
    """Distribution of the first successful test index.

    With ``k_max=None`` the horizon doubles until the cumulative mass reaches
    ``1 - tail_tol`` or ``k_cap`` tests have been computed. A result that
    stops short of that mass carries ``truncated=True`` and emits a
    :class:`TruncationWarning`.
    """
    if k_max is not None and k_max < 1:
        raise ValueError("k_max must be >= 1")
    terms = _terms(_recursion_kernel(problem))
    zero = problem.zero()
    target = problem.one() - (Fraction(tail_tol) if problem.exact else tail_tol)

    cols = [[sequence_probability(problem, j)] for j in range(problem.M)]
    horizon = k_max if k_max is not None else min(64, k_cap)
    _extend(cols, terms, horizon, zero)
    if k_max is None:
        mass = sum((sum(c, zero) for c in cols), zero)
        while mass < target and horizon < k_cap:
            start, horizon = horizon, min(2 * horizon, k_cap)
            _extend(cols, terms, horizon, zero)
            mass += sum((sum(c[start:], zero) for c in cols), zero)

    dtype = object if problem.exact else float
    per_seq = np.array(cols, dtype=dtype).reshape(problem.M, horizon)
    total = per_seq.sum(axis=0)
    cumulative = np.cumsum(total)
    truncated = bool(cumulative[-1] < target)
    if truncated:
        warnings.warn(
            f"cumulative probability {float(cumulative[-1]):.12g} at k_max={horizon} "
            f"is below 1 - {tail_tol:g}",
            TruncationWarning,
            stacklevel=2,
        )
    for arr in (per_seq, total, cumulative):
        arr.setflags(write=False)
    return SearchDistribution(
        k_max=horizon,
        per_seq=per_seq,
        total=total,
        cumulative=cumulative,
        exact=problem.exact,
        tail_tol=tail_tol,
        truncated=truncated,
    )


def moments_from_distribution(dist: SearchDistribution) -> tuple[Number, Number]:
    """Truncated sums of k Pr{k} and k^2 Pr{k}.

    Both are lower bounds on the true moments; the missing tail mass is below
    ``dist.tail_tol`` and decays geometrically, so the deficit is of the
    order of that tail mass times k_max^2.
    """
    one = Fraction(1) if dist.exact else 1.0
    tol = Fraction(dist.tail_tol) if dist.exact else dist.tail_tol
    if dist.cumulative[-1] < one - tol:
        raise InsufficientTruncation(
            f"cumulative mass {float(dist.cumulative[-1]):.6g} at k_max={dist.k_max} "
            f"leaves more than {dist.tail_tol:g} in the tail"
        )
    k = np.arange(1, dist.k_max + 1)
    if dist.exact:
        mean = sum(int(kk) * p for kk, p in zip(k, dist.total))
        second = sum(int(kk) ** 2 * p for kk, p in zip(k, dist.total))
    else:
        kf = k.astype(float)
        mean = float(np.dot(kf, dist.total))
        second = float(np.dot(kf * kf, dist.total))
    return mean, second


# ---------------------------------------------------------------------------
# moment formulas
# ---------------------------------------------------------------------------


def coefficients(problem: Problem) -> tuple[np.ndarray, np.ndarray]:
    """Overlap-weighted tail sums.

    ``C[i, j] = sum_m r_j(m-1) h_ij(N-m+1)`` and
    ``W[i, j] = sum_m (2m-1) r_j(m-1) h_ij(N-m+1)`` for ``m = 1..N``.
    """
    h = build_spectrum(problem).h
    r = build_tail_vectors(problem).r
    N, M = problem.N, problem.M
    dtype = object if problem.exact else float
    C = np.empty((M, M), dtype=dtype)
    W = np.empty((M, M), dtype=dtype)
    for i in range(M):
        for j in range(M):
            c = w = problem.zero()
            for m in range(1, N + 1):
                if h[N - m + 1, i, j]:
                    c += r[j][m - 1]
                    w += (2 * m - 1) * r[j][m - 1]
            C[i, j] = c
            W[i, j] = w
    return C, W


def _plain(x):
    return x if isinstance(x, Fraction) else float(x)


def _reachable(problem: Problem) -> list[int]:
    return [j for j in range(problem.M) if sequence_probability(problem, j) > 0]


def _restrict(problem: Problem, keep: list[int]) -> Problem:
    return Problem(problem.dist, tuple(problem.sequences[j] for j in keep))


def _embed(values: list, keep: list[int], M: int, zero: Number) -> list:
    out = [zero] * M
    for pos, j in enumerate(keep):
        out[j] = values[pos]
    return out


def split_system(problem: Problem, S: list | None = None) -> SplitSystem:
    """Coefficient matrix A and, given S, right-hand side B of the S/T systems.

    Row i (i = 0..M-2) compares sequence 0 against sequence i+1:
    ``A[i][j] = C[j,0]/r_0 - C[j,i+1]/r_{i+1}`` and
    ``B[i] = sum_j 0.5 (W[j,i+1]/r_{i+1} - W[j,0]/r_0) S_j``,
    where ``r_j`` is the full probability of sequence j. Every sequence must
    have positive probability.
    """
    M = problem.M
    full = [sequence_probability(problem, j) for j in range(M)]
    if any(p == 0 for p in full):
        raise ValueError("split_system needs every sequence to have positive probability")
    C, W = coefficients(problem)
    half = Fraction(1, 2) if problem.exact else 0.5
    A = [
        [C[j, 0] / full[0] - C[j, i + 1] / full[i + 1] for j in range(M)]
        for i in range(M - 1)
    ]
    B = None
    if S is not None:
        B = [
            sum(
                (half * (W[j, i + 1] / full[i + 1] - W[j, 0] / full[0]) * S[j] for j in range(M)),
                problem.zero(),
            )
            for i in range(M - 1)
        ]
    return SplitSystem(A, B)


def _solve_split(problem: Problem) -> list:
    M = problem.M
    if M == 1:
        return [problem.one()]
    system = split_system(problem)
    A = system.A + [[problem.one()] * M]
    rhs = [problem.zero()] * (M - 1) + [problem.one()]
    return linalg.solve(A, rhs)


def termination_split(problem: Problem) -> list:
    """Probability that the search ends on each sequence (sums to 1)."""
    keep = _reachable(problem)
    S = _solve_split(_restrict(problem, keep))
    return [_plain(x) for x in _embed(S, keep, problem.M, problem.zero())]


def _mean_from_split(problem: Problem, S: list) -> Number:
    C, _ = coefficients(problem)
    pr1 = sum((sequence_probability(problem, j) for j in range(problem.M)), problem.zero())
    acc = sum((S[i] * C[i, j] for i in range(problem.M) for j in range(problem.M)), problem.zero())
    return 1 - problem.N + acc / pr1


def _cross_bifix_free_mean(problem: Problem) -> Number:
    pr1 = sum((sequence_probability(problem, j) for j in range(problem.M)), problem.zero())
    return 1 - problem.N + 1 / pr1


def _check_identity(general: Number, shortcut: Number) -> None:
    if isinstance(shortcut, Fraction):
        ok = general == shortcut
    else:
        ok = abs(general - shortcut) <= IDENTITY_RTOL * max(1.0, abs(shortcut))
    if not ok:
        raise AssertionError(
            f"overlap-free mean identity violated: general {general!r} vs shortcut {shortcut!r}"
        )


def expected_duration(problem: Problem) -> Number:
    """Expected number of tests until the first match.

    For overlap-free sets the value depends only on N and the probability
    that the first test succeeds; that shortcut is returned (bit-exact) and
    the general formula is checked against it.
    """
    keep = _reachable(problem)
    sub = _restrict(problem, keep)
    general = _mean_from_split(sub, _solve_split(sub))
    if is_cross_bifix_free(build_spectrum(problem)):
        shortcut = _cross_bifix_free_mean(sub)
        _check_identity(general, shortcut)
        return _plain(shortcut)
    return _plain(general)


def _solve_partial(problem: Problem, S: list, T: Number) -> list:
    M = problem.M
    if M == 1:
        return [T]
    system = split_system(problem, S)
    A = system.A + [[problem.one()] * M]
    rhs = list(system.B) + [T]
    return linalg.solve(A, rhs)


def partial_means(problem: Problem, S: list, T: Number) -> list:
    """Per-sequence contributions ``T_i = sum_k k Pr_i{k}``; they sum to T."""
    keep = _reachable(problem)
    sub = _restrict(problem, keep)
    Tv = _solve_partial(sub, [S[j] for j in keep], T)
    return [_plain(x) for x in _embed(Tv, keep, problem.M, problem.zero())]


def _second_from_parts(problem: Problem, S: list, T: Number, Tv: list) -> Number:
    C, W = coefficients(problem)
    M, N = problem.M, problem.N
    pr1 = sum((sequence_probability(problem, j) for j in range(M)), problem.zero())
    acc = sum(
        (2 * Tv[i] * C[i, j] + S[i] * W[i, j] for i in range(M) for j in range(M)),
        problem.zero(),
    )
    return 1 - 2 * N * T - N * N + acc / pr1


def _clamp_variance(var: Number, second: Number) -> Number:
    if isinstance(var, Fraction):
        if var < 0:
            raise NegativeVariance(f"variance {var} is negative")
        return var
    if var < 0:
        if var < -VARIANCE_SLACK * max(1.0, abs(second)):
            raise NegativeVariance(f"variance {var!r} is negative beyond rounding slack")
        return 0.0
    return var


def moments(problem: Problem) -> MomentReport:
    """All moment quantities, computed in the canonical order."""
    keep = _reachable(problem)
    sub = _restrict(problem, keep)
    free = is_cross_bifix_free(build_spectrum(problem))
    S = _solve_split(sub)
    T = _mean_from_split(sub, S)
    if free:
        shortcut = _cross_bifix_free_mean(sub)
        _check_identity(T, shortcut)
        T = shortcut
    S = [_plain(x) for x in S]
    T = _plain(T)
    Tv = [_plain(x) for x in _solve_partial(sub, S, T)]
    second = _plain(_second_from_parts(sub, S, T, Tv))
    var = _clamp_variance(second - T * T, second)
    C, W = coefficients(problem)
    zero = problem.zero()
    return MomentReport(
        T=T,
        second_moment=second,
        variance=var,
        split=_embed(S, keep, problem.M, zero),
        partial_means=_embed(Tv, keep, problem.M, zero),
        C=C,
        W=W,
        cross_bifix_free=free,
        exact=problem.exact,
    )


def second_moment(problem: Problem) -> Number:
    """E{k^2} from the multi-sequence system (used for M = 1 as well)."""
    return moments(problem).second_moment


def variance(problem: Problem) -> Number:
    """E{k^2} - T^2; rounding noise just below zero is clamped to 0."""
    return moments(problem).variance


# ---------------------------------------------------------------------------
# single-sequence closed forms (secondary path)
# ---------------------------------------------------------------------------


def _single_terms(problem: Problem, weight_offset: int) -> tuple[Number, Number]:
    """Return (T, sum_m (m - offset) h(N-m+1) r(m-1) / r(N))."""
    if problem.M != 1:
        raise ValueError("single-sequence closed forms need M = 1")
    h = build_spectrum(problem).h[:, 0, 0]
    r = build_tail_vectors(problem).r[0]
    N = problem.N
    if r[N] == 0:
        raise ValueError("sequence has zero probability")
    plain = problem.zero()
    weighted = problem.zero()
    for m in range(1, N + 1):
        if h[N - m + 1]:
            plain += r[m - 1] / r[N]
            weighted += (m - weight_offset) * r[m - 1] / r[N]
    return 1 - N + plain, weighted


def mean_single(problem: Problem) -> Number:
    """T = 1 - N + sum_m h(N-m+1) r(m-1) / r(N)."""
    return _single_terms(problem, 0)[0]


def second_moment_single(problem: Problem) -> Number:
    """E{k^2} = 2T^2 - T + N - N^2 + 2 sum_m (m-1) h(N-m+1) r(m-1) / r(N)."""
    T, s = _single_terms(problem, 1)
    N = problem.N
    return 2 * T * T - T + N - N * N + 2 * s


def variance_single(problem: Problem) -> Number:
    """sigma^2 = (T - N)(T + N - 1) + 2 sum_m (m-1) h(N-m+1) r(m-1) / r(N)."""
    T, s = _single_terms(problem, 1)
    N = problem.N
    return (T - N) * (T + N - 1) + 2 * s


def second_moment_single_uncorrected(problem: Problem) -> Number:
    """The widely quoted form with summation weight m instead of m - 1.

    It is wrong: for the pattern "10" at p = 1/2 it gives 21 where the true
    value is 13. Kept so the discrepancy stays pinned by a regression test.
    """
    T, s = _single_terms(problem, 0)
    N = problem.N
    return 2 * T * T - T + N - N * N + 2 * s


def variance_single_uncorrected(problem: Problem) -> Number:
    """Variance counterpart of :func:`second_moment_single_uncorrected` (also wrong)."""
    T, s = _single_terms(problem, 0)
    N = problem.N
    return (T - N) * (T + N - 1) + 2 * s
