"""Independent ground truth for the closed forms in :mod:`.exact`.

Three engines, none of which touches the overlap indicators:

* an absorbing Markov chain on the states of a prefix automaton with
  failure links (exact distribution, hitting-time moments by linear solves),
* enumeration of the tree of symbol streams, checking raw windows,
* a seeded, vectorised Monte Carlo run of the same automaton.

Test index and symbol count are related by ``k = W - N + 1``, where ``W`` is
the number of symbols read when the first match completes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import SingularSystem, TooLarge
from .model import Number, Problem

ENUMERATION_GUARD = 2**24


@dataclass(frozen=True)
class MatchAutomaton:
    """Deterministic automaton over the proper prefixes of the target set.

    ``trans[u, s]`` is the next state after reading symbol ``s`` in state
    ``u``; ``accept[u, s]`` is the sequence index completed by that symbol or
    -1. When ``accept`` is set the search stops, so ``trans`` there is -1.
    """

    states: tuple[tuple[int, ...], ...]
    trans: np.ndarray
    accept: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclass
class OracleReport:
    engine: str
    mean_tests: Optional[float] = None
    second_moment: Optional[float] = None
    variance: Optional[float] = None
    absorption: Optional[list] = None
    partial_means: Optional[list] = None
    distribution: Optional[list] = None
    per_seq_distribution: Optional[list] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    stderr: Optional[dict] = None


def build_automaton(problem: Problem) -> MatchAutomaton:
    """Aho-Corasick construction restricted to first-match search."""
    N, L = problem.N, problem.L
    # goto trie over all prefixes, breadth-first so ids grow with depth
    children: list[dict[int, int]] = [{}]
    labels: list[tuple[int, ...]] = [()]
    terminal: dict[int, int] = {}
    for j, seq in enumerate(problem.sequences):
        node = 0
        for s in seq:
            nxt = children[node].get(s)
            if nxt is None:
                nxt = len(labels)
                children[node][s] = nxt
                children.append({})
                labels.append(labels[node] + (s,))
            node = nxt
        terminal[node] = j

    fail = [0] * len(labels)
    delta = [[0] * L for _ in labels]
    queue: deque[int] = deque()
    for s in range(L):
        child = children[0].get(s)
        if child is None:
            delta[0][s] = 0
        else:
            delta[0][s] = child
            fail[child] = 0
            queue.append(child)
    while queue:
        u = queue.popleft()
        for s in range(L):
            child = children[u].get(s)
            if child is None:
                delta[u][s] = delta[fail[u]][s]
            else:
                delta[u][s] = child
                fail[child] = delta[fail[u]][s]
                queue.append(child)

    transient = [u for u in range(len(labels)) if len(labels[u]) < N]
    index = {u: pos for pos, u in enumerate(transient)}
    trans = np.full((len(transient), L), -1, dtype=np.int64)
    accept = np.full((len(transient), L), -1, dtype=np.int64)
    for u in transient:
        for s in range(L):
            v = delta[u][s]
            if v in terminal:
                accept[index[u], s] = terminal[v]
            else:
                trans[index[u], s] = index[v]
    trans.setflags(write=False)
    accept.setflags(write=False)
    return MatchAutomaton(tuple(labels[u] for u in transient), trans, accept)


def _step_tables(automaton: MatchAutomaton, problem: Problem):
    """Transient block Q and absorbing block R as Python nested lists."""
    n, M = automaton.n_states, problem.M
    zero = problem.zero()
    Q = [[zero] * n for _ in range(n)]
    R = [[zero] * M for _ in range(n)]
    for u in range(n):
        for s, p in enumerate(problem.probs):
            a = automaton.accept[u, s]
            if a >= 0:
                R[u][a] += p
            else:
                Q[u][automaton.trans[u, s]] += p
    return Q, R


def chain_distribution(automaton: MatchAutomaton, problem: Problem, k_max: int) -> tuple[list, list]:
    """Return ``(total, per_seq)`` with ``total[k-1] = Pr{k}``, ``per_seq[j][k-1] = Pr_j{k}``.

    Runs in the problem's arithmetic, so it is exact in rational mode.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    Q, R = _step_tables(automaton, problem)
    n, M, N = automaton.n_states, problem.M, problem.N
    zero = problem.zero()
    vec = [zero] * n
    vec[0] = problem.one()
    per_seq = [[zero] * k_max for _ in range(M)]
    for step in range(1, N + k_max):
        k = step - N + 1
        if k >= 1:
            for j in range(M):
                per_seq[j][k - 1] = sum((vec[u] * R[u][j] for u in range(n)), zero)
        nxt = [zero] * n
        for u in range(n):
            if vec[u]:
                row = Q[u]
                for v in range(n):
                    if row[v]:
                        nxt[v] += vec[u] * row[v]
        vec = nxt
    total = [sum((per_seq[j][k] for j in range(M)), zero) for k in range(k_max)]
    return total, per_seq


def chain_moments(automaton: MatchAutomaton, problem: Problem) -> OracleReport:
    """Hitting-time quantities from the fundamental matrix of the chain (float64)."""
    Q, R = _step_tables(automaton, problem.as_float())
    Q = np.array(Q, dtype=float)
    R = np.array(R, dtype=float)
    n, N = automaton.n_states, problem.N
    I_Q = np.eye(n) - Q
    try:
        steps = np.linalg.solve(I_Q, np.ones(n))
        steps2 = np.linalg.solve(I_Q, 2.0 * steps) - steps
        absorb = np.linalg.solve(I_Q, R)
        weighted = np.linalg.solve(I_Q, absorb)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"transient block is singular: {exc}") from None

    mean_sym = steps[0]
    shift = N - 1
    mean_tests = mean_sym - shift
    second = steps2[0] - 2 * shift * mean_sym + shift * shift
    S = absorb[0]
    partial = weighted[0] - shift * S
    return OracleReport(
        engine="chain",
        mean_tests=float(mean_tests),
        second_moment=float(second),
        variance=float(second - mean_tests**2),
        absorption=[float(x) for x in S],
        partial_means=[float(x) for x in partial],
    )


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _check_guard(problem: Problem, k: int) -> None:
    if problem.L ** (k + problem.N - 1) > ENUMERATION_GUARD:
        raise TooLarge(
            f"enumeration of {problem.L}^{k + problem.N - 1} streams exceeds the guard {ENUMERATION_GUARD}"
        )


def enumerate_streams(problem: Problem, k: int) -> Number:
    """Pr{k}: total probability of the length ``k+N-1`` streams first matched at test ``k``.

    Each stream is checked window by window; a branch is abandoned as soon
    as an earlier window matches. Use an exact-mode problem for rational
    output.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_guard(problem, k)
    N, L = problem.N, problem.L
    length = k + N - 1
    targets = set(problem.sequences)
    probs = problem.probs
    stream: list[int] = []

    def walk(prob: Number) -> Number:
        depth = len(stream)
        if depth >= N and tuple(stream[depth - N:]) in targets:
            return prob if depth == length else problem.zero()
        if depth == length:
            return problem.zero()
        acc = problem.zero()
        for s in range(L):
            if probs[s] == 0:
                continue
            stream.append(s)
            acc += walk(prob * probs[s])
            stream.pop()
        return acc

    return walk(problem.one())


def enumerate_distribution(problem: Problem, k_max: int) -> list[list]:
    """``per_seq[j][k-1]`` for all k <= k_max by walking the stream tree.

    Two nodes at the same depth whose last N-1 symbols agree root identical
    subtrees, so each distinct subtree is summed once. Every stream is still
    accounted for by checking its windows directly.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    N, L, M = problem.N, problem.L, problem.M
    lookup = {seq: j for j, seq in enumerate(problem.sequences)}
    probs = problem.probs
    zero = problem.zero()
    max_depth = k_max + N - 1

    @lru_cache(maxsize=None)
    def subtree(tail: tuple[int, ...], depth: int) -> tuple:
        out = [[zero] * k_max for _ in range(M)]
        for s in range(L):
            p = probs[s]
            if p == 0:
                continue
            window = tail + (s,)
            d = depth + 1
            if d >= N and window[-N:] in lookup:
                out[lookup[window[-N:]]][d - N] += p
                continue
            if d >= max_depth:
                continue
            child = subtree(window[-(N - 1):] if N > 1 else (), d)
            for j in range(M):
                row, crow = out[j], child[j]
                for kk in range(k_max):
                    if crow[kk]:
                        row[kk] += p * crow[kk]
        return tuple(tuple(row) for row in out)

    result = subtree((), 0)
    return [list(row) for row in result]


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def _simulate_batch(automaton: MatchAutomaton, probs: np.ndarray, n: int, rng: np.random.Generator):
    L = len(probs)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    state = np.zeros(n, dtype=np.int64)
    alive = np.arange(n)
    symbols_read = np.zeros(n, dtype=np.int64)
    winner = np.full(n, -1, dtype=np.int64)
    t = 0
    while alive.size:
        t += 1
        sym = np.searchsorted(cdf, rng.random(alive.size), side="right")
        np.minimum(sym, L - 1, out=sym)
        hit = automaton.accept[state, sym]
        done = hit >= 0
        finished = alive[done]
        symbols_read[finished] = t
        winner[finished] = hit[done]
        keep = ~done
        state = automaton.trans[state[keep], sym[keep]]
        alive = alive[keep]
    return symbols_read, winner


def simulate(
    problem: Problem,
    trials: int,
    seed: int,
    *,
    batches: int = 1,
    k_max: int | None = None,
) -> OracleReport:
    """Empirical statistics of ``trials`` independent searches.

    The generator is Philox (counter-based). With ``batches > 1`` each batch
    draws from its own child of ``SeedSequence(seed)``, so results depend
    only on ``(seed, trials, batches)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if batches < 1:
        raise ValueError("batches must be >= 1")
    automaton = build_automaton(problem)
    probs = np.array([float(p) for p in problem.probs])
    M, N = problem.M, problem.N

    sizes = [trials // batches + (1 if b < trials % batches else 0) for b in range(batches)]
    if batches == 1:
        seeds = [np.random.SeedSequence(seed)]
    else:
        seeds = np.random.SeedSequence(seed).spawn(batches)
    reads, winners = [], []
    for size, ss in zip(sizes, seeds):
        if size == 0:
            continue
        rng = np.random.Generator(np.random.Philox(ss))
        w, j = _simulate_batch(automaton, probs, size, rng)
        reads.append(w)
        winners.append(j)
    W = np.concatenate(reads)
    J = np.concatenate(winners)

    k = (W - (N - 1)).astype(float)
    n = float(trials)
    mean = k.mean()
    second = (k * k).mean()
    var = second - mean * mean
    freq = np.array([(J == j).mean() for j in range(M)])
    contrib = np.stack([k * (J == j) for j in range(M)])
    partial = contrib.mean(axis=1)
    stderr = {
        "mean_tests": float(k.std() / np.sqrt(n)),
        "second_moment": float((k * k).std() / np.sqrt(n)),
        "absorption": [float(np.sqrt(f * (1 - f) / n)) for f in freq],
        "partial_means": [float(x) for x in contrib.std(axis=1) / np.sqrt(n)],
    }
    report = OracleReport(
        engine="simulate",
        mean_tests=float(mean),
        second_moment=float(second),
        variance=float(var),
        absorption=[float(f) for f in freq],
        partial_means=[float(x) for x in partial],
        trials=trials,
        seed=seed,
        stderr=stderr,
    )
    if k_max is not None:
        ks = k.astype(np.int64)
        hist = np.bincount(ks, minlength=k_max + 1)[1:k_max + 1] / n
        report.distribution = [float(x) for x in hist]
        report.per_seq_distribution = [
            [float(x) for x in np.bincount(ks[J == j], minlength=k_max + 1)[1:k_max + 1] / n]
            for j in range(M)
        ]
    return report


def chain_report(problem: Problem, k_max: int | None = None) -> OracleReport:
    """Chain moments plus, when ``k_max`` is given, the chain distribution."""
    automaton = build_automaton(problem)
    report = chain_moments(automaton, problem)
    if k_max is not None:
        total, per_seq = chain_distribution(automaton, problem, k_max)
        report.distribution = total
        report.per_seq_distribution = per_seq
    return report
