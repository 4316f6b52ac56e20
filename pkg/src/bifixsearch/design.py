"""Search for marker sets with short expected acquisition time.

Candidates are enumerated exhaustively under explicit size guards. For
overlap-free (cross-bifix-free) sets the mean reduces to
``1 - N + 1/Pr{1}``, so ranking by mean only needs the sum of the sequence
probabilities; other sets go through :mod:`.exact`.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from . import exact
from .errors import BadDistribution, ComputationError, NoFeasibleSet, SingularSystem, TooLarge, ValidationError
from .model import Problem, SymbolDistribution, parse_probs, sequence_probability, validate_problem

CANDIDATE_GUARD = 2**20
SET_GUARD = 10**6
TIE_RTOL = 1e-12


class Objective(str, Enum):
    MIN_T = "min_T"
    MIN_VARIANCE = "min_variance"
    LEXICOGRAPHIC = "lexicographic"


class Constraint(str, Enum):
    NONE = "none"
    BIFIX_FREE = "bifix_free"
    CROSS_BIFIX_FREE = "cross_bifix_free"


@dataclass(frozen=True)
class DesignQuery:
    L: int
    N: int
    M: int
    probs: Sequence
    objective: Objective = Objective.MIN_T
    constraint: Constraint = Constraint.CROSS_BIFIX_FREE
    top_k: int = 10
    symbols: Sequence[str] | None = None
    candidate_guard: int = CANDIDATE_GUARD
    set_guard: int = SET_GUARD

    def distribution(self) -> SymbolDistribution:
        return _probe_problem(self).dist


@dataclass(frozen=True)
class RankedSet:
    sequences: tuple
    T: float
    variance: float
    cross_bifix_free: bool

    def to_json(self) -> dict:
        return {
            "sequences": list(self.sequences),
            "T": self.T,
            "variance": self.variance,
            "cross_bifix_free": self.cross_bifix_free,
        }


@dataclass
class Ranking:
    sets: list[RankedSet]
    excluded: list[tuple[tuple, str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.sets)

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, i):
        return self.sets[i]


def _labels(query: DesignQuery) -> list[str]:
    if query.symbols is not None:
        return [str(s) for s in query.symbols]
    return [str(i) for i in range(query.L)]


def _probe_problem(query: DesignQuery) -> Problem:
    if query.L < 2 or query.N < 1 or query.M < 1:
        raise ValidationError("need L >= 2, N >= 1, M >= 1", field="query")
    if query.top_k < 1:
        raise ValidationError("top_k must be >= 1", field="top")
    labels = _labels(query)
    if len(labels) != query.L:
        raise ValidationError(f"{len(labels)} symbol labels for L={query.L}", field="symbols")
    if len(query.probs) != query.L:
        raise BadDistribution(f"{len(query.probs)} probabilities given for L={query.L}", field="probs")
    weights = parse_probs(query.probs, exact=False)
    # the most likely symbol repeated N times is always a reachable probe sequence
    best = max(range(query.L), key=lambda s: weights[s])
    return validate_problem(labels, query.probs, [[labels[best]] * query.N])


def _render(labels: list[str], seq: tuple[int, ...]):
    if all(len(s) == 1 for s in labels):
        return "".join(labels[s] for s in seq)
    return [labels[s] for s in seq]


def _has_overlap(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """True if some proper suffix of ``a`` equals the prefix of ``b`` of the same length."""
    N = len(a)
    return any(a[N - n:] == b[:n] for n in range(1, N))


def enumerate_bifix_free(L: int, N: int, *, guard: int = CANDIDATE_GUARD) -> list[tuple[int, ...]]:
    """All length-N sequences over ``0..L-1`` without a proper bifix, in lexicographic order."""
    if L < 2 or N < 1:
        raise ValidationError("need L >= 2 and N >= 1", field="query")
    if L**N > guard:
        raise TooLarge(f"{L}^{N} candidates exceed the guard {guard}")
    return [seq for seq in itertools.product(range(L), repeat=N) if not _has_overlap(seq, seq)]


def _compatible(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return not _has_overlap(a, b) and not _has_overlap(b, a)


def _cliques(candidates: list[tuple[int, ...]], M: int, guard: int) -> Iterable[tuple[int, ...]]:
    """Index tuples of all M-cliques in the pairwise-compatibility graph, lexicographically."""
    n = len(candidates)
    adj = [
        {j for j in range(n) if j != i and _compatible(candidates[i], candidates[j])}
        for i in range(n)
    ]
    count = 0

    def extend(chosen: list[int], pool: list[int]):
        nonlocal count
        if len(chosen) == M:
            count += 1
            if count > guard:
                raise TooLarge(f"more than {guard} candidate sets; raise the set guard or shrink the query")
            yield tuple(chosen)
            return
        for pos, v in enumerate(pool):
            if len(pool) - pos < M - len(chosen):
                break
            yield from extend(chosen + [v], [w for w in pool[pos + 1:] if w in adj[v]])

    yield from extend([], list(range(n)))


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_RTOL * max(abs(a), abs(b))


def _objective_key(objective: Objective, item: RankedSet) -> tuple[float, ...]:
    if objective is Objective.MIN_T:
        return (item.T,)
    if objective is Objective.MIN_VARIANCE:
        return (item.variance,)
    return (item.T, item.variance)


def _sorted(items: list[RankedSet], objective: Objective) -> list[RankedSet]:
    def cmp(a: RankedSet, b: RankedSet) -> int:
        for x, y in zip(_objective_key(objective, a), _objective_key(objective, b)):
            if not _close(x, y):
                return -1 if x < y else 1
        return (a.sequences > b.sequences) - (a.sequences < b.sequences)

    base = sorted(items, key=lambda s: s.sequences)
    return sorted(base, key=functools.cmp_to_key(cmp))


def _evaluate(problem: Problem, rendered: tuple) -> RankedSet:
    report = exact.moments(problem.as_float())
    return RankedSet(
        sequences=rendered,
        T=float(report.T),
        variance=float(report.variance),
        cross_bifix_free=report.cross_bifix_free,
    )


def rank_sets(problems: Sequence[Problem], objective: Objective | str = Objective.MIN_T) -> Ranking:
    """Evaluate and sort candidate problems.

    Candidates whose moment systems fail are listed in ``Ranking.excluded``
    with the error message instead of being ranked.
    """
    objective = Objective(objective)
    ranked, excluded = [], []
    for problem in problems:
        rendered = tuple(problem.render(j) for j in range(problem.M))
        try:
            ranked.append(_evaluate(problem, rendered))
        except (SingularSystem, ComputationError) as exc:
            excluded.append((rendered, str(exc)))
    return Ranking(_sorted(ranked, objective), excluded)


def search_cross_bifix_free_sets(query: DesignQuery) -> list[RankedSet]:
    """Best overlap-free M-sets; the mean of each comes from the shortcut formula."""
    probe = _probe_problem(query)
    labels = list(probe.dist.symbols)
    objective = Objective(query.objective)
    candidates = enumerate_bifix_free(query.L, query.N, guard=query.candidate_guard)
    seq_prob = {}
    for seq in candidates:
        p = 1.0
        for s in seq:
            p *= float(probe.probs[s])
        seq_prob[seq] = p

    scored = []
    for clique in _cliques(candidates, query.M, query.set_guard):
        seqs = tuple(candidates[i] for i in clique)
        pr1 = sum(seq_prob[s] for s in seqs)
        if pr1 == 0:
            continue
        scored.append((1 - query.N + 1 / pr1, seqs))
    if not scored:
        raise NoFeasibleSet(
            f"no cross-bifix-free set of {query.M} sequences of length {query.N} over {query.L} symbols"
            " with positive probability"
        )

    def finish(T: float, seqs: tuple) -> RankedSet:
        problem = Problem(probe.dist, seqs)
        var = float(exact.variance(problem))
        return RankedSet(tuple(_render(labels, s) for s in seqs), T, var, True)

    if objective is Objective.MIN_T:
        # variance is only needed for the survivors
        prelim = [RankedSet(tuple(_render(labels, s) for s in seqs), T, 0.0, True) for T, seqs in scored]
        by_render = {tuple(_render(labels, s) for s in seqs): (T, seqs) for T, seqs in scored}
        keep = _sorted(prelim, objective)[: query.top_k]
        return [finish(*by_render[item.sequences]) for item in keep]
    full = [finish(T, seqs) for T, seqs in scored]
    return _sorted(full, objective)[: query.top_k]


def search_sets(query: DesignQuery) -> list[RankedSet]:
    """Dispatch on the query's constraint and return the ``top_k`` best sets."""
    constraint = Constraint(query.constraint)
    if constraint is Constraint.CROSS_BIFIX_FREE:
        return search_cross_bifix_free_sets(query)

    probe = _probe_problem(query)
    if constraint is Constraint.BIFIX_FREE:
        pool = enumerate_bifix_free(query.L, query.N, guard=query.candidate_guard)
    else:
        if query.L**query.N > query.candidate_guard:
            raise TooLarge(f"{query.L}^{query.N} candidates exceed the guard {query.candidate_guard}")
        pool = list(itertools.product(range(query.L), repeat=query.N))
    if math.comb(len(pool), query.M) > query.set_guard:
        raise TooLarge(f"C({len(pool)}, {query.M}) candidate sets exceed the guard {query.set_guard}")

    problems = []
    for combo in itertools.combinations(pool, query.M):
        problem = Problem(probe.dist, combo)
        if any(sequence_probability(problem, j) > 0 for j in range(problem.M)):
            problems.append(problem)
    if not problems:
        raise NoFeasibleSet("no candidate set has positive probability")
    ranking = rank_sets(problems, query.objective)
    return ranking.sets[: query.top_k]
