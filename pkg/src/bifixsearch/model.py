"""Problem definition: a memoryless L-ary source and a set of target sequences.

Symbols are arbitrary labels; validation maps them to indices ``0..L-1`` and
every downstream computation works on those indices. Sequence indices are
0-based throughout the Python API.

Two numeric modes exist. Float mode stores probabilities as ``float``; exact
mode stores them as :class:`fractions.Fraction`, and every computation that
consumes the problem then runs in rational arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Sequence

from .errors import (
    BadDistribution,
    DuplicateSequence,
    UnequalLengths,
    UnknownSymbol,
    UnreachableSet,
    ValidationError,
)

#: Maximum allowed deviation of the probability sum from 1 in float mode.
PROB_SUM_TOL = 1e-12

Number = float | Fraction


@dataclass(frozen=True)
class SymbolDistribution:
    symbols: tuple[str, ...]
    probs: tuple[Number, ...]

    @property
    def L(self) -> int:
        return len(self.symbols)

    @property
    def exact(self) -> bool:
        return isinstance(self.probs[0], Fraction)

    def index(self, label: str) -> int:
        try:
            return self.symbols.index(label)
        except ValueError:
            raise UnknownSymbol(f"symbol {label!r} is not in the alphabet", field="sequences") from None


@dataclass(frozen=True)
class Problem:
    """A validated search problem. Immutable and safe to share."""

    dist: SymbolDistribution
    sequences: tuple[tuple[int, ...], ...]

    @property
    def M(self) -> int:
        return len(self.sequences)

    @property
    def N(self) -> int:
        return len(self.sequences[0])

    @property
    def L(self) -> int:
        return self.dist.L

    @property
    def probs(self) -> tuple[Number, ...]:
        return self.dist.probs

    @property
    def exact(self) -> bool:
        return self.dist.exact

    def one(self) -> Number:
        """Multiplicative identity in the problem's numeric mode."""
        return Fraction(1) if self.exact else 1.0

    def zero(self) -> Number:
        return Fraction(0) if self.exact else 0.0

    def labels(self, j: int) -> list[str]:
        return [self.dist.symbols[s] for s in self.sequences[j]]

    def render(self, j: int) -> str | list[str]:
        """Sequence ``j`` in the file-schema form (string if labels are single characters)."""
        labels = self.labels(j)
        if all(len(s) == 1 for s in self.dist.symbols):
            return "".join(labels)
        return labels

    def as_float(self) -> Problem:
        if not self.exact:
            return self
        dist = SymbolDistribution(self.dist.symbols, tuple(float(p) for p in self.probs))
        return Problem(dist, self.sequences)

    def to_json(self) -> dict[str, Any]:
        probs = [f"{p.numerator}/{p.denominator}" if isinstance(p, Fraction) else p for p in self.probs]
        return {
            "symbols": list(self.dist.symbols),
            "probs": probs,
            "sequences": [self.render(j) for j in range(self.M)],
        }


def _to_fraction(p: Any) -> Fraction:
    if isinstance(p, float):
        # decimal literal semantics: 0.3 means 3/10, not the nearest binary double
        return Fraction(repr(p))
    if isinstance(p, (int, Rational, str)):
        return Fraction(p)
    raise BadDistribution(f"cannot interpret probability {p!r}", field="probs")


def _to_float(p: Any) -> float:
    if isinstance(p, str):
        return float(Fraction(p))
    return float(p)


def parse_probs(probs: Sequence[Any], exact: bool) -> tuple[Number, ...]:
    try:
        values = tuple(_to_fraction(p) if exact else _to_float(p) for p in probs)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise BadDistribution(f"invalid probability: {exc}", field="probs") from None
    for p in values:
        if not exact and not math.isfinite(p):
            raise BadDistribution("probabilities must be finite", field="probs")
        if p < 0:
            raise BadDistribution(f"negative probability {p}", field="probs")
    total = sum(values)
    if exact:
        if total != 1:
            raise BadDistribution(f"probabilities sum to {total}, not 1", field="probs")
    elif abs(total - 1.0) > PROB_SUM_TOL:
        raise BadDistribution(f"probabilities sum to {total!r}, not 1 within {PROB_SUM_TOL}", field="probs")
    return values


def _encode(seq: Any, dist: SymbolDistribution) -> tuple[int, ...]:
    if isinstance(seq, str):
        labels: Iterable[str] = list(seq)
    elif isinstance(seq, (list, tuple)):
        labels = [str(s) for s in seq]
    else:
        raise ValidationError(f"sequence {seq!r} is neither a string nor a list of labels", field="sequences")
    return tuple(dist.index(label) for label in labels)


def validate_problem(
    symbols: Sequence[Any],
    probs: Sequence[Any],
    sequences: Sequence[Any],
    *,
    exact: bool = False,
) -> Problem:
    """Build a :class:`Problem` from raw inputs, checking every precondition.

    ``sequences`` may be strings (one character per symbol) or lists of
    labels. Probabilities are never renormalized: a sum off by more than
    ``PROB_SUM_TOL`` (or any amount in exact mode) is an error.
    """
    labels = tuple(str(s) for s in symbols)
    if len(labels) < 2:
        raise BadDistribution("alphabet needs at least two symbols", field="symbols")
    if len(set(labels)) != len(labels):
        raise BadDistribution("duplicate symbol label", field="symbols")
    if len(probs) != len(labels):
        raise BadDistribution(
            f"{len(probs)} probabilities given for {len(labels)} symbols", field="probs"
        )
    dist = SymbolDistribution(labels, parse_probs(probs, exact))

    if len(sequences) == 0:
        raise ValidationError("at least one sequence is required", field="sequences")
    encoded = tuple(_encode(s, dist) for s in sequences)
    lengths = {len(s) for s in encoded}
    if len(lengths) != 1:
        raise UnequalLengths(f"sequences have differing lengths {sorted(lengths)}", field="sequences")
    if 0 in lengths:
        raise ValidationError("sequences must be non-empty", field="sequences")
    seen: set[tuple[int, ...]] = set()
    for s in encoded:
        if s in seen:
            raise DuplicateSequence(
                f"sequence {''.join(labels[i] for i in s)!r} appears twice", field="sequences"
            )
        seen.add(s)

    problem = Problem(dist, encoded)
    if all(sequence_probability(problem, j) == 0 for j in range(problem.M)):
        raise UnreachableSet("every sequence uses a zero-probability symbol", field="sequences")
    return problem


def sequence_probability(problem: Problem, j: int) -> Number:
    """Probability that one window equals sequence ``j`` (product of its symbol probabilities)."""
    if not 0 <= j < problem.M:
        raise IndexError(f"sequence index {j} out of range for M={problem.M}")
    out = problem.one()
    # last symbol first, the same order the tail vectors accumulate in
    for s in reversed(problem.sequences[j]):
        out *= problem.probs[s]
    return out


def problem_from_json(data: Any, *, exact: bool = False) -> Problem:
    """Validate a decoded problem document ``{"symbols", "probs", "sequences"}``."""
    if not isinstance(data, dict):
        raise ValidationError("problem document must be a JSON object", field="problem")
    for key in ("symbols", "probs", "sequences"):
        if key not in data:
            raise ValidationError(f"missing key {key!r}", field=key)
        if not isinstance(data[key], list):
            raise ValidationError(f"{key!r} must be an array", field=key)
    return validate_problem(data["symbols"], data["probs"], data["sequences"], exact=exact)


def load_problem(path: str, *, exact: bool = False) -> Problem:
    """Read a problem file. ``OSError`` propagates; malformed JSON becomes a ValidationError."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"problem file is not valid JSON: {exc}", field="problem") from None
    return problem_from_json(data, exact=exact)
