"""Find where an example instance occurs in a token stream.

An occurrence places every non-empty field of the instance as a run of
consecutive word tokens, field after field in declaration order, inside a
bounded window.  When a value appears in several places the tightest
placement wins: candidates are ranked by span then start, and overlapping
losers are dropped, so repeated field values err toward the compact
occurrence that actually sits next to the other fields.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tokenize import WORD, Token, split_words


@dataclass(frozen=True)
class ExampleInstance:
    fields: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.fields]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate field names: {names}")
        if not any(value.strip() for _, value in self.fields):
            raise ValueError("an example needs at least one non-empty field")

    @classmethod
    def from_mapping(cls, mapping) -> "ExampleInstance":
        return cls(tuple((str(k), str(v)) for k, v in dict(mapping).items()))

    def field_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.fields)


@dataclass(frozen=True)
class Occurrence:
    """Per-field (start, end) token spans, in field order; empty-valued
    fields carry no span and are marked by field_indices."""

    spans: tuple[tuple[int, int], ...]
    field_indices: tuple[int, ...]

    @property
    def start(self) -> int:
        return self.spans[0][0]

    @property
    def end(self) -> int:
        return self.spans[-1][1]

    @property
    def span(self) -> int:
        return self.end - self.start


def _word_runs(tokens: list[Token], needle: list[str]) -> list[tuple[int, int]]:
    """All placements of needle as consecutive word tokens."""
    matches = []
    n = len(needle)
    for start in range(len(tokens) - n + 1):
        window = tokens[start:start + n]
        if all(t.kind == WORD and t.text == needle[i] for i, t in enumerate(window)):
            matches.append((start, start + n))
    return matches


def locate_instance(tokens: list[Token], instance: ExampleInstance,
                    window: int = 200) -> list[Occurrence]:
    """Minimal-span occurrences of the instance, leftmost on ties, sorted by
    start; the empty list when any field value is absent."""
    needles: list[tuple[int, list[str]]] = []
    for index, (_, value) in enumerate(instance.fields):
        words = split_words(value)
        if words:
            needles.append((index, words))
    if not needles:
        return []

    placements = []
    for index, needle in needles:
        runs = _word_runs(tokens, needle)
        if not runs:
            return []
        placements.append(runs)

    candidates: list[Occurrence] = []
    for first in placements[0]:
        spans = [first]
        cursor = first[1]
        feasible = True
        for runs in placements[1:]:
            chosen = next((run for run in runs if run[0] >= cursor), None)
            if chosen is None:
                feasible = False
                break
            spans.append(chosen)
            cursor = chosen[1]
        if not feasible:
            continue
        occurrence = Occurrence(tuple(spans), tuple(index for index, _ in needles))
        if occurrence.span <= window:
            candidates.append(occurrence)

    return select_occurrences(candidates)


def select_occurrences(candidates: list[Occurrence]) -> list[Occurrence]:
    """Greedy minimal-span-then-leftmost choice of non-overlapping occurrences."""
    chosen: list[Occurrence] = []
    for candidate in sorted(candidates, key=lambda o: (o.span, o.start)):
        if all(candidate.end <= other.start or candidate.start >= other.end for other in chosen):
            chosen.append(candidate)
    return sorted(chosen, key=lambda o: o.start)
