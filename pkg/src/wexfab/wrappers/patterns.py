"""Extraction patterns: token contexts with capture slots and bounded gaps.

A pattern is a sequence of literal tag and word tokens, slots (one per
captured field, in field order), and gaps (bounded wildcards over words).
Tags and slots form the anchor skeleton.  Generalizing two patterns is
strict on that skeleton, merge or fail: with identical skeletons, each run
of word material between consecutive anchors is kept verbatim when the two
runs agree and replaced by a gap spanning their lengths when they do not.
The merged pattern therefore matches a superset of what either input
matched, while its tag skeleton never changes.

Matching compiles a pattern to a regular expression over an encoded token
stream, one token per line: slots and gaps consume word lines only (never
tags), slots lazily so a capture stops at the first position the rest of
the pattern accepts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .locate import Occurrence
from .tokenize import TAG_CLOSE, TAG_OPEN, WORD, Token


@dataclass(frozen=True)
class PatternToken:
    kind: str  # open | close | word | slot | gap
    text: str = ""  # tag name or word text
    field: int = -1  # slot: captured field index
    max_len: int = 0  # slot: longest word run it may consume
    lo: int = 0  # gap bounds
    hi: int = 0

    def is_anchor(self) -> bool:
        return self.kind in (TAG_OPEN, TAG_CLOSE, "slot")

    def to_spec(self) -> list:
        if self.kind == "slot":
            return ["slot", self.field, self.max_len]
        if self.kind == "gap":
            return ["gap", self.lo, self.hi]
        return [self.kind, self.text]

    @classmethod
    def from_spec(cls, spec: list) -> "PatternToken":
        kind = spec[0]
        if kind == "slot":
            return slot(int(spec[1]), int(spec[2]))
        if kind == "gap":
            return gap(int(spec[1]), int(spec[2]))
        if kind in (TAG_OPEN, TAG_CLOSE, WORD):
            return PatternToken(kind, spec[1])
        raise ValueError(f"unknown pattern token kind {kind!r}")


def slot(field: int, max_len: int = 1) -> PatternToken:
    if max_len < 1:
        raise ValueError("a slot must be able to hold at least one word")
    return PatternToken("slot", field=field, max_len=max_len)


def gap(lo: int, hi: int) -> PatternToken:
    if lo > hi or lo < 0:
        raise ValueError(f"bad gap bounds ({lo}, {hi})")
    return PatternToken("gap", lo=lo, hi=hi)


def literal(token: Token) -> PatternToken:
    return PatternToken(token.kind, token.text)


@dataclass(frozen=True)
class Pattern:
    tokens: tuple[PatternToken, ...]

    def __post_init__(self) -> None:
        previous = None
        for token in self.tokens:
            if token.kind == "gap" and previous == "gap":
                raise ValueError("adjacent gaps are not allowed")
            previous = token.kind
        if not any(t.kind in (TAG_OPEN, TAG_CLOSE, WORD) for t in self.tokens):
            raise ValueError("a pattern needs at least one tag or word anchor")
        fields = [t.field for t in self.tokens if t.kind == "slot"]
        if fields != sorted(set(fields)):
            raise ValueError(f"slots must appear once each, in field order: {fields}")

    def skeleton(self) -> tuple[tuple, ...]:
        """Anchor subsequence compared during generalization: tags by kind
        and name, slots by field index."""
        out = []
        for token in self.tokens:
            if token.kind == "slot":
                out.append(("slot", token.field))
            elif token.is_anchor():
                out.append((token.kind, token.text))
        return tuple(out)

    def tag_skeleton(self) -> tuple[tuple, ...]:
        return tuple((t.kind, t.text) for t in self.tokens if t.kind in (TAG_OPEN, TAG_CLOSE))

    def slot_fields(self) -> tuple[int, ...]:
        return tuple(t.field for t in self.tokens if t.kind == "slot")

    def to_spec(self) -> list[list]:
        return [t.to_spec() for t in self.tokens]

    @classmethod
    def from_spec(cls, spec: list) -> "Pattern":
        return cls(tuple(PatternToken.from_spec(t) for t in spec))

    def canonical_key(self) -> str:
        return repr(self.to_spec())


# ---------------------------------------------------------------------------
# Context extraction


def extract_context(tokens: list[Token], occurrence: Occurrence,
                    left: int, right: int) -> Pattern:
    """The occurrence's surroundings as a first pattern: up to `left` literal
    tokens before the first field, each field run replaced by a slot sized to
    what was observed, inter-field tokens verbatim, and up to `right` literal
    tokens after the last field.  Windows clamp at document edges."""
    parts: list[PatternToken] = []
    first_start = occurrence.spans[0][0]
    for token in tokens[max(0, first_start - left):first_start]:
        parts.append(literal(token))
    for i, (start, end) in enumerate(occurrence.spans):
        parts.append(slot(occurrence.field_indices[i], max_len=end - start))
        if i + 1 < len(occurrence.spans):
            for token in tokens[end:occurrence.spans[i + 1][0]]:
                parts.append(literal(token))
    last_end = occurrence.spans[-1][1]
    for token in tokens[last_end:last_end + right]:
        parts.append(literal(token))
    return Pattern(tuple(parts))


# ---------------------------------------------------------------------------
# Generalization


@dataclass(frozen=True)
class Failure:
    reason: str  # skeleton_mismatch | slot_mismatch | gap_limit


def _runs_between_anchors(pattern: Pattern) -> tuple[list[PatternToken], list[list[PatternToken]]]:
    """Split into the anchor sequence and the word/gap runs around them;
    returns (anchors, runs) with len(runs) == len(anchors) + 1."""
    anchors: list[PatternToken] = []
    runs: list[list[PatternToken]] = [[]]
    for token in pattern.tokens:
        if token.is_anchor():
            anchors.append(token)
            runs.append([])
        else:
            runs[-1].append(token)
    return anchors, runs


def _run_bounds(run: list[PatternToken]) -> tuple[int, int]:
    lo = sum(1 if t.kind == WORD else t.lo for t in run)
    hi = sum(1 if t.kind == WORD else t.hi for t in run)
    return lo, hi


def generalize_pair(p: Pattern, q: Pattern, gap_max: int = 20) -> Pattern | Failure:
    """Merge two patterns or fail; strict (match or fail) on tag anchors.

    Slots widen to the larger observed size.  A differing run merges into a
    gap covering both runs' word counts, so the result accepts everything
    either input accepted; runs wider than gap_max refuse to merge, keeping
    two precise patterns instead of one overly loose one.
    """
    p_anchors, p_runs = _runs_between_anchors(p)
    q_anchors, q_runs = _runs_between_anchors(q)
    if len(p_anchors) != len(q_anchors):
        return Failure("skeleton_mismatch")
    for a, b in zip(p_anchors, q_anchors):
        if a.kind != b.kind:
            return Failure("skeleton_mismatch")
        if a.kind == "slot":
            if a.field != b.field:
                return Failure("slot_mismatch")
        elif a.text != b.text:
            return Failure("skeleton_mismatch")

    merged: list[PatternToken] = []
    for i in range(len(p_runs)):
        run = _merge_runs(p_runs[i], q_runs[i], gap_max)
        if isinstance(run, Failure):
            return run
        merged.extend(run)
        if i < len(p_anchors):
            a, b = p_anchors[i], q_anchors[i]
            if a.kind == "slot":
                merged.append(slot(a.field, max(a.max_len, b.max_len)))
            else:
                merged.append(a)
    return Pattern(tuple(merged))


def _merge_runs(left: list[PatternToken], right: list[PatternToken],
                gap_max: int) -> list[PatternToken] | Failure:
    if left == right:
        return list(left)
    lo_l, hi_l = _run_bounds(left)
    lo_r, hi_r = _run_bounds(right)
    hi = max(hi_l, hi_r)
    if hi > gap_max:
        return Failure("gap_limit")
    lo = min(lo_l, lo_r)
    if lo == hi == 0:
        return []
    return [gap(lo, hi)]


# ---------------------------------------------------------------------------
# Matching

_LINE = r"w[^\n]*\n"


def encode_tokens(tokens: list[Token]) -> tuple[str, list[int]]:
    """One line per token ('w'/'o'/'c' prefix); also returns each token's
    character offset so match positions map back to token indices."""
    lines = []
    offsets = []
    position = 0
    prefix = {WORD: "w", TAG_OPEN: "o", TAG_CLOSE: "c"}
    for token in tokens:
        line = prefix[token.kind] + token.text + "\n"
        lines.append(line)
        offsets.append(position)
        position += len(line)
    return "".join(lines), offsets


def compile_pattern(pattern: Pattern) -> "re.Pattern[str]":
    parts = []
    for token in pattern.tokens:
        if token.kind == "slot":
            parts.append(f"((?:{_LINE}){{1,{token.max_len}}}?)")
        elif token.kind == "gap":
            parts.append(f"(?:{_LINE}){{{token.lo},{token.hi}}}?")
        elif token.kind == WORD:
            parts.append(re.escape("w" + token.text + "\n"))
        elif token.kind == TAG_OPEN:
            parts.append(re.escape("o" + token.text + "\n"))
        else:
            parts.append(re.escape("c" + token.text + "\n"))
    return re.compile("".join(parts))


def _decode_words(captured: str) -> str:
    return " ".join(line[1:] for line in captured.splitlines())


@dataclass(frozen=True)
class PatternMatch:
    start_offset: int
    values: tuple[tuple[int, str], ...]  # (field index, captured text)


def find_matches(pattern: Pattern, encoded: str) -> list[PatternMatch]:
    """Non-overlapping matches, leftmost first, in document order."""
    compiled = compile_pattern(pattern)
    fields = pattern.slot_fields()
    out = []
    for match in compiled.finditer(encoded):
        values = tuple(
            (fields[i], _decode_words(match.group(i + 1))) for i in range(len(fields))
        )
        out.append(PatternMatch(match.start(), values))
    return out
