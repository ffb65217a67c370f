"""Learning wrappers from example instances and applying them.

Learning is the three-step recipe: tokenize the corpus, locate each example
and lift its context into a first pattern, then repeatedly merge pattern
pairs (in canonical order, so the result is independent of how the examples
were listed) until no pair generalizes.  Every merge removes two patterns
and inserts one, so the fixpoint terminates; feeding examples one at a time
into a previous fixpoint lands in the same place as learning from scratch.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .locate import ExampleInstance, locate_instance
from .patterns import Failure, Pattern, encode_tokens, extract_context, find_matches, generalize_pair
from .tokenize import TOKENIZER_VERSION, preprocess

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnConfig:
    left: int = 6  # literal context tokens kept before the first field
    right: int = 6  # and after the last one
    window: int = 200  # max token span of one occurrence
    slot_max: int = 30  # widened capture bound per slot
    gap_max: int = 20  # widest run a merge may turn into a gap


@dataclass(frozen=True)
class Wrapper:
    field_names: tuple[str, ...]
    patterns: tuple[Pattern, ...]
    version: str
    config: LearnConfig

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "fields": list(self.field_names),
            "config": asdict(self.config),
            "patterns": [p.to_spec() for p in self.patterns],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Wrapper":
        doc = json.loads(text)
        return cls(
            field_names=tuple(doc["fields"]),
            patterns=tuple(Pattern.from_spec(spec) for spec in doc["patterns"]),
            version=str(doc["version"]),
            config=LearnConfig(**doc["config"]),
        )

    def extract_records(self, document: str) -> list[dict[str, str]]:
        return apply_wrapper(self, document)


class WrapperVersionError(Exception):
    pass


def save_wrapper(wrapper: Wrapper, path: str | Path) -> None:
    Path(path).write_text(wrapper.to_json(), encoding="utf-8")


def load_wrapper(path: str | Path) -> Wrapper:
    return Wrapper.from_json(Path(path).read_text(encoding="utf-8"))


def _widen_slots(pattern: Pattern, slot_max: int) -> Pattern:
    tokens = tuple(
        replace(t, max_len=max(t.max_len, slot_max)) if t.kind == "slot" else t
        for t in pattern.tokens
    )
    return Pattern(tokens)


def learn_wrapper(corpus: list[str], examples: list[ExampleInstance],
                  config: LearnConfig | None = None) -> Wrapper:
    """Build a wrapper for the relation the examples describe.

    All examples must share one field-name tuple (use empty strings for
    values a given row does not have).  Examples that cannot be located in
    any corpus document are skipped with a warning; having none left is an
    error.
    """
    config = config or LearnConfig()
    if not examples:
        raise ValueError("at least one example instance is required")
    field_names = examples[0].field_names()
    for example in examples[1:]:
        if example.field_names() != field_names:
            raise ValueError(
                f"examples disagree on the field list: {example.field_names()} vs {field_names}"
            )

    token_streams = [preprocess(document) for document in corpus]
    patterns: dict[str, Pattern] = {}
    usable = 0
    for number, example in enumerate(examples):
        occurrences = 0
        for tokens in token_streams:
            for occurrence in locate_instance(tokens, example, window=config.window):
                pattern = extract_context(tokens, occurrence, config.left, config.right)
                pattern = _widen_slots(pattern, config.slot_max)
                patterns[pattern.canonical_key()] = pattern
                occurrences += 1
        if occurrences:
            usable += 1
        else:
            logger.warning("example %d not found in any corpus document; skipped", number)
    if not usable:
        raise ValueError("no example could be located in the corpus")

    merged = _generalize_fixpoint(list(patterns.values()), config.gap_max)
    return Wrapper(field_names, tuple(merged), TOKENIZER_VERSION, config)


def _generalize_fixpoint(patterns: list[Pattern], gap_max: int) -> list[Pattern]:
    pool = sorted(patterns, key=Pattern.canonical_key)
    changed = True
    while changed:
        changed = False
        for i in range(len(pool)):
            for j in range(i + 1, len(pool)):
                result = generalize_pair(pool[i], pool[j], gap_max)
                if isinstance(result, Failure):
                    continue
                rest = [p for k, p in enumerate(pool) if k not in (i, j)]
                pool = sorted(rest + [result], key=Pattern.canonical_key)
                changed = True
                break
            if changed:
                break
    return pool


def apply_wrapper(wrapper: Wrapper, document: str) -> list[dict[str, str]]:
    """All records the wrapper's patterns extract, in document order,
    deduplicated on first occurrence (an absent field equals an empty one)."""
    if wrapper.version != TOKENIZER_VERSION:
        raise WrapperVersionError(
            f"wrapper was built with tokenizer {wrapper.version!r}, "
            f"this library uses {TOKENIZER_VERSION!r}"
        )
    tokens = preprocess(document)
    encoded, _ = encode_tokens(tokens)

    hits = []
    for index, pattern in enumerate(wrapper.patterns):
        for match in find_matches(pattern, encoded):
            hits.append((match.start_offset, index, match.values))

    records: list[dict[str, str]] = []
    seen: set[tuple] = set()
    for _, _, values in sorted(hits, key=lambda h: (h[0], h[1])):
        record = {wrapper.field_names[i]: text for i, text in values}
        key = canonical_record_key(record)
        if key not in seen:
            seen.add(key)
            records.append(record)
    return records


def canonical_record_key(record: dict[str, str]) -> tuple[tuple[str, str], ...]:
    """Equality view of a record: field order and empty fields are ignored."""
    return tuple(sorted((k, v) for k, v in record.items() if v != ""))
