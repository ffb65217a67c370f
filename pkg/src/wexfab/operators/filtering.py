"""Predicate filtering: pass an item through iff every test holds."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..items import HttpRequest, HttpResponse, Item, Record, Text, Url

OPS = ("equals", "contains", "matches", "less_than", "greater_than")


@dataclass(frozen=True)
class Predicate:
    """A conjunction of (selector, op, literal) tests; empty means true.

    Selectors resolve against the payload: header names and `status` for HTTP
    responses, field names for records, `text`/`url` for textual payloads.
    An unresolvable selector makes its test false, never an error.
    """

    conjuncts: tuple[tuple[str, str, str], ...] = ()

    @classmethod
    def parse(cls, clauses: list[str]) -> "Predicate":
        """Each clause is "SELECTOR OP LITERAL"; the literal may hold spaces."""
        conjuncts = []
        for clause in clauses:
            parts = clause.split(None, 2)
            if len(parts) < 2 or parts[1] not in OPS:
                raise ValueError(f"bad filter clause: {clause!r}")
            selector, op = parts[0], parts[1]
            literal = parts[2] if len(parts) == 3 else ""
            conjuncts.append((selector, op, literal))
        return cls(tuple(conjuncts))

    def holds(self, item: Item) -> bool:
        return all(self._test(item, *conjunct) for conjunct in self.conjuncts)

    def _test(self, item: Item, selector: str, op: str, literal: str) -> bool:
        value = _resolve(item, selector)
        if value is None:
            return False
        if op == "equals":
            return value == literal
        if op == "contains":
            return literal in value
        if op == "matches":
            return re.search(literal, value) is not None
        left, right = _as_number(value), _as_number(literal)
        if left is None or right is None:
            return False
        return left < right if op == "less_than" else left > right


def _resolve(item: Item, selector: str) -> str | None:
    payload = item.payload
    if isinstance(payload, HttpResponse):
        if selector == "status":
            return str(payload.status)
        value = payload.header(selector)
        # header values may carry parameters (text/html; charset=...)
        return value.split(";")[0].strip() if value else None
    if isinstance(payload, Record):
        return payload.get(selector)
    if isinstance(payload, (Text, Url)):
        if selector in ("text", "url"):
            return payload.value
        return None
    if isinstance(payload, HttpRequest):
        if selector == "url":
            return payload.url
        if selector == "method":
            return payload.method
    return None


def _as_number(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def filter_items(item: Item, predicate: Predicate) -> list[Item]:
    """[item] iff the predicate holds, [] otherwise; non-matching is not an
    error even though the engine counts empty outputs uniformly."""
    return [item] if predicate.holds(item) else []
