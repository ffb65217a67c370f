"""Extraction: pull subparts out of a document, text, or HTTP response.

Four extractor shapes cover the networks seen in practice:

* a path expression over a parsed document,
* a regular expression whose capture groups map onto named record fields,
* a header extractor turning a response's metadata into one record,
* a learned wrapper applied to the raw markup of a textual payload.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..items import Document, HttpResponse, Item, Record, Text, Url
from .pathexpr import PathExpression


@dataclass(frozen=True)
class RegexExtractor:
    pattern: str
    key_map: tuple[str, ...]

    def __post_init__(self) -> None:
        compiled = re.compile(self.pattern)
        if compiled.groups < len(self.key_map):
            raise ValueError(
                f"pattern has {compiled.groups} groups for {len(self.key_map)} keys"
            )
        if len(set(self.key_map)) != len(self.key_map):
            raise ValueError(f"duplicate key names: {self.key_map}")

    def records(self, text: str) -> list[Record]:
        out = []
        for match in re.finditer(self.pattern, text):
            pairs = [
                (name, group)
                for name, group in zip(self.key_map, match.groups())
                if group is not None
            ]
            if pairs:
                out.append(Record.from_pairs(pairs))
        return out


@dataclass(frozen=True)
class HeaderExtractor:
    """Builds one record per response from its metadata.

    The reserved field name `url` takes the request URL; every other field is
    a case-insensitive header lookup, empty when the header is missing.
    """

    fields: tuple[str, ...]

    def record(self, response: HttpResponse) -> Record:
        pairs = []
        for name in self.fields:
            if name == "url":
                pairs.append((name, response.url))
            else:
                pairs.append((name, response.header(name)))
        return Record.from_pairs(pairs)


def extract(item: Item, extractor) -> list[Item]:
    """Apply one extractor to one item; a payload the extractor cannot read
    is an error (empty list), a clean no-match is just an empty result."""
    payload = item.payload

    if isinstance(extractor, PathExpression):
        if not isinstance(payload, Document):
            return []
        values = extractor.values(payload.root)
        if values is not None:
            return [Item(Text(v)) for v in values]
        return [Item(Document(node)) for node in extractor.select(payload.root)]

    if isinstance(extractor, RegexExtractor):
        text = _regex_input(item)
        if text is None:
            return []
        return [Item(r) for r in extractor.records(text)]

    if isinstance(extractor, HeaderExtractor):
        if not isinstance(payload, HttpResponse):
            return []
        return [Item(extractor.record(payload))]

    # learned wrapper (duck-typed to avoid importing the learner here)
    if hasattr(extractor, "extract_records"):
        text = _wrapper_input(item)
        if text is None:
            return []
        return [Item(Record.from_pairs(fields.items())) for fields in extractor.extract_records(text)]

    return []


def _regex_input(item: Item) -> str | None:
    payload = item.payload
    if isinstance(payload, (Text, Url)):
        return payload.value
    if isinstance(payload, HttpResponse):
        return payload.text()
    if isinstance(payload, Document):
        # regex scans read the tree's text content, one chunk per line
        return payload.text_lines()
    return None


def _wrapper_input(item: Item) -> str | None:
    payload = item.payload
    if isinstance(payload, Text):
        return payload.value
    if isinstance(payload, HttpResponse):
        return payload.text()
    return None
