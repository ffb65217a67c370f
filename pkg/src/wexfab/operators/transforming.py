"""Template transforms and the record sink.

Both share the same $field placeholder language.  Transform is strict: a
missing field is an operator error.  Sinks are lenient: a missing field
substitutes the empty string (counted as a warning by the engine) because a
half-written line is better than a silently dropped record at the edge of
the network.
"""

from __future__ import annotations

import json
import re
from string import Template
from typing import Callable, TextIO

from ..items import Document, Item, Record, Text, Url


class FieldTemplate(Template):
    # ${...} accepts hyphenated names (header-style fields); bare $name stops
    # at the first non-word character so "$a-$b" reads as two placeholders.
    braceidpattern = r"[\w-]+"


class _Lenient(dict):
    def __init__(self, base: dict, misses: list[str]):
        super().__init__(base)
        self._misses = misses

    def __missing__(self, key: str) -> str:
        self._misses.append(key)
        return ""


def _template_mapping(item: Item) -> dict[str, str] | None:
    payload = item.payload
    if isinstance(payload, Record):
        mapping = payload.as_dict()
        mapping["_text"] = " ".join(v for v in payload.as_dict().values() if v)
        mapping["_json"] = json.dumps(payload.as_dict(), ensure_ascii=False)
        return mapping
    if isinstance(payload, Document):
        text = payload.text_lines()
        return {"_text": text}
    if isinstance(payload, (Text, Url)):
        return {"_text": payload.value}
    return None


def transform(item: Item, template: str) -> list[Item]:
    """One text item with every $field replaced from the record; $_text is
    the payload's full text and $_json a canonical record rendering."""
    mapping = _template_mapping(item)
    if mapping is None:
        return []
    try:
        rendered = FieldTemplate(template).substitute(mapping)
    except (KeyError, ValueError):
        return []
    return [Item(Text(rendered))]


def render_statement(template: str, record: Record, misses: list[str]) -> str:
    """Statement template with $fields substituted; values have single quotes
    doubled and the template's own whitespace collapsed to single spaces."""
    flat = re.sub(r"\s+", " ", template).strip()
    values = {k: v.replace("'", "''") for k, v in record.fields}
    return FieldTemplate(flat).substitute(_Lenient(values, misses))


def sink_records(item: Item, *, mode: str, statement: str | None,
                 write: Callable[[str], None], warn: Callable[[str], None]) -> list[Item]:
    """Append one line per record to the output target and pass the record
    through so sinks can sit mid-network."""
    payload = item.payload
    if not isinstance(payload, Record):
        return []
    misses: list[str] = []
    if mode == "statement":
        if not statement:
            return []
        line = render_statement(statement, payload, misses)
    else:
        line = json.dumps(payload.as_dict(), ensure_ascii=False)
    for name in misses:
        warn(f"record lacks field {name!r}; substituted empty string")
    try:
        write(line)
    except OSError:
        return []
    return [item]


def line_writer(stream: TextIO) -> Callable[[str], None]:
    def write(line: str) -> None:
        stream.write(line + "\n")
    return write
