"""Synthetic evaluation sources, recall/accuracy scoring, and result tables.

The original extraction sources are long gone, so measurable ground truth
comes from generated corpora: each source spec lists row templates with
$field placeholders, and the generator embeds seeded, pairwise-distinct
records into one document per format.  Scores follow the usual convention:
recall is correct retrieved over instances considered, accuracy is correct
retrieved over everything retrieved (n/a when nothing was retrieved).
"""

from __future__ import annotations

import io
import json
import random
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .wrappers.learn import canonical_record_key

REPORT_COLUMNS = ("Source", "Ex.", "Inst.", "Retr.", "Rec.", "Acc.")


@dataclass(frozen=True)
class EvaluationRow:
    source: str
    examples_given: int
    instances: int
    retrieved: int
    recall: float
    accuracy: float | None  # None renders as n/a

    def to_json(self) -> str:
        doc = {
            "source": self.source,
            "examples": self.examples_given,
            "instances": self.instances,
            "retrieved": self.retrieved,
            "recall": self.recall,
            "accuracy": self.accuracy,
        }
        return json.dumps(doc, ensure_ascii=False)


@dataclass(frozen=True)
class ScoreFragment:
    retrieved: int
    correct: int
    recall: float
    accuracy: float | None


@dataclass(frozen=True)
class SyntheticSourceSpec:
    fields: tuple[str, ...]
    formats: tuple[str, ...]  # row templates with $field placeholders
    rows_per_format: int
    seed: int
    value_kinds: dict[str, str] = field(default_factory=dict)  # field -> word|words|acronym|year


@dataclass(frozen=True)
class GeneratedSource:
    documents: tuple[str, ...]  # one per format
    truth: tuple[dict[str, str], ...]
    format_labels: tuple[int, ...]


_SYLLABLES = ("ba", "de", "ki", "lo", "mu", "na", "po", "ra", "si", "ta", "ve", "zo")


def _make_value(rng: random.Random, kind: str) -> str:
    if kind == "acronym":
        return "".join(rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ") for _ in range(rng.randint(3, 5)))
    if kind == "year":
        return str(rng.randint(1980, 2010))
    if kind == "words":
        return " ".join(_make_value(rng, "word") for _ in range(rng.randint(1, 2)))
    syllables = "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 3)))
    return syllables.capitalize()


def generate_source(spec: SyntheticSourceSpec) -> GeneratedSource:
    """Deterministic corpus with known ground truth; the same seed always
    yields byte-identical documents and the same truth set."""
    if not spec.formats or spec.rows_per_format < 1:
        raise ValueError("a source needs at least one format and one row")
    for template in spec.formats:
        placeholders = set(re.findall(r"\$(\w+)", template))
        missing = [name for name in spec.fields if name not in placeholders]
        if missing:
            raise ValueError(f"MISSING_PLACEHOLDER: template {template!r} lacks {missing}")

    rng = random.Random(spec.seed)
    documents = []
    truth: list[dict[str, str]] = []
    labels: list[int] = []
    seen: set[tuple] = set()
    for format_index, template in enumerate(spec.formats):
        rows = []
        for _ in range(spec.rows_per_format):
            for _ in range(1000):
                record = {
                    name: _make_value(rng, spec.value_kinds.get(name, "word"))
                    for name in spec.fields
                }
                key = canonical_record_key(record)
                if key not in seen:
                    seen.add(key)
                    break
            else:
                raise ValueError("could not generate enough distinct records")
            truth.append(record)
            labels.append(format_index)
            row = template
            for name in sorted(record, key=len, reverse=True):
                row = row.replace(f"${name}", record[name])
            rows.append(row)
        body = "\n".join(rows)
        documents.append(f"<html><body>\n{body}\n</body></html>\n")
    return GeneratedSource(tuple(documents), tuple(truth), tuple(labels))


def score(extracted: list[dict[str, str]], truth: list[dict[str, str]],
          considered: int) -> ScoreFragment:
    """Count unique retrieved records against the truth set.

    Record equality spans all fields with absent and empty treated alike;
    both inputs are deduplicated first, so the score is invariant under
    permutation and repetition.
    """
    if considered < 1:
        raise ValueError("considered must be at least 1")
    truth_keys = {canonical_record_key(r) for r in truth}
    unique = {canonical_record_key(r) for r in extracted}
    retrieved = len(unique)
    correct = len(unique & truth_keys)
    recall = correct / considered
    accuracy = correct / retrieved if retrieved else None
    return ScoreFragment(retrieved, correct, recall, accuracy)


def round_ratio(value: float) -> str:
    """Two decimals, half-up (so 13/15 prints 0.87, 11/12 prints 0.92)."""
    return str(Decimal(str(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def format_report(rows: list[EvaluationRow]) -> str:
    """Aligned text table in the fixed Source/Ex./Inst./Retr./Rec./Acc. order."""
    cells = [list(REPORT_COLUMNS)]
    for row in rows:
        cells.append([
            row.source,
            str(row.examples_given),
            str(row.instances),
            str(row.retrieved),
            round_ratio(row.recall),
            "n/a" if row.accuracy is None else round_ratio(row.accuracy),
        ])
    widths = [max(len(line[col]) for line in cells) for col in range(len(REPORT_COLUMNS))]
    out = io.StringIO()
    for line in cells:
        rendered = [
            line[0].ljust(widths[0]) if col == 0 else line[col].rjust(widths[col])
            for col in range(len(line))
        ]
        out.write("  ".join(rendered).rstrip() + "\n")
    return out.getvalue()


def report_jsonl(rows: list[EvaluationRow]) -> str:
    return "".join(row.to_json() + "\n" for row in rows)
