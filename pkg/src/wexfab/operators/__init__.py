"""Operator implementations and the factory that binds them to task specs.

Every operator is a pure mapping from one input item to a finite list of
output items; the empty list doubles as the error signal so no exception
ever has to cross into the engine.  Configuration comes from the operator's
WetDL params at compile time, per-run effects (fixture lookups, sink writes,
warnings) go through the run context the engine passes in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from ..fixtures import FixtureStore
from ..items import Item
from ..wetdl import OperatorSpec
from .extracting import HeaderExtractor, RegexExtractor, extract
from .filtering import Predicate, filter_items
from .http import build_http_query, fetch, query_service
from .parsing import parse_document
from .pathexpr import PathExpression
from .transforming import sink_records, transform

__all__ = [
    "CompileError",
    "HeaderExtractor",
    "OPERATOR_FACTORY",
    "PathExpression",
    "Predicate",
    "RegexExtractor",
    "RuntimeConfig",
    "build_http_query",
    "build_operator",
    "extract",
    "fetch",
    "filter_items",
    "parse_document",
    "query_service",
    "sink_records",
    "transform",
]


class CompileError(Exception):
    def __init__(self, code: str, message: str, operator: str = ""):
        super().__init__(f"{code}: {message}" + (f" (operator {operator!r})" if operator else ""))
        self.code = code
        self.operator = operator


@dataclass
class RuntimeConfig:
    """Compile-time environment shared by all operators of a plan."""

    store: FixtureStore | None = None
    offline: bool = True
    base_dir: Path = field(default_factory=Path.cwd)

    def resolve(self, path: str) -> Path:
        candidate = Path(path)
        return candidate if candidate.is_absolute() else self.base_dir / candidate


class RunContext(Protocol):
    """Per-run effects an operator may need; provided by the engine."""

    runtime: RuntimeConfig

    def warn(self, message: str) -> None: ...

    def sink_write(self, target: str | None, line: str) -> None: ...


OperatorFn = Callable[[Item, "RunContext"], list[Item]]

RESERVED_QUERY_PARAMS = {"url", "method"}


def _build_dummy(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    return lambda item, ctx: [item]


def _build_query(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    url = spec.param("url")
    if url is None:
        raise CompileError("MISSING_PARAM", "query operator needs a url param", spec.name)
    method = spec.param("method", "GET")
    pairs = [(k, v) for k, v in spec.params if k not in RESERVED_QUERY_PARAMS]

    def op(item: Item, ctx) -> list[Item]:
        return query_service(item, url, pairs, method,
                             ctx.runtime.store, offline=ctx.runtime.offline)

    return op


def _build_fetch(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    method = spec.param("method")

    def op(item: Item, ctx) -> list[Item]:
        return fetch(item, ctx.runtime.store, offline=ctx.runtime.offline,
                     method_override=method)

    return op


def _build_parse(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    fmt = spec.param("format", "html")
    if fmt not in ("xml", "html"):
        raise CompileError("BAD_PARAM", f"unsupported parse format {fmt!r}", spec.name)
    return lambda item, ctx: parse_document(item, fmt)


def _build_filter(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    try:
        predicate = Predicate.parse(spec.param_values("where"))
    except ValueError as exc:
        raise CompileError("BAD_PARAM", str(exc), spec.name) from exc
    return lambda item, ctx: filter_items(item, predicate)


def _build_extract(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    path = spec.param("path")
    regexp = spec.param("regexp")
    headers = spec.param("headers")
    wrapper_path = spec.param("wrapper")
    chosen = [p for p in (path, regexp, headers, wrapper_path) if p is not None]
    if len(chosen) != 1:
        raise CompileError(
            "MISSING_PARAM",
            "extract operator needs exactly one of path/regexp/headers/wrapper",
            spec.name,
        )
    if path is not None:
        try:
            extractor = PathExpression.parse(path)
        except ValueError as exc:
            raise CompileError("BAD_PARAM", str(exc), spec.name) from exc
    elif regexp is not None:
        key_map = spec.param("map")
        if key_map is None:
            raise CompileError("MISSING_PARAM", "regexp extraction needs a map of key names", spec.name)
        try:
            extractor = RegexExtractor(regexp, tuple(key_map.split("\n")))
        except (ValueError, re.error) as exc:
            raise CompileError("BAD_PARAM", str(exc), spec.name) from exc
    elif headers is not None:
        extractor = HeaderExtractor(tuple(h.strip() for h in headers.split(",") if h.strip()))
    else:
        from ..wrappers import load_wrapper

        try:
            extractor = load_wrapper(runtime.resolve(wrapper_path))
        except (OSError, ValueError) as exc:
            raise CompileError("BAD_PARAM", f"cannot load wrapper: {exc}", spec.name) from exc
    return lambda item, ctx: extract(item, extractor)


def _build_transform(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    template = spec.param("template")
    if template is None:
        raise CompileError("MISSING_PARAM", "transform operator needs a template param", spec.name)
    return lambda item, ctx: transform(item, template)


def _build_db(spec: OperatorSpec, runtime: RuntimeConfig) -> OperatorFn:
    statement = spec.query_template
    mode = spec.param("mode", "statement" if statement else "jsonl")
    if mode not in ("statement", "jsonl"):
        raise CompileError("BAD_PARAM", f"unsupported sink mode {mode!r}", spec.name)
    if mode == "statement" and not statement:
        raise CompileError("MISSING_PARAM", "statement sink needs a query template", spec.name)
    target = spec.param("out")

    def op(item: Item, ctx) -> list[Item]:
        return sink_records(
            item,
            mode=mode,
            statement=statement,
            write=lambda line: ctx.sink_write(target, line),
            warn=ctx.warn,
        )

    return op


OPERATOR_FACTORY: dict[str, Callable[[OperatorSpec, RuntimeConfig], OperatorFn]] = {
    "dummy": _build_dummy,
    "query": _build_query,
    "fetch": _build_fetch,
    "parse": _build_parse,
    "filter": _build_filter,
    "extract": _build_extract,
    "transform": _build_transform,
    "db": _build_db,
}


def build_operator(spec: OperatorSpec, runtime: RuntimeConfig,
                   factory: dict | None = None) -> OperatorFn:
    table = OPERATOR_FACTORY if factory is None else factory
    try:
        builder = table[spec.kind]
    except KeyError:
        raise CompileError("UNKNOWN_KIND", f"no operator factory for kind {spec.kind!r}", spec.name) from None
    return builder(spec, runtime)
