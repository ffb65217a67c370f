"""WetDL task descriptions: parse, validate, and canonically serialize.

A WetDL document is a `source` element whose children declare operators by
kind (dummy, query, fetch, parse, filter, extract, transform, db).  Operators
name each other through comma-separated `forward-to` attributes, forming the
coordination graph that the dataflow engine later compiles.

Documents in the wild carry namespace prefixes without declaring them and
DOCTYPE lines pointing at unavailable DTDs, so the loader runs expat with
namespace processing disabled and resolves element kinds by local name.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

OPERATOR_KINDS = ("dummy", "query", "fetch", "parse", "filter", "extract", "transform", "db")

PARAM_SPELLINGS = ("param", "parameters")


class WetdlError(Exception):
    """Raised when a document cannot be turned into a TaskNetwork."""

    def __init__(self, code: str, message: str, locus: str = ""):
        super().__init__(f"{code}: {message}" + (f" ({locus})" if locus else ""))
        self.code = code
        self.locus = locus


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    locus: str = ""


@dataclass
class OperatorSpec:
    kind: str
    name: str
    forward_to: list[str] = field(default_factory=list)
    params: list[tuple[str, str]] = field(default_factory=list)
    inline_data: list[str] = field(default_factory=list)
    query_template: str | None = None

    def param(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.params:
            if k == key:
                return v
        return default

    def param_values(self, key: str) -> list[str]:
        return [v for k, v in self.params if k == key]


@dataclass
class TaskNetwork:
    source_name: str
    operators: list[OperatorSpec] = field(default_factory=list)

    def operator(self, name: str) -> OperatorSpec | None:
        for op in self.operators:
            if op.name == name:
                return op
        return None

    @property
    def entry_points(self) -> list[str]:
        """Operators never named by any forward-to edge, in document order."""
        referenced = {t for op in self.operators for t in op.forward_to}
        return [op.name for op in self.operators if op.name not in referenced]


# ---------------------------------------------------------------------------
# Loose XML loading (expat, no namespace processing, DOCTYPE ignored)


@dataclass
class _Node:
    tag: str
    attrs: list[tuple[str, str]]
    children: list["_Node"]
    text_parts: list[str]
    line: int

    @property
    def text(self) -> str:
        return "".join(self.text_parts)

    def attr(self, name: str) -> str | None:
        for k, v in self.attrs:
            if k == name:
                return v
        return None


def _local(name: str) -> str:
    return name.rsplit(":", 1)[-1]


def _load_loose(xml_text: str) -> _Node:
    parser = expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True
    root: list[_Node] = []
    stack: list[_Node] = []

    def start(tag, attr_list):
        attrs = []
        for i in range(0, len(attr_list), 2):
            key = attr_list[i]
            if key == "xmlns" or key.startswith("xmlns:"):
                continue
            attrs.append((_local(key), attr_list[i + 1]))
        node = _Node(_local(tag), attrs, [], [], parser.CurrentLineNumber)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(_tag):
        stack.pop()

    def chars(data):
        if stack:
            stack[-1].text_parts.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(xml_text, True)
    except expat.ExpatError as exc:
        raise WetdlError(
            "XML_SYNTAX",
            expat.errors.messages[exc.code],
            f"line {exc.lineno}, column {exc.offset}",
        ) from exc
    if not root:
        raise WetdlError("XML_SYNTAX", "document has no root element")
    return root[0]


# ---------------------------------------------------------------------------
# Parsing


def parse_task(xml_text: str) -> TaskNetwork:
    """Build a TaskNetwork from WetDL text, preserving document order.

    Structural problems that prevent building an operator at all (unknown
    element kinds, a missing name attribute) raise WetdlError; referential
    problems (duplicate names, dangling or cyclic edges) are left to
    validate_network so partially broken documents can still be inspected.
    """
    root = _load_loose(xml_text)
    if root.tag != "source":
        raise WetdlError("BAD_ROOT", f"expected a source root element, got {root.tag!r}", f"line {root.line}")
    source_name = root.attr("name")
    if source_name is None:
        raise WetdlError("MISSING_NAME", "source element has no name attribute", f"line {root.line}")

    operators = []
    for child in root.children:
        operators.append(_parse_operator(child))
    return TaskNetwork(source_name=source_name, operators=operators)


def _parse_operator(node: _Node) -> OperatorSpec:
    if node.tag not in OPERATOR_KINDS:
        raise WetdlError("UNKNOWN_OPERATOR", f"unknown operator element {node.tag!r}", f"line {node.line}")
    name = node.attr("name")
    if not name:
        raise WetdlError("MISSING_NAME", f"{node.tag} element has no name attribute", f"line {node.line}")

    forward_to = []
    raw_forward = node.attr("forward-to") or ""
    for part in raw_forward.split(","):
        part = part.strip()
        if part:
            forward_to.append(part)

    spec = OperatorSpec(kind=node.tag, name=name, forward_to=forward_to)
    for child in node.children:
        if child.tag in PARAM_SPELLINGS:
            spec.params.extend(_parse_param(child))
        elif child.tag == "data":
            spec.inline_data.append(child.text)
        elif child.tag == "query":
            spec.query_template = child.text
        elif child.tag == "map":
            keys = [k.text for k in child.children if k.tag == "key"]
            spec.params.append(("map", "\n".join(keys)))
        else:
            raise WetdlError(
                "UNKNOWN_ELEMENT",
                f"unknown child element {child.tag!r} in operator {name!r}",
                f"line {child.line}",
            )
    return spec


def _parse_param(node: _Node) -> list[tuple[str, str]]:
    """Normalize one param/parameters element into (key, value) pairs.

    The primary pair comes from the name/value attributes; a value may also
    be given as element text.  Any further attributes each contribute their
    own pair, in attribute order.
    """
    name = node.attr("name")
    if name is None:
        raise WetdlError("MISSING_NAME", "param element has no name attribute", f"line {node.line}")
    value = node.attr("value")
    if value is None:
        value = node.text.strip()
    pairs = [(name, value)]
    for key, attr_value in node.attrs:
        if key in ("name", "value"):
            continue
        pairs.append((key, attr_value))
    return pairs


# ---------------------------------------------------------------------------
# Validation


def validate_network(net: TaskNetwork) -> list[Diagnostic]:
    """All invariant violations; an empty list means the network is sound."""
    diagnostics: list[Diagnostic] = []
    seen: set[str] = set()
    for op in net.operators:
        if op.name in seen:
            diagnostics.append(Diagnostic("error", "DUP_NAME", f"operator name {op.name!r} is not unique", op.name))
        seen.add(op.name)
        if op.inline_data and op.kind != "dummy":
            diagnostics.append(
                Diagnostic("error", "DATA_OUTSIDE_DUMMY", f"{op.kind} operator {op.name!r} carries data elements", op.name)
            )
        if op.query_template is not None and op.kind != "db":
            diagnostics.append(
                Diagnostic("error", "QUERY_OUTSIDE_DB", f"{op.kind} operator {op.name!r} carries a query element", op.name)
            )

    names = {op.name for op in net.operators}
    for op in net.operators:
        for target in op.forward_to:
            if target not in names:
                diagnostics.append(
                    Diagnostic(
                        "error",
                        "UNRESOLVED_EDGE",
                        f"operator {op.name!r} forwards to unknown operator {target!r}",
                        op.name,
                    )
                )

    cycle = _find_cycle(net)
    if cycle:
        diagnostics.append(
            Diagnostic("error", "CYCLE", "coordination graph contains a cycle: " + " -> ".join(cycle), cycle[0])
        )
    return diagnostics


def _find_cycle(net: TaskNetwork) -> list[str] | None:
    names = {op.name for op in net.operators}
    edges = {op.name: [t for t in op.forward_to if t in names] for op in net.operators}
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(edges, WHITE)

    def visit(node: str, path: list[str]) -> list[str] | None:
        color[node] = GREY
        path.append(node)
        for succ in edges[node]:
            if color[succ] == GREY:
                return path[path.index(succ):] + [succ]
            if color[succ] == WHITE:
                found = visit(succ, path)
                if found:
                    return found
        path.pop()
        color[node] = BLACK
        return None

    for name in edges:
        if color[name] == WHITE:
            found = visit(name, [])
            if found:
                return found
    return None


def topological_order(net: TaskNetwork) -> list[str]:
    """Kahn order with document-order tie breaking; requires an acyclic net."""
    indegree = {op.name: 0 for op in net.operators}
    for op in net.operators:
        for target in op.forward_to:
            if target in indegree:
                indegree[target] += 1
    order = []
    ready = [op.name for op in net.operators if indegree[op.name] == 0]
    position = {op.name: i for i, op in enumerate(net.operators)}
    while ready:
        ready.sort(key=position.__getitem__)
        node = ready.pop(0)
        order.append(node)
        for target in _spec_by_name(net, node).forward_to:
            if target in indegree:
                indegree[target] -= 1
                if indegree[target] == 0:
                    ready.append(target)
    if len(order) != len(net.operators):
        raise WetdlError("CYCLE", "cannot order a cyclic network")
    return order


def _spec_by_name(net: TaskNetwork, name: str) -> OperatorSpec:
    op = net.operator(name)
    assert op is not None
    return op


# ---------------------------------------------------------------------------
# Serialization


def serialize_task(net: TaskNetwork) -> str:
    """Canonical WetDL text: stable attribute order, 2-space indent, `param`
    spelling.  parse_task(serialize_task(net)) is structurally equal to net,
    and serializing a freshly reparsed document is byte-identical.
    """
    problems = [d for d in validate_network(net) if d.severity == "error"]
    if problems:
        summary = "; ".join(f"{d.code} {d.locus}" for d in problems)
        raise WetdlError("INVALID_NETWORK", f"refusing to serialize an invalid network: {summary}")

    out = io.StringIO()
    out.write(f"<source name={quoteattr(net.source_name)}>\n")
    for op in net.operators:
        out.write(_serialize_operator(op))
    out.write("</source>\n")
    return out.getvalue()


def _serialize_operator(op: OperatorSpec) -> str:
    attrs = f" name={quoteattr(op.name)}"
    if op.forward_to:
        attrs += f" forward-to={quoteattr(','.join(op.forward_to))}"
    has_children = bool(op.params or op.inline_data or op.query_template is not None)
    if not has_children:
        return f"  <{op.kind}{attrs}/>\n"
    lines = [f"  <{op.kind}{attrs}>"]
    for key, value in op.params:
        if key == "map":
            lines.append("    <map>")
            for entry in value.split("\n"):
                lines.append(f"      <key>{escape(entry)}</key>")
            lines.append("    </map>")
        else:
            lines.append(f"    <param name={quoteattr(key)} value={quoteattr(value)}/>")
    for data in op.inline_data:
        lines.append(f"    <data>{escape(data)}</data>")
    if op.query_template is not None:
        lines.append(f"    <query>{escape(op.query_template)}</query>")
    lines.append(f"  </{op.kind}>")
    return "\n".join(lines) + "\n"
