"""Compile task networks into executable plans and run them.

Execution is deterministic by construction: nodes run in topological order
with document-order tie breaking, each node drains its FIFO queue fully, and
successors receive outputs in emission order.  Reconfiguration happens only
between runs (a quiescence point) and is all-or-nothing: a rejected plan
leaves both the executable plan and the service registry untouched.
"""

from __future__ import annotations

import json
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import urlsplit

from .items import Document, HttpRequest, HttpResponse, Item, Record, Text, Url
from .operators import OPERATOR_FACTORY, CompileError, OperatorFn, RuntimeConfig, build_operator
from .policy import ReconfigurationPlan
from .wetdl import OperatorSpec, TaskNetwork, topological_order, validate_network

logger = logging.getLogger(__name__)


class ReconfigurationError(Exception):
    def __init__(self, failures: list[str]):
        super().__init__("; ".join(failures))
        self.failures = failures


@dataclass
class ServiceEntry:
    name: str
    kind: str
    params: list[tuple[str, str]] = field(default_factory=list)


class ServiceRegistry:
    """Session-scoped record of attached services.

    Names detached during the session stay known (in `detached_history`) so
    planners can tell "already detached" apart from "never heard of it".
    """

    def __init__(self, session: str = "", factory: dict | None = None):
        self.session = session
        self.factory = OPERATOR_FACTORY if factory is None else factory
        self.attached: dict[str, ServiceEntry] = {}
        self.detached_history: set[str] = set()

    def attach(self, entry: ServiceEntry) -> None:
        if entry.name in self.attached:
            raise ReconfigurationError([f"DUP_SERVICE: {entry.name!r} is already attached"])
        self.attached[entry.name] = entry

    def detach(self, name: str) -> ServiceEntry:
        if name not in self.attached:
            raise ReconfigurationError([f"UNKNOWN_SERVICE: {name!r} is not attached"])
        self.detached_history.add(name)
        return self.attached.pop(name)

    def names(self) -> list[str]:
        return list(self.attached)

    def apply_plan(self, rplan: ReconfigurationPlan) -> None:
        """Strict atomic application: every action must be valid against the
        current state or nothing changes."""
        staged, history, failures = self._staged(rplan)
        if failures:
            raise ReconfigurationError(failures)
        self.attached = staged
        self.detached_history |= history

    def _staged(self, rplan: ReconfigurationPlan):
        staged = {name: ServiceEntry(e.name, e.kind, list(e.params))
                  for name, e in self.attached.items()}
        history: set[str] = set()
        failures: list[str] = []
        for action in rplan.actions:
            if action.op == "detach":
                if action.service not in staged:
                    failures.append(f"UNKNOWN_SERVICE: cannot detach {action.service!r}")
                    continue
                del staged[action.service]
                history.add(action.service)
            elif action.op == "attach":
                if action.service in staged:
                    failures.append(f"DUP_SERVICE: cannot attach {action.service!r} twice")
                    continue
                staged[action.service] = ServiceEntry(
                    action.service, action.kind or action.service, list(action.params)
                )
            else:  # update
                if action.service not in staged:
                    failures.append(f"UNKNOWN_SERVICE: cannot update {action.service!r}")
                    continue
                _merge_params(staged[action.service].params, action.params)
        return staged, history, failures

    def to_json(self) -> str:
        doc = {
            "session": self.session,
            "services": [
                {"name": e.name, "kind": e.kind, "params": [list(p) for p in e.params]}
                for e in self.attached.values()
            ],
            "detached": sorted(self.detached_history),
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ServiceRegistry":
        doc = json.loads(text)
        registry = cls(session=doc.get("session", ""))
        for svc in doc.get("services", []):
            registry.attached[svc["name"]] = ServiceEntry(
                svc["name"], svc.get("kind", svc["name"]),
                [tuple(p) for p in svc.get("params", [])],
            )
        registry.detached_history = set(doc.get("detached", []))
        return registry


def _merge_params(params: list[tuple[str, str]], updates: tuple[tuple[str, str], ...]) -> None:
    for key, value in updates:
        for i, (existing, _) in enumerate(params):
            if existing == key:
                params[i] = (key, value)
                break
        else:
            params.append((key, value))


@dataclass
class PlanNode:
    spec: OperatorSpec
    fn: OperatorFn


@dataclass
class ExecutablePlan:
    source_name: str
    nodes: dict[str, PlanNode]
    edges: dict[str, tuple[str, ...]]
    order: list[str]
    pending: dict[str, deque[Item]]
    runtime: RuntimeConfig
    discarded: int = 0

    def entry_points(self) -> list[str]:
        targets = {t for succ in self.edges.values() for t in succ}
        return [name for name in self.nodes if name not in targets]


@dataclass
class OperatorCounters:
    items_in: int = 0
    items_out: int = 0
    errors: int = 0
    warnings: int = 0


@dataclass
class RunReport:
    source_name: str
    counters: dict[str, OperatorCounters]
    terminal: list[Item]
    sink_lines: list[str]
    discarded: int
    wall_time: float

    def to_json(self) -> str:
        """Stable rendering for golden tests; wall time is deliberately left
        out so identical runs compare byte-for-byte."""
        doc = {
            "source": self.source_name,
            "operators": {
                name: {
                    "items_in": c.items_in,
                    "items_out": c.items_out,
                    "errors": c.errors,
                    "warnings": c.warnings,
                }
                for name, c in self.counters.items()
            },
            "discarded": self.discarded,
            "terminal": [_item_json(item) for item in self.terminal],
            "sink_lines": list(self.sink_lines),
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _item_json(item: Item) -> dict:
    doc: dict = {"kind": item.kind, "from": item.provenance}
    payload = item.payload
    if isinstance(payload, (Text, Url)):
        doc["value"] = payload.value
    elif isinstance(payload, HttpRequest):
        doc["method"] = payload.method
        doc["url"] = payload.url
    elif isinstance(payload, HttpResponse):
        doc["status"] = payload.status
        doc["url"] = payload.url
    elif isinstance(payload, Document):
        doc["root"] = payload.root.tag
    elif isinstance(payload, Record):
        doc["fields"] = payload.as_dict()
    return doc


class _RunContext:
    def __init__(self, runtime: RuntimeConfig):
        self.runtime = runtime
        self.sink_lines: list[str] = []
        self.pending_warnings: list[str] = []
        self._handles: dict[str, object] = {}

    def warn(self, message: str) -> None:
        self.pending_warnings.append(message)

    def sink_write(self, target: str | None, line: str) -> None:
        if target is None:
            self.sink_lines.append(line)
            return
        path = self.runtime.resolve(target)
        handle = self._handles.get(str(path))
        if handle is None:
            handle = open(path, "w", encoding="utf-8")
            self._handles[str(path)] = handle
        handle.write(line + "\n")

    def close(self) -> None:
        for handle in self._handles.values():
            handle.close()


def compile_network(net: TaskNetwork, registry: ServiceRegistry | None = None,
                    runtime: RuntimeConfig | None = None) -> ExecutablePlan:
    """Turn a validated network into a plan: one bound operator per node,
    dummy data pre-queued as entry items (URLs when they parse as absolute)."""
    registry = registry if registry is not None else ServiceRegistry()
    runtime = runtime if runtime is not None else RuntimeConfig()
    problems = [d for d in validate_network(net) if d.severity == "error"]
    if problems:
        raise CompileError("INVALID_NETWORK", "; ".join(f"{d.code} {d.locus}" for d in problems))

    nodes: dict[str, PlanNode] = {}
    edges: dict[str, tuple[str, ...]] = {}
    pending: dict[str, deque[Item]] = {}
    for spec in net.operators:
        fn = build_operator(spec, runtime, registry.factory)
        nodes[spec.name] = PlanNode(spec, fn)
        edges[spec.name] = tuple(spec.forward_to)
        pending[spec.name] = deque()
    for spec in net.operators:
        if spec.kind == "dummy":
            for data in spec.inline_data:
                pending[spec.name].append(Item(_seed_payload(data), spec.name))

    return ExecutablePlan(
        source_name=net.source_name,
        nodes=nodes,
        edges=edges,
        order=topological_order(net),
        pending=pending,
        runtime=runtime,
    )


def _seed_payload(data: str):
    parts = urlsplit(data)
    if parts.scheme in ("http", "https") and parts.netloc:
        return Url(data)
    return Text(data)


def execute(plan: ExecutablePlan, initial: list[Item] | None = None,
            trace: Callable[[str], None] | None = None) -> RunReport:
    """Drain the plan's queues in deterministic order.

    Caller-supplied items go to every entry point; an entry point left with
    an empty queue receives a single empty-text trigger so parameter-driven
    operators (a query with fixed pairs, say) fire exactly once.
    """
    started = time.perf_counter()
    ctx = _RunContext(plan.runtime)
    counters = {name: OperatorCounters() for name in plan.nodes}
    terminal: list[Item] = []

    entry = plan.entry_points()
    for name in entry:
        for item in initial or ():
            plan.pending[name].append(item)
    for name in entry:
        if not plan.pending[name]:
            plan.pending[name].append(Item(Text("")))

    for name in plan.order:
        node = plan.nodes[name]
        queue = plan.pending[name]
        stats = counters[name]
        while queue:
            item = queue.popleft()
            stats.items_in += 1
            if trace:
                trace(f"{name} in {item.kind}")
            try:
                outputs = node.fn(item, ctx)
            except Exception:
                logger.exception("operator %r failed; treating as error output", name)
                outputs = []
            for message in ctx.pending_warnings:
                stats.warnings += 1
                logger.warning("%s: %s", name, message)
            ctx.pending_warnings.clear()
            if not outputs:
                stats.errors += 1
                if trace:
                    trace(f"{name} err {item.kind}")
                continue
            outputs = [Item(out.payload, name) for out in outputs]
            stats.items_out += len(outputs)
            if trace:
                for out in outputs:
                    trace(f"{name} out {out.kind}")
            successors = plan.edges[name]
            if successors:
                for succ in successors:
                    plan.pending[succ].extend(outputs)
            else:
                terminal.extend(outputs)

    ctx.close()
    return RunReport(
        source_name=plan.source_name,
        counters=counters,
        terminal=terminal,
        sink_lines=ctx.sink_lines,
        discarded=plan.discarded,
        wall_time=time.perf_counter() - started,
    )


def apply_reconfiguration(plan: ExecutablePlan, registry: ServiceRegistry,
                          rplan: ReconfigurationPlan) -> ExecutablePlan:
    """Apply attach/detach/update actions atomically at a quiescence point.

    Items still queued for a node that gets detached are discarded and
    counted.  Any invalid action, failed operator build, or invalid
    resulting network rejects the whole plan with all state retained.
    """
    staged_attached, history, failures = registry._staged(rplan)
    if failures:
        raise ReconfigurationError(failures)

    nodes = dict(plan.nodes)
    edges = {name: succ for name, succ in plan.edges.items()}
    pending = {name: deque(items) for name, items in plan.pending.items()}
    discarded = plan.discarded

    for action in rplan.actions:
        if action.op == "detach":
            if action.service in nodes:
                del nodes[action.service]
                edges.pop(action.service, None)
                edges = {
                    name: tuple(t for t in succ if t != action.service)
                    for name, succ in edges.items()
                }
                discarded += len(pending.pop(action.service, ()))
        elif action.op == "attach":
            spec = OperatorSpec(
                kind=action.kind or action.service,
                name=action.service,
                params=[tuple(p) for p in action.params],
            )
            try:
                fn = build_operator(spec, plan.runtime, registry.factory)
            except CompileError as exc:
                raise ReconfigurationError([f"ATTACH_FAILED: {exc}"]) from exc
            nodes[action.service] = PlanNode(spec, fn)
            edges[action.service] = ()
            pending[action.service] = deque()
        else:  # update
            if action.service in nodes:
                spec = nodes[action.service].spec
                merged = list(spec.params)
                _merge_params(merged, action.params)
                new_spec = OperatorSpec(spec.kind, spec.name, list(spec.forward_to),
                                        merged, list(spec.inline_data), spec.query_template)
                try:
                    fn = build_operator(new_spec, plan.runtime, registry.factory)
                except CompileError as exc:
                    raise ReconfigurationError([f"UPDATE_FAILED: {exc}"]) from exc
                nodes[action.service] = PlanNode(new_spec, fn)

    derived = TaskNetwork(
        source_name=plan.source_name,
        operators=[
            OperatorSpec(n.spec.kind, n.spec.name, list(edges[name]),
                         list(n.spec.params), list(n.spec.inline_data), n.spec.query_template)
            for name, n in nodes.items()
        ],
    )
    problems = [d for d in validate_network(derived) if d.severity == "error"]
    if problems:
        raise ReconfigurationError([f"{d.code}: {d.message}" for d in problems])

    registry.attached = staged_attached
    registry.detached_history |= history
    return ExecutablePlan(
        source_name=plan.source_name,
        nodes=nodes,
        edges=edges,
        order=topological_order(derived),
        pending=pending,
        runtime=plan.runtime,
        discarded=discarded,
    )
