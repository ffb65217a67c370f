"""Adaptation policies: parse rule XML, evaluate conditions, plan changes.

Two document shapes exist.  A system policy holds rules of the form "when
some runtime property compares against a literal, ensure these attach /
detach / update actions".  A personalized-extraction directive instead names
a WetDL file; the services that file requires are diffed against the ones
currently attached to produce the reconfiguration plan.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping
from xml.etree import ElementTree

from .wetdl import TaskNetwork, parse_task

logger = logging.getLogger(__name__)

CONDITION_OPS = {"less-than": "less_than", "greater-than": "greater_than", "equals": "equals"}

SUPPORTED_DIRECTIVE_LANGUAGE = "WetDL"


class PolicyError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class PlanRejected(Exception):
    def __init__(self, failures: list[str]):
        super().__init__("; ".join(failures))
        self.failures = failures


@dataclass(frozen=True)
class Condition:
    op: str  # less_than | greater_than | equals
    left: str  # property path
    right: float | str


@dataclass(frozen=True)
class Action:
    op: str  # attach | detach | update
    service: str
    params: tuple[tuple[str, str], ...] = ()
    kind: str = ""  # operator kind for attaches; defaults to the service name

    @staticmethod
    def detach(service: str) -> "Action":
        return Action("detach", service)

    @staticmethod
    def attach(service: str, params=(), kind: str = "") -> "Action":
        return Action("attach", service, tuple(tuple(p) for p in params), kind)

    @staticmethod
    def update(service: str, params=()) -> "Action":
        return Action("update", service, tuple(tuple(p) for p in params))


@dataclass(frozen=True)
class Rule:
    when: Condition
    ensure: tuple[Action, ...]


@dataclass(frozen=True)
class Policy:
    name: str
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class ExtractionDirective:
    service_name: str
    summary: str = ""
    location: str = ""
    url: str = ""
    wetdl_url: str = ""
    language: str = SUPPORTED_DIRECTIVE_LANGUAGE


@dataclass(frozen=True)
class ReconfigurationPlan:
    actions: tuple[Action, ...]
    source: str = ""

    def __bool__(self) -> bool:
        return bool(self.actions)


# ---------------------------------------------------------------------------
# Property store


class PropertyStore:
    """Flat map of slash-separated property paths to numeric or string values."""

    def __init__(self, values: Mapping[str, float | str] | None = None):
        self.values: dict[str, float | str] = dict(values or {})

    @classmethod
    def parse(cls, text: str) -> "PropertyStore":
        """One `path = value` per line; numeric values become numbers."""
        values: dict[str, float | str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if "=" not in line:
                raise PolicyError("BAD_PROPERTY", f"line {lineno}: expected 'path = value'")
            path, _, value = line.partition("=")
            values[path.strip()] = _coerce(value.strip())
        return cls(values)

    def get(self, path: str):
        return self.values.get(path)


def _coerce(text: str) -> float | str:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


# ---------------------------------------------------------------------------
# Parsing


def parse_policy(xml_text: str) -> Policy | ExtractionDirective:
    """Parse either policy document shape, mapping XML structure faithfully."""
    try:
        root = ElementTree.fromstring(xml_text)
    except ElementTree.ParseError as exc:
        raise PolicyError("XML_SYNTAX", str(exc)) from exc
    if root.tag == "system-policy":
        return _parse_system_policy(root)
    if root.tag == "PersonalizedExtraction-policy":
        return _parse_directive(root)
    raise PolicyError("BAD_ROOT", f"unknown policy root element {root.tag!r}")


def _require(elem: ElementTree.Element, attr: str) -> str:
    value = elem.get(attr)
    if value is None:
        raise PolicyError("MISSING_ATTRIBUTE", f"<{elem.tag}> element lacks the {attr!r} attribute")
    return value


def _parse_system_policy(root: ElementTree.Element) -> Policy:
    name = _require(root, "name")
    rules = []
    for rule_elem in root.findall("rule"):
        when = rule_elem.find("when")
        if when is None or len(when) != 1:
            raise PolicyError("BAD_RULE", "each rule needs a when element with one condition")
        condition = _parse_condition(when[0])
        ensure = rule_elem.find("ensure")
        actions = tuple(_parse_action(child) for child in (ensure if ensure is not None else ()))
        if not actions:
            raise PolicyError("EMPTY_ENSURE", "each rule needs at least one ensure action")
        rules.append(Rule(condition, actions))
    if not rules:
        raise PolicyError("NO_RULES", f"policy {name!r} declares no rules")
    return Policy(name, tuple(rules))


def _parse_condition(elem: ElementTree.Element) -> Condition:
    if elem.tag not in CONDITION_OPS:
        raise PolicyError("BAD_CONDITION", f"unknown condition element {elem.tag!r}")
    prop = elem.find("property-value")
    if prop is None:
        raise PolicyError("BAD_CONDITION", f"<{elem.tag}> needs a property-value child")
    left = _require(prop, "name")
    number = elem.find("number")
    string = elem.find("string")
    if number is not None:
        right: float | str = _coerce(_require(number, "value"))
        if isinstance(right, str):
            raise PolicyError("BAD_CONDITION", f"number literal {number.get('value')!r} is not numeric")
    elif string is not None:
        right = _require(string, "value")
    else:
        raise PolicyError("BAD_CONDITION", f"<{elem.tag}> needs a number or string literal")
    return Condition(CONDITION_OPS[elem.tag], left, right)


def _parse_action(elem: ElementTree.Element) -> Action:
    params = []
    for child in elem.findall("parameter"):
        key = _require(child, "name")
        value = child.get("property-value", child.get("value", ""))
        params.append((key, value))
    if elem.tag == "detached":
        return Action.detach(_require(elem, "service"))
    if elem.tag == "attached":
        return Action.attach(_require(elem, "service"), params)
    if elem.tag == "updated":
        return Action.update(_require(elem, "service"), params)
    raise PolicyError("BAD_ACTION", f"unknown ensure element {elem.tag!r}")


def _parse_directive(root: ElementTree.Element) -> ExtractionDirective:
    updated = root.find("updated")
    if updated is None:
        raise PolicyError("BAD_DIRECTIVE", "directive needs an updated child element")
    language = (updated.get("Slang") or SUPPORTED_DIRECTIVE_LANGUAGE).strip()
    if language != SUPPORTED_DIRECTIVE_LANGUAGE:
        raise PolicyError("BAD_DIRECTIVE", f"unsupported task language {language!r}")
    wetdl_url = (updated.get("Swdl") or "").strip()
    plain_url = (updated.get("URL") or "").strip()
    if not wetdl_url:
        # Swdl wins when both are present; URL alone is accepted as fallback
        wetdl_url = plain_url
    if not wetdl_url:
        raise PolicyError("MISSING_ATTRIBUTE", "directive lacks an Swdl attribute")
    return ExtractionDirective(
        service_name=(_require(updated, "Sname")).strip(),
        summary=(updated.get("Sum") or "").strip(),
        location=(updated.get("Loc") or "").strip(),
        url=plain_url,
        wetdl_url=wetdl_url,
        language=language,
    )


# ---------------------------------------------------------------------------
# Evaluation


@dataclass
class EvaluationOutcome:
    triggered: list[Rule] = field(default_factory=list)
    unevaluable: list[tuple[Rule, str]] = field(default_factory=list)


def evaluate(policy: Policy, props: PropertyStore) -> EvaluationOutcome:
    """Strict comparison semantics: less-than is exclusive, and a missing
    property or mixed-type comparison marks the rule unevaluable rather than
    silently false."""
    outcome = EvaluationOutcome()
    for rule in policy.rules:
        condition = rule.when
        value = props.get(condition.left)
        if value is None:
            outcome.unevaluable.append((rule, f"property {condition.left!r} is not set"))
            continue
        left_num = isinstance(value, (int, float))
        right_num = isinstance(condition.right, (int, float))
        if left_num != right_num:
            outcome.unevaluable.append(
                (rule, f"type mismatch comparing {value!r} with {condition.right!r}")
            )
            continue
        if condition.op == "equals":
            hit = value == condition.right
        elif not left_num:
            outcome.unevaluable.append(
                (rule, f"ordered comparison needs numeric values, got {value!r}")
            )
            continue
        elif condition.op == "less_than":
            hit = value < condition.right
        else:
            hit = value > condition.right
        if hit:
            outcome.triggered.append(rule)
    return outcome


# ---------------------------------------------------------------------------
# Planning


def plan_actions(triggered: list[Rule],
                 attached: Mapping[str, Mapping[str, str]] | None,
                 detached_history: frozenset[str] | set[str] = frozenset(),
                 source: str = "") -> ReconfigurationPlan:
    """Concatenate triggered actions in rule order, dropping duplicates and
    already-satisfied actions, and reject the whole plan if any action is
    unsatisfiable against the registry snapshot.

    With no snapshot (attached=None) the actions pass through unvalidated;
    the caller sees what a live registry would be asked to do.
    """
    actions: list[Action] = []
    seen: set[Action] = set()
    for rule in triggered:
        for action in rule.ensure:
            if action not in seen:
                seen.add(action)
                actions.append(action)
    if attached is None:
        return ReconfigurationPlan(tuple(actions), source)

    failures: list[str] = []
    kept: list[Action] = []
    state = {name: dict(params) for name, params in attached.items()}
    history = set(detached_history)
    for action in actions:
        if action.op == "detach":
            if action.service in state:
                del state[action.service]
                history.add(action.service)
                kept.append(action)
            elif action.service in history:
                logger.info("skipping detach of already-detached %r", action.service)
            else:
                failures.append(f"UNKNOWN_SERVICE: cannot detach {action.service!r}")
        elif action.op == "attach":
            if action.service not in state:
                state[action.service] = dict(action.params)
                kept.append(action)
            elif dict(action.params) == state[action.service]:
                logger.info("skipping attach of already-attached %r", action.service)
            else:
                failures.append(f"DUP_SERVICE: {action.service!r} is attached with other params")
        else:  # update
            if action.service not in state:
                failures.append(f"UNKNOWN_SERVICE: cannot update {action.service!r}")
            else:
                current = state[action.service]
                if all(current.get(k) == v for k, v in action.params):
                    logger.info("skipping no-op update of %r", action.service)
                else:
                    current.update(dict(action.params))
                    kept.append(action)
    if failures:
        raise PlanRejected(failures)
    return ReconfigurationPlan(tuple(kept), source)


# ---------------------------------------------------------------------------
# Directive analysis


def required_services(net: TaskNetwork) -> list[tuple[str, list[tuple[str, str]]]]:
    """Service kinds a network needs, in first-use order, with the params of
    the first operator of each kind.  Dummy sources are seeds, not services."""
    out: list[tuple[str, list[tuple[str, str]]]] = []
    seen: set[str] = set()
    for op in net.operators:
        if op.kind == "dummy" or op.kind in seen:
            continue
        seen.add(op.kind)
        params = list(op.params)
        if op.query_template is not None:
            params.append(("query", op.query_template))
        out.append((op.kind, params))
    return out


def analyze_extraction_directive(directive: ExtractionDirective,
                                 fetcher: Callable[[str], bytes],
                                 attached: Mapping[str, Mapping[str, str]],
                                 detached_history: frozenset[str] | set[str] = frozenset(),
                                 ) -> ReconfigurationPlan:
    """Fetch the directive's WetDL file and diff its required services against
    the attached set: detach what is no longer needed (registry order), then
    attach what is missing (network order)."""
    try:
        body = fetcher(directive.wetdl_url)
    except Exception as exc:
        raise PolicyError("FETCH_FAILED", f"cannot fetch {directive.wetdl_url!r}: {exc}") from exc
    net = parse_task(body.decode("utf-8"))

    required = required_services(net)
    required_names = {name for name, _ in required}
    # the diff is valid against the snapshot by construction: only attached
    # services are detached and only missing ones attached
    actions = [Action.detach(name) for name in attached if name not in required_names]
    actions += [
        Action.attach(name, params, kind=name)
        for name, params in required
        if name not in attached
    ]
    return ReconfigurationPlan(tuple(actions), source=f"PersonalizedExtraction:{directive.service_name}")


def fixture_fetcher(store) -> Callable[[str], bytes]:
    def fetcher(url: str) -> bytes:
        entry = store.lookup("GET", url)
        if entry.status >= 400:
            raise PolicyError("FETCH_FAILED", f"recorded status {entry.status} for {url!r}")
        return entry.body
    return fetcher
