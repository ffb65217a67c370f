"""Command-line surface for task networks, wrappers, and policies.

Exit codes partition outcomes: 0 success, 1 diagnostics or runtime errors,
2 usage errors.  Every subcommand that reads fixtures is fully deterministic;
repeated offline invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import dataflow, evaluation, policy as policy_mod, wetdl
from .fixtures import FixtureStore
from .items import Item, Text
from .operators import CompileError, RuntimeConfig
from .policy import ExtractionDirective, PlanRejected, Policy, PolicyError, PropertyStore
from .wrappers import (
    ExampleInstance,
    LearnConfig,
    apply_wrapper,
    learn_wrapper,
    load_wrapper,
    save_wrapper,
)

logger = logging.getLogger(__name__)

FIXTURES_ENV = "WEXFAB_FIXTURES"

DOC_SUFFIXES = {".html", ".htm", ".xml", ".txt"}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (wetdl.WetdlError, CompileError, PolicyError, PlanRejected,
            dataflow.ReconfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wexfab", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a WetDL task description")
    p.add_argument("task", type=Path)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("run", help="compile and execute a task network")
    p.add_argument("task", type=Path)
    p.add_argument("--offline", type=Path, default=None,
                   help=f"fixture directory (default ${FIXTURES_ENV})")
    p.add_argument("--report", type=Path, default=None, help="write the run report JSON here")
    p.add_argument("--sink-out", type=Path, default=None, help="write collected sink lines here")
    p.add_argument("--input", action="append", default=[], help="initial text item(s) for entry points")
    p.add_argument("--trace", action="store_true", help="print one line per item delivery")
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("learn", help="learn a wrapper from example instances")
    p.add_argument("--corpus", type=Path, required=True, help="directory of source documents")
    p.add_argument("--examples", type=Path, required=True, help="JSON object per line, field -> value")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--left", type=int, default=LearnConfig.left)
    p.add_argument("--right", type=int, default=LearnConfig.right)
    p.add_argument("--window", type=int, default=LearnConfig.window)
    p.add_argument("--slot-max", type=int, default=LearnConfig.slot_max)
    p.add_argument("--gap-max", type=int, default=LearnConfig.gap_max)
    p.set_defaults(handler=_cmd_learn)

    p = sub.add_parser("extract", help="apply a learned wrapper to documents")
    p.add_argument("--wrapper", type=Path, required=True)
    p.add_argument("--docs", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="records as JSON lines (default stdout)")
    p.set_defaults(handler=_cmd_extract)

    p = sub.add_parser("eval", help="score a wrapper against ground truth")
    p.add_argument("--wrapper", type=Path, required=True)
    p.add_argument("--docs", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True, help="truth records, JSON object per line")
    p.add_argument("--source", default=None, help="row label (default: docs directory name)")
    p.add_argument("--examples-count", type=int, default=0, help="Ex. column value")
    p.add_argument("--out", type=Path, default=None, help="write the table here instead of stdout")
    p.add_argument("--jsonl", type=Path, default=None, help="machine-readable rows")
    p.add_argument("--plot", type=Path, default=None, help="render the rows as a figure")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("policy", help="evaluate or apply adaptation policies")
    policy_sub = p.add_subparsers(dest="policy_command", required=True)

    q = policy_sub.add_parser("eval", help="evaluate rules against properties")
    q.add_argument("--policy", type=Path, required=True)
    q.add_argument("--props", type=Path, required=True, help="one 'path = value' per line")
    q.add_argument("--registry", type=Path, default=None, help="validate the plan against this snapshot")
    q.set_defaults(handler=_cmd_policy_eval)

    q = policy_sub.add_parser("apply", help="plan and apply reconfiguration")
    q.add_argument("--policy", type=Path, required=True)
    q.add_argument("--registry", type=Path, required=True, help="registry snapshot, updated in place")
    q.add_argument("--task", type=Path, default=None, help="local WetDL file for directive analysis")
    q.add_argument("--props", type=Path, default=None, help="required for system policies")
    q.add_argument("--offline", type=Path, default=None, help="fixture directory for directive fetches")
    q.add_argument("--dry-run", action="store_true", help="print the plan without applying it")
    q.set_defaults(handler=_cmd_policy_apply)

    return parser


# ---------------------------------------------------------------------------
# task commands


def _cmd_validate(args) -> int:
    net = wetdl.parse_task(args.task.read_text(encoding="utf-8"))
    diagnostics = wetdl.validate_network(net)
    for diag in diagnostics:
        print(f"{diag.severity}: {diag.code}: {diag.message}")
    if diagnostics:
        return 1
    print(f"ok: {len(net.operators)} operators, entry points: {', '.join(net.entry_points) or '-'}")
    return 0


def _fixture_dir(explicit: Path | None) -> Path | None:
    if explicit is not None:
        return explicit
    env = os.environ.get(FIXTURES_ENV)
    return Path(env) if env else None


def _cmd_run(args) -> int:
    net = wetdl.parse_task(args.task.read_text(encoding="utf-8"))
    diagnostics = [d for d in wetdl.validate_network(net) if d.severity == "error"]
    if diagnostics:
        for diag in diagnostics:
            print(f"error: {diag.code}: {diag.message}", file=sys.stderr)
        return 1

    fixture_dir = _fixture_dir(args.offline)
    store = FixtureStore(fixture_dir) if fixture_dir else None
    runtime = RuntimeConfig(store=store, offline=True, base_dir=args.task.parent)
    plan = dataflow.compile_network(net, runtime=runtime)
    initial = [Item(Text(value)) for value in args.input] or None
    trace = (lambda line: print(line)) if args.trace else None
    report = dataflow.execute(plan, initial, trace=trace)

    rendered = report.to_json()
    if args.report:
        args.report.write_text(rendered, encoding="utf-8")
    else:
        print(rendered, end="")
    if args.sink_out:
        args.sink_out.write_text("".join(line + "\n" for line in report.sink_lines), encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# wrapper commands


def _read_documents(docs_dir: Path) -> list[str]:
    files = sorted(p for p in docs_dir.iterdir() if p.suffix.lower() in DOC_SUFFIXES)
    if not files:
        raise ValueError(f"no documents under {docs_dir}")
    return [p.read_text(encoding="utf-8") for p in files]


def _read_examples(path: Path) -> list[ExampleInstance]:
    """JSON object per line; rows are padded to the union schema in file
    order so every example carries the same field tuple."""
    rows = []
    schema: list[str] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        row = json.loads(line)
        rows.append(row)
        for key in row:
            if key not in schema:
                schema.append(key)
    return [
        ExampleInstance(tuple((name, str(row.get(name, ""))) for name in schema))
        for row in rows
    ]


def _cmd_learn(args) -> int:
    corpus = _read_documents(args.corpus)
    examples = _read_examples(args.examples)
    config = LearnConfig(left=args.left, right=args.right, window=args.window,
                         slot_max=args.slot_max, gap_max=args.gap_max)
    wrapper = learn_wrapper(corpus, examples, config)
    save_wrapper(wrapper, args.out)
    print(f"learned {len(wrapper.patterns)} pattern(s) over fields {', '.join(wrapper.field_names)}")
    return 0


def _cmd_extract(args) -> int:
    wrapper = load_wrapper(args.wrapper)
    lines = []
    for document in _read_documents(args.docs):
        for record in apply_wrapper(wrapper, document):
            lines.append(json.dumps(record, ensure_ascii=False))
    payload = "".join(line + "\n" for line in lines)
    if args.out:
        args.out.write_text(payload, encoding="utf-8")
    else:
        print(payload, end="")
    return 0


def _read_records_jsonl(path: Path) -> list[dict[str, str]]:
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append({str(k): str(v) for k, v in json.loads(line).items()})
    return records


def _cmd_eval(args) -> int:
    wrapper = load_wrapper(args.wrapper)
    extracted: list[dict[str, str]] = []
    for document in _read_documents(args.docs):
        extracted.extend(apply_wrapper(wrapper, document))
    truth = _read_records_jsonl(args.truth)
    fragment = evaluation.score(extracted, truth, considered=len(truth))
    row = evaluation.EvaluationRow(
        source=args.source or args.docs.name,
        examples_given=args.examples_count,
        instances=len(truth),
        retrieved=fragment.retrieved,
        recall=fragment.recall,
        accuracy=fragment.accuracy,
    )
    table = evaluation.format_report([row])
    if args.out:
        args.out.write_text(table, encoding="utf-8")
    else:
        print(table, end="")
    if args.jsonl:
        args.jsonl.write_text(evaluation.report_jsonl([row]), encoding="utf-8")
    if args.plot:
        from .figures import render_evaluation_figure

        render_evaluation_figure([row], args.plot)
    return 0


# ---------------------------------------------------------------------------
# policy commands


def _plan_lines(plan) -> list[str]:
    lines = []
    for action in plan.actions:
        rendered = f"{action.op} {action.service}"
        if action.params:
            flat = ((k, v.replace("\n", ",")) for k, v in action.params)
            rendered += " " + " ".join(f"{k}={v}" for k, v in flat)
        lines.append(rendered)
    return lines


def _load_registry(path: Path) -> dataflow.ServiceRegistry:
    if path.exists():
        return dataflow.ServiceRegistry.from_json(path.read_text(encoding="utf-8"))
    return dataflow.ServiceRegistry(session=path.stem)


def _cmd_policy_eval(args) -> int:
    parsed = policy_mod.parse_policy(args.policy.read_text(encoding="utf-8"))
    if isinstance(parsed, ExtractionDirective):
        print("error: directives carry no conditions; use `policy apply --dry-run`", file=sys.stderr)
        return 1
    props = PropertyStore.parse(args.props.read_text(encoding="utf-8"))
    outcome = policy_mod.evaluate(parsed, props)
    for rule, reason in outcome.unevaluable:
        print(f"unevaluable: {reason}", file=sys.stderr)
    snapshot = None
    history: set[str] = set()
    if args.registry:
        registry = _load_registry(args.registry)
        snapshot = {name: dict(e.params) for name, e in registry.attached.items()}
        history = registry.detached_history
    plan = policy_mod.plan_actions(outcome.triggered, snapshot, history, source=parsed.name)
    print(f"policy {parsed.name}: {len(outcome.triggered)} rule(s) triggered")
    for line in _plan_lines(plan):
        print(line)
    return 0


def _cmd_policy_apply(args) -> int:
    parsed = policy_mod.parse_policy(args.policy.read_text(encoding="utf-8"))
    registry = _load_registry(args.registry)
    snapshot = {name: dict(e.params) for name, e in registry.attached.items()}

    if isinstance(parsed, Policy):
        if args.props is None:
            print("error: system policies need --props", file=sys.stderr)
            return 2
        props = PropertyStore.parse(args.props.read_text(encoding="utf-8"))
        outcome = policy_mod.evaluate(parsed, props)
        for rule, reason in outcome.unevaluable:
            print(f"unevaluable: {reason}", file=sys.stderr)
        plan = policy_mod.plan_actions(outcome.triggered, snapshot,
                                       registry.detached_history, source=parsed.name)
    else:
        plan = policy_mod.analyze_extraction_directive(
            parsed, _directive_fetcher(args), snapshot, registry.detached_history
        )

    for line in _plan_lines(plan):
        print(line)
    if args.dry_run:
        print("dry run: registry unchanged")
        return 0
    registry.apply_plan(plan)
    args.registry.write_text(registry.to_json(), encoding="utf-8")
    print(f"applied {len(plan.actions)} action(s); attached: {', '.join(registry.names()) or '-'}")
    return 0


def _directive_fetcher(args):
    if args.task is not None:
        task_path = args.task
        return lambda url: task_path.read_bytes()
    fixture_dir = _fixture_dir(args.offline)
    if fixture_dir is None:
        raise PolicyError("FETCH_FAILED", f"no --task file and no fixture directory (${FIXTURES_ENV})")
    return policy_mod.fixture_fetcher(FixtureStore(fixture_dir))


if __name__ == "__main__":
    sys.exit(main())
