"""Command-line surface.

Exit codes: 0 = VK / success, 1 = NotVK (or a failed round-trip /
selftest), 2 = invalid input, 3 = precondition unmet for the chosen
method.  The environment variable ``VK_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .colimits import (
    Cocone,
    PreconditionError,
    colimit_specialized,
    colimit_universal,
    simplify_diagram,
)
from .dot import diagram_dot, shape_dot, witness_dot
from .instances import (
    CartesianFamily,
    pullback_along_cocone,
    pushforward,
    roundtrip_counit,
    roundtrip_unit,
    sample_cartesian_families,
)
from .paths import MappingPath
from .randgen import random_typed_instance
from .shapes import (
    branching_indices,
    classify_vertices,
    enumerate_branches,
    is_acyclic,
    min_indices,
    undirected_cycles,
)
from .verify import (
    NOT_VK,
    UNDETERMINED,
    VK,
    CyclicPath,
    DistinctPaths,
    ImageOverlap,
    OrbitWitness,
    VkVerdict,
    agreement_suite,
    check_affected_minimal,
    check_bruteforce,
    check_combined,
    check_cyclic_branching,
    decision_route,
)
from .workspace import (
    Workspace,
    WorkspaceError,
    cocone_payload,
    dump_json,
    load_workspace,
    resolve_typed_instance,
    save_cocone,
)

EXIT_OK = 0
EXIT_NOT_VK = 1
EXIT_INVALID = 2
EXIT_PRECONDITION = 3


def _resolve_seed(args: argparse.Namespace) -> int:
    env = os.environ.get("VK_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise WorkspaceError(f"VK_SEED must be an integer, got {env!r}") from exc
    return getattr(args, "seed", 0)


# ------------------------------------------------------------ formatting


def _ref_text(ref: tuple[str, str]) -> str:
    return f"{ref[0]}:{ref[1]}"


def _path_text(p: MappingPath) -> str:
    if not p.segments:
        return f"[] at {_ref_text(p.start)}"
    parts = [
        f"({_ref_text(s.left)}, {s.edge}{'~op' if s.op else ''}, {_ref_text(s.right)})"
        for s in p.segments
    ]
    return "[" + ", ".join(parts) + "]"


def _path_json(p: MappingPath) -> dict:
    return {
        "sort": p.sort,
        "anchor": list(p.start) if not p.segments else None,
        "segments": [
            {
                "left": list(s.left),
                "edge": s.edge,
                "op": s.op,
                "right": list(s.right),
            }
            for s in p.segments
        ],
    }


def witness_json(w: object) -> dict:
    if isinstance(w, DistinctPaths):
        return {
            "kind": "distinct-paths",
            "sort": w.sort,
            "from": list(w.z),
            "to": list(w.z2),
            "path1": _path_json(w.path1),
            "path2": _path_json(w.path2),
        }
    if isinstance(w, CyclicPath):
        return {
            "kind": "cyclic-path",
            "sort": w.sort,
            "at": list(w.z),
            "path": _path_json(w.path),
        }
    if isinstance(w, ImageOverlap):
        return {
            "kind": "image-overlap",
            "vertex": w.vertex,
            "sort": w.sort,
            "element": w.element,
            "branch1": list(w.branch1.edges),
            "branch2": list(w.branch2.edges),
            "target": w.target,
            "value": w.value,
        }
    if isinstance(w, OrbitWitness):
        return {
            "kind": "orbit",
            "cycle": list(w.cycle),
            "vertex": w.vertex,
            "sort": w.sort,
            "element": w.element,
            "period": w.period,
            "path": _path_json(w.path),
        }
    return {"kind": type(w).__name__}


def _witness_text(w: object) -> list[str]:
    if isinstance(w, DistinctPaths):
        return [
            f"two proper paths at sort {w.sort} from {_ref_text(w.z)} to {_ref_text(w.z2)}:",
            f"  path 1: {_path_text(w.path1)}",
            f"  path 2: {_path_text(w.path2)}",
        ]
    if isinstance(w, CyclicPath):
        return [
            f"nonempty proper cycle at sort {w.sort}, element {_ref_text(w.z)}:",
            f"  {_path_text(w.path)}",
        ]
    if isinstance(w, ImageOverlap):
        return [
            f"branches {list(w.branch1.edges)} and {list(w.branch2.edges)} from "
            f"vertex {w.vertex} both send {w.element} (sort {w.sort}) to "
            f"{w.value} at {w.target}",
        ]
    if isinstance(w, OrbitWitness):
        return [
            f"periodic orbit of period {w.period} on directed cycle "
            f"{list(w.cycle)} at {w.vertex}:{w.element} (sort {w.sort}):",
            f"  {_path_text(w.path)}",
        ]
    return [repr(w)]


def verdict_json(v: VkVerdict) -> dict:
    payload: dict = {"result": v.result, "method": v.method}
    if v.reason:
        payload["reason"] = v.reason
    if v.witness is not None:
        payload["witness"] = witness_json(v.witness)
    if v.canonical is not None:
        payload["canonical"] = witness_json(v.canonical)
    if v.route is not None:
        payload["route"] = {
            "steps": [{"question": s.question, "answer": s.answer} for s in v.route.steps],
            "terminal": v.route.terminal,
        }
    if v.details:
        payload["details"] = {
            k: val for k, val in v.details.items() if _json_safe(val)
        }
    return payload


def _json_safe(value: object) -> bool:
    try:
        json.dumps(value)
        return True
    except TypeError:
        return False


def _print_verdict(v: VkVerdict, show_witness: bool, as_json: bool) -> None:
    if as_json:
        print(dump_json(verdict_json(v)), end="")
        return
    line = f"verdict: {v.result}  (method: {v.method})"
    if v.reason:
        line += f"  reason: {v.reason}"
    print(line)
    if v.route is not None:
        for step in v.route.steps:
            print(f"  {step.question} {step.answer}")
        print(f"  -> {v.route.terminal}")
    if show_witness and v.witness is not None:
        for text in _witness_text(v.witness):
            print(text)
    if show_witness and v.canonical is not None and v.canonical is not v.witness:
        for text in _witness_text(v.canonical):
            print("canonical: " + text)


def _verdict_exit(v: VkVerdict) -> int:
    if v.result == VK:
        return EXIT_OK
    if v.result == NOT_VK:
        return EXIT_NOT_VK
    return EXIT_PRECONDITION


# ------------------------------------------------------------ commands


def _cmd_validate(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    d = ws.diagram()
    sizes = {v: d.components[v].size() for v in ws.shape.vertices}
    print(
        f"ok: {len(ws.shape.vertices)} components, {len(ws.shape.edges)} edges, "
        f"element counts {sizes}"
    )
    for fam in ws.families:
        print(f"  family {fam.name!r} over {len(fam.transformation.legs)} vertices")
    for inst in ws.typed_instances:
        print(f"  typed instance {inst.name!r} with {inst.instance.size()} elements")
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    d = ws.diagram()
    if args.simplify:
        d, notes = simplify_diagram(d)
        for note in notes:
            print(f"simplify: {note}", file=sys.stderr)
    if args.method == "route":
        verdict = decision_route(d)
    elif args.method == "bruteforce":
        verdict = check_bruteforce(d, args.condition)
    elif args.method == "combined":
        _, verdict = check_combined(d)
    elif args.method == "cyclic":
        verdict = check_cyclic_branching(d)
    else:
        verdict = check_affected_minimal(d)
    _print_verdict(verdict, args.witness, args.json)
    return _verdict_exit(verdict)


def _build_cocone(d, method: str) -> Cocone:
    if method == "specialized":
        return colimit_specialized(d)
    return colimit_universal(d)


def _cmd_colimit(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    c = _build_cocone(ws.diagram(), args.method)
    if args.out:
        save_cocone(c, args.out)
        print(f"wrote cocone to {args.out}")
    else:
        print(dump_json(cocone_payload(c)), end="")
    return EXIT_OK


def _cmd_classify(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    d = ws.diagram()
    shape = d.shape
    classes = classify_vertices(shape)
    info = {
        "vertices": classes,
        "minimal": min_indices(shape),
        "branching": branching_indices(shape),
        "acyclic": is_acyclic(shape),
        "undirected_cycles": [
            [(name, sign) for name, sign in cyc] for cyc in undirected_cycles(shape)
        ],
    }
    if is_acyclic(shape):
        info["branches"] = [list(b.edges) for b in enumerate_branches(shape)]
    verdict = decision_route(d)
    if args.json:
        payload = dict(info)
        payload["route"] = verdict_json(verdict)["route"]
        payload["result"] = verdict.result
        print(dump_json(payload), end="")
        return EXIT_OK
    for v in shape.vertices:
        print(f"vertex {v}: {classes[v]}")
    print(f"minimal: {info['minimal']}  branching: {info['branching']}")
    if "branches" in info:
        print(f"branches: {info['branches']}")
    print(f"undirected cycles: {info['undirected_cycles']}")
    assert verdict.route is not None
    for step in verdict.route.steps:
        print(f"  {step.question} {step.answer}")
    print(f"  -> {verdict.route.terminal}  ({verdict.result})")
    return EXIT_OK


def _find_instance(ws: Workspace, name: str | None):
    if not ws.typed_instances:
        raise WorkspaceError("workspace has no typed instances")
    if name is None:
        if len(ws.typed_instances) > 1:
            raise WorkspaceError("several typed instances; pick one with --instance")
        return ws.typed_instances[0]
    for inst in ws.typed_instances:
        if inst.name == name:
            return inst
    raise WorkspaceError(f"no typed instance named {name!r}")


def _find_family(ws: Workspace, name: str | None):
    if not ws.families:
        raise WorkspaceError("workspace has no families")
    if name is None:
        if len(ws.families) > 1:
            raise WorkspaceError("several families; pick one with --family")
        return ws.families[0]
    for fam in ws.families:
        if fam.name == name:
            return fam
    raise WorkspaceError(f"no family named {name!r}")


def _cmd_pullback(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    d = ws.diagram()
    payload = _find_instance(ws, args.instance)
    c = colimit_universal(d)
    t = resolve_typed_instance(payload, c)
    family = pullback_along_cocone(c, t)
    fibers = {
        v: {
            s: len(family.domain.components[v].elements(s))
            for s in d.base.sorts
        }
        for v in d.shape.vertices
    }
    if args.json:
        print(dump_json({"instance": payload.name, "fiber_sizes": fibers}), end="")
    else:
        print(f"pullback of {payload.name!r} along the colimit cocone:")
        for v in d.shape.vertices:
            print(f"  vertex {v}: {fibers[v]}")
    return EXIT_OK


def _cmd_pushforward(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    fam = _find_family(ws, args.family)
    t = fam.transformation
    c = colimit_universal(t.codomain)
    pushed = pushforward(c, CartesianFamily(t))
    payload = {
        "family": fam.name,
        "carriers": {
            s: list(pushed.instance.carriers[s]) for s in pushed.instance.base.sorts
        },
        "typing": {
            s: dict(pushed.typing.maps[s]) for s in pushed.instance.base.sorts
        },
    }
    text = dump_json(payload)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote pushforward to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_roundtrip(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    d = ws.diagram()
    seed = _resolve_seed(args)
    failures = 0
    runs = 0
    for fam in ws.families:
        t = fam.transformation
        c = colimit_universal(t.codomain)
        report = roundtrip_unit(c, CartesianFamily(t))
        runs += 1
        failures += 0 if report.passed else 1
        print(f"unit  {fam.name}: {'pass' if report.passed else 'FAIL'}")
        for note in report.notes:
            print(f"      {note}")
    c = colimit_universal(d)
    for inst in ws.typed_instances:
        t = resolve_typed_instance(inst, c)
        report = roundtrip_counit(c, t)
        runs += 1
        failures += 0 if report.passed else 1
        print(f"counit {inst.name}: {'pass' if report.passed else 'FAIL'}")
        for note in report.notes:
            print(f"      {note}")
    if args.budget > 0:
        rng = random.Random(seed)
        for i, family in enumerate(
            sample_cartesian_families(d, c, budget=args.budget, seed=seed)
        ):
            report = roundtrip_unit(c, family)
            runs += 1
            failures += 0 if report.passed else 1
            print(f"unit  sample{i}: {'pass' if report.passed else 'FAIL'}")
        for i in range(args.budget):
            t = random_typed_instance(c.apex, rng)
            report = roundtrip_counit(c, t)
            runs += 1
            failures += 0 if report.passed else 1
            print(f"counit sample{i}: {'pass' if report.passed else 'FAIL'}")
    print(f"{runs - failures}/{runs} round-trips passed")
    return EXIT_OK if failures == 0 else EXIT_NOT_VK


def _cmd_export_dot(args: argparse.Namespace) -> int:
    ws = load_workspace(args.workspace)
    d = ws.diagram()
    if args.witness:
        verdict = check_bruteforce(d, "different")
        if verdict.witness is None:
            print("diagram is path-unique; no witness to draw", file=sys.stderr)
            text = 'digraph "witness" {\n}\n'
        else:
            text = witness_dot(verdict.witness)
    elif args.diagram:
        text = diagram_dot(d)
    else:
        text = shape_dot(ws.shape)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote DOT to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_selftest(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args)
    report = agreement_suite(count=args.budget, seed=seed)
    print(
        f"checked {report.checked} diagrams (skipped {report.skipped}): "
        f"{report.tally.get(VK, 0)} VK, {report.tally.get(NOT_VK, 0)} NotVK"
    )
    for line in report.failures:
        print(f"DISAGREEMENT: {line}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_NOT_VK


# ------------------------------------------------------------ wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kampen",
        description="Colimits of finite presheaf diagrams and the Van Kampen property.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and validate a workspace")
    p.add_argument("workspace")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("check", help="decide the Van Kampen property")
    p.add_argument("workspace")
    p.add_argument(
        "--method",
        choices=["route", "bruteforce", "combined", "cyclic", "minimal"],
        default="route",
    )
    p.add_argument(
        "--condition",
        choices=["different", "disjoint", "disjoint-inner-cycle-free"],
        default="different",
        help="pair condition for --method bruteforce",
    )
    p.add_argument("--witness", action="store_true", help="print the witness")
    p.add_argument("--json", action="store_true")
    p.add_argument("--simplify", action="store_true", help="jump-over pre-pass")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("colimit", help="compute the colimit cocone")
    p.add_argument("workspace")
    p.add_argument("--method", choices=["universal", "specialized"], default="universal")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_colimit)

    p = sub.add_parser("classify", help="shape analytics and the decision route")
    p.add_argument("workspace")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("pullback", help="pull a typed instance back along the cocone")
    p.add_argument("workspace")
    p.add_argument("--instance", help="name of the typed instance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_pullback)

    p = sub.add_parser("pushforward", help="push a cartesian family to the colimit")
    p.add_argument("workspace")
    p.add_argument("--family", help="name of the family")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_pushforward)

    p = sub.add_parser("roundtrip", help="unit/counit round-trips, stored and sampled")
    p.add_argument("workspace")
    p.add_argument("--budget", type=int, default=0, help="extra sampled round-trips")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_roundtrip)

    p = sub.add_parser("export-dot", help="DOT text for the shape, diagram or witness")
    p.add_argument("workspace")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--diagram", action="store_true", help="element-level rendering")
    group.add_argument("--witness", action="store_true", help="render the two-path witness")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_export_dot)

    p = sub.add_parser("selftest", help="randomized checker-agreement suite")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"precondition unmet: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (WorkspaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
