"""JSON workspaces: a diagram plus optional typed payloads, on disk.

Format sketch (all identifiers are explicit strings)::

    {
      "format": "presheaf-workspace/1",
      "notes": "free text",
      "base": {"sorts": [...], "ops": [{"name","src","dst"}, ...]},
      "shape": {"vertices": [...], "edges": [{"name","src","dst"}, ...]},
      "components": {vertex: {"carriers": {sort: [elt, ...]},
                              "ops": {op: {elt: elt}}}},
      "arrows": {edge: {sort: {elt: elt}}},
      "families": [{"name", "components"?, "arrows"?, "into"?, "legs"}],
      "typed_instances": [{"name", "carriers", "ops",
                           "typing": {sort: {elt: [vertex, elt]}}}]
    }

A family is a vertexwise transformation into the workspace's own diagram
(or into the diagram of a sibling file named by "into"); its domain
components/arrows default to the workspace's own.  A typed instance's
typing refers to diagram elements by (vertex, element) pairs and is
resolved against a colimit cocone by :func:`resolve_typed_instance`.

Element and name strings may not contain ":", "|" or ";" — those are
reserved for tagged sums, pullback pairs and spliced edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .colimits import Cocone
from .instances import TypedInstance
from .presheaves import (
    BaseSignature,
    OpSymbol,
    Presheaf,
    PresheafMorphism,
    validate_morphism,
    validate_presheaf,
)
from .shapes import (
    Diagram,
    DiagramTransformation,
    ShapeEdge,
    ShapeGraph,
    validate_diagram,
    validate_transformation,
)

FORMAT_MARKER = "presheaf-workspace/1"
COCONE_MARKER = "presheaf-cocone/1"
RESERVED_CHARS = (":", "|", ";")


class WorkspaceError(ValueError):
    """Malformed or inconsistent workspace content."""


def _fail(msg: str) -> None:
    raise WorkspaceError(msg)


def _ident(value: object, where: str) -> str:
    if not isinstance(value, str) or not value:
        _fail(f"{where}: identifier must be a non-empty string, got {value!r}")
    for ch in RESERVED_CHARS:
        if ch in value:
            _fail(f"{where}: identifier {value!r} contains reserved character {ch!r}")
    return value


@dataclass(frozen=True)
class FamilyPayload:
    name: str
    transformation: DiagramTransformation


@dataclass(frozen=True)
class InstancePayload:
    """An instance presheaf whose typing points at diagram elements."""

    name: str
    instance: Presheaf
    refs: dict[str, dict[str, tuple[str, str]]]


@dataclass(frozen=True)
class Workspace:
    base: BaseSignature
    shape: ShapeGraph
    components: dict[str, Presheaf]
    arrows: dict[str, PresheafMorphism]
    families: tuple[FamilyPayload, ...] = ()
    typed_instances: tuple[InstancePayload, ...] = ()
    notes: str = ""

    def diagram(self) -> Diagram:
        return Diagram(
            shape=self.shape,
            base=self.base,
            components=self.components,
            arrows=self.arrows,
        )


def _parse_base(payload: object) -> BaseSignature:
    if not isinstance(payload, dict):
        _fail("base: expected an object")
    sorts = tuple(_ident(s, "base.sorts") for s in payload.get("sorts", []))
    ops = []
    for entry in payload.get("ops", []):
        if not isinstance(entry, dict):
            _fail("base.ops: expected objects with name/src/dst")
        ops.append(
            OpSymbol(
                name=_ident(entry.get("name"), "base.ops"),
                src=_ident(entry.get("src"), "base.ops"),
                dst=_ident(entry.get("dst"), "base.ops"),
            )
        )
    base = BaseSignature(sorts=sorts, ops=tuple(ops))
    for line in base.validate():
        _fail(f"base: {line}")
    return base


def _parse_shape(payload: object) -> ShapeGraph:
    if not isinstance(payload, dict):
        _fail("shape: expected an object")
    vertices = tuple(_ident(v, "shape.vertices") for v in payload.get("vertices", []))
    edges = []
    for entry in payload.get("edges", []):
        if not isinstance(entry, dict):
            _fail("shape.edges: expected objects with name/src/dst")
        edges.append(
            ShapeEdge(
                name=_ident(entry.get("name"), "shape.edges"),
                src=_ident(entry.get("src"), "shape.edges"),
                dst=_ident(entry.get("dst"), "shape.edges"),
            )
        )
    shape = ShapeGraph(vertices=vertices, edges=tuple(edges))
    for line in shape.validate():
        _fail(f"shape: {line}")
    return shape


def _parse_presheaf(base: BaseSignature, payload: object, where: str) -> Presheaf:
    if not isinstance(payload, dict):
        _fail(f"{where}: expected an object with carriers/ops")
    raw_carriers = payload.get("carriers", {})
    if not isinstance(raw_carriers, dict):
        _fail(f"{where}.carriers: expected an object")
    carriers = {}
    for s in base.sorts:
        elems = raw_carriers.get(s, [])
        carriers[s] = tuple(_ident(x, f"{where}.carriers.{s}") for x in elems)
    for s in raw_carriers:
        if s not in base.sorts:
            _fail(f"{where}.carriers: unknown sort {s!r}")
    raw_tables = payload.get("ops", {})
    if not isinstance(raw_tables, dict):
        _fail(f"{where}.ops: expected an object")
    tables = {}
    for o in base.ops:
        entry = raw_tables.get(o.name, {})
        if not isinstance(entry, dict):
            _fail(f"{where}.ops.{o.name}: expected an object")
        tables[o.name] = {str(k): str(v) for k, v in entry.items()}
    known_ops = {o.name for o in base.ops}
    for name in raw_tables:
        if name not in known_ops:
            _fail(f"{where}.ops: unknown op {name!r}")
    p = Presheaf(base=base, carriers=carriers, tables=tables)
    for line in validate_presheaf(base, p):
        _fail(f"{where}: {line}")
    return p


def _parse_maps(base: BaseSignature, payload: object, where: str) -> dict[str, dict[str, str]]:
    if not isinstance(payload, dict):
        _fail(f"{where}: expected an object of sortwise tables")
    maps: dict[str, dict[str, str]] = {}
    for s in base.sorts:
        entry = payload.get(s, {})
        if not isinstance(entry, dict):
            _fail(f"{where}.{s}: expected an object")
        maps[s] = {str(k): str(v) for k, v in entry.items()}
    for s in payload:
        if s not in base.sorts:
            _fail(f"{where}: unknown sort {s!r}")
    return maps


def _parse_morphism(
    dom: Presheaf, cod: Presheaf, payload: object, where: str
) -> PresheafMorphism:
    f = PresheafMorphism(
        domain=dom, codomain=cod, maps=_parse_maps(dom.base, payload, where)
    )
    for line in validate_morphism(f):
        _fail(f"{where}: {line}")
    return f


def _parse_family(
    ws_base: BaseSignature,
    ws_diagram: Diagram,
    entry: object,
    path: Path,
    index: int,
) -> FamilyPayload:
    where = f"families[{index}]"
    if not isinstance(entry, dict):
        _fail(f"{where}: expected an object")
    name = _ident(entry.get("name", f"family{index}"), f"{where}.name")
    if "into" in entry:
        target_path = path.parent / str(entry["into"])
        codomain = load_workspace(target_path).diagram()
    else:
        codomain = ws_diagram
    shape = codomain.shape
    if "components" in entry:
        comp_payload = entry["components"]
        if not isinstance(comp_payload, dict):
            _fail(f"{where}.components: expected an object")
        components = {
            v: _parse_presheaf(ws_base, comp_payload.get(v), f"{where}.components.{v}")
            for v in shape.vertices
        }
        arrows_payload = entry.get("arrows", {})
        arrows = {}
        for e in shape.edges:
            arrows[e.name] = _parse_morphism(
                components[e.src],
                components[e.dst],
                arrows_payload.get(e.name, {}),
                f"{where}.arrows.{e.name}",
            )
        domain = Diagram(
            shape=shape, base=ws_base, components=components, arrows=arrows
        )
    else:
        domain = ws_diagram
    legs_payload = entry.get("legs", {})
    if not isinstance(legs_payload, dict):
        _fail(f"{where}.legs: expected an object")
    legs = {}
    for v in shape.vertices:
        legs[v] = _parse_morphism(
            domain.components[v],
            codomain.components[v],
            legs_payload.get(v, {}),
            f"{where}.legs.{v}",
        )
    t = DiagramTransformation(domain=domain, codomain=codomain, legs=legs)
    for line in validate_transformation(t):
        _fail(f"{where}: {line}")
    return FamilyPayload(name=name, transformation=t)


def _parse_instance(
    base: BaseSignature, diagram: Diagram, entry: object, index: int
) -> InstancePayload:
    where = f"typed_instances[{index}]"
    if not isinstance(entry, dict):
        _fail(f"{where}: expected an object")
    name = _ident(entry.get("name", f"instance{index}"), f"{where}.name")
    instance = _parse_presheaf(base, entry, where)
    typing = entry.get("typing", {})
    if not isinstance(typing, dict):
        _fail(f"{where}.typing: expected an object")
    refs: dict[str, dict[str, tuple[str, str]]] = {}
    for s in base.sorts:
        entry_s = typing.get(s, {})
        refs[s] = {}
        for x in instance.elements(s):
            ref = entry_s.get(x)
            if (
                not isinstance(ref, list)
                or len(ref) != 2
                or not all(isinstance(part, str) for part in ref)
            ):
                _fail(f"{where}.typing.{s}.{x}: expected a [vertex, element] pair")
            v, y = ref
            if v not in diagram.shape.vertices:
                _fail(f"{where}.typing.{s}.{x}: unknown vertex {v!r}")
            if y not in diagram.components[v].elements(s):
                _fail(f"{where}.typing.{s}.{x}: no element {y!r} at {v!r}:{s}")
            refs[s][x] = (v, y)
    return InstancePayload(name=name, instance=instance, refs=refs)


def load_workspace(path: str | Path) -> Workspace:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise WorkspaceError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkspaceError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        _fail(f"{path}: top level must be an object")
    if payload.get("format") != FORMAT_MARKER:
        _fail(f"{path}: missing or unsupported format marker (want {FORMAT_MARKER!r})")
    base = _parse_base(payload.get("base"))
    shape = _parse_shape(payload.get("shape"))
    comp_payload = payload.get("components", {})
    if not isinstance(comp_payload, dict):
        _fail("components: expected an object")
    components = {}
    for v in shape.vertices:
        if v not in comp_payload:
            _fail(f"components: missing component at vertex {v!r}")
        components[v] = _parse_presheaf(base, comp_payload[v], f"components.{v}")
    for v in comp_payload:
        if v not in shape.vertices:
            _fail(f"components: unknown vertex {v!r}")
    arrows_payload = payload.get("arrows", {})
    if not isinstance(arrows_payload, dict):
        _fail("arrows: expected an object")
    arrows = {}
    for e in shape.edges:
        if e.name not in arrows_payload:
            _fail(f"arrows: missing arrow for edge {e.name!r}")
        arrows[e.name] = _parse_morphism(
            components[e.src], components[e.dst], arrows_payload[e.name], f"arrows.{e.name}"
        )
    for name in arrows_payload:
        if all(e.name != name for e in shape.edges):
            _fail(f"arrows: unknown edge {name!r}")
    ws = Workspace(
        base=base,
        shape=shape,
        components=components,
        arrows=arrows,
        notes=str(payload.get("notes", "")),
    )
    diagram = ws.diagram()
    for line in validate_diagram(diagram):
        _fail(f"{path}: {line}")
    families = tuple(
        _parse_family(base, diagram, entry, path, i)
        for i, entry in enumerate(payload.get("families", []))
    )
    instances = tuple(
        _parse_instance(base, diagram, entry, i)
        for i, entry in enumerate(payload.get("typed_instances", []))
    )
    return Workspace(
        base=base,
        shape=shape,
        components=components,
        arrows=arrows,
        families=families,
        typed_instances=instances,
        notes=ws.notes,
    )


def resolve_typed_instance(
    payload: InstancePayload, cocone: Cocone
) -> TypedInstance:
    """Turn (vertex, element) typing refs into a typing over the apex."""
    maps = {}
    for s in payload.instance.base.sorts:
        maps[s] = {
            x: cocone.legs[v].maps[s][y] for x, (v, y) in payload.refs[s].items()
        }
    typing = PresheafMorphism(
        domain=payload.instance, codomain=cocone.apex, maps=maps
    )
    report = validate_morphism(typing)
    if report:
        raise WorkspaceError(
            f"typed instance {payload.name!r} is not natural over the apex: {report[0]}"
        )
    return TypedInstance(instance=payload.instance, typing=typing)


# ---------------------------------------------------------------- saving


def _presheaf_payload(p: Presheaf) -> dict:
    return {
        "carriers": {s: list(p.carriers[s]) for s in p.base.sorts},
        "ops": {o.name: dict(p.tables[o.name]) for o in p.base.ops},
    }


def _maps_payload(f: PresheafMorphism) -> dict:
    return {s: dict(f.maps[s]) for s in f.domain.base.sorts}


def workspace_payload(ws: Workspace) -> dict:
    payload: dict = {"format": FORMAT_MARKER}
    if ws.notes:
        payload["notes"] = ws.notes
    payload["base"] = {
        "sorts": list(ws.base.sorts),
        "ops": [{"name": o.name, "src": o.src, "dst": o.dst} for o in ws.base.ops],
    }
    payload["shape"] = {
        "vertices": list(ws.shape.vertices),
        "edges": [{"name": e.name, "src": e.src, "dst": e.dst} for e in ws.shape.edges],
    }
    payload["components"] = {
        v: _presheaf_payload(ws.components[v]) for v in ws.shape.vertices
    }
    payload["arrows"] = {e.name: _maps_payload(ws.arrows[e.name]) for e in ws.shape.edges}
    if ws.families:
        payload["families"] = [
            {
                "name": fam.name,
                "components": {
                    v: _presheaf_payload(fam.transformation.domain.components[v])
                    for v in fam.transformation.domain.shape.vertices
                },
                "arrows": {
                    e.name: _maps_payload(fam.transformation.domain.arrows[e.name])
                    for e in fam.transformation.domain.shape.edges
                },
                "legs": {
                    v: _maps_payload(fam.transformation.legs[v])
                    for v in fam.transformation.domain.shape.vertices
                },
            }
            for fam in ws.families
        ]
    if ws.typed_instances:
        payload["typed_instances"] = [
            {
                "name": inst.name,
                **_presheaf_payload(inst.instance),
                "typing": {
                    s: {x: list(ref) for x, ref in inst.refs[s].items()}
                    for s in inst.instance.base.sorts
                },
            }
            for inst in ws.typed_instances
        ]
    return payload


def dump_json(payload: object) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def save_workspace(ws: Workspace, path: str | Path) -> None:
    Path(path).write_text(dump_json(workspace_payload(ws)), encoding="utf-8")


def cocone_payload(c: Cocone) -> dict:
    return {
        "format": COCONE_MARKER,
        "base": {
            "sorts": list(c.apex.base.sorts),
            "ops": [
                {"name": o.name, "src": o.src, "dst": o.dst} for o in c.apex.base.ops
            ],
        },
        "apex": _presheaf_payload(c.apex),
        "legs": {v: _maps_payload(c.legs[v]) for v in c.diagram.shape.vertices},
    }


def save_cocone(c: Cocone, path: str | Path) -> None:
    Path(path).write_text(dump_json(cocone_payload(c)), encoding="utf-8")
