"""Deterministic DOT text for shapes, diagrams and verdict witnesses.

Emission is a pure function of the input structures: nodes and edges come
out in listing order, so byte-identical inputs give byte-identical DOT.
Witness paths are drawn over the element graph, the first path dashed and
the second dotted.
"""

from __future__ import annotations

from .paths import MappingPath
from .shapes import Diagram, ShapeGraph
from .verify import CyclicPath, DistinctPaths, OrbitWitness


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def shape_dot(shape: ShapeGraph, name: str = "shape") -> str:
    lines = [f"digraph {_quote(name)} {{"]
    for v in shape.vertices:
        lines.append(f"  {_quote(v)};")
    for e in shape.edges:
        lines.append(f"  {_quote(e.src)} -> {_quote(e.dst)} [label={_quote(e.name)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def diagram_dot(d: Diagram, name: str = "diagram") -> str:
    """Element-level rendering: one cluster per component, solid arrows for
    the diagram's morphisms, gray arrows for in-component op tables."""
    lines = [f"digraph {_quote(name)} {{"]
    for idx, v in enumerate(d.shape.vertices):
        p = d.components[v]
        lines.append(f"  subgraph cluster_{idx} {{")
        lines.append(f"    label={_quote(v)};")
        empty = True
        for s in d.base.sorts:
            for x in p.elements(s):
                node = _quote(f"{v}:{x}")
                lines.append(f"    {node} [label={_quote(f'{x}:{s}')}];")
                empty = False
        if empty:
            lines.append(f"    {_quote(f'{v}:(empty)')} [shape=none, label=\"\"];")
        for o in d.base.ops:
            for x in p.elements(o.src):
                left = _quote(f"{v}:{x}")
                right = _quote(f"{v}:{p.apply(o.name, x)}")
                lines.append(
                    f"    {left} -> {right} [label={_quote(o.name)}, color=gray];"
                )
        lines.append("  }")
    for e in d.shape.edges:
        f = d.arrows[e.name]
        for s in d.base.sorts:
            for x in d.components[e.src].elements(s):
                left = _quote(f"{e.src}:{x}")
                right = _quote(f"{e.dst}:{f.maps[s][x]}")
                lines.append(f"  {left} -> {right} [label={_quote(e.name)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _path_lines(p: MappingPath, style: str) -> list[str]:
    lines = []
    for seg in p.segments:
        left = _quote(f"{seg.left[0]}:{seg.left[1]}")
        right = _quote(f"{seg.right[0]}:{seg.right[1]}")
        label = f"{seg.edge}~op" if seg.op else seg.edge
        lines.append(
            f"  {left} -> {right} [label={_quote(label)}, style={style}];"
        )
    return lines


def witness_dot(witness: object, name: str = "witness") -> str:
    """Render a verdict witness; two-path witnesses get dashed vs dotted."""
    if isinstance(witness, DistinctPaths):
        paths = [(witness.path1, "dashed"), (witness.path2, "dotted")]
    elif isinstance(witness, CyclicPath):
        paths = [(witness.path, "dashed")]
    elif isinstance(witness, OrbitWitness):
        paths = [(witness.path, "dashed")]
    else:
        raise TypeError(f"no DOT rendering for witness type {type(witness).__name__}")
    lines = [f"digraph {_quote(name)} {{"]
    seen: list[str] = []
    for p, _ in paths:
        for comp, elt in p.refs():
            node = f"{comp}:{elt}"
            if node not in seen:
                seen.append(node)
    for node in seen:
        lines.append(f"  {_quote(node)};")
    for p, style in paths:
        lines.extend(_path_lines(p, style))
    lines.append("}")
    return "\n".join(lines) + "\n"
