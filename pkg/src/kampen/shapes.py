"""Shape multigraphs, diagrams of presheaves, and shape analytics.

A diagram assigns a presheaf to every vertex of a finite shape multigraph
and a presheaf morphism to every edge.  The analytics here classify shape
vertices (minimal, branching, irrelevant, jump-over), enumerate branches
into minimal vertices, and list directed and undirected elementary cycles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .presheaves import (
    BaseSignature,
    Presheaf,
    PresheafMorphism,
    compose,
    identity,
    is_iso,
    pullback,
    pullback_mediator,
    validate_morphism,
    validate_presheaf,
)

CYCLE_CAP = 10_000


class CycleOverflowError(RuntimeError):
    """Raised when elementary cycle enumeration exceeds the hard cap."""


@dataclass(frozen=True)
class ShapeEdge:
    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class ShapeGraph:
    vertices: tuple[str, ...]
    edges: tuple[ShapeEdge, ...]

    def edge(self, name: str) -> ShapeEdge:
        for e in self.edges:
            if e.name == name:
                return e
        raise KeyError(f"unknown shape edge {name!r}")

    def out_edges(self, v: str) -> list[ShapeEdge]:
        return [e for e in self.edges if e.src == v]

    def in_edges(self, v: str) -> list[ShapeEdge]:
        return [e for e in self.edges if e.dst == v]

    def validate(self) -> list[str]:
        report = []
        if len(set(self.vertices)) != len(self.vertices):
            report.append("duplicate shape vertices")
        names = [e.name for e in self.edges]
        if len(set(names)) != len(names):
            report.append("duplicate shape edge names")
        for e in self.edges:
            if e.src not in self.vertices:
                report.append(f"edge {e.name!r}: unknown source vertex {e.src!r}")
            if e.dst not in self.vertices:
                report.append(f"edge {e.name!r}: unknown target vertex {e.dst!r}")
        return report


@dataclass
class Diagram:
    shape: ShapeGraph
    base: BaseSignature
    components: dict[str, Presheaf]
    arrows: dict[str, PresheafMorphism]

    def component(self, v: str) -> Presheaf:
        return self.components[v]

    def arrow(self, edge_name: str) -> PresheafMorphism:
        return self.arrows[edge_name]


def validate_diagram(d: Diagram) -> list[str]:
    report = list(d.shape.validate())
    report += d.base.validate()
    for v in d.shape.vertices:
        p = d.components.get(v)
        if p is None:
            report.append(f"missing component at vertex {v!r}")
            continue
        for line in validate_presheaf(d.base, p):
            report.append(f"component {v!r}: {line}")
    for v in d.components:
        if v not in d.shape.vertices:
            report.append(f"component for unknown vertex {v!r}")
    for e in d.shape.edges:
        f = d.arrows.get(e.name)
        if f is None:
            report.append(f"missing arrow for edge {e.name!r}")
            continue
        if e.src in d.components and f.domain != d.components[e.src]:
            report.append(f"arrow {e.name!r}: domain is not the component at {e.src!r}")
        if e.dst in d.components and f.codomain != d.components[e.dst]:
            report.append(f"arrow {e.name!r}: codomain is not the component at {e.dst!r}")
        for line in validate_morphism(f):
            report.append(f"arrow {e.name!r}: {line}")
    for name in d.arrows:
        if all(e.name != name for e in d.shape.edges):
            report.append(f"arrow for unknown edge {name!r}")
    return report


@dataclass
class DiagramTransformation:
    """Vertexwise morphisms between two diagrams over one shape."""

    domain: Diagram
    codomain: Diagram
    legs: dict[str, PresheafMorphism]

    def leg(self, v: str) -> PresheafMorphism:
        return self.legs[v]


def validate_transformation(t: DiagramTransformation) -> list[str]:
    report: list[str] = []
    if t.domain.shape != t.codomain.shape:
        report.append("domain and codomain diagrams have different shapes")
        return report
    for v in t.domain.shape.vertices:
        leg = t.legs.get(v)
        if leg is None:
            report.append(f"missing leg at vertex {v!r}")
            continue
        if leg.domain != t.domain.components[v]:
            report.append(f"leg at {v!r}: wrong domain")
        if leg.codomain != t.codomain.components[v]:
            report.append(f"leg at {v!r}: wrong codomain")
        report += [f"leg at {v!r}: {line}" for line in validate_morphism(leg)]
    if report:
        return report
    for e in t.domain.shape.edges:
        lhs = compose(t.legs[e.dst], t.domain.arrows[e.name])
        rhs = compose(t.codomain.arrows[e.name], t.legs[e.src])
        if lhs != rhs:
            report.append(f"square for edge {e.name!r} does not commute")
    return report


# ---------------------------------------------------------------------------
# vertex classification

def min_indices(shape: ShapeGraph) -> list[str]:
    """Vertices with no outgoing edge, in shape order."""
    return [v for v in shape.vertices if not shape.out_edges(v)]


def branching_indices(shape: ShapeGraph) -> list[str]:
    """Vertices with at least two outgoing edges, in shape order."""
    return [v for v in shape.vertices if len(shape.out_edges(v)) >= 2]


def classify_vertices(shape: ShapeGraph) -> dict[str, str]:
    """Classify every vertex as minimal / branching / irrelevant / jump-over / plain.

    Irrelevant vertices (no incoming edge, exactly one outgoing edge) are
    removed iteratively: deleting one can expose the next.  Jump-over
    vertices are the surviving ones with exactly one incoming and one
    outgoing edge, loops excluded.  Minimal and branching are decided on the
    original shape; the four classes never overlap because removed vertices
    had an outgoing edge and at most one of them.
    """
    classes = {v: "plain" for v in shape.vertices}
    for v in min_indices(shape):
        classes[v] = "minimal"
    for v in branching_indices(shape):
        classes[v] = "branching"

    alive = set(shape.vertices)
    live_edges = list(shape.edges)
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            incoming = [e for e in live_edges if e.dst == v]
            outgoing = [e for e in live_edges if e.src == v]
            if not incoming and len(outgoing) == 1:
                classes[v] = "irrelevant"
                alive.discard(v)
                live_edges = [e for e in live_edges if e.src != v]
                changed = True
                break
    for v in sorted(alive):
        incoming = [e for e in live_edges if e.dst == v]
        outgoing = [e for e in live_edges if e.src == v]
        if (
            len(incoming) == 1
            and len(outgoing) == 1
            and incoming[0].src != v
            and classes[v] == "plain"
        ):
            classes[v] = "jump-over"
    return classes


# ---------------------------------------------------------------------------
# branches

@dataclass(frozen=True)
class Branch:
    """Edge path from a branching vertex down to a minimal vertex."""

    edges: tuple[str, ...]
    vertices: tuple[str, ...]  # one longer than edges

    @property
    def source(self) -> str:
        return self.vertices[0]

    @property
    def target(self) -> str:
        return self.vertices[-1]

    def composite(self, d: Diagram) -> PresheafMorphism:
        f = identity(d.components[self.source])
        for name in self.edges:
            f = compose(d.arrows[name], f)
        return f


def is_acyclic(shape: ShapeGraph) -> bool:
    indeg = {v: 0 for v in shape.vertices}
    for e in shape.edges:
        indeg[e.dst] += 1
    queue = [v for v in shape.vertices if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for e in shape.out_edges(v):
            indeg[e.dst] -= 1
            if indeg[e.dst] == 0:
                queue.append(e.dst)
    return seen == len(shape.vertices)


def branch_paths_from(shape: ShapeGraph, start: str) -> list[Branch]:
    """Every edge path from ``start`` down to a minimal vertex.

    Requires an acyclic shape.  Deterministic: depth-first in edge-name
    order, results sorted by edge sequence.
    """
    if not is_acyclic(shape):
        raise ValueError("branch enumeration needs an acyclic shape")
    results: list[Branch] = []

    def walk(v: str, edges: tuple[str, ...], verts: tuple[str, ...]) -> None:
        outs = sorted(shape.out_edges(v), key=lambda e: e.name)
        if not outs:
            if edges:
                results.append(Branch(edges=edges, vertices=verts))
            return
        for e in outs:
            walk(e.dst, edges + (e.name,), verts + (e.dst,))

    walk(start, (), (start,))
    results.sort(key=lambda b: b.edges)
    return results


def enumerate_branches(shape: ShapeGraph) -> list[Branch]:
    """Branches from branching vertices to minimal vertices, maximal form.

    Listed are the suffix-maximal branches: a branch that is a proper suffix
    of a longer one (its source lies downstream of another branching vertex)
    is folded into the longer listing.  ``branch_paths_from`` gives the
    complete per-vertex sets when every path matters.
    """
    if not is_acyclic(shape):
        raise ValueError("branch enumeration needs an acyclic shape")
    all_branches: list[Branch] = []
    for v in branching_indices(shape):
        all_branches.extend(branch_paths_from(shape, v))
    suffixes = set()
    for b in all_branches:
        for k in range(1, len(b.edges)):
            if b.vertices[k] in branching_indices(shape):
                suffixes.add(b.edges[k:])
    kept = [b for b in all_branches if b.edges not in suffixes]
    kept.sort(key=lambda b: (b.source, b.edges))
    return kept


# ---------------------------------------------------------------------------
# cycles

def directed_cycles(shape: ShapeGraph) -> list[list[str]]:
    """Elementary directed cycles as edge-name lists, one representative each.

    Vertices on a cycle are pairwise distinct; loops are cycles of length
    one.  Every cycle is anchored (rotated) at its least vertex, which also
    makes the enumeration hit it exactly once.  Aborts with
    CycleOverflowError beyond CYCLE_CAP cycles.
    """
    cycles: list[list[str]] = []

    def walk(anchor: str, v: str, edges: tuple[str, ...], inner: frozenset[str]) -> None:
        for e in sorted(shape.out_edges(v), key=lambda e: e.name):
            if e.dst == anchor:
                cycles.append(list(edges) + [e.name])
                if len(cycles) > CYCLE_CAP:
                    raise CycleOverflowError(
                        f"more than {CYCLE_CAP} elementary directed cycles"
                    )
            elif e.dst not in inner and e.dst > anchor:
                walk(anchor, e.dst, edges + (e.name,), inner | {e.dst})

    for a in sorted(shape.vertices):
        walk(a, a, (), frozenset())
    return sorted(cycles)


def undirected_cycles(shape: ShapeGraph) -> list[list[tuple[str, int]]]:
    """Elementary undirected cycles of length >= 2 as (edge, direction) runs.

    Direction +1 means the edge is traversed source-to-target.  Each cycle
    appears once: anchored at its least vertex, in the direction that gives
    the lexicographically smaller edge sequence.  Two parallel edges form a
    cycle of length two; a single loop does not count.
    """
    # adjacency over undirected incidences
    incid: dict[str, list[tuple[str, int, str]]] = {v: [] for v in shape.vertices}
    for e in shape.edges:
        if e.src == e.dst:
            continue  # loops never occur in an elementary cycle of length >= 2
        incid[e.src].append((e.name, +1, e.dst))
        incid[e.dst].append((e.name, -1, e.src))
    for v in incid:
        incid[v].sort()

    found: set[tuple[tuple[str, int], ...]] = set()

    def canonical(seq: tuple[tuple[str, int], ...]) -> tuple[tuple[str, int], ...]:
        # the same cycle is found once per direction; reversal flips signs
        rev = tuple((n, -s) for n, s in reversed(seq))
        return min(seq, rev)

    def walk(anchor: str, v: str, used: tuple[str, ...], seq, visited) -> None:
        for name, sign, w in incid[v]:
            if name in used:
                continue
            if w == anchor:
                cyc = seq + ((name, sign),)
                if len(cyc) >= 2:
                    found.add(canonical(cyc))
                    if len(found) > CYCLE_CAP:
                        raise CycleOverflowError(
                            f"more than {CYCLE_CAP} elementary undirected cycles"
                        )
                continue
            if w in visited or w < anchor:
                continue
            walk(anchor, w, used + (name,), seq + ((name, sign),), visited | {w})

    for anchor in shape.vertices:
        walk(anchor, anchor, (), (), {anchor})
    return sorted(list(c) for c in found)


# ---------------------------------------------------------------------------
# cartesian transformations

def cartesian_check(t: DiagramTransformation) -> tuple[bool, str | None]:
    """Decide whether every naturality square of ``t`` is a pullback.

    For each shape edge d: i -> j the canonical comparison sends x in E_i to
    the fiber pair (leg_i(x), E_d(x)); the square is a pullback iff that map
    is bijective at every sort.  Returns (flag, failing edge or None).
    """
    report = validate_transformation(t)
    if report:
        raise ValueError("not a transformation: " + "; ".join(report))
    for e in t.domain.shape.edges:
        apex, pr1, pr2 = pullback(t.codomain.arrows[e.name], t.legs[e.dst])
        comparison = pullback_mediator(
            pr1, pr2, t.legs[e.src], t.domain.arrows[e.name]
        )
        if not is_iso(comparison):
            return False, e.name
    return True, None
