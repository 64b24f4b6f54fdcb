"""Colimits of presheaf diagrams: the general coequalizer recipe and the
specialized minimal-vertex construction, plus mediating morphisms.

Both constructions produce a cocone whose apex carriers are named by the
lexicographically least member of each glued class, so results from two runs
over the same input are identical, not just isomorphic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .presheaves import (
    Congruence,
    Presheaf,
    PresheafMorphism,
    close_congruence,
    compose,
    copair,
    coproduct,
    empty_presheaf,
    identity,
    quotient,
    tag,
)
from .paths import MappingPath, PathSegment, is_proper, reverse_path, concat_paths
from .shapes import (
    Branch,
    Diagram,
    ShapeEdge,
    ShapeGraph,
    branch_paths_from,
    branching_indices,
    classify_vertices,
    is_acyclic,
    min_indices,
    validate_diagram,
)


class PreconditionError(RuntimeError):
    """An operation was invoked outside its declared precondition."""


@dataclass
class Cocone:
    diagram: Diagram
    apex: Presheaf
    legs: dict[str, PresheafMorphism]

    def leg(self, v: str) -> PresheafMorphism:
        return self.legs[v]


def validate_cocone(c: Cocone) -> list[str]:
    report: list[str] = []
    for v in c.diagram.shape.vertices:
        leg = c.legs.get(v)
        if leg is None:
            report.append(f"missing leg at vertex {v!r}")
            continue
        if leg.domain != c.diagram.components[v]:
            report.append(f"leg at {v!r}: wrong domain")
        if leg.codomain != c.apex:
            report.append(f"leg at {v!r}: wrong codomain")
    if report:
        return report
    for e in c.diagram.shape.edges:
        if compose(c.legs[e.dst], c.diagram.arrows[e.name]) != c.legs[e.src]:
            report.append(f"leg triangle for edge {e.name!r} does not commute")
    return report


def legs_jointly_surjective(c: Cocone) -> bool:
    for s in c.apex.base.sorts:
        hit = set()
        for leg in c.legs.values():
            hit.update(leg.maps[s].values())
        if hit != set(c.apex.elements(s)):
            return False
    return True


# ---------------------------------------------------------------------------
# the general recipe

def universal_coequalizer_form(d: Diagram) -> Diagram:
    """Reshape a diagram into the parallel pair whose coequalizer is its colimit.

    Component "1" is the coproduct of the edge sources (one copy per edge,
    tagged by edge name); component "2" is the coproduct of all components
    (tagged by vertex).  Arrow "apply" sends the copy for edge d through the
    diagram arrow into the target component; arrow "embed" sends it into the
    source component unchanged.  A diagram without edges yields an empty
    component "1".
    """
    shape = ShapeGraph(
        vertices=("1", "2"),
        edges=(ShapeEdge("apply", "1", "2"), ShapeEdge("embed", "1", "2")),
    )
    verts = list(d.shape.vertices)
    if verts:
        total, injections = coproduct([d.components[v] for v in verts], tags=verts)
    else:
        total, injections = empty_presheaf(d.base), []
    inj = dict(zip(verts, injections))
    edges = list(d.shape.edges)
    if edges:
        sources, src_inj = coproduct(
            [d.components[e.src] for e in edges], tags=[e.name for e in edges]
        )
        apply_legs = [
            compose(inj[e.dst], d.arrows[e.name]) for e in edges
        ]
        embed_legs = [inj[e.src] for e in edges]
        apply = copair(apply_legs, src_inj)
        embed = copair(embed_legs, src_inj)
    else:
        sources = empty_presheaf(d.base)
        apply = PresheafMorphism(sources, total, {s: {} for s in d.base.sorts})
        embed = PresheafMorphism(sources, total, {s: {} for s in d.base.sorts})
    return Diagram(
        shape=shape,
        base=d.base,
        components={"1": sources, "2": total},
        arrows={"apply": apply, "embed": embed},
    )


def colimit_universal(d: Diagram) -> Cocone:
    """Colimit by coequalizing the two arrows of the parallel-pair form."""
    report = validate_diagram(d)
    if report:
        raise ValueError("invalid diagram: " + "; ".join(report))
    form = universal_coequalizer_form(d)
    total = form.components["2"]
    apply, embed = form.arrows["apply"], form.arrows["embed"]
    pairs = [
        (s, apply.maps[s][x], embed.maps[s][x])
        for s in d.base.sorts
        for x in form.components["1"].elements(s)
    ]
    cong = close_congruence(total, pairs)
    apex, proj = quotient(total, cong)
    legs = {}
    for v in d.shape.vertices:
        p = d.components[v]
        legs[v] = PresheafMorphism(
            domain=p,
            codomain=apex,
            maps={
                s: {x: proj.maps[s][tag(v, x)] for x in p.elements(s)}
                for s in d.base.sorts
            },
        )
    return Cocone(diagram=d, apex=apex, legs=legs)


# ---------------------------------------------------------------------------
# primary identifications and the specialized construction

@dataclass
class PrimaryIdentification:
    """One forced gluing between two minimal-component elements.

    Generated by an element of a branching component pushed down two
    branches whose first edges differ.  The witness path climbs the first
    branch backwards and descends the second; it has exactly one branching
    position (its peak) by construction, which is re-verified here, and it
    is proper whenever branch images are disjoint (recorded, not assumed).
    """

    vertex: str
    sort: str
    element: str
    branch1: Branch
    branch2: Branch
    left: tuple[str, str]
    right: tuple[str, str]
    witness: MappingPath
    witness_proper: bool


def _branch_path(d: Diagram, b: Branch, sort: str, y: str) -> MappingPath:
    segs = []
    cur = y
    for edge_name, src_v, dst_v in zip(b.edges, b.vertices, b.vertices[1:]):
        nxt = d.arrows[edge_name].maps[sort][cur]
        segs.append(PathSegment(left=(src_v, cur), edge=edge_name, op=False, right=(dst_v, nxt)))
        cur = nxt
    return MappingPath(sort=sort, segments=tuple(segs))


def _branching_positions(p: MappingPath) -> int:
    count = 0
    for a, b in zip(p.segments, p.segments[1:]):
        if a.op and not b.op and a.edge != b.edge:
            count += 1
    return count


def primary_identifications(d: Diagram) -> list[PrimaryIdentification]:
    """All forced gluings from branch pairs with distinct first edges.

    One entry per (branching vertex, sort, element, unordered branch pair);
    pairs sharing their first edge contribute nothing because the forced
    equation already holds further down.  Requires an acyclic shape.
    """
    if not is_acyclic(d.shape):
        raise PreconditionError("primary identifications need an acyclic shape")
    out: list[PrimaryIdentification] = []
    for v in branching_indices(d.shape):
        branches = branch_paths_from(d.shape, v)
        for i, b1 in enumerate(branches):
            for b2 in branches[i + 1 :]:
                if b1.edges[0] == b2.edges[0]:
                    continue
                f1, f2 = b1.composite(d), b2.composite(d)
                for sort in d.base.sorts:
                    for y in d.components[v].elements(sort):
                        w1, w2 = f1.maps[sort][y], f2.maps[sort][y]
                        witness = concat_paths(
                            reverse_path(_branch_path(d, b1, sort, y)),
                            _branch_path(d, b2, sort, y),
                        )
                        peaks = _branching_positions(witness)
                        if peaks != 1:
                            raise AssertionError(
                                f"constructed witness has {peaks} branching positions"
                            )
                        out.append(
                            PrimaryIdentification(
                                vertex=v,
                                sort=sort,
                                element=y,
                                branch1=b1,
                                branch2=b2,
                                left=(b1.target, w1),
                                right=(b2.target, w2),
                                witness=witness,
                                witness_proper=is_proper(witness),
                            )
                        )
    return out


def congruence_closure(
    p: Presheaf,
    identifications: list[PrimaryIdentification],
    redundant_log: list[tuple[str, str, str]] | None = None,
) -> Congruence:
    """Smallest congruence on ``p`` gluing all identification pairs.

    ``p`` is the coproduct of the minimal components, so the pairs are
    addressed by tagged ids.  Op-compatibility holds automatically because
    the identification family is closed under the operation tables; the
    quotient construction re-verifies it and a failure there is an engine
    bug, not a user error.
    """
    pairs = [
        (pid.sort, tag(*pid.left), tag(*pid.right)) for pid in identifications
    ]
    return close_congruence(p, pairs, redundant_log=redundant_log)


def _descent_path(shape: ShapeGraph, start: str) -> Branch | None:
    """Lexicographically least edge path from ``start`` to a minimal vertex."""
    if not shape.out_edges(start):
        return None
    edges: list[str] = []
    verts = [start]
    v = start
    while shape.out_edges(v):
        e = min(shape.out_edges(v), key=lambda e: e.name)
        edges.append(e.name)
        verts.append(e.dst)
        v = e.dst
    return Branch(edges=tuple(edges), vertices=tuple(verts))


def colimit_specialized(d: Diagram) -> Cocone:
    """Colimit built from minimal components and primary identifications only.

    Refuses shapes with directed cycles.  Legs of non-minimal vertices are
    the composite into any minimal vertex below (the construction makes this
    choice-independent; the engine picks the lexicographically least
    descent).
    """
    report = validate_diagram(d)
    if report:
        raise ValueError("invalid diagram: " + "; ".join(report))
    if not is_acyclic(d.shape):
        raise PreconditionError("specialized colimit refuses directed cycles")
    mins = min_indices(d.shape)
    if mins:
        total, injections = coproduct([d.components[v] for v in mins], tags=mins)
    else:
        total = empty_presheaf(d.base)
    cong = congruence_closure(total, primary_identifications(d))
    apex, proj = quotient(total, cong)
    legs: dict[str, PresheafMorphism] = {}
    for v in mins:
        p = d.components[v]
        legs[v] = PresheafMorphism(
            domain=p,
            codomain=apex,
            maps={
                s: {x: proj.maps[s][tag(v, x)] for x in p.elements(s)}
                for s in d.base.sorts
            },
        )
    for v in d.shape.vertices:
        if v in legs:
            continue
        desc = _descent_path(d.shape, v)
        assert desc is not None  # non-minimal vertices always descend somewhere
        legs[v] = compose(legs[desc.target], desc.composite(d))
    return Cocone(diagram=d, apex=apex, legs=legs)


def affected_minimal(d: Diagram) -> list[str]:
    """Minimal vertices reachable from a branching vertex, in shape order."""
    if not is_acyclic(d.shape):
        raise PreconditionError("affected-minimal analysis needs an acyclic shape")
    hit = set()
    for v in branching_indices(d.shape):
        for b in branch_paths_from(d.shape, v):
            hit.add(b.target)
    return [v for v in d.shape.vertices if v in hit]


# ---------------------------------------------------------------------------
# coequalizers as pushouts, mediators

def coequalizer_as_pushout(
    f: PresheafMorphism, g: PresheafMorphism
) -> Diagram:
    """Span whose pushout is the coequalizer of the parallel pair f, g.

    The span folds the doubled domain back onto the domain with identities
    on one side and applies (f, g) on the other.
    """
    if f.domain != g.domain or f.codomain != g.codomain:
        raise ValueError("coequalizer needs a parallel pair")
    b = f.domain
    doubled, (inl, inr) = coproduct([b, b], tags=["l", "r"])
    fold = copair([identity(b), identity(b)], [inl, inr])
    pair = copair([f, g], [inl, inr])
    shape = ShapeGraph(
        vertices=("0", "1", "2"),
        edges=(ShapeEdge("fold", "0", "1"), ShapeEdge("pair", "0", "2")),
    )
    return Diagram(
        shape=shape,
        base=b.base,
        components={"0": doubled, "1": b, "2": f.codomain},
        arrows={"fold": fold, "pair": pair},
    )


def mediating_morphism(
    c: Cocone,
    legs: dict[str, PresheafMorphism],
    target: Presheaf | None = None,
) -> PresheafMorphism:
    """Unique morphism out of the colimit apex factoring a commuting cocone.

    Raises ValueError when ``legs`` do not commute with the diagram (not a
    cocone) and AssertionError if factoring fails on a commuting cocone,
    which would mean the apex was not actually a colimit.  ``target`` is
    only needed for diagrams without vertices, where no leg can name the
    codomain.
    """
    d = c.diagram
    if target is None:
        if not legs:
            raise ValueError("mediator out of an empty diagram needs an explicit target")
        target = next(iter(legs.values())).codomain
    for v in d.shape.vertices:
        if v not in legs:
            raise ValueError(f"cocone is missing a leg at vertex {v!r}")
        if legs[v].codomain != target:
            raise ValueError("cocone legs must share one codomain")
    for e in d.shape.edges:
        if compose(legs[e.dst], d.arrows[e.name]) != legs[e.src]:
            raise ValueError(f"legs do not commute over edge {e.name!r}: not a cocone")
    maps: dict[str, dict[str, str]] = {s: {} for s in c.apex.base.sorts}
    for v in d.shape.vertices:
        for s in c.apex.base.sorts:
            for x in d.components[v].elements(s):
                k = c.legs[v].maps[s][x]
                val = legs[v].maps[s][x]
                if maps[s].get(k, val) != val:
                    raise AssertionError(
                        f"cocone does not factor through the apex at class {k!r}"
                    )
                maps[s][k] = val
    for s in c.apex.base.sorts:
        for k in c.apex.elements(s):
            if k not in maps[s]:
                raise AssertionError(
                    f"apex class {k!r} is not in the image of any leg"
                )
    return PresheafMorphism(domain=c.apex, codomain=target, maps=maps)


def cocones_equivalent(c1: Cocone, c2: Cocone) -> PresheafMorphism | None:
    """Canonical comparison iso between two colimit candidates, if it exists."""
    try:
        u = mediating_morphism(c1, c2.legs, target=c2.apex)
        v = mediating_morphism(c2, c1.legs, target=c1.apex)
    except (ValueError, AssertionError):
        return None
    for s in c1.apex.base.sorts:
        for x in c1.apex.elements(s):
            if v.maps[s][u.maps[s][x]] != x:
                return None
        for y in c2.apex.elements(s):
            if u.maps[s][v.maps[s][y]] != y:
                return None
    return u


# ---------------------------------------------------------------------------
# shape simplification (opt-in pre-pass)

def simplify_diagram(d: Diagram) -> tuple[Diagram, list[str]]:
    """Drop irrelevant vertices, then splice out jump-over vertices.

    Both steps preserve the colimit apex up to canonical iso and the
    uniqueness status of mapping paths; the engine treats that as a tested
    property, not an assumption, so this pass stays opt-in.
    """
    notes: list[str] = []
    shape = d.shape
    comps = dict(d.components)
    arrows = dict(d.arrows)
    while True:
        cls = classify_vertices(shape)
        removable = [
            v
            for v in shape.vertices
            if cls[v] == "irrelevant"
            and not any(e.dst == v for e in shape.edges)
            and len(shape.out_edges(v)) == 1
        ]
        if not removable:
            break
        v = removable[0]
        gone = shape.out_edges(v)[0]
        shape = ShapeGraph(
            vertices=tuple(w for w in shape.vertices if w != v),
            edges=tuple(e for e in shape.edges if e.name != gone.name),
        )
        comps.pop(v)
        arrows.pop(gone.name)
        notes.append(f"dropped irrelevant vertex {v!r} (edge {gone.name!r})")
    while True:
        cls = classify_vertices(shape)
        hit = None
        for v in shape.vertices:
            if cls[v] != "jump-over":
                continue
            ins = [e for e in shape.edges if e.dst == v]
            outs = [e for e in shape.edges if e.src == v]
            if len(ins) == 1 and len(outs) == 1 and ins[0].src != v:
                hit = (v, ins[0], outs[0])
                break
        if hit is None:
            break
        v, e_in, e_out = hit
        spliced = ShapeEdge(f"{e_in.name};{e_out.name}", e_in.src, e_out.dst)
        shape = ShapeGraph(
            vertices=tuple(w for w in shape.vertices if w != v),
            edges=tuple(
                e for e in shape.edges if e.name not in (e_in.name, e_out.name)
            )
            + (spliced,),
        )
        arrows[spliced.name] = compose(arrows[e_out.name], arrows[e_in.name])
        arrows.pop(e_in.name)
        arrows.pop(e_out.name)
        comps.pop(v)
        notes.append(
            f"spliced jump-over vertex {v!r} into edge {spliced.name!r}"
        )
    return Diagram(shape=shape, base=d.base, components=comps, arrows=arrows), notes
