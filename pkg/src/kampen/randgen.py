"""Seeded random generators for bases, presheaves, diagrams and instances.

Everything is driven by an explicit ``random.Random`` so suites are
reproducible; nothing here touches global random state.  Generated natural
morphisms are found by backtracking over the (tiny) carrier spaces; when a
target admits no natural map at all, the target is extended by a sink
element per sort, after which a constant map always exists.
"""

from __future__ import annotations

import random
from typing import Sequence

from .presheaves import (
    BaseSignature,
    OpSymbol,
    Presheaf,
    PresheafMorphism,
    validate_morphism,
)
from .shapes import Diagram, ShapeEdge, ShapeGraph


def random_base(rng: random.Random, max_sorts: int = 2, max_ops: int = 3) -> BaseSignature:
    n = rng.randint(1, max_sorts)
    sorts = tuple(f"s{i}" for i in range(n))
    ops = []
    for i in range(rng.randint(0, max_ops)):
        ops.append(OpSymbol(f"o{i}", rng.choice(sorts), rng.choice(sorts)))
    return BaseSignature(sorts=sorts, ops=tuple(ops))


def random_presheaf(
    base: BaseSignature, rng: random.Random, max_size: int = 4, prefix: str = "x"
) -> Presheaf:
    """Random finite presheaf; sorts may come out empty.

    A sort that is the source of an op whose target carrier came out empty
    must itself be empty, so carriers are drawn until the emptiness pattern
    is consistent (a handful of retries at this scale).
    """
    while True:
        sizes = {s: rng.randint(0, max_size) for s in base.sorts}
        ok = True
        for _ in range(len(base.sorts) + 1):
            for o in base.ops:
                if sizes[o.dst] == 0 and sizes[o.src] > 0:
                    sizes[o.src] = 0
        for o in base.ops:
            if sizes[o.dst] == 0 and sizes[o.src] > 0:
                ok = False
        if ok:
            break
    carriers = {
        s: tuple(f"{prefix}{s}{i}" for i in range(sizes[s])) for s in base.sorts
    }
    tables = {}
    for o in base.ops:
        tables[o.name] = {
            x: rng.choice(carriers[o.dst]) for x in carriers[o.src]
        }
    return Presheaf(base=base, carriers=carriers, tables=tables)


def _with_sink(p: Presheaf) -> Presheaf:
    """The presheaf extended by one absorbing element per sort."""
    carriers = {s: p.carriers[s] + (f"zz{s}",) for s in p.base.sorts}
    tables = {}
    for o in p.base.ops:
        t = dict(p.tables[o.name])
        t[f"zz{o.src}"] = f"zz{o.dst}"
        tables[o.name] = t
    return Presheaf(base=p.base, carriers=carriers, tables=tables)


def random_natural_map(
    p: Presheaf, q: Presheaf, rng: random.Random, tries: int = 3
) -> PresheafMorphism | None:
    """A random natural morphism p -> q, or None when none exists.

    Backtracking over elements in a fixed order with randomized image
    choices; a few independent tries give some spread over the solution
    space before giving up.
    """
    order = [(s, x) for s in p.base.sorts for x in p.elements(s)]

    def extend(maps: dict[str, dict[str, str]], k: int) -> bool:
        if k == len(order):
            return True
        s, x = order[k]
        if x in maps[s]:
            return extend(maps, k + 1)
        candidates = list(q.elements(s))
        rng.shuffle(candidates)
        for y in candidates:
            forced: list[tuple[str, str, str]] = [(s, x, y)]
            good = True
            # propagate through op tables until a contradiction or closure
            i = 0
            staged: dict[str, dict[str, str]] = {t: {} for t in p.base.sorts}
            staged[s][x] = y
            while i < len(forced):
                fs, fx, fy = forced[i]
                i += 1
                for o in p.base.ops_from(fs):
                    ox, oy = p.apply(o.name, fx), q.apply(o.name, fy)
                    known = maps[o.dst].get(ox, staged[o.dst].get(ox))
                    if known is None:
                        staged[o.dst][ox] = oy
                        forced.append((o.dst, ox, oy))
                    elif known != oy:
                        good = False
                        break
                if not good:
                    break
            if not good:
                continue
            for t in staged:
                maps[t].update(staged[t])
            if extend(maps, k + 1):
                return True
            for t in staged:
                for key in staged[t]:
                    del maps[t][key]
        return False

    for _ in range(tries):
        maps: dict[str, dict[str, str]] = {s: {} for s in p.base.sorts}
        if extend(maps, 0):
            f = PresheafMorphism(domain=p, codomain=q, maps=maps)
            assert not validate_morphism(f)
            return f
    return None


def random_shape(
    rng: random.Random, max_vertices: int = 5, max_edges: int = 6, dag_bias: float = 0.7
) -> ShapeGraph:
    if rng.random() < 0.03:
        return ShapeGraph(vertices=(), edges=())
    n = rng.randint(1, max_vertices)
    vertices = tuple(f"v{i}" for i in range(n))
    dag = rng.random() < dag_bias
    edges = []
    for i in range(rng.randint(0, max_edges)):
        a, b = rng.choice(vertices), rng.choice(vertices)
        if dag:
            if a == b:
                continue
            if a > b:
                a, b = b, a
        edges.append(ShapeEdge(f"e{i}", a, b))
    return ShapeGraph(vertices=vertices, edges=tuple(edges))


def random_diagram(
    rng: random.Random,
    shape: ShapeGraph | None = None,
    base: BaseSignature | None = None,
    max_size: int = 4,
) -> Diagram:
    """Random diagram over a random (or given) shape and base.

    Arrow construction restarts with a sink-extended target whenever some
    edge admits no natural map; at most one extension per vertex, so this
    always terminates.
    """
    if base is None:
        base = random_base(rng)
    if shape is None:
        shape = random_shape(rng)
    components = {
        v: random_presheaf(base, rng, max_size=max_size, prefix=f"{v}x")
        for v in shape.vertices
    }
    while True:
        arrows: dict[str, PresheafMorphism] = {}
        stuck = None
        for e in shape.edges:
            f = random_natural_map(components[e.src], components[e.dst], rng)
            if f is None:
                stuck = e.dst
                break
            arrows[e.name] = f
        if stuck is None:
            return Diagram(shape=shape, base=base, components=components, arrows=arrows)
        components[stuck] = _with_sink(components[stuck])


def random_typed_instance(apex: Presheaf, rng: random.Random) -> "TypedInstance":
    """Random instance typed over ``apex``: random fiber sizes per apex
    element, op values chosen within the forced fiber, missing fibers
    filled by on-demand witnesses so that op tables always close."""
    from .instances import TypedInstance

    base = apex.base
    fibers: dict[tuple[str, str], list[str]] = {
        (s, c): [] for s in base.sorts for c in apex.elements(s)
    }
    sigma: dict[str, dict[str, str]] = {s: {} for s in base.sorts}
    counter = 0
    work: list[tuple[str, str]] = []  # (sort, element)

    def create(s: str, c: str) -> str:
        nonlocal counter
        k = f"k{counter}"
        counter += 1
        fibers[(s, c)].append(k)
        sigma[s][k] = c
        work.append((s, k))
        return k

    for s in base.sorts:
        for c in apex.elements(s):
            for _ in range(rng.choice([0, 1, 1, 2])):
                create(s, c)
    tables: dict[str, dict[str, str]] = {o.name: {} for o in base.ops}
    while work:
        s, k = work.pop(0)
        for o in base.ops_from(s):
            c2 = apex.apply(o.name, sigma[s][k])
            pool = fibers[(o.dst, c2)]
            if not pool:
                create(o.dst, c2)
            tables[o.name][k] = rng.choice(fibers[(o.dst, c2)])
    carriers = {
        s: tuple(sorted(sigma[s], key=lambda k: int(k[1:]))) for s in base.sorts
    }
    instance = Presheaf(base=base, carriers=carriers, tables=tables)
    typing = PresheafMorphism(domain=instance, codomain=apex, maps=sigma)
    assert not validate_morphism(typing)
    return TypedInstance(instance=instance, typing=typing)


def random_parallel_pair(
    rng: random.Random,
) -> tuple[PresheafMorphism, PresheafMorphism, Diagram]:
    """A parallel pair f, g: B -> D plus the two-vertex diagram holding it."""
    shape = ShapeGraph(
        vertices=("1", "2"),
        edges=(ShapeEdge("d", "1", "2"), ShapeEdge("d'", "1", "2")),
    )
    d = random_diagram(rng, shape=shape)
    return d.arrows["d"], d.arrows["d'"], d


def random_span(rng: random.Random) -> Diagram:
    shape = ShapeGraph(
        vertices=("0", "1", "2"),
        edges=(ShapeEdge("h1", "0", "1"), ShapeEdge("h2", "0", "2")),
    )
    return random_diagram(rng, shape=shape)


def random_morphism_family(
    base: BaseSignature, rng: random.Random, count: int
) -> list[PresheafMorphism]:
    """Natural morphisms f_i: A_i -> B_i over one base, for coproduct tests."""
    out = []
    for i in range(count):
        b = random_presheaf(base, rng, prefix=f"b{i}u")
        a = random_presheaf(base, rng, max_size=3, prefix=f"a{i}u")
        f = random_natural_map(a, b, rng)
        while f is None:
            b = _with_sink(b)
            f = random_natural_map(a, b, rng)
        out.append(f)
    return out
