"""Typed instances over a colimit apex and their round-trips.

Pulling a typed instance back along all cocone legs yields a cartesian
transformation into the diagram; pushing a cartesian transformation forward
yields a typed instance over the apex.  Comparing a value with its
round-trip image along the canonical comparison morphisms gives a concrete,
finite falsification procedure: the pullback-then-pushforward direction
(counit) must always be an isomorphism here, while the pushforward-then-
pullback direction (unit) is an isomorphism for every family exactly when
the cocone is Van Kampen.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .colimits import Cocone, colimit_universal, mediating_morphism
from .presheaves import (
    Presheaf,
    PresheafMorphism,
    compose,
    is_iso,
    pullback,
    pullback_mediator,
    validate_morphism,
)
from .shapes import (
    Diagram,
    DiagramTransformation,
    cartesian_check,
    validate_transformation,
)


@dataclass
class TypedInstance:
    """A presheaf with a typing morphism into a designated apex."""

    instance: Presheaf
    typing: PresheafMorphism


@dataclass
class CartesianFamily:
    """A diagram transformation all of whose naturality squares are pullbacks."""

    transformation: DiagramTransformation

    @property
    def domain(self):
        return self.transformation.domain

    def leg(self, v: str) -> PresheafMorphism:
        return self.transformation.legs[v]


@dataclass
class RoundtripReport:
    passed: bool
    notes: list[str] = field(default_factory=list)
    fiber_sizes: dict[str, dict[str, int]] = field(default_factory=dict)


def validate_typed_instance(c: Cocone, t: TypedInstance) -> list[str]:
    report = validate_morphism(t.typing)
    if t.typing.domain != t.instance:
        report.append("typing does not start at the instance presheaf")
    if t.typing.codomain != c.apex:
        report.append("typing does not land in the cocone apex")
    return report


def pullback_along_cocone(c: Cocone, t: TypedInstance) -> CartesianFamily:
    """Pull the typing back along every leg; the chosen-pullback fibers are
    pairs (component element, instance element) over equal apex classes.

    The induced arrows between fibers are the unique mediators, so all the
    squares of the result are pullbacks by construction; this is re-checked
    before returning.
    """
    report = validate_typed_instance(c, t)
    if report:
        raise ValueError("invalid typed instance: " + "; ".join(report))
    d = c.diagram
    fibers: dict[str, Presheaf] = {}
    to_component: dict[str, PresheafMorphism] = {}
    to_instance: dict[str, PresheafMorphism] = {}
    for v in d.shape.vertices:
        apex, pr1, pr2 = pullback(c.legs[v], t.typing)
        fibers[v] = apex
        to_component[v] = pr1
        to_instance[v] = pr2
    arrows: dict[str, PresheafMorphism] = {}
    for e in d.shape.edges:
        arrows[e.name] = pullback_mediator(
            to_component[e.dst],
            to_instance[e.dst],
            compose(d.arrows[e.name], to_component[e.src]),
            to_instance[e.src],
        )
    domain = Diagram(shape=d.shape, base=d.base, components=fibers, arrows=arrows)
    trans = DiagramTransformation(domain=domain, codomain=d, legs=to_component)
    ok, failing = cartesian_check(trans)
    if not ok:
        raise AssertionError(f"pulled-back family is not cartesian at {failing!r}")
    return CartesianFamily(transformation=trans)


def instance_projections(c: Cocone, t: TypedInstance) -> dict[str, PresheafMorphism]:
    """The second projections of the chosen fibers, one per vertex."""
    return {
        v: pullback(c.legs[v], t.typing)[2] for v in c.diagram.shape.vertices
    }


def pushforward(c: Cocone, f: CartesianFamily) -> TypedInstance:
    """Colimit of the family's domain, typed by the induced mediator."""
    report = validate_transformation(f.transformation)
    if report:
        raise ValueError("invalid family: " + "; ".join(report))
    ok, failing = cartesian_check(f.transformation)
    if not ok:
        raise ValueError(f"family is not cartesian at edge {failing!r}")
    e_colim = colimit_universal(f.domain)
    legs = {
        v: compose(c.legs[v], f.leg(v)) for v in c.diagram.shape.vertices
    }
    typing = mediating_morphism(e_colim, legs, target=c.apex)
    return TypedInstance(instance=e_colim.apex, typing=typing)


def roundtrip_unit(c: Cocone, f: CartesianFamily) -> RoundtripReport:
    """Compare a cartesian family with its pushforward-then-pullback image.

    The comparison at vertex i pairs the family's leg with the colimit leg
    of its domain; it always commutes with both projections, so the family
    embeds into the round-tripped one exactly when the comparison is
    bijective at every sort.  A failure here exhibits a concrete instance
    refuting the Van Kampen property.
    """
    t = pushforward(c, f)
    e_colim = colimit_universal(f.domain)
    report = RoundtripReport(passed=True)
    d = c.diagram
    for v in d.shape.vertices:
        apex, pr1, pr2 = pullback(c.legs[v], t.typing)
        u = pullback_mediator(pr1, pr2, f.leg(v), e_colim.legs[v])
        report.fiber_sizes[v] = {
            s: len(apex.elements(s)) for s in d.base.sorts
        }
        if compose(pr1, u) != f.leg(v):
            raise AssertionError("unit comparison lost the typing leg")
        if not is_iso(u):
            report.passed = False
            for s in d.base.sorts:
                have = len(f.domain.components[v].elements(s))
                want = len(apex.elements(s))
                if have != want:
                    report.notes.append(
                        f"vertex {v!r}, sort {s!r}: family has {have} elements "
                        f"but the round-trip fiber has {want}"
                    )
            if not report.notes:
                report.notes.append(
                    f"vertex {v!r}: comparison is not injective"
                )
    return report


def roundtrip_counit(c: Cocone, t: TypedInstance) -> RoundtripReport:
    """Compare a typed instance with its pullback-then-pushforward image.

    The comparison is mediated out of the fiber family's colimit by the
    instance-side projections.  In a presheaf topos it is an isomorphism
    for every input; a failure therefore signals a defect in the engine,
    not in the input.
    """
    family = pullback_along_cocone(c, t)
    back = pushforward(c, family)
    e_colim = colimit_universal(family.domain)
    lam = instance_projections(c, t)
    report = RoundtripReport(passed=True)
    if not c.diagram.shape.vertices:
        if not t.instance.is_empty():
            report.passed = False
            report.notes.append("instance over the empty colimit must be empty")
        return report
    v = mediating_morphism(e_colim, lam, target=t.instance)
    if not is_iso(v):
        report.passed = False
        report.notes.append("counit comparison is not bijective")
        return report
    if compose(t.typing, v) != back.typing:
        report.passed = False
        report.notes.append("counit comparison does not respect typings")
    return report


# ---------------------------------------------------------------------------
# sampling

def _fiberwise_family(
    c: Cocone, size: int, perms: dict[str, list[int]]
) -> CartesianFamily:
    """Cartesian family with a constant fiber of the given size over every
    component element, edge maps twisting the fiber index by a fixed
    permutation per edge."""
    d = c.diagram
    components: dict[str, Presheaf] = {}
    legs: dict[str, PresheafMorphism] = {}
    for v in d.shape.vertices:
        p = d.components[v]
        carriers = {
            s: tuple(f"{x}.{r}" for x in p.elements(s) for r in range(size))
            for s in d.base.sorts
        }
        tables = {
            o.name: {
                f"{x}.{r}": f"{p.apply(o.name, x)}.{r}"
                for x in p.elements(o.src)
                for r in range(size)
            }
            for o in d.base.ops
        }
        components[v] = Presheaf(base=d.base, carriers=carriers, tables=tables)
        legs[v] = PresheafMorphism(
            domain=components[v],
            codomain=p,
            maps={
                s: {f"{x}.{r}": x for x in p.elements(s) for r in range(size)}
                for s in d.base.sorts
            },
        )
    arrows: dict[str, PresheafMorphism] = {}
    for e in d.shape.edges:
        perm = perms[e.name]
        f = d.arrows[e.name]
        arrows[e.name] = PresheafMorphism(
            domain=components[e.src],
            codomain=components[e.dst],
            maps={
                s: {
                    f"{x}.{r}": f"{f.maps[s][x]}.{perm[r]}"
                    for x in d.components[e.src].elements(s)
                    for r in range(size)
                }
                for s in d.base.sorts
            },
        )
    domain = Diagram(shape=d.shape, base=d.base, components=components, arrows=arrows)
    trans = DiagramTransformation(domain=domain, codomain=d, legs=legs)
    return CartesianFamily(transformation=trans)


def sample_cartesian_families(
    d, c: Cocone, budget: int, seed: int
) -> list[CartesianFamily]:
    """Deterministic mix of sampled cartesian families over ``c``.

    Odd slots pull a random typed instance back along the cocone (always
    cartesian); even slots build a constant-fiber family with per-edge index
    twists.  Every emitted family passes cartesian_check.
    """
    from .randgen import random_typed_instance

    rng = random.Random(seed)
    out: list[CartesianFamily] = []
    for k in range(budget):
        if k % 2 == 0:
            size = rng.randint(1, 3)
            perms = {}
            for e in d.shape.edges:
                perm = list(range(size))
                rng.shuffle(perm)
                perms[e.name] = perm
            fam = _fiberwise_family(c, size, perms)
        else:
            t = random_typed_instance(c.apex, rng)
            fam = pullback_along_cocone(c, t)
        ok, failing = cartesian_check(fam.transformation)
        if not ok:
            raise AssertionError(f"sampled family is not cartesian at {failing!r}")
        out.append(fam)
    return out
