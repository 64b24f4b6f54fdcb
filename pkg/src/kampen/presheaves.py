"""Finite presheaves on a free base category and their basic (co)limits.

The base category is given by a finite multigraph signature: a set of sorts
and a set of unary operation symbols between them.  A presheaf assigns a
finite carrier set to every sort and a total lookup table to every operation
symbol; a morphism is a sortwise map commuting with all tables.

Everything here is deterministic: carriers keep their construction order,
and sets built by the engine (coproducts, pullback fibers, quotient classes)
get canonical, reproducible element identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


@dataclass(frozen=True)
class OpSymbol:
    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class BaseSignature:
    """Sorts plus unary operation symbols (a finite multigraph)."""

    sorts: tuple[str, ...]
    ops: tuple[OpSymbol, ...]

    def op(self, name: str) -> OpSymbol:
        for o in self.ops:
            if o.name == name:
                return o
        raise KeyError(f"unknown operation symbol {name!r}")

    def ops_from(self, sort: str) -> list[OpSymbol]:
        return [o for o in self.ops if o.src == sort]

    def validate(self) -> list[str]:
        report = []
        if len(set(self.sorts)) != len(self.sorts):
            report.append("duplicate sort names")
        names = [o.name for o in self.ops]
        if len(set(names)) != len(names):
            report.append("duplicate operation names")
        for o in self.ops:
            if o.src not in self.sorts:
                report.append(f"op {o.name!r}: unknown source sort {o.src!r}")
            if o.dst not in self.sorts:
                report.append(f"op {o.name!r}: unknown target sort {o.dst!r}")
        return report


@dataclass
class Presheaf:
    """Finite functor out of the free category on ``base``.

    ``carriers`` maps each sort to an ordered tuple of element ids (opaque
    strings, unique within their carrier).  ``tables`` maps each operation
    name to a dict sending every element of the source carrier to an element
    of the target carrier.
    """

    base: BaseSignature
    carriers: dict[str, tuple[str, ...]]
    tables: dict[str, dict[str, str]]

    def elements(self, sort: str) -> tuple[str, ...]:
        return self.carriers.get(sort, ())

    def apply(self, op_name: str, elt: str) -> str:
        return self.tables[op_name][elt]

    def size(self) -> int:
        return sum(len(v) for v in self.carriers.values())

    def is_empty(self) -> bool:
        return self.size() == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Presheaf):
            return NotImplemented
        return (
            self.base == other.base
            and self.carriers == other.carriers
            and self.tables == other.tables
        )


@dataclass
class PresheafMorphism:
    """Sortwise map between presheaves, natural for every operation."""

    domain: Presheaf
    codomain: Presheaf
    maps: dict[str, dict[str, str]]

    def apply(self, sort: str, elt: str) -> str:
        return self.maps[sort][elt]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PresheafMorphism):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and self.maps == other.maps
        )


def validate_presheaf(sig: BaseSignature, p: Presheaf) -> list[str]:
    """Check carrier/table well-formedness; empty report means valid."""
    report = list(sig.validate())
    if p.base != sig:
        report.append("presheaf carries a different base signature")
    for sort in sig.sorts:
        elts = p.carriers.get(sort)
        if elts is None:
            report.append(f"missing carrier for sort {sort!r}")
            continue
        if len(set(elts)) != len(elts):
            report.append(f"duplicate element ids in carrier {sort!r}")
    for sort in p.carriers:
        if sort not in sig.sorts:
            report.append(f"carrier for unknown sort {sort!r}")
    for o in sig.ops:
        table = p.tables.get(o.name)
        if table is None:
            report.append(f"missing table for op {o.name!r}")
            continue
        src = set(p.carriers.get(o.src, ()))
        dst = set(p.carriers.get(o.dst, ()))
        if set(table) != src:
            missing = sorted(src - set(table))
            extra = sorted(set(table) - src)
            if missing:
                report.append(f"op {o.name!r}: no value for {missing[0]!r}")
            if extra:
                report.append(f"op {o.name!r}: value for foreign element {extra[0]!r}")
        for x, y in table.items():
            if x in src and y not in dst:
                report.append(f"op {o.name!r}: {x!r} maps outside target carrier ({y!r})")
    for name in p.tables:
        if all(o.name != name for o in sig.ops):
            report.append(f"table for unknown op {name!r}")
    return report


def validate_morphism(f: PresheafMorphism) -> list[str]:
    """Check totality, codomain membership and naturality; names offenders."""
    report: list[str] = []
    sig = f.domain.base
    if f.codomain.base != sig:
        report.append("domain and codomain live over different base signatures")
        return report
    for sort in sig.sorts:
        comp = f.maps.get(sort)
        if comp is None:
            report.append(f"missing component at sort {sort!r}")
            continue
        dom = set(f.domain.elements(sort))
        cod = set(f.codomain.elements(sort))
        if set(comp) != dom:
            for x in sorted(dom - set(comp)):
                report.append(f"sort {sort!r}: no image for {x!r}")
            for x in sorted(set(comp) - dom):
                report.append(f"sort {sort!r}: image assigned to foreign element {x!r}")
        for x, y in comp.items():
            if x in dom and y not in cod:
                report.append(f"sort {sort!r}: {x!r} maps outside codomain ({y!r})")
    if report:
        return report
    for o in sig.ops:
        for x in f.domain.elements(o.src):
            lhs = f.maps[o.dst][f.domain.apply(o.name, x)]
            rhs = f.codomain.apply(o.name, f.maps[o.src][x])
            if lhs != rhs:
                report.append(
                    f"naturality fails for op {o.name!r} at element {x!r}: "
                    f"{lhs!r} != {rhs!r}"
                )
    return report


def identity(p: Presheaf) -> PresheafMorphism:
    return PresheafMorphism(
        domain=p,
        codomain=p,
        maps={s: {x: x for x in p.elements(s)} for s in p.base.sorts},
    )


def is_identity(f: PresheafMorphism) -> bool:
    if f.domain != f.codomain:
        return False
    return all(
        all(f.maps[s][x] == x for x in f.domain.elements(s)) for s in f.domain.base.sorts
    )


def compose(g: PresheafMorphism, f: PresheafMorphism) -> PresheafMorphism:
    """g after f."""
    if f.codomain != g.domain:
        raise ValueError("composition mismatch: codomain of f is not domain of g")
    maps = {
        s: {x: g.maps[s][f.maps[s][x]] for x in f.domain.elements(s)}
        for s in f.domain.base.sorts
    }
    return PresheafMorphism(domain=f.domain, codomain=g.codomain, maps=maps)


def is_monic(f: PresheafMorphism) -> bool:
    for s in f.domain.base.sorts:
        comp = f.maps[s]
        if len(set(comp.values())) != len(comp):
            return False
    return True


def image(f: PresheafMorphism, sort: str) -> set[str]:
    return set(f.maps[sort].values())


# ---------------------------------------------------------------------------
# coproducts

def tag(component: str, elt: str) -> str:
    return f"{component}:{elt}"


def untag(tagged: str) -> tuple[str, str]:
    comp, _, elt = tagged.partition(":")
    return comp, elt


def coproduct(
    ps: Sequence[Presheaf], tags: Sequence[str] | None = None
) -> tuple[Presheaf, list[PresheafMorphism]]:
    """Disjoint union with injections; elements are tagged ``comp:elt``.

    All summands must share one base signature.  The empty family over an
    unknown base cannot be formed, so ``ps`` must be nonempty here; diagram
    level code handles the empty case where a base is available.
    """
    if not ps:
        raise ValueError("coproduct of the empty family needs an explicit base")
    base = ps[0].base
    for p in ps[1:]:
        if p.base != base:
            raise ValueError("coproduct over mixed base signatures")
    if tags is None:
        tags = [str(i) for i in range(len(ps))]
    if len(tags) != len(ps) or len(set(tags)) != len(tags):
        raise ValueError("component tags must be distinct and match the family")
    carriers = {
        s: tuple(tag(t, x) for t, p in zip(tags, ps) for x in p.elements(s))
        for s in base.sorts
    }
    tables: dict[str, dict[str, str]] = {}
    for o in base.ops:
        tables[o.name] = {
            tag(t, x): tag(t, p.apply(o.name, x))
            for t, p in zip(tags, ps)
            for x in p.elements(o.src)
        }
    total = Presheaf(base=base, carriers=carriers, tables=tables)
    injections = [
        PresheafMorphism(
            domain=p,
            codomain=total,
            maps={s: {x: tag(t, x) for x in p.elements(s)} for s in base.sorts},
        )
        for t, p in zip(tags, ps)
    ]
    return total, injections


def empty_presheaf(base: BaseSignature) -> Presheaf:
    return Presheaf(
        base=base,
        carriers={s: () for s in base.sorts},
        tables={o.name: {} for o in base.ops},
    )


def copair(
    fs: Sequence[PresheafMorphism],
    injections: Sequence[PresheafMorphism],
) -> PresheafMorphism:
    """Mediating morphism out of a coproduct given one leg per summand."""
    if not fs:
        raise ValueError("copairing needs at least one leg")
    total = injections[0].codomain
    target = fs[0].codomain
    maps: dict[str, dict[str, str]] = {s: {} for s in total.base.sorts}
    for f, inj in zip(fs, injections):
        if f.codomain != target:
            raise ValueError("copairing legs must share a codomain")
        for s in total.base.sorts:
            for x in f.domain.elements(s):
                maps[s][inj.maps[s][x]] = f.maps[s][x]
    return PresheafMorphism(domain=total, codomain=target, maps=maps)


# ---------------------------------------------------------------------------
# pullbacks

def pair_id(a: str, b: str) -> str:
    return f"{a}|{b}"


def pullback(
    f: PresheafMorphism, g: PresheafMorphism
) -> tuple[Presheaf, PresheafMorphism, PresheafMorphism]:
    """Chosen pullback of a cospan f: A -> C <- B :g.

    The fiber carrier at each sort is ``{(a, b) | f(a) = g(b)}`` with ids
    ``a|b``, canonically ordered.  Pulling back along an identity returns the
    other morphism's domain on the nose, so chosen pullbacks of identities
    are identities.
    """
    if f.codomain != g.codomain:
        raise ValueError("pullback needs a common codomain")
    if is_identity(g):
        return f.domain, identity(f.domain), f
    if is_identity(f):
        return g.domain, g, identity(g.domain)
    base = f.domain.base
    carriers: dict[str, tuple[str, ...]] = {}
    legs_a: dict[str, dict[str, str]] = {}
    legs_b: dict[str, dict[str, str]] = {}
    for s in base.sorts:
        pairs = sorted(
            pair_id(a, b)
            for a in f.domain.elements(s)
            for b in g.domain.elements(s)
            if f.maps[s][a] == g.maps[s][b]
        )
        carriers[s] = tuple(pairs)
        legs_a[s] = {pid: pid.split("|", 1)[0] for pid in pairs}
        legs_b[s] = {pid: pid.split("|", 1)[1] for pid in pairs}
    tables: dict[str, dict[str, str]] = {}
    for o in base.ops:
        tables[o.name] = {}
        for pid in carriers[o.src]:
            a, b = pid.split("|", 1)
            tables[o.name][pid] = pair_id(
                f.domain.apply(o.name, a), g.domain.apply(o.name, b)
            )
    apex = Presheaf(base=base, carriers=carriers, tables=tables)
    p1 = PresheafMorphism(domain=apex, codomain=f.domain, maps=legs_a)
    p2 = PresheafMorphism(domain=apex, codomain=g.domain, maps=legs_b)
    return apex, p1, p2


def pullback_mediator(
    p1: PresheafMorphism,
    p2: PresheafMorphism,
    u1: PresheafMorphism,
    u2: PresheafMorphism,
) -> PresheafMorphism:
    """Unique u into the apex of (p1, p2) with p1 . u = u1 and p2 . u = u2.

    Works for any jointly-monic projection pair (chosen pullbacks are), by
    looking apex elements up through their projection pair.  Raises
    ValueError when some required pair has no apex element — i.e. the span
    does not factor.
    """
    apex = p1.domain
    lookup: dict[str, dict[tuple[str, str], str]] = {}
    for s in apex.base.sorts:
        lookup[s] = {}
        for z in apex.elements(s):
            key = (p1.maps[s][z], p2.maps[s][z])
            if key in lookup[s]:
                raise ValueError("projections are not jointly monic")
            lookup[s][key] = z
    maps: dict[str, dict[str, str]] = {}
    for s in apex.base.sorts:
        maps[s] = {}
        for x in u1.domain.elements(s):
            key = (u1.maps[s][x], u2.maps[s][x])
            if key not in lookup[s]:
                raise ValueError(
                    f"span does not factor through the pullback at sort {s!r}, "
                    f"element {x!r}"
                )
            maps[s][x] = lookup[s][key]
    return PresheafMorphism(domain=u1.domain, codomain=apex, maps=maps)


# ---------------------------------------------------------------------------
# congruences and quotients

@dataclass
class Congruence:
    """Partition of a presheaf's carriers, sortwise, as element -> class rep.

    Representatives are the lexicographically least members of their class,
    which makes quotient carriers reproducible.
    """

    presheaf: Presheaf
    reps: dict[str, dict[str, str]]

    def rep(self, sort: str, elt: str) -> str:
        return self.reps[sort][elt]

    def classes(self, sort: str) -> list[tuple[str, ...]]:
        buckets: dict[str, list[str]] = {}
        for x in self.presheaf.elements(sort):
            buckets.setdefault(self.reps[sort][x], []).append(x)
        return [tuple(sorted(v)) for _, v in sorted(buckets.items())]

    def same(self, sort: str, a: str, b: str) -> bool:
        return self.reps[sort][a] == self.reps[sort][b]


class _UnionFind:
    """Plain union-find over opaque keys, with optional union event log."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> bool:
        """Merge; returns True when the two were already joined (redundant)."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return True
        # keep the lexicographically least key as root so reps are canonical
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return False


def close_congruence(
    p: Presheaf,
    pairs: Iterable[tuple[str, str, str]],
    redundant_log: list[tuple[str, str, str]] | None = None,
) -> Congruence:
    """Smallest congruence containing the given (sort, a, b) pairs.

    Closure propagates through all operation tables with a worklist, so the
    result is op-compatible even when the input family is not op-closed.
    When ``redundant_log`` is passed, base pairs whose endpoints were already
    merged at processing time are recorded there.
    """
    uf: dict[str, _UnionFind] = {s: _UnionFind() for s in p.base.sorts}
    for s in p.base.sorts:
        for x in p.elements(s):
            uf[s].add(x)
    work: list[tuple[str, str, str]] = []
    for sort, a, b in pairs:
        if a not in uf[sort].parent or b not in uf[sort].parent:
            raise ValueError(f"congruence pair mentions foreign element at sort {sort!r}")
        already = uf[sort].union(a, b)
        if already and redundant_log is not None:
            redundant_log.append((sort, a, b))
        if not already:
            work.append((sort, a, b))
    ops_by_src: dict[str, list[OpSymbol]] = {s: p.base.ops_from(s) for s in p.base.sorts}
    while work:
        sort, a, b = work.pop()
        for o in ops_by_src[sort]:
            oa, ob = p.apply(o.name, a), p.apply(o.name, b)
            if not uf[o.dst].union(oa, ob):
                work.append((o.dst, oa, ob))
    reps = {
        s: {x: uf[s].find(x) for x in p.elements(s)} for s in p.base.sorts
    }
    return Congruence(presheaf=p, reps=reps)


def congruence_from_morphism(f: PresheafMorphism) -> Congruence:
    """Kernel congruence: two elements are related iff f identifies them."""
    reps: dict[str, dict[str, str]] = {}
    for s in f.domain.base.sorts:
        by_image: dict[str, list[str]] = {}
        for x in f.domain.elements(s):
            by_image.setdefault(f.maps[s][x], []).append(x)
        reps[s] = {}
        for members in by_image.values():
            least = min(members)
            for x in members:
                reps[s][x] = least
    return Congruence(presheaf=f.domain, reps=reps)


def quotient(p: Presheaf, c: Congruence) -> tuple[Presheaf, PresheafMorphism]:
    """Quotient presheaf and its canonical projection.

    The partition must be op-compatible; otherwise a ValueError names a
    witnessing pair.  Class ids are the representatives (least members).
    """
    if c.presheaf != p:
        raise ValueError("congruence was built over a different presheaf")
    for o in p.base.ops:
        for x in p.elements(o.src):
            r = c.rep(o.src, x)
            if r == x:
                continue
            ox, orr = p.apply(o.name, x), p.apply(o.name, r)
            if c.rep(o.dst, ox) != c.rep(o.dst, orr):
                raise ValueError(
                    f"partition is not op-compatible: op {o.name!r} separates the "
                    f"class of {x!r} and {r!r} at sort {o.src!r} "
                    f"(witness pair ({ox!r}, {orr!r}) at sort {o.dst!r})"
                )
    carriers = {
        s: tuple(sorted({c.rep(s, x) for x in p.elements(s)})) for s in p.base.sorts
    }
    tables = {
        o.name: {
            r: c.rep(o.dst, p.apply(o.name, r)) for r in carriers[o.src]
        }
        for o in p.base.ops
    }
    q = Presheaf(base=p.base, carriers=carriers, tables=tables)
    proj = PresheafMorphism(
        domain=p,
        codomain=q,
        maps={s: {x: c.rep(s, x) for x in p.elements(s)} for s in p.base.sorts},
    )
    return q, proj


def is_iso(f: PresheafMorphism) -> bool:
    return is_monic(f) and all(
        len(set(f.maps[s].values())) == len(f.codomain.elements(s))
        for s in f.domain.base.sorts
    )


def invert(f: PresheafMorphism) -> PresheafMorphism:
    if not is_iso(f):
        raise ValueError("morphism is not an isomorphism")
    maps = {
        s: {y: x for x, y in f.maps[s].items()} for s in f.domain.base.sorts
    }
    return PresheafMorphism(domain=f.codomain, codomain=f.domain, maps=maps)
