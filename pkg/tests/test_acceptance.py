"""Acceptance gate: one test per shipping criterion, run with ``pytest -v``.

Each test is a self-contained pass/fail line; thresholds and counts are
stated inline.  Everything here is redundant with the per-module suites by
design — this file is the contract, those are the diagnostics.
"""
import json
import random
import subprocess
import sys
import time

from conftest import fixture_path

from kampen.colimits import (
    affected_minimal,
    cocones_equivalent,
    coequalizer_as_pushout,
    colimit_specialized,
    colimit_universal,
    legs_jointly_surjective,
    mediating_morphism,
    simplify_diagram,
    universal_coequalizer_form,
)
from kampen.instances import (
    CartesianFamily,
    pullback_along_cocone,
    pushforward,
    roundtrip_counit,
    roundtrip_unit,
)
from kampen.paths import (
    MappingPath,
    PathOverflowError,
    PathSegment,
    canonical_cycle,
)
from kampen.presheaves import (
    Presheaf,
    PresheafMorphism,
    compose,
    copair,
    coproduct,
    empty_presheaf,
    is_iso,
    pullback,
    pullback_mediator,
)
from kampen.randgen import (
    _with_sink,
    random_base,
    random_diagram,
    random_natural_map,
    random_parallel_pair,
    random_presheaf,
    random_typed_instance,
)
from kampen.shapes import (
    CycleOverflowError,
    classify_vertices,
    enumerate_branches,
    is_acyclic,
    undirected_cycles,
)
from kampen.verify import (
    _disjoint,
    agreement_suite,
    check_bruteforce,
    check_cyclic_branching,
    decision_route,
    domain_cycle_search,
    domain_cycle_to_distinct_paths,
    validate_domain_cycle,
    validate_witness,
)


def seg(left, edge, op, right):
    return PathSegment(left=left, edge=edge, op=op, right=right)


def test_acceptance_1_fixture_verdicts(diagram):
    """Exact verdicts on the six bundled example diagrams, witnesses
    re-validated, total runtime under one second."""
    expected = {
        "f1.json": "NotVK",
        "f2.json": "NotVK",
        "f3.json": "NotVK",
        "f4.json": "VK",
        "f5.json": "NotVK",
        "f5prime.json": "VK",
    }
    t0 = time.monotonic()
    verdicts = {name: decision_route(diagram(name)) for name in expected}
    elapsed = time.monotonic() - t0
    for name, want in expected.items():
        v = verdicts[name]
        assert v.result == want, (name, v.result)
        if want == "NotVK":
            assert v.witness is not None, name
            assert validate_witness(diagram(name), v.witness) == [], name
    assert elapsed < 1.0, f"verdicts took {elapsed:.3f}s"


def test_acceptance_2_exact_witnesses(diagram):
    """Pinned witness content, up to the canonical ordering the scan uses."""
    # parallel pair: the empty path against the up-then-down excursion
    w1 = check_bruteforce(diagram("f1.json"), "different").witness
    assert (w1.z, w1.z2) == (("2", "*2"), ("2", "*2"))
    assert w1.path1.segments == ()
    assert w1.path2.segments == (
        seg(("2", "*2"), "d", True, ("1", "*1")),
        seg(("1", "*1"), "d'", False, ("2", "*2")),
    )
    # span: the two paths through x and through y
    w2 = check_bruteforce(diagram("f2.json"), "different").witness
    assert (w2.z, w2.z2) == (("1", "*1"), ("2", "*2"))
    assert w2.path1.segments == (
        seg(("1", "*1"), "d", True, ("0", "x")),
        seg(("0", "x"), "d'", False, ("2", "*2")),
    )
    assert w2.path2.segments == (
        seg(("1", "*1"), "d", True, ("0", "y")),
        seg(("0", "y"), "d'", False, ("2", "*2")),
    )
    # metamodel matching: Sort and Type joined two ways at sort V
    w5 = check_bruteforce(diagram("f5.json"), "different").witness
    assert (w5.sort, w5.z, w5.z2) == ("V", ("1", "Sort"), ("2", "Type"))
    assert w5.path1.segments == (
        seg(("1", "Sort"), "-12", True, ("12", "S/T")),
        seg(("12", "S/T"), "12", False, ("2", "Type")),
    )
    assert w5.path2.segments == (
        seg(("1", "Sort"), "-13", True, ("13", "S/I")),
        seg(("13", "S/I"), "13", False, ("3", "Interface")),
        seg(("3", "Interface"), "23", True, ("23", "T/I")),
        seg(("23", "T/I"), "-23", False, ("2", "Type")),
    )
    # and the six-segment cycle through all three overlap components
    hexagon = MappingPath(
        sort="V",
        segments=(
            seg(("12", "S/T"), "-12", False, ("1", "Sort")),
            seg(("1", "Sort"), "-13", True, ("13", "S/I")),
            seg(("13", "S/I"), "13", False, ("3", "Interface")),
            seg(("3", "Interface"), "23", True, ("23", "T/I")),
            seg(("23", "T/I"), "-23", False, ("2", "Type")),
            seg(("2", "Type"), "12", True, ("12", "S/T")),
        ),
    )
    v5 = check_cyclic_branching(diagram("f5.json"))
    assert v5.result == "NotVK"
    assert len(v5.witness.path.segments) == 6
    assert canonical_cycle(v5.witness.path) == canonical_cycle(hexagon)


def test_acceptance_3_shape_analytics(diagram):
    """Vertex taxonomy, branches, cycles, and affected minimal indices of
    the ten-vertex example."""
    d = diagram("f6.json")
    classes = classify_vertices(d.shape)
    assert {v for v, c in classes.items() if c == "minimal"} == {"3", "8", "10"}
    assert {v for v, c in classes.items() if c == "branching"} == {"4", "6"}
    # 1 and 7 are irrelevant outright; 2 joins them once 1 is gone
    assert {v for v, c in classes.items() if c == "irrelevant"} == {"1", "2", "7"}
    _, notes = simplify_diagram(d)
    assert notes.index("dropped irrelevant vertex '1' (edge 'a')") < notes.index(
        "dropped irrelevant vertex '2' (edge 'b')"
    )
    assert {v for v, c in classes.items() if c == "jump-over"} == {"5", "9"}
    branches = enumerate_branches(d.shape)
    assert len(branches) == 4
    cycles = undirected_cycles(d.shape)
    assert len(cycles) == 1
    assert {name for name, _ in cycles[0]} == {"c", "d", "e"}
    assert affected_minimal(d) == ["8", "10"]


def test_acceptance_4_instance_roundtrips(load, diagram):
    """Unit fails on the two bundled refutations; counit is an iso on 500
    random typed instances."""
    ws1 = load("f1.json")
    c1 = colimit_universal(ws1.diagram())
    twisted = CartesianFamily(ws1.families[0].transformation)
    assert not roundtrip_unit(c1, twisted).passed
    c5 = colimit_universal(load("f5.json").diagram())
    matching = CartesianFamily(load("f7.json").families[0].transformation)
    unit = roundtrip_unit(c5, matching)
    assert not unit.passed
    pushed = pushforward(c5, matching)
    fibers = pullback_along_cocone(c5, pushed).domain
    for v in ("1", "2", "3", "12", "13", "23"):
        assert len(fibers.components[v].elements("V")) == 1
        assert len(fibers.components[v].elements("E")) == 0
    checked = 0
    for name in ("f1.json", "f2.json", "f4.json", "f5.json", "f7.json"):
        c = colimit_universal(diagram(name))
        for k in range(100):
            t = random_typed_instance(c.apex, random.Random(f"{name}:{k}"))
            report = roundtrip_counit(c, t)
            assert report.passed, (name, k, report.notes)
            checked += 1
    assert checked == 500


def test_acceptance_5_checker_agreement():
    """1000 seeded random diagrams, every applicable checker, zero
    disagreements, under a minute."""
    t0 = time.monotonic()
    report = agreement_suite(count=1000, seed=0)
    elapsed = time.monotonic() - t0
    assert report.checked == 1000
    assert report.failures == []
    assert report.tally["VK"] + report.tally["NotVK"] == 1000
    assert elapsed < 60.0, f"agreement suite took {elapsed:.1f}s"


def test_acceptance_6_colimit_equivalence(diagram):
    """Universal and specialized cocones agree up to iso over the legs;
    the universal apex has the unique-mediator property."""
    for name in ("f1.json", "f2.json", "f4.json", "f5.json", "f5prime.json",
                 "f6.json", "f7.json"):
        d = diagram(name)
        assert cocones_equivalent(colimit_universal(d), colimit_specialized(d)) is not None, name
    applicable = 0
    seed = 0
    while applicable < 100:
        seed += 1
        d = random_diagram(random.Random(seed))
        if not is_acyclic(d.shape):
            continue
        u = colimit_universal(d)
        s = colimit_specialized(d)
        assert cocones_equivalent(u, s) is not None, seed
        applicable += 1
    mediated = 0
    seed = 0
    while mediated < 200:
        seed += 1
        rng = random.Random(seed)
        d = random_diagram(rng)
        if not d.shape.vertices:
            continue
        c = colimit_universal(d)
        assert legs_jointly_surjective(c), seed
        target = random_presheaf(d.base, rng, prefix="t")
        q = random_natural_map(c.apex, target, rng)
        while q is None:
            target = _with_sink(target)
            q = random_natural_map(c.apex, target, rng)
        legs = {v: compose(q, c.legs[v]) for v in d.shape.vertices}
        assert mediating_morphism(c, legs) == q, seed
        mediated += 1


def _random_square_family(seed):
    """A commuting family over one anchor map g: A -> M, every left square
    a chosen pullback."""
    rng = random.Random(seed)
    base = random_base(rng)
    m = random_presheaf(base, rng, prefix="m")
    a = random_presheaf(base, rng, prefix="a")
    g = random_natural_map(a, m, rng)
    while g is None:
        m = _with_sink(m)
        g = random_natural_map(a, m, rng)
    squares = []
    for i in range(rng.randint(2, 3)):
        mi = random_presheaf(base, rng, max_size=3, prefix=f"q{i}")
        gi = random_natural_map(mi, m, rng)
        if gi is None:
            mi = empty_presheaf(base)
            gi = PresheafMorphism(mi, m, {s: {} for s in base.sorts})
        fiber, pr1, pr2 = pullback(g, gi)
        squares.append((fiber, pr1, pr2, gi))
    return a, m, g, squares


def _coproduct_square_is_pullback(a, g, squares):
    doms = [sq[0] for sq in squares]
    tags = [str(i) for i in range(len(squares))]
    total_a, inj_a = coproduct(doms, tags=tags)
    total_m, inj_m = coproduct([sq[3].domain for sq in squares], tags=tags)
    ca = copair([sq[1] for sq in squares], inj_a)
    cf = copair(
        [compose(inj_m[i], squares[i][2]) for i in range(len(squares))], inj_a
    )
    cg = copair([sq[3] for sq in squares], inj_m)
    assert compose(g, ca) == compose(cg, cf)
    _, q1, q2 = pullback(g, cg)
    u = pullback_mediator(q1, q2, ca, cf)
    return is_iso(u)


def _op_closed_proper_subset(p):
    """Some op-closed proper subset of ``p``'s elements, or None."""
    full = {s: list(p.elements(s)) for s in p.base.sorts}
    candidates = [
        (s, x) for s in p.base.sorts for x in full[s]
    ]
    for drop_sort, drop_x in candidates:
        keep = {s: set(xs) for s, xs in full.items()}
        keep[drop_sort].discard(drop_x)
        changed = True
        while changed:
            changed = False
            for o in p.base.ops:
                for x in list(keep[o.src]):
                    y = p.apply(o.name, x)
                    if y not in keep[o.dst]:
                        keep[o.dst].add(y)
                        changed = True
        if any(len(keep[s]) < len(full[s]) for s in p.base.sorts):
            return keep
    if any(full[s] for s in p.base.sorts):
        return {s: set() for s in p.base.sorts}
    return None


def _restrict(p, keep):
    carriers = {
        s: tuple(x for x in p.elements(s) if x in keep[s]) for s in p.base.sorts
    }
    tables = {
        o.name: {x: p.apply(o.name, x) for x in carriers[o.src]}
        for o in p.base.ops
    }
    sub = Presheaf(base=p.base, carriers=carriers, tables=tables)
    incl = PresheafMorphism(
        domain=sub, codomain=p, maps={s: {x: x for x in carriers[s]} for s in p.base.sorts}
    )
    return sub, incl


def test_acceptance_7_equivalence_oracles():
    """Four lemma-level equivalences, each exercised at full count."""
    # (a)+(b) 500 random parallel pairs: a domain cycle of the transformed
    # span exists iff the span has two disjoint proper paths; the span's
    # verdict equals the parallel pair's.
    for pair_seed in range(500):
        f, g, d = random_parallel_pair(random.Random(pair_seed))
        span = coequalizer_as_pushout(f, g)
        h1, h2 = span.arrows["fold"], span.arrows["pair"]
        cyc = domain_cycle_search(h1, h2)
        assert (cyc is not None) == (
            check_bruteforce(span, "disjoint").result == "NotVK"
        ), pair_seed
        assert check_bruteforce(d).result == check_bruteforce(span).result, pair_seed
        if cyc is not None:
            assert validate_domain_cycle(h1, h2, cyc) == []
            dp = domain_cycle_to_distinct_paths(span, cyc)
            assert validate_witness(span, dp) == []
            assert _disjoint(dp.path1, dp.path2)

    # (c) path uniqueness transfers to the two-vertex parallel-pair form
    checked = 0
    seed = 0
    while checked < 200 and seed < 600:
        seed += 1
        d = random_diagram(random.Random(f"form:{seed}"))
        try:
            mine = check_bruteforce(d).result
            form = check_bruteforce(universal_coequalizer_form(d)).result
        except (PathOverflowError, CycleOverflowError):
            continue
        assert mine == form, seed
        checked += 1
    assert checked == 200

    # (d) a family of squares over one anchor consists of pullbacks iff its
    # coproduct square is one; corrupting any single square breaks it.
    squares_seen = 0
    corrupted_seen = 0
    seed = 0
    while squares_seen < 200:
        seed += 1
        a, m, g, squares = _random_square_family(seed)
        for fiber, pr1, pr2, gi in squares:
            u = pullback_mediator(*pullback(g, gi)[1:], pr1, pr2)
            assert is_iso(u), seed
        assert _coproduct_square_is_pullback(a, g, squares), seed
        squares_seen += len(squares)
        targets = [i for i, sq in enumerate(squares) if sq[0].size() > 0]
        if not targets:
            continue
        j = targets[seed % len(targets)]
        keep = _op_closed_proper_subset(squares[j][0])
        if keep is None:
            continue
        sub, incl = _restrict(squares[j][0], keep)
        broken = list(squares)
        broken[j] = (sub, compose(squares[j][1], incl), compose(squares[j][2], incl), squares[j][3])
        assert not _coproduct_square_is_pullback(a, g, broken), seed
        corrupted_seen += 1
    assert squares_seen >= 200
    assert corrupted_seen >= 50


def test_acceptance_8_reproducibility(tmp_path):
    """Byte-identical JSON and DOT output across two separate runs with the
    same seed (fresh interpreter each time)."""
    f5 = str(fixture_path("f5.json"))
    commands = [
        ["colimit", f5],
        ["check", f5, "--json"],
        ["export-dot", f5, "--witness"],
        ["selftest", "--budget", "30", "--seed", "5"],
    ]
    for cmd in commands:
        runs = [
            subprocess.run(
                [sys.executable, "-m", "kampen.cli", *cmd],
                capture_output=True,
                timeout=300,
            )
            for _ in range(2)
        ]
        assert runs[0].stdout == runs[1].stdout, cmd
        assert runs[0].stdout, cmd
        assert runs[0].returncode == runs[1].returncode, cmd
