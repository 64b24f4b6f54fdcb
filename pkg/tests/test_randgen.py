"""Seeded generators: determinism and structural validity."""
import random

from kampen.colimits import colimit_universal
from kampen.instances import validate_typed_instance
from kampen.presheaves import validate_morphism, validate_presheaf
from kampen.randgen import (
    random_base,
    random_diagram,
    random_morphism_family,
    random_natural_map,
    random_parallel_pair,
    random_presheaf,
    random_shape,
    random_span,
    random_typed_instance,
)
from kampen.shapes import validate_diagram


def test_same_seed_same_diagram():
    a = random_diagram(random.Random(5))
    b = random_diagram(random.Random(5))
    assert a == b
    assert random_diagram(random.Random(6)) != a


def test_random_diagrams_are_valid():
    for seed in range(100):
        d = random_diagram(random.Random(seed))
        assert validate_diagram(d) == [], seed
        assert len(d.shape.vertices) <= 5
        assert len(d.shape.edges) <= 6


def test_random_bases_and_presheaves_are_valid():
    for seed in range(60):
        rng = random.Random(seed)
        base = random_base(rng)
        assert base.validate() == []
        assert 1 <= len(base.sorts) <= 2
        p = random_presheaf(base, rng, prefix="p")
        assert validate_presheaf(base, p) == []
        assert all(x.startswith("p") for s in base.sorts for x in p.elements(s))


def test_random_natural_maps_validate():
    hits = 0
    for seed in range(80):
        rng = random.Random(seed)
        base = random_base(rng)
        p = random_presheaf(base, rng, prefix="a")
        q = random_presheaf(base, rng, prefix="b")
        f = random_natural_map(p, q, rng)
        if f is not None:
            hits += 1
            assert validate_morphism(f) == []
            assert f.domain == p and f.codomain == q
    assert hits > 20  # the backtracking search succeeds often enough to matter


def test_random_typed_instances_validate():
    for seed in range(40):
        rng = random.Random(seed)
        d = random_diagram(rng)
        c = colimit_universal(d)
        t = random_typed_instance(c.apex, rng)
        assert validate_typed_instance(c, t) == [], seed
        for s in t.instance.base.sorts:
            assert all(x.startswith("k") for x in t.instance.elements(s))


def test_random_shapes_bound_their_size():
    for seed in range(60):
        shape = random_shape(random.Random(seed))
        assert shape.validate() == []
        assert len(shape.vertices) <= 5 and len(shape.edges) <= 6


def test_parallel_pair_and_span_layouts():
    f, g, d = random_parallel_pair(random.Random(0))
    assert d.shape.vertices == ("1", "2")
    assert [e.name for e in d.shape.edges] == ["d", "d'"]
    assert f.domain == g.domain == d.components["1"]
    assert f.codomain == g.codomain == d.components["2"]
    assert d.arrows["d"] == f and d.arrows["d'"] == g

    span = random_span(random.Random(0))
    assert span.shape.vertices == ("0", "1", "2")
    assert [e.name for e in span.shape.edges] == ["h1", "h2"]
    assert span.arrows["h1"].domain == span.arrows["h2"].domain == span.components["0"]
    assert validate_diagram(span) == []


def test_morphism_families_are_valid():
    rng = random.Random(9)
    base = random_base(rng)
    fam = random_morphism_family(base, rng, count=5)
    assert len(fam) == 5
    for f in fam:
        assert validate_morphism(f) == []
