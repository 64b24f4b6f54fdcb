"""Mapping paths: zig-zag element chains through a diagram at a fixed sort.

A segment records one hop between elements of two diagram components along
a shape edge, traversed either forward (the arrow sends left to right) or
opposite (the arrow sends right to left).  Paths are finite segment chains;
the engine cares about *proper* paths, which never use two weakly equal
segments, and about inner-cycle-free ones, which revisit no element except
possibly closing up at the ends.
"""

from __future__ import annotations

from dataclasses import dataclass

from .shapes import Diagram

PATH_CAP = 100_000

Ref = tuple[str, str]  # (shape vertex, element id)


class PathOverflowError(RuntimeError):
    """Raised when a single enumeration exceeds PATH_CAP paths."""


@dataclass(frozen=True)
class PathSegment:
    """One hop at a fixed sort.

    Forward (op=False) along edge d: i -> j means left sits in the component
    at i and the arrow for d maps it to right.  Opposite (op=True) means
    left sits in the component at j and the arrow maps right to left.
    """

    left: Ref
    edge: str
    op: bool
    right: Ref

    def reversed(self) -> "PathSegment":
        return PathSegment(left=self.right, edge=self.edge, op=not self.op, right=self.left)

    def key(self) -> tuple:
        # opposite orientation sorts before forward; this choice fixes all
        # canonical witness orderings produced by the engine
        return (self.edge, 0 if self.op else 1, self.left, self.right)


def weak_equal(s1: PathSegment, s2: PathSegment) -> bool:
    """Equal on the nose or equal after reversing one of the two."""
    return s1 == s2 or s1 == s2.reversed()


def segment_class(s: PathSegment) -> tuple:
    """Canonical key of the weak-equality class of a segment."""
    return min(s.key(), s.reversed().key())


@dataclass(frozen=True)
class MappingPath:
    """Chain of segments at one sort; empty paths remember their anchor."""

    sort: str
    segments: tuple[PathSegment, ...]
    anchor: Ref | None = None  # required iff segments is empty

    def __post_init__(self) -> None:
        if not self.segments and self.anchor is None:
            raise ValueError("empty path needs an anchor element")

    @property
    def start(self) -> Ref:
        return self.segments[0].left if self.segments else self.anchor  # type: ignore[return-value]

    @property
    def end(self) -> Ref:
        return self.segments[-1].right if self.segments else self.anchor  # type: ignore[return-value]

    def refs(self) -> list[Ref]:
        out = [self.start]
        out.extend(s.right for s in self.segments)
        return out

    def key(self) -> tuple:
        return tuple(s.key() for s in self.segments)

    def __len__(self) -> int:
        return len(self.segments)


def reverse_path(p: MappingPath) -> MappingPath:
    return MappingPath(
        sort=p.sort,
        segments=tuple(s.reversed() for s in reversed(p.segments)),
        anchor=p.anchor,
    )


def concat_paths(p: MappingPath, q: MappingPath) -> MappingPath:
    if p.sort != q.sort:
        raise ValueError("cannot concatenate paths at different sorts")
    if p.end != q.start:
        raise ValueError(f"paths do not chain: {p.end!r} vs {q.start!r}")
    anchor = p.anchor if not (p.segments or q.segments) else None
    return MappingPath(sort=p.sort, segments=p.segments + q.segments, anchor=anchor)


def is_proper(p: MappingPath) -> bool:
    seen = set()
    for s in p.segments:
        c = segment_class(s)
        if c in seen:
            return False
        seen.add(c)
    return True


def is_inner_cycle_free(p: MappingPath) -> bool:
    """No repeated element except possibly first == last."""
    refs = p.refs()
    n = len(p.segments)
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if refs[i] == refs[j] and not (i == 0 and j == n):
                return False
    return True


def reduce_inner_cycles(p: MappingPath) -> MappingPath:
    """Cut out inner cycles until none remain.

    Each step removes the segment stretch between the earliest repeated
    element and its last later occurrence (ignoring the outer pair).  The
    result is a subsequence with the same endpoints, so properness is
    preserved.
    """
    segs = list(p.segments)
    while True:
        refs = [p.start] + [s.right for s in segs] if segs else [p.start]
        n = len(segs)
        cut = None
        for i in range(n + 1):
            for j in range(n, i, -1):
                if refs[i] == refs[j] and not (i == 0 and j == n):
                    cut = (i, j)
                    break
            if cut:
                break
        if not cut:
            break
        i, j = cut
        segs = segs[:i] + segs[j:]
    if segs:
        return MappingPath(sort=p.sort, segments=tuple(segs))
    return MappingPath(sort=p.sort, segments=(), anchor=p.start)


def canonical_cycle(p: MappingPath) -> MappingPath:
    """Normal form of a cyclic path: least rotation over both directions.

    Two cyclic paths describe the same loop when one is a rotation of the
    other or of its reverse; this picks the representative with the least
    path key, so loop witnesses compare by equality.
    """
    if p.start != p.end:
        raise ValueError("canonical_cycle applies to cyclic paths only")
    if not p.segments:
        return p
    candidates = []
    for q in (p, reverse_path(p)):
        segs = q.segments
        for k in range(len(segs)):
            candidates.append(MappingPath(sort=p.sort, segments=segs[k:] + segs[:k]))
    return min(candidates, key=MappingPath.key)


def validate_path(d: Diagram, p: MappingPath) -> list[str]:
    """Check that every segment matches the diagram's tables and chains up."""
    report: list[str] = []
    if p.sort not in d.base.sorts:
        return [f"unknown sort {p.sort!r}"]

    def check_ref(r: Ref, where: str) -> None:
        comp, elt = r
        if comp not in d.components:
            report.append(f"{where}: unknown component {comp!r}")
        elif elt not in d.components[comp].elements(p.sort):
            report.append(f"{where}: {elt!r} not in component {comp!r} at sort {p.sort!r}")

    if not p.segments:
        check_ref(p.start, "anchor")
        return report
    prev: Ref | None = None
    for k, s in enumerate(p.segments):
        where = f"segment {k}"
        check_ref(s.left, where)
        check_ref(s.right, where)
        if report:
            return report
        try:
            e = d.shape.edge(s.edge)
        except KeyError:
            report.append(f"{where}: unknown edge {s.edge!r}")
            return report
        arrow = d.arrows[s.edge]
        if s.op:
            if s.left[0] != e.dst or s.right[0] != e.src:
                report.append(f"{where}: opposite segment does not sit on edge {s.edge!r}")
            elif arrow.maps[p.sort][s.right[1]] != s.left[1]:
                report.append(f"{where}: arrow for {s.edge!r} does not map {s.right[1]!r} to {s.left[1]!r}")
        else:
            if s.left[0] != e.src or s.right[0] != e.dst:
                report.append(f"{where}: forward segment does not sit on edge {s.edge!r}")
            elif arrow.maps[p.sort][s.left[1]] != s.right[1]:
                report.append(f"{where}: arrow for {s.edge!r} does not map {s.left[1]!r} to {s.right[1]!r}")
        if prev is not None and s.left != prev:
            report.append(f"{where}: does not chain onto previous segment")
        prev = s.right
    return report


# ---------------------------------------------------------------------------
# enumeration

class PathScanner:
    """Reusable proper-path walker for one diagram at one sort.

    Building the walker materializes every possible segment together with
    its weak-equality class; scans over many element pairs then share that
    work instead of redoing it per pair.
    """

    __slots__ = ("sort", "adj")

    def __init__(self, d: Diagram, sort: str):
        self.sort = sort
        # adjacency entries are (segment, weak-class, segment-key); keys are
        # precomputed once so path ordering never recomputes them
        adj: dict[Ref, list[tuple[PathSegment, tuple, tuple]]] = {}
        for v in d.shape.vertices:
            for x in d.components[v].elements(sort):
                adj[(v, x)] = []
        for e in d.shape.edges:
            arrow = d.arrows[e.name]
            for x in d.components[e.src].elements(sort):
                y = arrow.maps[sort][x]
                fwd = PathSegment(left=(e.src, x), edge=e.name, op=False, right=(e.dst, y))
                opp = PathSegment(left=(e.dst, y), edge=e.name, op=True, right=(e.src, x))
                fk = fwd.key()
                ok = opp.key()
                cls = min(fk, ok)
                adj[(e.src, x)].append((fwd, cls, fk))
                adj[(e.dst, y)].append((opp, cls, ok))
        for ref in adj:
            adj[ref].sort(key=lambda entry: entry[2])
        self.adj = adj

    def _require(self, z: Ref) -> None:
        if z not in self.adj:
            raise ValueError(f"element {z!r} not present at sort {self.sort!r}")

    def collect_keyed(
        self, z: Ref, targets: set[Ref] | None, include_empty: bool
    ) -> list[tuple[tuple, MappingPath]]:
        """Proper paths from z ending in ``targets`` (None = any end), each
        decorated with its canonical sort key ``(length, segment keys)``."""
        self._require(z)
        adj = self.adj
        sort = self.sort
        out: list[tuple[tuple, MappingPath]] = []
        if include_empty and (targets is None or z in targets):
            out.append(((0, ()), MappingPath(sort=sort, segments=(), anchor=z)))
        used: set[tuple] = set()
        stack: list[PathSegment] = []
        kstack: list[tuple] = []

        def walk(cur: Ref) -> None:
            for s, c, k in adj[cur]:
                if c in used:
                    continue
                if targets is None or s.right in targets:
                    stack.append(s)
                    kstack.append(k)
                    out.append(
                        ((len(stack), tuple(kstack)), MappingPath(sort=sort, segments=tuple(stack)))
                    )
                    if len(out) > PATH_CAP:
                        raise PathOverflowError(
                            f"more than {PATH_CAP} proper paths from {z!r} "
                            f"at sort {sort!r}"
                        )
                else:
                    stack.append(s)
                    kstack.append(k)
                used.add(c)
                walk(s.right)
                used.discard(c)
                stack.pop()
                kstack.pop()

        walk(z)
        return out

    def count_tree(self, z: Ref) -> dict[Ref, int]:
        """Number of proper paths from z per endpoint, without building any
        path objects.  The empty path puts a 1 at z itself."""
        self._require(z)
        adj = self.adj
        counts: dict[Ref, int] = {z: 1}
        total = 0
        used: set[tuple] = set()
        # iterative DFS: one live iterator per depth, trail of entering classes
        stack = [iter(adj[z])]
        trail: list[tuple] = []
        while stack:
            descended = False
            for s, c, _ in stack[-1]:
                if c in used:
                    continue
                r = s.right
                counts[r] = counts.get(r, 0) + 1
                total += 1
                if total > PATH_CAP:
                    raise PathOverflowError(
                        f"more than {PATH_CAP} proper paths from {z!r} "
                        f"at sort {self.sort!r}"
                    )
                used.add(c)
                trail.append(c)
                stack.append(iter(adj[r]))
                descended = True
                break
            if not descended:
                stack.pop()
                if stack:
                    used.discard(trail.pop())
        return counts

    def collect(
        self, z: Ref, targets: set[Ref] | None, include_empty: bool
    ) -> list[MappingPath]:
        """All proper paths from z ending in ``targets`` (None = any end)."""
        return [p for _, p in self.collect_keyed(z, targets, include_empty)]

    def enumerate(
        self, z: Ref, z2: Ref, inner_cycle_free_only: bool = False
    ) -> list[MappingPath]:
        keyed = self.collect_keyed(z, {z2}, include_empty=(z == z2))
        keyed.sort(key=lambda kp: kp[0])
        paths = [p for _, p in keyed]
        if inner_cycle_free_only:
            paths = [p for p in paths if is_inner_cycle_free(p)]
        return paths

    def cycles(self, z: Ref) -> list[MappingPath]:
        keyed = self.collect_keyed(z, {z}, include_empty=False)
        keyed.sort(key=lambda kp: kp[0])
        return [p for _, p in keyed]

    def count(self, z: Ref, z2: Ref, limit: int) -> int:
        """Number of proper paths from z to z2; counting stops at ``limit``."""
        self._require(z)
        adj = self.adj
        found = 1 if z == z2 else 0
        if found >= limit:
            return found
        used: set[tuple] = set()

        def walk(cur: Ref, found: int) -> int:
            for s, c, _ in adj[cur]:
                if c in used:
                    continue
                if s.right == z2:
                    found += 1
                    if found >= limit:
                        return found
                used.add(c)
                found = walk(s.right, found)
                used.discard(c)
                if found >= limit:
                    return found
            return found

        return walk(z, found)

    def has_cycle(self, z: Ref) -> MappingPath | None:
        """Some nonempty proper path from z back to z, else None."""
        self._require(z)
        adj = self.adj
        used: set[tuple] = set()

        def walk(cur: Ref, segs: tuple[PathSegment, ...]) -> MappingPath | None:
            for s, c, _ in adj[cur]:
                if c in used:
                    continue
                nxt = segs + (s,)
                if s.right == z:
                    return MappingPath(sort=self.sort, segments=nxt)
                used.add(c)
                hit = walk(s.right, nxt)
                used.discard(c)
                if hit is not None:
                    return hit
            return None

        return walk(z, ())


def enumerate_proper_paths(
    d: Diagram,
    sort: str,
    z: Ref,
    z2: Ref,
    inner_cycle_free_only: bool = False,
) -> list[MappingPath]:
    """Complete list of proper paths from z to z2, shortest first then by key.

    Includes the empty path when z == z2.  Properness bounds the length, so
    the enumeration terminates; it aborts via PathOverflowError if the list
    would exceed PATH_CAP.
    """
    return PathScanner(d, sort).enumerate(z, z2, inner_cycle_free_only)


def enumerate_cyclic_proper(d: Diagram, sort: str, z: Ref) -> list[MappingPath]:
    """All nonempty proper paths from z back to z, canonical order."""
    return PathScanner(d, sort).cycles(z)


def count_proper_paths(d: Diagram, sort: str, z: Ref, z2: Ref, limit: int) -> int:
    """Number of proper paths from z to z2, counting stops at ``limit``."""
    return PathScanner(d, sort).count(z, z2, limit)


def has_proper_cycle(d: Diagram, sort: str, z: Ref) -> MappingPath | None:
    """First nonempty proper cycle at z in canonical DFS order, if any."""
    return PathScanner(d, sort).has_cycle(z)
