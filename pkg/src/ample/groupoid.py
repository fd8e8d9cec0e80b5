"""Finite groupoids with a discrete unit space, and their bisections.

A finite groupoid is stored as explicit tables: an ordered object set, an
ordered arrow set with source/target maps, a unit arrow per object, a
composition table on composable pairs, and an inversion table.  With the
unit space finite and discrete every subset of objects is compact open, so
the groupoid is ample and the compact open bisections are simply the arrow
subsets on which both the source and the target map are injective.  Those
bisections form an inverse semigroup under elementwise composition.

Arrows compose like functions: ``compose(g, h)`` is "first h, then g" and
is defined exactly when ``src[g] == dst[h]``.  An arrow g runs from
``src[g]`` to ``dst[g]``.

Declaration order of objects and arrows is the canonical iteration order
everywhere, which keeps every derived report byte-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping

from .validation import Failure, ValidationReport

ObjectId = Hashable
ArrowId = Hashable

BISECTION_ENUM_GUARD = 16  # full subset scan, 2**16 candidates at most


class SizeGuardError(ValueError):
    """Raised when an exhaustive enumeration would exceed its size guard."""


@dataclass(frozen=True)
class FiniteGroupoid:
    objects: tuple[ObjectId, ...]
    arrows: tuple[ArrowId, ...]
    src: Mapping[ArrowId, ObjectId]
    dst: Mapping[ArrowId, ObjectId]
    unit: Mapping[ObjectId, ArrowId]
    compose: Mapping[tuple[ArrowId, ArrowId], ArrowId]
    inverse: Mapping[ArrowId, ArrowId]

    def __post_init__(self) -> None:
        # Referential integrity only; the axioms live in validate_groupoid.
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("duplicate object ids")
        if len(set(self.arrows)) != len(self.arrows):
            raise ValueError("duplicate arrow ids")
        arrow_set = set(self.arrows)
        object_set = set(self.objects)
        for mapping, name in ((self.src, "src"), (self.dst, "dst")):
            if set(mapping) != arrow_set:
                raise ValueError(f"{name} map must cover exactly the arrow set")
            for g, x in mapping.items():
                if x not in object_set:
                    raise ValueError(f"{name}[{g!r}] = {x!r} is not an object")
        if set(self.unit) != object_set:
            raise ValueError("unit map must cover exactly the object set")
        for x, g in self.unit.items():
            if g not in arrow_set:
                raise ValueError(f"unit[{x!r}] = {g!r} is not an arrow")
        if set(self.inverse) != arrow_set:
            raise ValueError("inverse map must cover exactly the arrow set")
        for g, h in self.inverse.items():
            if h not in arrow_set:
                raise ValueError(f"inverse[{g!r}] = {h!r} is not an arrow")
        for (g, h), gh in self.compose.items():
            for a in (g, h, gh):
                if a not in arrow_set:
                    raise ValueError(f"compose entry {(g, h, gh)!r} references unknown arrow {a!r}")

    @cached_property
    def object_index(self) -> dict[ObjectId, int]:
        return {x: i for i, x in enumerate(self.objects)}

    @cached_property
    def arrow_index(self) -> dict[ArrowId, int]:
        return {g: i for i, g in enumerate(self.arrows)}

    def composable(self, g: ArrowId, h: ArrowId) -> bool:
        return self.src[g] == self.dst[h]

    def mul(self, g: ArrowId, h: ArrowId) -> ArrowId:
        try:
            return self.compose[(g, h)]
        except KeyError:
            raise ValueError(f"arrows {g!r} and {h!r} are not composable") from None

    def composable_pairs(self) -> Iterator[tuple[ArrowId, ArrowId]]:
        for g in self.arrows:
            for h in self.arrows:
                if self.composable(g, h):
                    yield g, h

    def hom_set(self, x: ObjectId, y: ObjectId) -> tuple[ArrowId, ...]:
        """Arrows from x to y."""
        return tuple(g for g in self.arrows if self.src[g] == x and self.dst[g] == y)

    def arrows_with_src(self, x: ObjectId) -> tuple[ArrowId, ...]:
        return tuple(g for g in self.arrows if self.src[g] == x)

    def is_unit_arrow(self, g: ArrowId) -> bool:
        return any(self.unit[x] == g for x in self.objects)

    def unit_arrows(self) -> tuple[ArrowId, ...]:
        return tuple(self.unit[x] for x in self.objects)

    def connected_components(self) -> tuple[tuple[ObjectId, ...], ...]:
        """Object classes joined by arrows (in declaration order)."""
        parent: dict[ObjectId, ObjectId] = {x: x for x in self.objects}

        def find(x: ObjectId) -> ObjectId:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in self.arrows:
            a, b = find(self.src[g]), find(self.dst[g])
            if a != b:
                parent[b] = a
        groups: dict[ObjectId, list[ObjectId]] = {}
        for x in self.objects:
            groups.setdefault(find(x), []).append(x)
        ordered = sorted(groups.values(), key=lambda grp: self.object_index[grp[0]])
        return tuple(tuple(grp) for grp in ordered)


def validate_groupoid(g: FiniteGroupoid) -> ValidationReport:
    """Check the groupoid axioms, reporting violations with witnesses."""
    failures: list[Failure] = []

    for x in g.objects:
        e = g.unit[x]
        if g.src[e] != x or g.dst[e] != x:
            failures.append(Failure("unit endpoints", f"u({x!r}) = {e!r} is not an endo-arrow at {x!r}"))

    for a in g.arrows:
        for b in g.arrows:
            defined = (a, b) in g.compose
            if g.composable(a, b) and not defined:
                failures.append(Failure("composition totality", f"({a!r},{b!r}) composable but undefined"))
            if defined and not g.composable(a, b):
                failures.append(Failure("composition domain", f"({a!r},{b!r}) defined but not composable"))

    for (a, b), ab in g.compose.items():
        if g.composable(a, b):
            if g.src[ab] != g.src[b] or g.dst[ab] != g.dst[a]:
                failures.append(Failure("composition endpoints", f"{a!r}*{b!r} = {ab!r} has wrong endpoints"))

    for a in g.arrows:
        ua = g.unit[g.dst[a]]
        au = g.unit[g.src[a]]
        if g.compose.get((ua, a)) != a or g.compose.get((a, au)) != a:
            failures.append(Failure("unit law", f"units do not act as identities on {a!r}"))

    for a in g.arrows:
        b = g.inverse[a]
        if g.src[b] != g.dst[a] or g.dst[b] != g.src[a]:
            failures.append(Failure("inverse law", f"g={a!r}: inverse has wrong endpoints"))
            continue
        if g.compose.get((b, a)) != g.unit[g.src[a]] or g.compose.get((a, b)) != g.unit[g.dst[a]]:
            failures.append(Failure("inverse law", f"g={a!r}: g⁻¹g or gg⁻¹ is not the unit"))

    for a, b in g.composable_pairs():
        ab = g.compose.get((a, b))
        if ab is None:
            continue
        for c in g.arrows:
            if not g.composable(b, c):
                continue
            bc = g.compose.get((b, c))
            if bc is None:
                continue
            left = g.compose.get((ab, c))
            right = g.compose.get((a, bc))
            if left != right:
                failures.append(Failure("associativity", f"(({a!r}{b!r}){c!r}) != ({a!r}({b!r}{c!r}))"))

    return ValidationReport("groupoid", tuple(failures))


# -- compact open object subsets -------------------------------------------


def object_subset(g: FiniteGroupoid, points: Iterable[ObjectId]) -> tuple[ObjectId, ...]:
    """Normalize a compact open subset of the unit space (declaration order)."""
    seen = set()
    for x in points:
        if x not in g.object_index:
            raise ValueError(f"unknown object id {x!r}")
        seen.add(x)
    return tuple(x for x in g.objects if x in seen)


def restrict_groupoid(g: FiniteGroupoid, points: Iterable[ObjectId]) -> FiniteGroupoid:
    """The full open subgroupoid on a subset of objects."""
    objs = object_subset(g, points)
    keep = set(objs)
    arrows = tuple(a for a in g.arrows if g.src[a] in keep and g.dst[a] in keep)
    arrow_set = set(arrows)
    return FiniteGroupoid(
        objects=objs,
        arrows=arrows,
        src={a: g.src[a] for a in arrows},
        dst={a: g.dst[a] for a in arrows},
        unit={x: g.unit[x] for x in objs},
        compose={(a, b): c for (a, b), c in g.compose.items() if a in arrow_set and b in arrow_set},
        inverse={a: g.inverse[a] for a in arrows},
    )


# -- bisections -------------------------------------------------------------


@dataclass(frozen=True)
class Bisection:
    """A compact open bisection: an arrow subset with injective src and dst."""

    arrows: tuple[ArrowId, ...]  # sorted by declaration index

    @staticmethod
    def of(g: FiniteGroupoid, arrows: Iterable[ArrowId]) -> "Bisection":
        chosen = set(arrows)
        for a in chosen:
            if a not in g.arrow_index:
                raise ValueError(f"unknown arrow id {a!r}")
        ordered = tuple(a for a in g.arrows if a in chosen)
        if not _injective_endpoints(g, ordered):
            raise ValueError(f"arrow set {sorted(map(repr, chosen))} is not a bisection")
        return Bisection(ordered)

    def __iter__(self) -> Iterator[ArrowId]:
        return iter(self.arrows)

    def __len__(self) -> int:
        return len(self.arrows)

    def __contains__(self, a: ArrowId) -> bool:
        return a in self.arrows

    def label(self) -> str:
        return "{" + ",".join(str(a) for a in self.arrows) + "}"


def _injective_endpoints(g: FiniteGroupoid, arrows: tuple[ArrowId, ...]) -> bool:
    srcs = {g.src[a] for a in arrows}
    dsts = {g.dst[a] for a in arrows}
    return len(srcs) == len(arrows) and len(dsts) == len(arrows)


def is_bisection(g: FiniteGroupoid, arrows: Iterable[ArrowId]) -> bool:
    chosen = tuple(arrows)
    for a in chosen:
        if a not in g.arrow_index:
            raise ValueError(f"unknown arrow id {a!r}")
    if len(set(chosen)) != len(chosen):
        return False
    return _injective_endpoints(g, chosen)


def bisection_product(g: FiniteGroupoid, u: Bisection, v: Bisection) -> Bisection:
    """Elementwise set product UV = {uv : defined}; always a bisection."""
    out = {g.compose[(a, b)] for a in u for b in v if g.composable(a, b)}
    return Bisection.of(g, out)


def bisection_inverse(g: FiniteGroupoid, u: Bisection) -> Bisection:
    return Bisection.of(g, (g.inverse[a] for a in u))


def unit_bisection(g: FiniteGroupoid, points: Iterable[ObjectId] | None = None) -> Bisection:
    objs = g.objects if points is None else object_subset(g, points)
    return Bisection.of(g, (g.unit[x] for x in objs))


def source_objects(g: FiniteGroupoid, u: Bisection) -> tuple[ObjectId, ...]:
    """The compact open set U^{-1}U, i.e. the source objects of U."""
    return object_subset(g, (g.src[a] for a in u))


def target_objects(g: FiniteGroupoid, u: Bisection) -> tuple[ObjectId, ...]:
    """The compact open set UU^{-1}, i.e. the target objects of U."""
    return object_subset(g, (g.dst[a] for a in u))


def enumerate_bisections(g: FiniteGroupoid) -> list[Bisection]:
    """All compact open bisections, ordered by (size, arrow indices)."""
    n = len(g.arrows)
    if n > BISECTION_ENUM_GUARD:
        raise SizeGuardError(
            f"bisection enumeration is guarded at {BISECTION_ENUM_GUARD} arrows, got {n}"
        )
    found: list[Bisection] = []
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            arrows = tuple(g.arrows[i] for i in combo)
            if _injective_endpoints(g, arrows):
                found.append(Bisection(arrows))
    return found
