"""Groupoid sheaves of modules over a finite ample groupoid.

Over a finite discrete unit space a sheaf is exactly its family of stalks
together with an invertible transport matrix per arrow, one free module per
object and, for each arrow g, a map from the stalk at the target of g to
the stalk at its source (the right action of g on germs).  Transports
compose contravariantly, (e g) h = e (gh), and units act as identities.

Morphisms are per-object matrices equivariant for the transports.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .groupoid import ArrowId, FiniteGroupoid, ObjectId
from .rings import Matrix, Ring, Scalar, block_diagonal, kernel_basis, matrix_inverse, vec, vec_mat
from .validation import Failure, ValidationReport


@dataclass(frozen=True)
class GSheaf:
    groupoid: FiniteGroupoid
    ring: Ring
    stalk_rank: Mapping[ObjectId, int]
    transport: Mapping[ArrowId, Matrix]

    def __post_init__(self) -> None:
        g = self.groupoid
        if set(self.stalk_rank) != set(g.objects):
            raise ValueError("stalk ranks must cover exactly the object set")
        if any(n < 0 for n in self.stalk_rank.values()):
            raise ValueError("stalk ranks must be non-negative")
        if set(self.transport) != set(g.arrows):
            raise ValueError("transport must assign a matrix to exactly the arrow set")
        for a, m in self.transport.items():
            if m.ring != self.ring:
                raise ValueError(f"ring mismatch in transport of {a!r}")
            want = (self.stalk_rank[g.dst[a]], self.stalk_rank[g.src[a]])
            if (m.rows, m.cols) != want:
                raise ValueError(f"transport of {a!r} must be {want[0]}x{want[1]}")

    @property
    def total_rank(self) -> int:
        return sum(self.stalk_rank[x] for x in self.groupoid.objects)


@dataclass(frozen=True)
class GSheafMor:
    source: GSheaf
    target: GSheaf
    maps: Mapping[ObjectId, Matrix]

    def __post_init__(self) -> None:
        if self.source.groupoid != self.target.groupoid:
            raise ValueError("sheaf morphism endpoints live over different groupoids")
        if self.source.ring != self.target.ring:
            raise ValueError("sheaf morphism endpoints live over different rings")
        g = self.source.groupoid
        if set(self.maps) != set(g.objects):
            raise ValueError("morphism must assign a matrix to exactly the object set")
        for x, m in self.maps.items():
            want = (self.source.stalk_rank[x], self.target.stalk_rank[x])
            if (m.rows, m.cols) != want:
                raise ValueError(f"component at {x!r} must be {want[0]}x{want[1]}")


def apply_transport(e: GSheaf, vector: Sequence[Scalar], a: ArrowId) -> tuple[Scalar, ...]:
    """Push a stalk vector at dst(a) along a to the stalk at src(a)."""
    g = e.groupoid
    if a not in g.arrow_index:
        raise ValueError(f"unknown arrow id {a!r}")
    if len(vector) != e.stalk_rank[g.dst[a]]:
        raise ValueError(
            f"stalk mismatch: vector of length {len(vector)} at {g.dst[a]!r}"
            f" (rank {e.stalk_rank[g.dst[a]]})"
        )
    return vec_mat(vec(e.ring, vector), e.transport[a])


def validate_sheaf(e: GSheaf) -> ValidationReport:
    failures: list[Failure] = []
    g = e.groupoid

    for x in g.objects:
        if not e.transport[g.unit[x]].is_identity:
            failures.append(Failure("unit transport", f"transport of u({x!r}) is not the identity"))

    for a, b in g.composable_pairs():
        ab = g.compose.get((a, b))
        if ab is None:
            continue
        if e.transport[a] @ e.transport[b] != e.transport[ab]:
            failures.append(Failure("composition", f"B[{a!r}] B[{b!r}] != B[{ab!r}]"))

    for a in g.arrows:
        product = e.transport[a] @ e.transport[g.inverse[a]]
        if not product.is_identity:
            failures.append(Failure("invertibility", f"B[{a!r}] B[{g.inverse[a]!r}] != identity"))

    return ValidationReport("sheaf", tuple(failures))


def constant_sheaf(g: FiniteGroupoid, ring: Ring, rank: int) -> GSheaf:
    """All stalks equal, all transports the identity."""
    if rank < 0:
        raise ValueError("rank must be non-negative")
    ident = Matrix.identity(ring, rank)
    return GSheaf(
        g,
        ring,
        {x: rank for x in g.objects},
        {a: ident for a in g.arrows},
    )


def validate_sheaf_morphism(phi: GSheafMor) -> ValidationReport:
    failures: list[Failure] = []
    g = phi.source.groupoid
    for a in g.arrows:
        x, y = phi.source.groupoid.dst[a], phi.source.groupoid.src[a]
        left = phi.maps[x] @ phi.target.transport[a]
        right = phi.source.transport[a] @ phi.maps[y]
        if left != right:
            failures.append(Failure("equivariance", f"square fails at arrow {a!r}"))
    return ValidationReport("sheaf morphism", tuple(failures))


def identity_sheaf_mor(e: GSheaf) -> GSheafMor:
    return GSheafMor(e, e, {x: Matrix.identity(e.ring, e.stalk_rank[x]) for x in e.groupoid.objects})


def zero_sheaf_mor(e: GSheaf, f: GSheaf) -> GSheafMor:
    return GSheafMor(
        e, f, {x: Matrix.zeros(e.ring, e.stalk_rank[x], f.stalk_rank[x]) for x in e.groupoid.objects}
    )


def compose_sheaf_mors(phi: GSheafMor, psi: GSheafMor) -> GSheafMor:
    """First phi, then psi (stalk rows: v @ phi_x @ psi_x)."""
    if phi.target != psi.source:
        raise ValueError("sheaf morphisms do not compose: target != source")
    return GSheafMor(
        phi.source,
        psi.target,
        {x: phi.maps[x] @ psi.maps[x] for x in phi.source.groupoid.objects},
    )


def invert_sheaf_mor(phi: GSheafMor) -> GSheafMor | None:
    """The inverse morphism when every component is invertible, else None."""
    inverted = {}
    for x in phi.source.groupoid.objects:
        inv = matrix_inverse(phi.maps[x])
        if inv is None:
            return None
        inverted[x] = inv
    return GSheafMor(phi.target, phi.source, inverted)


def is_sheaf_isomorphism(phi: GSheafMor) -> bool:
    return validate_sheaf_morphism(phi).ok and invert_sheaf_mor(phi) is not None


def direct_sum_sheaf(e: GSheaf, f: GSheaf) -> GSheaf:
    if e.groupoid != f.groupoid or e.ring != f.ring:
        raise ValueError("direct sum needs a common groupoid and ring")
    g = e.groupoid
    return GSheaf(
        g,
        e.ring,
        {x: e.stalk_rank[x] + f.stalk_rank[x] for x in g.objects},
        {a: block_diagonal(e.ring, [e.transport[a], f.transport[a]]) for a in g.arrows},
    )


# -- morphism spaces ---------------------------------------------------------


def sheaf_hom_basis(e: GSheaf, f: GSheaf) -> list[dict[ObjectId, Matrix]]:
    """A basis of the space of sheaf morphisms e -> f, by exact elimination."""
    if e.groupoid != f.groupoid or e.ring != f.ring:
        raise ValueError("hom space needs a common groupoid and ring")
    g, ring = e.groupoid, e.ring
    offsets: dict[ObjectId, int] = {}
    total = 0
    for x in g.objects:
        offsets[x] = total
        total += e.stalk_rank[x] * f.stalk_rank[x]
    if total == 0:
        return []
    arrows = g.arrows
    col_offsets = []
    cols = 0
    for a in arrows:
        col_offsets.append(cols)
        cols += e.stalk_rank[g.dst[a]] * f.stalk_rank[g.src[a]]
    grid = [[ring.zero] * cols for _ in range(total)]
    for gi, a in enumerate(arrows):
        x, y = g.dst[a], g.src[a]  # transport B: stalk(x) -> stalk(y)
        be, bf = e.transport[a], f.transport[a]
        sx, sy = e.stalk_rank[x], e.stalk_rank[y]
        tx, ty = f.stalk_rank[x], f.stalk_rank[y]
        for i in range(sx):
            for j in range(ty):
                col = col_offsets[gi] + i * ty + j
                # (B_e @ phi_y)[i, j]: coefficients of phi_y
                for k in range(sy):
                    grid[offsets[y] + k * ty + j][col] = ring.add(
                        grid[offsets[y] + k * ty + j][col], be.entries[i][k]
                    )
                # -(phi_x @ B_f)[i, j]: coefficients of phi_x
                for l in range(tx):
                    grid[offsets[x] + i * tx + l][col] = ring.sub(
                        grid[offsets[x] + i * tx + l][col], bf.entries[l][j]
                    )
    constraint = Matrix(ring, total, cols, tuple(tuple(r) for r in grid))
    basis = kernel_basis(constraint)
    out = []
    for row in basis.entries:
        comp: dict[ObjectId, Matrix] = {}
        for x in g.objects:
            sx, tx = e.stalk_rank[x], f.stalk_rank[x]
            base = offsets[x]
            entries = tuple(
                tuple(row[base + i * tx + j] for j in range(tx)) for i in range(sx)
            )
            comp[x] = Matrix(ring, sx, tx, entries)
        out.append(comp)
    return out


def random_sheaf_hom(e: GSheaf, f: GSheaf, rng: Any) -> GSheafMor:
    basis = sheaf_hom_basis(e, f)
    maps = {x: Matrix.zeros(e.ring, e.stalk_rank[x], f.stalk_rank[x]) for x in e.groupoid.objects}
    for comp in basis:
        if e.ring.kind == "mod":
            c = rng.randrange(e.ring.modulus)
        else:
            c = rng.randint(-3, 3)
        maps = {x: maps[x] + comp[x].scaled(c) for x in e.groupoid.objects}
    return GSheafMor(e, f, maps)
