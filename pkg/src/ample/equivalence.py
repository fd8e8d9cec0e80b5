"""The two functors between unitary modules and groupoid sheaves.

One direction takes a sheaf to its module of global sections: the carrier
is the direct sum of the stalks (blocks in object declaration order) and an
arrow acts by its transport placed in the matching block.  The other
direction rebuilds a sheaf from a module through germs: the germ of a
module element at an object is its image under that object's unit
idempotent, the stalk is the image of that idempotent re-based onto an
echelon basis, and arrows transport germs through their singleton
characteristic functions.

Both composites are certified isomorphisms: eta sends a module element to
its family of germ coordinates, epsilon evaluates the germ of a section at
its base point.  Certificates are emitted only when every check passes;
otherwise a failure report with a witness comes back.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .algebra import AlgebraElement, char_fn
from .gmodule import GModule, GModuleHom, act
from .groupoid import ArrowId, Bisection, ObjectId
from .gsheaf import GSheaf, GSheafMor
from .rings import (
    Matrix,
    Scalar,
    express_in_basis,
    image_basis,
    kernel_basis,
    matrix_inverse,
    unit_vec,
    vec,
    vec_add,
    vec_is_zero,
    vec_mat,
    zero_vec,
)


# -- sections of a sheaf and the section module -----------------------------


@dataclass(frozen=True)
class Section:
    """A global section: one stalk vector per object (all of them, since the
    whole unit space is compact)."""

    sheaf: GSheaf
    values: Mapping[ObjectId, tuple[Scalar, ...]]

    def __post_init__(self) -> None:
        e = self.sheaf
        if set(self.values) != set(e.groupoid.objects):
            raise ValueError("section must assign a value to every object")
        for x, v in self.values.items():
            if len(v) != e.stalk_rank[x]:
                raise ValueError(f"value at {x!r} has length {len(v)}, stalk rank {e.stalk_rank[x]}")


def block_offsets(e: GSheaf) -> dict[ObjectId, int]:
    offsets: dict[ObjectId, int] = {}
    total = 0
    for x in e.groupoid.objects:
        offsets[x] = total
        total += e.stalk_rank[x]
    return offsets


def section_to_vector(s: Section) -> tuple[Scalar, ...]:
    out: list[Scalar] = []
    for x in s.sheaf.groupoid.objects:
        out.extend(s.values[x])
    return tuple(out)


def vector_to_section(e: GSheaf, v: Sequence[Scalar]) -> Section:
    offsets = block_offsets(e)
    if len(v) != e.total_rank:
        raise ValueError(f"vector length {len(v)} does not match total stalk rank {e.total_rank}")
    values = {
        x: vec(e.ring, v[offsets[x]: offsets[x] + e.stalk_rank[x]]) for x in e.groupoid.objects
    }
    return Section(e, values)


def section_action(s: Section, f: AlgebraElement) -> Section:
    """The action of an algebra element on a section, computed stalkwise:
    the new value at x sums f(a) times the transported value s(dst a) a over
    the arrows a with source x."""
    e = s.sheaf
    if f.groupoid != e.groupoid or f.ring != e.ring:
        raise ValueError("algebra element and section are not compatible")
    g, ring = e.groupoid, e.ring
    values: dict[ObjectId, tuple[Scalar, ...]] = {}
    for x in g.objects:
        acc = zero_vec(ring, e.stalk_rank[x])
        for a, c in f.coeffs.items():
            if g.src[a] == x:
                moved = vec_mat(s.values[g.dst[a]], e.transport[a])
                acc = vec_add(ring, acc, tuple(ring.mul(c, t) for t in moved))
        values[x] = acc
    return Section(e, values)


def gamma_c(e: GSheaf) -> GModule:
    """The module of global sections, on the direct sum of the stalks."""
    g, ring = e.groupoid, e.ring
    offsets = block_offsets(e)
    total = e.total_rank
    action: dict[ArrowId, Matrix] = {}
    for a in g.arrows:
        rows = [[ring.zero] * total for _ in range(total)]
        b = e.transport[a]
        r0, c0 = offsets[g.dst[a]], offsets[g.src[a]]
        for i in range(b.rows):
            for j in range(b.cols):
                rows[r0 + i][c0 + j] = b.entries[i][j]
        action[a] = Matrix(ring, total, total, tuple(tuple(r) for r in rows))
    return GModule(g, ring, total, action)


def gamma_c_mor(phi: GSheafMor, source: GModule | None = None, target: GModule | None = None) -> GModuleHom:
    """Sections functor on morphisms: the block-diagonal matrix of components."""
    e, f = phi.source, phi.target
    source = source if source is not None else gamma_c(e)
    target = target if target is not None else gamma_c(f)
    ring = e.ring
    src_off, tgt_off = block_offsets(e), block_offsets(f)
    rows = [[ring.zero] * target.rank for _ in range(source.rank)]
    for x in e.groupoid.objects:
        comp = phi.maps[x]
        for i in range(comp.rows):
            for j in range(comp.cols):
                rows[src_off[x] + i][tgt_off[x] + j] = comp.entries[i][j]
    return GModuleHom(source, target, Matrix(ring, source.rank, target.rank, tuple(tuple(r) for r in rows)))


# -- germs -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Germ:
    """The germ of a module element at an object.

    Two germs at the same object are equal exactly when the unit idempotent
    of that object maps their representatives to the same vector; with a
    finite discrete unit space the singleton of the base point is its least
    compact open neighborhood, so this one product decides germ equality.
    """

    module: GModule
    base: ObjectId
    representative: tuple[Scalar, ...]
    normal_form: tuple[Scalar, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Germ):
            return NotImplemented
        return (
            self.module == other.module
            and self.base == other.base
            and self.normal_form == other.normal_form
        )

    @property
    def is_zero(self) -> bool:
        return vec_is_zero(self.module.ring, self.normal_form)


def germ_at(m: GModule, vector: Sequence[Scalar], x: ObjectId) -> Germ:
    if x not in m.groupoid.object_index:
        raise ValueError(f"unknown object id {x!r}")
    rep = vec(m.ring, vector)
    if len(rep) != m.rank:
        raise ValueError(f"vector length {len(rep)} does not match module rank {m.rank}")
    return Germ(m, x, rep, vec_mat(rep, m.unit_action(x)))


def germ_transport(germ: Germ, a: ArrowId) -> Germ:
    """Transport a germ along an arrow via its singleton bisection."""
    m = germ.module
    g = m.groupoid
    if a not in g.arrow_index:
        raise ValueError(f"unknown arrow id {a!r}")
    if germ.base != g.dst[a]:
        raise ValueError(f"germ based at {germ.base!r} cannot move along {a!r} (dst {g.dst[a]!r})")
    moved = act(m, germ.representative, char_fn(g, Bisection.of(g, [a]), m.ring))
    return germ_at(m, moved, g.src[a])


# -- sheafification -----------------------------------------------------------


@dataclass(frozen=True)
class Sheafification:
    """A module's germ sheaf together with the coordinate data tying the two.

    The stalk at x is the image of the unit idempotent at x, re-based on its
    echelon basis (rows of ``stalk_basis[x]``); ``coords`` expresses a germ
    in that basis and ``representative`` goes back.
    """

    module: GModule
    sheaf: GSheaf
    stalk_basis: Mapping[ObjectId, Matrix]

    def coords(self, vector: Sequence[Scalar], x: ObjectId) -> tuple[Scalar, ...]:
        germ = germ_at(self.module, vector, x)
        found = express_in_basis(self.stalk_basis[x], germ.normal_form)
        if found is None:
            raise ValueError(f"germ at {x!r} is outside the stalk lattice")
        return found

    def representative(self, coords: Sequence[Scalar], x: ObjectId) -> tuple[Scalar, ...]:
        return vec_mat(vec(self.module.ring, coords), self.stalk_basis[x])

    def section_vector(self, vector: Sequence[Scalar]) -> tuple[Scalar, ...]:
        out: list[Scalar] = []
        for x in self.module.groupoid.objects:
            out.extend(self.coords(vector, x))
        return tuple(out)


def sheafify(m: GModule) -> Sheafification:
    """Build the germ sheaf of a module (needs a field or Z for bases)."""
    g, ring = m.groupoid, m.ring
    basis: dict[ObjectId, Matrix] = {}
    for x in g.objects:
        basis[x] = image_basis(m.unit_action(x))
    stalk_rank = {x: basis[x].rows for x in g.objects}
    transport: dict[ArrowId, Matrix] = {}
    for a in g.arrows:
        x, y = g.dst[a], g.src[a]
        rows = []
        for i in range(basis[x].rows):
            moved = vec_mat(basis[x].row(i), m.action[a])
            coords = express_in_basis(basis[y], moved)
            if coords is None:
                raise ValueError(
                    f"action of {a!r} does not preserve stalk lattices; is the module valid?"
                )
            rows.append(coords)
        transport[a] = Matrix(ring, stalk_rank[x], stalk_rank[y], tuple(rows))
    sheaf = GSheaf(g, ring, stalk_rank, transport)
    return Sheafification(m, sheaf, basis)


def sh_mor(
    f: GModuleHom,
    source: Sheafification | None = None,
    target: Sheafification | None = None,
) -> GSheafMor:
    """Sheafification on morphisms: the induced map on germ coordinates."""
    source = source if source is not None else sheafify(f.source)
    target = target if target is not None else sheafify(f.target)
    maps: dict[ObjectId, Matrix] = {}
    for x in f.source.groupoid.objects:
        rows = []
        for i in range(source.stalk_basis[x].rows):
            image = vec_mat(source.stalk_basis[x].row(i), f.matrix)
            rows.append(target.coords(image, x))
        maps[x] = Matrix(
            f.source.ring, source.sheaf.stalk_rank[x], target.sheaf.stalk_rank[x], tuple(rows)
        )
    return GSheafMor(source.sheaf, target.sheaf, maps)


# -- the natural isomorphisms -------------------------------------------------


@dataclass(frozen=True)
class NaturalIsoCertificate:
    """Witness that one unit of the equivalence is an isomorphism.

    direction "eta": ``matrix`` is the isomorphism from the module to the
    section module of its germ sheaf.  direction "epsilon": ``components``
    are the stalkwise isomorphisms from the germ sheaf of the section module
    onto the original sheaf, also packaged as ``morphism``.
    """

    direction: str
    checks: tuple[str, ...]
    matrix: Matrix | None = None
    components: Mapping[ObjectId, Matrix] | None = None
    module: GModule | None = None
    image_module: GModule | None = None
    sheaf: GSheaf | None = None
    image_sheaf: GSheaf | None = None
    morphism: GSheafMor | None = None
    sheafification: Sheafification | None = None

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class NaturalIsoFailure:
    direction: str
    check: str
    witness: str

    @property
    def ok(self) -> bool:
        return False


NaturalIsoResult = Union[NaturalIsoCertificate, NaturalIsoFailure]


def eta_matrix(sh: Sheafification) -> Matrix:
    """Rows are the germ-coordinate families of the module's basis vectors."""
    m = sh.module
    rows = [sh.section_vector(unit_vec(m.ring, m.rank, i)) for i in range(m.rank)]
    return Matrix(m.ring, m.rank, sh.sheaf.total_rank, tuple(rows))


def eta(m: GModule) -> NaturalIsoResult:
    """Certify the unit: module -> sections of its germ sheaf.

    Checks, in order: the map intertwines the actions on the arrow spanning
    set; it is injective (trivial kernel); it is surjective, constructively,
    by exhibiting a preimage of every standard basis section through the
    partition of the unit space into its points (the preimages are exactly
    the stalk basis rows).
    """
    sh = sheafify(m)
    gamma = gamma_c(sh.sheaf)
    h = eta_matrix(sh)

    for a in m.groupoid.arrows:
        if m.action[a] @ h != h @ gamma.action[a]:
            return NaturalIsoFailure("eta", "module-hom", f"intertwining fails at arrow {a!r}")

    if kernel_basis(h).rows != 0:
        return NaturalIsoFailure("eta", "injective", "nontrivial kernel")

    ring = m.ring
    preimage_rows: list[tuple[Scalar, ...]] = []
    for x in m.groupoid.objects:
        preimage_rows.extend(sh.stalk_basis[x].entries)
    preimages = Matrix(ring, gamma.rank, m.rank, tuple(preimage_rows))
    if (preimages @ h) != Matrix.identity(ring, gamma.rank):
        return NaturalIsoFailure("eta", "surjective", "partition preimages do not hit the basis")

    return NaturalIsoCertificate(
        direction="eta",
        checks=("module-hom", "injective", "surjective"),
        matrix=h,
        module=m,
        image_module=gamma,
        sheafification=sh,
    )


def epsilon(e: GSheaf) -> NaturalIsoResult:
    """Certify the counit: germ sheaf of the section module -> the sheaf.

    The stalkwise map evaluates the germ of a section at its base point; in
    coordinates it is the block of the stalk basis sitting over that object.
    Checks: stalk support, stalkwise bijectivity, equivariance.
    """
    gamma = gamma_c(e)
    sh = sheafify(gamma)
    offsets = block_offsets(e)
    g, ring = e.groupoid, e.ring

    components: dict[ObjectId, Matrix] = {}
    for x in g.objects:
        basis = sh.stalk_basis[x]
        lo, hi = offsets[x], offsets[x] + e.stalk_rank[x]
        for i in range(basis.rows):
            row = basis.row(i)
            if any(not ring.is_zero(v) for j, v in enumerate(row) if not lo <= j < hi):
                return NaturalIsoFailure(
                    "epsilon", "stalk-support", f"germ basis at {x!r} leaks outside its block"
                )
        components[x] = basis.column_slice(lo, hi)

    for x in g.objects:
        comp = components[x]
        if comp.rows != comp.cols or matrix_inverse(comp) is None:
            return NaturalIsoFailure("epsilon", "stalkwise-bijective", f"component at {x!r}")

    for a in g.arrows:
        left = sh.sheaf.transport[a] @ components[g.src[a]]
        right = components[g.dst[a]] @ e.transport[a]
        if left != right:
            return NaturalIsoFailure("epsilon", "equivariant", f"square fails at arrow {a!r}")

    morphism = GSheafMor(sh.sheaf, e, components)
    return NaturalIsoCertificate(
        direction="epsilon",
        checks=("stalk-support", "stalkwise-bijective", "equivariant"),
        components=components,
        sheaf=e,
        image_sheaf=sh.sheaf,
        morphism=morphism,
        sheafification=sh,
    )


# -- naturality ----------------------------------------------------------------


@dataclass(frozen=True)
class NaturalityReport:
    kind: str  # "module" or "sheaf"
    ok: bool
    witness: str = ""


def check_naturality(morphism: GModuleHom | GSheafMor) -> NaturalityReport:
    """Check the naturality square of eta (module homs) or epsilon (sheaf
    morphisms) by exact matrix equality."""
    if isinstance(morphism, GModuleHom):
        return _check_eta_square(morphism)
    if isinstance(morphism, GSheafMor):
        return _check_epsilon_square(morphism)
    raise TypeError(f"expected a module hom or sheaf morphism, got {type(morphism).__name__}")


def _check_eta_square(f: GModuleHom) -> NaturalityReport:
    sh_src = sheafify(f.source)
    sh_tgt = sheafify(f.target)
    h_src = eta_matrix(sh_src)
    h_tgt = eta_matrix(sh_tgt)
    phi = sh_mor(f, sh_src, sh_tgt)
    gamma_phi = gamma_c_mor(phi)
    if f.matrix @ h_tgt != h_src @ gamma_phi.matrix:
        return NaturalityReport("module", False, "eta square does not commute")
    return NaturalityReport("module", True)


def _check_epsilon_square(phi: GSheafMor) -> NaturalityReport:
    eps_src = epsilon(phi.source)
    eps_tgt = epsilon(phi.target)
    if not (eps_src.ok and eps_tgt.ok):
        return NaturalityReport("sheaf", False, "epsilon certificate unavailable")
    assert isinstance(eps_src, NaturalIsoCertificate) and isinstance(eps_tgt, NaturalIsoCertificate)
    gamma_phi = gamma_c_mor(phi)
    psi = sh_mor(gamma_phi, eps_src.sheafification, eps_tgt.sheafification)
    for x in phi.source.groupoid.objects:
        left = psi.maps[x] @ eps_tgt.components[x]
        right = eps_src.components[x] @ phi.maps[x]
        if left != right:
            return NaturalityReport("sheaf", False, f"epsilon square fails at object {x!r}")
    return NaturalityReport("sheaf", True)
