"""Exact coefficient rings and the dense exact linear algebra built on them.

Three kinds of coefficients are supported: the rationals Q (stdlib
fractions), the integers Z, and the modular rings Z/m.  A modular ring with
prime modulus is the field F_p and, like Q, supports the full linear-algebra
kit (echelon forms, kernels, row-space bases, solving, inversion).  Z is
handled fraction-free through Hermite row reduction, so integer inputs never
leave the integers.  Composite moduli offer arithmetic and equality only.

Conventions used throughout the library: vectors are rows, linear maps act
on the right (``v @ A``), and matrix products compose left to right, so
``A @ B`` means "apply A, then B".  All values are immutable and every
operation is deterministic: identical inputs give bit-identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

Scalar = Any  # int for Z and Z/m, Fraction for Q


class UnsupportedRingError(ValueError):
    """Raised when an operation needs a field or Z but got a composite modulus."""


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Ring:
    """A coefficient ring: kind is one of "Q", "Z", "mod" (with a modulus)."""

    kind: str
    modulus: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("Q", "Z", "mod"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "mod":
            if not isinstance(self.modulus, int) or self.modulus < 1:
                raise ValueError("modulus must be a positive integer")
        elif self.modulus is not None:
            raise ValueError(f"ring {self.kind} takes no modulus")

    @property
    def name(self) -> str:
        if self.kind == "mod":
            assert self.modulus is not None
            if _is_prime(self.modulus):
                return f"Fp:{self.modulus}"
            return f"Zmod:{self.modulus}"
        return self.kind

    @property
    def is_field(self) -> bool:
        if self.kind == "Q":
            return True
        return self.kind == "mod" and _is_prime(self.modulus or 0)

    @property
    def supports_elimination(self) -> bool:
        """True when kernels/images/solving are available (a field, or Z)."""
        return self.is_field or self.kind == "Z"

    # -- element arithmetic ------------------------------------------------

    def coerce(self, value: Any) -> Scalar:
        if isinstance(value, bool) or isinstance(value, float):
            raise ValueError(f"inexact or boolean scalar {value!r}")
        if self.kind == "Q":
            if isinstance(value, (int, Fraction)):
                return Fraction(value)
            raise ValueError(f"cannot coerce {value!r} into Q")
        if not isinstance(value, int):
            raise ValueError(f"cannot coerce {value!r} into {self.name}")
        if self.kind == "mod":
            return value % self.modulus  # type: ignore[operator]
        return value

    @property
    def zero(self) -> Scalar:
        return self.coerce(0)

    @property
    def one(self) -> Scalar:
        return self.coerce(1)

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        return self.coerce(a + b)

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        return self.coerce(a - b)

    def neg(self, a: Scalar) -> Scalar:
        return self.coerce(-a)

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        return self.coerce(a * b)

    def inv(self, a: Scalar) -> Scalar:
        if self.kind == "Q":
            if a == 0:
                raise ZeroDivisionError("inverse of 0 in Q")
            return Fraction(1) / a
        if self.is_field:
            if a % self.modulus == 0:  # type: ignore[operator]
                raise ZeroDivisionError(f"inverse of 0 in {self.name}")
            return pow(a, -1, self.modulus)
        raise UnsupportedRingError(f"{self.name} is not a field")

    def is_zero(self, a: Scalar) -> bool:
        return a == self.zero

    # -- text and JSON forms ----------------------------------------------

    def format_scalar(self, a: Scalar) -> str:
        return str(a)

    def scalar_to_json(self, a: Scalar) -> int | str:
        if self.kind == "Q":
            frac = Fraction(a)
            return int(frac) if frac.denominator == 1 else f"{frac.numerator}/{frac.denominator}"
        return int(a)

    def scalar_from_json(self, value: Any) -> Scalar:
        if self.kind == "Q" and isinstance(value, str):
            num, _, den = value.partition("/")
            try:
                return Fraction(int(num), int(den) if den else 1)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"bad rational literal {value!r}") from exc
        return self.coerce(value)


RATIONALS = Ring("Q")
INTEGERS = Ring("Z")


def modular(m: int) -> Ring:
    return Ring("mod", m)


def ring_from_name(name: str) -> Ring:
    """Parse a ring name: "Q", "Z", "Fp:<prime>", "Zmod:<m>" (alias "F<p>")."""
    text = name.strip()
    if text == "Q":
        return RATIONALS
    if text == "Z":
        return INTEGERS
    head, _, tail = text.partition(":")
    if head == "Fp" and tail:
        value = _parse_modulus(text, tail)
        if not _is_prime(value):
            raise ValueError(f"Fp modulus must be prime, got {value}")
        return modular(value)
    if head == "Zmod" and tail:
        return modular(_parse_modulus(text, tail))
    if text.startswith("F") and text[1:].isdigit():
        value = int(text[1:])
        if not _is_prime(value):
            raise ValueError(f"F<p> shorthand needs a prime, got {value}")
        return modular(value)
    raise ValueError(f"unknown ring name {name!r} (expected Q, Z, Fp:<p> or Zmod:<m>)")


def _parse_modulus(full: str, tail: str) -> int:
    if not tail.isdigit() or int(tail) < 1:
        raise ValueError(f"bad modulus in ring name {full!r}")
    return int(tail)


# -- vectors (plain tuples of scalars) ------------------------------------


def vec(ring: Ring, values: Iterable[Any]) -> tuple[Scalar, ...]:
    return tuple(ring.coerce(v) for v in values)


def zero_vec(ring: Ring, n: int) -> tuple[Scalar, ...]:
    return (ring.zero,) * n


def unit_vec(ring: Ring, n: int, i: int) -> tuple[Scalar, ...]:
    return tuple(ring.one if j == i else ring.zero for j in range(n))


def vec_add(ring: Ring, u: Sequence[Scalar], v: Sequence[Scalar]) -> tuple[Scalar, ...]:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} + {len(v)}")
    return tuple(ring.add(a, b) for a, b in zip(u, v))


def vec_sub(ring: Ring, u: Sequence[Scalar], v: Sequence[Scalar]) -> tuple[Scalar, ...]:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} - {len(v)}")
    return tuple(ring.sub(a, b) for a, b in zip(u, v))


def vec_scale(ring: Ring, c: Any, u: Sequence[Scalar]) -> tuple[Scalar, ...]:
    c = ring.coerce(c)
    return tuple(ring.mul(c, a) for a in u)


def vec_is_zero(ring: Ring, u: Sequence[Scalar]) -> bool:
    return all(ring.is_zero(a) for a in u)


def vec_mat(v: Sequence[Scalar], a: "Matrix") -> tuple[Scalar, ...]:
    """Row vector times matrix: the action of the linear map ``a`` on ``v``."""
    if len(v) != a.rows:
        raise ValueError(f"dimension mismatch: vector of length {len(v)} @ {a.rows}x{a.cols}")
    ring = a.ring
    out = []
    for j in range(a.cols):
        acc = ring.zero
        for i, vi in enumerate(v):
            acc = ring.add(acc, ring.mul(vi, a.entries[i][j]))
        out.append(acc)
    return tuple(out)


# -- matrices --------------------------------------------------------------


@dataclass(frozen=True)
class Matrix:
    """A dense exact matrix; entries are row-major tuples over one ring."""

    ring: Ring
    rows: int
    cols: int
    entries: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry grid does not match declared shape")

    @staticmethod
    def from_rows(ring: Ring, rows: Sequence[Sequence[Any]], cols: int | None = None) -> "Matrix":
        data = tuple(vec(ring, row) for row in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return Matrix(ring, len(data), cols, data)

    @staticmethod
    def identity(ring: Ring, n: int) -> "Matrix":
        return Matrix.from_rows(ring, [unit_vec(ring, n, i) for i in range(n)], cols=n)

    @staticmethod
    def zeros(ring: Ring, rows: int, cols: int) -> "Matrix":
        return Matrix(ring, rows, cols, tuple(zero_vec(ring, cols) for _ in range(rows)))

    def row(self, i: int) -> tuple[Scalar, ...]:
        return self.entries[i]

    @property
    def is_zero(self) -> bool:
        return all(vec_is_zero(self.ring, r) for r in self.entries)

    @property
    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        return self == Matrix.identity(self.ring, self.rows)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring.name} vs {other.ring.name}")
        if self.cols != other.rows:
            raise ValueError(
                f"dimension mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}"
            )
        ring = self.ring
        data = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = ring.zero
                for k in range(self.cols):
                    acc = ring.add(acc, ring.mul(self.entries[i][k], other.entries[k][j]))
                row.append(acc)
            data.append(tuple(row))
        return Matrix(ring, self.rows, other.cols, tuple(data))

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix(
            self.ring,
            self.rows,
            self.cols,
            tuple(vec_add(self.ring, a, b) for a, b in zip(self.entries, other.entries)),
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix(
            self.ring,
            self.rows,
            self.cols,
            tuple(vec_sub(self.ring, a, b) for a, b in zip(self.entries, other.entries)),
        )

    def __neg__(self) -> "Matrix":
        return self.scaled(-1)

    def scaled(self, c: Any) -> "Matrix":
        return Matrix(
            self.ring, self.rows, self.cols, tuple(vec_scale(self.ring, c, r) for r in self.entries)
        )

    def _check_same_shape(self, other: "Matrix") -> None:
        if self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring.name} vs {other.ring.name}")
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError(
                f"dimension mismatch: {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def column_slice(self, start: int, stop: int) -> "Matrix":
        return Matrix(
            self.ring, self.rows, stop - start, tuple(r[start:stop] for r in self.entries)
        )

    def to_json(self) -> list[list[int | str]]:
        return [[self.ring.scalar_to_json(a) for a in row] for row in self.entries]


def stack_rows(ring: Ring, matrices: Sequence[Matrix], cols: int) -> Matrix:
    rows: list[tuple[Scalar, ...]] = []
    for m in matrices:
        if m.cols != cols:
            raise ValueError("dimension mismatch while stacking rows")
        rows.extend(m.entries)
    return Matrix(ring, len(rows), cols, tuple(rows))


def block_diagonal(ring: Ring, blocks: Sequence[Matrix]) -> Matrix:
    total_r = sum(b.rows for b in blocks)
    total_c = sum(b.cols for b in blocks)
    out = [[ring.zero] * total_c for _ in range(total_r)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i][c0 + j] = b.entries[i][j]
        r0 += b.rows
        c0 += b.cols
    return Matrix(ring, total_r, total_c, tuple(tuple(r) for r in out))


# -- echelon forms and what they buy us ------------------------------------


@dataclass(frozen=True)
class Echelon:
    """Row reduction record: ``transform @ original = reduced``.

    ``reduced`` has its nonzero rows first (RREF over a field, row Hermite
    form over Z), ``transform`` is invertible (unimodular over Z), and
    ``pivots`` lists the pivot column of each nonzero row.
    """

    reduced: Matrix
    transform: Matrix
    pivots: tuple[int, ...]


def row_echelon(a: Matrix) -> Echelon:
    ring = a.ring
    if ring.is_field:
        return _rref(a)
    if ring.kind == "Z":
        return _hermite(a)
    raise UnsupportedRingError(
        f"row reduction needs a field or Z, not {ring.name} (composite modulus)"
    )


def _rref(a: Matrix) -> Echelon:
    ring = a.ring
    m = [list(r) for r in a.entries]
    t = [list(unit_vec(ring, a.rows, i)) for i in range(a.rows)]
    pivots: list[int] = []
    pr = 0
    for c in range(a.cols):
        pivot_row = next((i for i in range(pr, a.rows) if not ring.is_zero(m[i][c])), None)
        if pivot_row is None:
            continue
        m[pr], m[pivot_row] = m[pivot_row], m[pr]
        t[pr], t[pivot_row] = t[pivot_row], t[pr]
        scale = ring.inv(m[pr][c])
        m[pr] = [ring.mul(scale, x) for x in m[pr]]
        t[pr] = [ring.mul(scale, x) for x in t[pr]]
        for i in range(a.rows):
            if i != pr and not ring.is_zero(m[i][c]):
                factor = m[i][c]
                m[i] = [ring.sub(x, ring.mul(factor, y)) for x, y in zip(m[i], m[pr])]
                t[i] = [ring.sub(x, ring.mul(factor, y)) for x, y in zip(t[i], t[pr])]
        pivots.append(c)
        pr += 1
        if pr == a.rows:
            break
    reduced = Matrix(ring, a.rows, a.cols, tuple(tuple(r) for r in m))
    transform = Matrix(ring, a.rows, a.rows, tuple(tuple(r) for r in t))
    return Echelon(reduced, transform, tuple(pivots))


def _hermite(a: Matrix) -> Echelon:
    # Fraction-free row Hermite form: pivots positive, entries above a pivot
    # reduced into [0, pivot).  Row operations are unimodular and mirrored
    # into the transform.
    ring = a.ring
    m = [list(r) for r in a.entries]
    t = [list(unit_vec(ring, a.rows, i)) for i in range(a.rows)]
    pivots: list[int] = []
    pr = 0
    for c in range(a.cols):
        if pr == a.rows:
            break
        if all(m[i][c] == 0 for i in range(pr, a.rows)):
            continue
        # gcd cascade on column c among rows >= pr
        while True:
            nonzero = [i for i in range(pr, a.rows) if m[i][c] != 0]
            i0 = min(nonzero, key=lambda i: (abs(m[i][c]), i))
            m[pr], m[i0] = m[i0], m[pr]
            t[pr], t[i0] = t[i0], t[pr]
            done = True
            for i in range(pr + 1, a.rows):
                if m[i][c] != 0:
                    q = m[i][c] // m[pr][c]
                    m[i] = [x - q * y for x, y in zip(m[i], m[pr])]
                    t[i] = [x - q * y for x, y in zip(t[i], t[pr])]
                    if m[i][c] != 0:
                        done = False
            if done:
                break
        if m[pr][c] < 0:
            m[pr] = [-x for x in m[pr]]
            t[pr] = [-x for x in t[pr]]
        for i in range(pr):
            q = m[i][c] // m[pr][c]
            if q != 0:
                m[i] = [x - q * y for x, y in zip(m[i], m[pr])]
                t[i] = [x - q * y for x, y in zip(t[i], t[pr])]
        pivots.append(c)
        pr += 1
    reduced = Matrix(ring, a.rows, a.cols, tuple(tuple(r) for r in m))
    transform = Matrix(ring, a.rows, a.rows, tuple(tuple(r) for r in t))
    return Echelon(reduced, transform, tuple(pivots))


def rank(a: Matrix) -> int:
    return len(row_echelon(a).pivots)


def image_basis(a: Matrix) -> Matrix:
    """Echelon basis (field) or Hermite lattice basis (Z) of the row space {vA}."""
    ech = row_echelon(a)
    keep = ech.reduced.entries[: len(ech.pivots)]
    return Matrix(a.ring, len(keep), a.cols, keep)


def kernel_basis(a: Matrix) -> Matrix:
    """Echelonized basis of the left null space {v : vA = 0}."""
    ech = row_echelon(a)
    null_rows = ech.transform.entries[len(ech.pivots):]
    raw = Matrix(a.ring, len(null_rows), a.rows, null_rows)
    if raw.rows == 0 or raw.cols == 0:
        return raw
    return image_basis(raw)  # re-echelonize for a canonical result


def express_in_basis(basis: Matrix, target: Sequence[Scalar]) -> tuple[Scalar, ...] | None:
    """Coefficients c with c @ basis = target, or None.

    ``basis`` must be in echelon form (each row's leading entry strictly to
    the right of the previous row's).  Over Z the expression must be exact,
    so divisibility failures mean "not in the lattice".
    """
    ring = basis.ring
    if len(target) != basis.cols:
        raise ValueError(f"dimension mismatch: target length {len(target)} vs {basis.cols} cols")
    residue = list(vec(ring, target))
    coeffs = []
    for row in basis.entries:
        lead = next((j for j, x in enumerate(row) if not ring.is_zero(x)), None)
        if lead is None:
            coeffs.append(ring.zero)
            continue
        if ring.is_zero(residue[lead]):
            coeffs.append(ring.zero)
            continue
        if ring.is_field:
            c = ring.mul(residue[lead], ring.inv(row[lead]))
        else:
            if residue[lead] % row[lead] != 0:
                return None
            c = residue[lead] // row[lead]
        coeffs.append(c)
        residue = [ring.sub(x, ring.mul(c, y)) for x, y in zip(residue, row)]
    if not vec_is_zero(ring, residue):
        return None
    return tuple(coeffs)


def solve_row_system(a: Matrix, b: Sequence[Scalar]) -> tuple[Scalar, ...] | None:
    """Some v with v @ a = b, or None when b is outside the row space."""
    ech = row_echelon(a)
    lead = Matrix(a.ring, len(ech.pivots), a.cols, ech.reduced.entries[: len(ech.pivots)])
    coeffs = express_in_basis(lead, b)
    if coeffs is None:
        return None
    padded = list(coeffs) + [a.ring.zero] * (a.rows - len(coeffs))
    return vec_mat(padded, ech.transform)


def matrix_inverse(a: Matrix) -> Matrix | None:
    """Two-sided inverse, or None (over Z: exists iff a is unimodular)."""
    if a.rows != a.cols:
        return None
    ech = row_echelon(a)
    # the echelon form of an invertible matrix is the identity, over fields
    # (full-rank RREF) and over Z alike (a unimodular Hermite form)
    if len(ech.pivots) == a.rows and ech.reduced.is_identity:
        return ech.transform
    return None
