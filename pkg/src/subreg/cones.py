"""Tangent, regular normal, limiting normal and directional normal cones.

Sets are Cartesian products of factors from a small catalog. Every factor is
a finite union of convex polyhedra, so all cones are finite unions of convex
polyhedral cones (:class:`ConeUnion`). The complementarity factor uses its
closed-form cone table; every other factor goes through the generic
polyhedral-union engine, which also serves as an independent cross-check of
that table in the tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .ratgeom import (
    DEFAULT_FACE_CAP,
    Cell,
    HCone,
    IntVec,
    Vec,
    arrangement_cells,
    as_v,
    dot,
    intersect,
    is_zero,
    polar,
    product,
    subset,
    vec,
)


class InfeasiblePoint(ValueError):
    """The point does not belong to the set."""


# ---------------------------------------------------------------------------
# cone unions


@dataclass(frozen=True)
class ConeUnion:
    """Finite union of polyhedral cones. No pieces means the empty set."""

    pieces: tuple[HCone, ...]
    dim: int
    tags: tuple[tuple, ...] = field(default=(), compare=False)

    def __init__(self, pieces: Iterable[HCone], dim: int, tags: Iterable[tuple] | None = None,
                 canonical: bool = True):
        pieces = list(pieces)
        tags = list(tags) if tags is not None else [() for _ in pieces]
        for p in pieces:
            if p.dim != dim:
                raise ValueError(f"piece of dimension {p.dim} in a union of dimension {dim}")
        if canonical:
            pieces, tags = _canonicalize(pieces, tags)
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "tags", tuple(tags))

    @classmethod
    def empty(cls, dim: int) -> "ConeUnion":
        return cls((), dim)

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def contains(self, y: Sequence) -> bool:
        return any(p.contains(y) for p in self.pieces)

    def rows(self) -> list[IntVec]:
        out: list[IntVec] = []
        for p in self.pieces:
            out += list(p.ineq) + list(p.eq)
        return out

    def same_set(self, other: "ConeUnion") -> bool:
        return union_subset(self, other) and union_subset(other, self)

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)


def _key(c: HCone):
    v = as_v(c)
    return (v.rays, v.lines)


def _canonicalize(pieces: list[HCone], tags: list[tuple]):
    uniq: dict = {}
    for p, t in zip(pieces, tags):
        k = _key(p)
        if k not in uniq:
            uniq[k] = (p, t)
    items = list(uniq.items())
    keep = []
    for i, (ki, (pi, ti)) in enumerate(items):
        if any(j != i and subset(pi, pj) for j, (kj, (pj, tj)) in enumerate(items)):
            continue
        keep.append((ki, pi, ti))
    keep.sort(key=lambda x: x[0])
    return [p for _, p, _ in keep], [t for _, _, t in keep]


def union_subset(a: ConeUnion, b: ConeUnion) -> bool:
    """Exact test of a ⊆ b for unions of polyhedral cones."""
    if a.dim != b.dim:
        return False
    brows = b.rows()
    for piece in a.pieces:
        rows = brows + list(piece.ineq) + list(piece.eq)
        cells, _ = arrangement_cells(rows, a.dim)
        for cell in cells:
            v = cell.generators
            pt = _cell_point(cell)
            if piece.contains(pt) and not b.contains(pt):
                return False
    return True


def _cell_point(cell: Cell) -> IntVec:
    v = cell.generators
    if not v.rays and not v.lines:
        return (0,) * v.dim
    return cell.point()


def product_union(unions: Sequence[ConeUnion]) -> ConeUnion:
    dim = sum(u.dim for u in unions)
    if any(u.is_empty for u in unions):
        return ConeUnion.empty(dim)
    pieces, tags = [], []
    for combo in itertools.product(*[list(zip(u.pieces, range(len(u.pieces)))) for u in unions]):
        pieces.append(product([c for c, _ in combo]))
        tags.append(tuple(i for _, i in combo))
    return ConeUnion(pieces, dim, tags, canonical=len(unions) > 1)


# ---------------------------------------------------------------------------
# generic machinery for unions of polyhedral cones


def _conic_tangent(piece: HCone, v: Sequence) -> HCone:
    act = [a for a in piece.ineq if dot(a, v) == 0]
    return HCone(act, piece.eq, piece.dim)


def union_regular_normal(pieces: Sequence[HCone], v: Sequence, dim: int) -> HCone:
    """Regular normal cone of the union of cones at v: intersection over pieces containing v."""
    out = HCone.full(dim)
    for p in pieces:
        if p.contains(v):
            out = intersect(out, polar(_conic_tangent(p, v)))
    return out


def union_limiting_normal(pieces: Sequence[HCone], dim: int, cap: int = DEFAULT_FACE_CAP) -> list[HCone]:
    """Limiting normal cone at the origin of a union of polyhedral cones.

    Stratifies space by the arrangement of all piece rows; on each open cell
    the set of pieces containing a point and their active rows are constant,
    so the regular normal cone is constant there. The union of those values
    over cells inside the set is the limiting normal cone at 0.
    """
    pieces = list(pieces)
    if not pieces:
        return []
    if len(pieces) == 1:
        return [polar(pieces[0])]
    rows = []
    for p in pieces:
        rows += list(p.ineq) + list(p.eq)
    cells, _ = arrangement_cells(rows, dim, cap=cap)
    out = []
    for cell in cells:
        pt = _cell_point(cell)
        if not any(p.contains(pt) for p in pieces):
            continue
        out.append(union_regular_normal(pieces, pt, dim))
    return out


# ---------------------------------------------------------------------------
# factors


@dataclass(frozen=True)
class Polyhedron:
    """{y : A y <= b, E y = e}; equality rows are optional."""

    A: tuple[Vec, ...]
    b: Vec
    E: tuple[Vec, ...] = ()
    e: Vec = ()

    def __init__(self, A: Iterable[Sequence] = (), b: Iterable = (), E: Iterable[Sequence] = (), e: Iterable = ()):
        A = tuple(vec(r) for r in A)
        b = vec(b)
        E = tuple(vec(r) for r in E)
        e = vec(e)
        if len(A) != len(b) or len(E) != len(e):
            raise ValueError("row and right-hand-side counts differ")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "e", e)

    def contains(self, y: Sequence) -> bool:
        return all(dot(a, y) <= bv for a, bv in zip(self.A, self.b)) and all(
            dot(r, y) == ev for r, ev in zip(self.E, self.e))

    def tangent(self, y: Sequence, dim: int) -> HCone:
        act = [a for a, bv in zip(self.A, self.b) if dot(a, y) == bv]
        return HCone(act, self.E, dim)


class Factor:
    """One factor of a product set. Subclasses fix the geometry."""

    dim: int
    kind: str = "factor"

    def polyhedra(self) -> list[Polyhedron]:
        raise NotImplementedError

    def contains(self, y: Sequence) -> bool:
        return any(p.contains(y) for p in self.polyhedra())

    def certificate(self, y: Sequence):
        return tuple(i for i, p in enumerate(self.polyhedra()) if p.contains(y))

    def tangent(self, y: Sequence) -> list[HCone]:
        return [p.tangent(y, self.dim) for p in self.polyhedra() if p.contains(y)]

    def regular_normal(self, y: Sequence) -> HCone:
        return union_regular_normal(self.tangent(y), (0,) * self.dim, self.dim)

    def limiting_normal(self, y: Sequence, cap: int = DEFAULT_FACE_CAP) -> list[HCone]:
        return union_limiting_normal(self.tangent(y), self.dim, cap)

    def directional_normal(self, y: Sequence, d: Sequence, cap: int = DEFAULT_FACE_CAP) -> list[HCone]:
        # near y the set coincides with y + T(y), so N(y; d) is the limiting
        # normal cone of T(y) at the point d
        T = self.tangent(y)
        at_d = [_conic_tangent(p, d) for p in T if p.contains(d)]
        if not at_d:
            return []
        return union_limiting_normal(at_d, self.dim, cap)

    def hyperplanes(self, y: Sequence) -> list[IntVec]:
        rows: list[IntVec] = []
        for p in self.tangent(y):
            rows += list(p.ineq) + list(p.eq)
        return rows

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroSet(Factor):
    dim: int
    kind = "zero"

    def polyhedra(self):
        n = self.dim
        return [Polyhedron(E=[[1 if i == j else 0 for j in range(n)] for i in range(n)], e=[0] * n)]

    def contains(self, y):
        return is_zero(y)

    def to_dict(self):
        return {"type": "zero", "dim": self.dim}


@dataclass(frozen=True)
class Orthant(Factor):
    """sign * R^dim_+ (sign = +1 for the nonnegative orthant, -1 for the nonpositive one)."""

    dim: int
    sign: int = 1
    kind = "orthant"

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("orthant sign must be +1 or -1")

    def polyhedra(self):
        n = self.dim
        return [Polyhedron([[-self.sign if i == j else 0 for j in range(n)] for i in range(n)], [0] * n)]

    def to_dict(self):
        return {"type": "orthant", "dim": self.dim, "sign": self.sign}


@dataclass(frozen=True)
class PolyUnion(Factor):
    """Union of convex polyhedra {y : <lambda_ij, y> <= b_ij}."""

    dim: int
    pieces: tuple[Polyhedron, ...]
    kind = "polyunion"

    def __init__(self, dim: int, pieces: Iterable[Polyhedron]):
        pieces = tuple(pieces)
        if not pieces:
            raise ValueError("a polyhedral union needs at least one piece")
        for p in pieces:
            for r in p.A + p.E:
                if len(r) != dim:
                    raise ValueError(f"row of length {len(r)} in a factor of dimension {dim}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "pieces", pieces)

    def polyhedra(self):
        return list(self.pieces)

    def to_dict(self):
        out = []
        for p in self.pieces:
            d = {"A": [[str(x) for x in r] for r in p.A], "b": [str(x) for x in p.b]}
            if p.E:
                d["E"] = [[str(x) for x in r] for r in p.E]
                d["e"] = [str(x) for x in p.e]
            out.append(d)
        return {"type": "polyunion", "dim": self.dim, "pieces": out}


_E1, _E2 = (1, 0), (0, 1)


@dataclass(frozen=True)
class ComplFactor(Factor):
    """{(a, b) : a >= 0, b >= 0, ab = 0} with closed-form cones."""

    dim: int = 2
    kind = "compl"

    def polyhedra(self):
        return [Polyhedron([[-1, 0]], [0], [[0, 1]], [0]), Polyhedron([[0, -1]], [0], [[1, 0]], [0])]

    def contains(self, y):
        a, b = y
        return a >= 0 and b >= 0 and a * b == 0

    @staticmethod
    def branch(y) -> str:
        a, b = y
        if a == 0 and b == 0:
            return "a=b=0"
        return "0=a<b" if a == 0 else "a>b=0"

    def certificate(self, y):
        return self.branch(y)

    def tangent(self, y):
        br = self.branch(y)
        if br == "0=a<b":
            return [HCone((), [_E1], 2)]
        if br == "a>b=0":
            return [HCone((), [_E2], 2)]
        return [HCone([(-1, 0)], [_E2], 2), HCone([(0, -1)], [_E1], 2)]

    def regular_normal(self, y):
        br = self.branch(y)
        # normals are written -(gamma, nu)
        if br == "0=a<b":
            return HCone((), [_E2], 2)
        if br == "a>b=0":
            return HCone((), [_E1], 2)
        return HCone([_E1, _E2], (), 2)

    def limiting_normal(self, y, cap=DEFAULT_FACE_CAP):
        if self.branch(y) != "a=b=0":
            return [self.regular_normal(y)]
        return [HCone((), [_E1], 2), HCone((), [_E2], 2), HCone([_E1, _E2], (), 2)]

    def directional_normal(self, y, d, cap=DEFAULT_FACE_CAP):
        if not any(p.contains(d) for p in self.tangent(y)):
            return []
        if self.branch(y) != "a=b=0":
            return self.limiting_normal(y)
        return self.limiting_normal(d)

    def hyperplanes(self, y):
        br = self.branch(y)
        if br == "0=a<b":
            return [_E1]
        if br == "a>b=0":
            return [_E2]
        return [_E1, _E2]

    def to_dict(self):
        return {"type": "compl"}


# ---------------------------------------------------------------------------
# structured sets


@dataclass(frozen=True)
class SetPoint:
    coordinates: Vec
    certificate: tuple


@dataclass(frozen=True)
class StructuredSet:
    factors: tuple[Factor, ...]

    def __init__(self, factors: Iterable[Factor]):
        object.__setattr__(self, "factors", tuple(factors))

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def offsets(self) -> list[int]:
        out, o = [], 0
        for f in self.factors:
            out.append(o)
            o += f.dim
        return out

    def split(self, y: Sequence) -> list[tuple]:
        if len(y) != self.dim:
            raise ValueError(f"vector of length {len(y)} for a set in R^{self.dim}")
        return [tuple(y[o:o + f.dim]) for o, f in zip(self.offsets(), self.factors)]

    def contains(self, y: Sequence) -> bool:
        return all(f.contains(part) for f, part in zip(self.factors, self.split(y)))

    def point(self, y: Sequence) -> SetPoint:
        y = vec(y)
        parts = self.split(y)
        for i, (f, part) in enumerate(zip(self.factors, parts)):
            if not f.contains(part):
                raise InfeasiblePoint(f"factor {i} ({f.kind}) does not contain {[str(x) for x in part]}")
        return SetPoint(y, tuple(f.certificate(p) for f, p in zip(self.factors, parts)))

    def is_polyhedral(self) -> bool:
        # every catalog factor is a finite union of convex polyhedra
        return True

    def embed_rows(self, k: int, rows: Iterable[Sequence]) -> list[IntVec]:
        o = self.offsets()[k]
        n = self.dim
        f = self.factors[k]
        return [(0,) * o + tuple(r) + (0,) * (n - o - f.dim) for r in rows]


def _as_point(S: StructuredSet, s) -> SetPoint:
    return s if isinstance(s, SetPoint) else S.point(s)


def tangent_cone(S: StructuredSet, s) -> ConeUnion:
    s = _as_point(S, s)
    parts = S.split(s.coordinates)
    return product_union([ConeUnion(f.tangent(p), f.dim) for f, p in zip(S.factors, parts)])


def regular_normal_cone(S: StructuredSet, s) -> HCone:
    s = _as_point(S, s)
    parts = S.split(s.coordinates)
    return product([f.regular_normal(p) for f, p in zip(S.factors, parts)])


def limiting_normal_cone(S: StructuredSet, s, cap: int = DEFAULT_FACE_CAP) -> ConeUnion:
    s = _as_point(S, s)
    parts = S.split(s.coordinates)
    return product_union([ConeUnion(f.limiting_normal(p, cap), f.dim) for f, p in zip(S.factors, parts)])


def directional_normal_cone(S: StructuredSet, s, d: Sequence, cap: int = DEFAULT_FACE_CAP) -> ConeUnion:
    s = _as_point(S, s)
    parts = S.split(s.coordinates)
    dparts = S.split(vec(d))
    return product_union([ConeUnion(f.directional_normal(p, dp, cap), f.dim)
                          for f, p, dp in zip(S.factors, parts, dparts)])


def hyperplanes(S: StructuredSet, s) -> list[IntVec]:
    """Rows whose sign pattern at a direction d fixes T-membership and N(s; d)."""
    s = _as_point(S, s)
    parts = S.split(s.coordinates)
    rows: list[IntVec] = []
    for k, (f, p) in enumerate(zip(S.factors, parts)):
        rows += S.embed_rows(k, f.hyperplanes(p))
    return rows


def factor_cells(f: Factor, y: Sequence, cap: int = DEFAULT_FACE_CAP) -> list[Cell]:
    """Open cells of the factor's local fan at y (cells of T(y) cut by its own rows)."""
    T = f.tangent(y)
    cells, _ = arrangement_cells(f.hyperplanes(y), f.dim, cap=cap)
    return [c for c in cells if any(p.contains(_cell_point(c)) for p in T)]


def as_fraction_vec(v: Sequence) -> Vec:
    return tuple(Fraction(x) for x in v)
