"""Exact rational polyhedral cone machinery.

Cones live in R^n and are stored in canonical form: every row, ray and line
is a primitive integer vector (gcd 1), so two cones are equal exactly when
their canonical generator lists are equal. Points, directions and multipliers
that are not canonical generators are tuples of :class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

IntVec = tuple[int, ...]
Vec = tuple[Fraction, ...]

DEFAULT_FACE_CAP = 100_000


class GeometryError(ValueError):
    """Malformed cone data (dimension mismatch, bad rows)."""


class FaceCapExceeded(RuntimeError):
    """Enumeration produced more cells or faces than the configured cap."""

    def __init__(self, cap: int):
        super().__init__(f"enumeration exceeded cap of {cap}")
        self.cap = cap


# ---------------------------------------------------------------------------
# vector helpers


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r} in exact context")
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def vec(values: Iterable) -> Vec:
    return tuple(to_fraction(v) for v in values)


def dot(a: Sequence, b: Sequence) -> Fraction | int:
    return sum(x * y for x, y in zip(a, b))


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def neg(v: Sequence) -> tuple:
    return tuple(-x for x in v)


def add(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def scale(c, v: Sequence) -> tuple:
    return tuple(c * x for x in v)


def mat_vec(M: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(dot(row, v) for row in M)


def transpose(M: Sequence[Sequence], ncols: int | None = None) -> list[tuple]:
    if not M:
        return [() for _ in range(ncols or 0)]
    return [tuple(col) for col in zip(*M)]


def primitive(v: Sequence) -> IntVec:
    """Scale a rational vector to the primitive integer vector with the same direction."""
    fr = [to_fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return tuple(0 for _ in ints)
    return tuple(x // g for x in ints)


def _unit(i: int, n: int) -> IntVec:
    return tuple(1 if j == i else 0 for j in range(n))


def rref(rows: Sequence[Sequence], n: int) -> tuple[list[Vec], list[int]]:
    """Reduced row echelon form over Q; returns nonzero rows and pivot columns."""
    M = [[to_fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return [tuple(row) for row in M[:r]], pivots


def rank(rows: Sequence[Sequence], n: int) -> int:
    if not rows:
        return 0
    return len(rref(rows, n)[1])


def nullspace(rows: Sequence[Sequence], n: int) -> list[IntVec]:
    """Integer basis of {x : row . x = 0 for every row}."""
    R, pivots = rref(rows, n)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            x[pc] = -row[f]
        basis.append(primitive(x))
    return basis


def solve(M: Sequence[Sequence], rhs: Sequence, n: int) -> Vec | None:
    """One solution of M x = rhs over Q, or None when inconsistent."""
    aug = [list(r) + [b] for r, b in zip(M, rhs)]
    R, pivots = rref(aug, n + 1)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(R, pivots):
        x[pc] = row[n]
    return tuple(x)


def _orthogonal_basis(lines: Sequence[Sequence]) -> list[Vec]:
    basis: list[Vec] = []
    for l in lines:
        w = vec(l)
        for b in basis:
            w = sub(w, scale(dot(w, b) / dot(b, b), b))
        if not is_zero(w):
            basis.append(w)
    return basis


def project_out(v: Sequence, lines: Sequence[Sequence]) -> Vec:
    """Orthogonal projection of v onto the complement of span(lines)."""
    w = vec(v)
    for b in _orthogonal_basis(lines):
        w = sub(w, scale(dot(w, b) / dot(b, b), b))
    return w


def _canon_rows(rows: Iterable[Sequence], n: int) -> tuple[IntVec, ...]:
    out = set()
    for r in rows:
        if len(r) != n:
            raise GeometryError(f"row {tuple(r)} has length {len(r)}, expected {n}")
        p = primitive(r)
        if not is_zero(p):
            out.add(p)
    return tuple(sorted(out))


def _canon_subspace(rows: Iterable[Sequence], n: int) -> tuple[IntVec, ...]:
    rows = list(rows)
    for r in rows:
        if len(r) != n:
            raise GeometryError(f"vector {tuple(r)} has length {len(r)}, expected {n}")
    R, _ = rref(rows, n)
    return tuple(primitive(r) for r in R)


# ---------------------------------------------------------------------------
# cone types


@dataclass(frozen=True)
class HCone:
    """{y : A y <= 0, B y = 0} in R^dim."""

    ineq: tuple[IntVec, ...]
    eq: tuple[IntVec, ...]
    dim: int

    def __init__(self, ineq: Iterable[Sequence] = (), eq: Iterable[Sequence] = (), dim: int | None = None):
        ineq, eq = list(ineq), list(eq)
        if dim is None:
            first = (ineq + eq)[:1]
            if not first:
                raise GeometryError("dimension required for a cone without rows")
            dim = len(first[0])
        object.__setattr__(self, "dim", dim)
        eq_c = _canon_subspace(eq, dim)
        ineq_c = _canon_rows(ineq, dim)
        object.__setattr__(self, "eq", eq_c)
        object.__setattr__(self, "ineq", ineq_c)

    @classmethod
    def full(cls, n: int) -> "HCone":
        return cls((), (), n)

    @classmethod
    def zero(cls, n: int) -> "HCone":
        return cls((), [_unit(i, n) for i in range(n)], n)

    def contains(self, y: Sequence) -> bool:
        if len(y) != self.dim:
            raise GeometryError("point dimension mismatch")
        return all(dot(a, y) <= 0 for a in self.ineq) and all(dot(b, y) == 0 for b in self.eq)

    def rows_active(self, y: Sequence) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.ineq) if dot(a, y) == 0)

    def __repr__(self) -> str:
        return f"HCone(ineq={list(self.ineq)}, eq={list(self.eq)}, dim={self.dim})"


@dataclass(frozen=True)
class VCone:
    """cone(rays) + span(lines) in R^dim, rays reduced modulo the lineality span."""

    rays: tuple[IntVec, ...]
    lines: tuple[IntVec, ...]
    dim: int

    def __init__(self, rays: Iterable[Sequence] = (), lines: Iterable[Sequence] = (), dim: int | None = None):
        rays, lines = list(rays), list(lines)
        if dim is None:
            first = (rays + lines)[:1]
            if not first:
                raise GeometryError("dimension required for an empty generator list")
            dim = len(first[0])
        object.__setattr__(self, "dim", dim)
        lines_c = _canon_subspace(lines, dim)
        for r in rays:
            if len(r) != dim:
                raise GeometryError(f"ray {tuple(r)} has length {len(r)}, expected {dim}")
        reduced = (project_out(r, lines_c) if lines_c else r for r in rays)
        object.__setattr__(self, "lines", lines_c)
        object.__setattr__(self, "rays", _canon_rows(reduced, dim))

    def generators(self) -> list[IntVec]:
        return list(self.rays) + list(self.lines) + [neg(l) for l in self.lines]

    def __repr__(self) -> str:
        return f"VCone(rays={list(self.rays)}, lines={list(self.lines)}, dim={self.dim})"


@dataclass(frozen=True)
class Face:
    """Face of a parent HCone: the inequality rows in ``active_set`` hold with equality."""

    active_set: frozenset[int]
    as_cone: HCone
    generators: VCone = field(compare=False)


# ---------------------------------------------------------------------------
# double description


def _dd(dim: int, rows: Sequence[IntVec]) -> tuple[list[IntVec], list[IntVec]]:
    lines: list[IntVec] = [_unit(i, dim) for i in range(dim)]
    rays: list[IntVec] = []
    processed: list[IntVec] = []
    for a in rows:
        if is_zero(a):
            continue
        vals = [dot(a, l) for l in lines]
        k = next((i for i, v in enumerate(vals) if v != 0), None)
        if k is not None:
            l0, v0 = lines[k], vals[k]
            s0 = 1 if v0 > 0 else -1
            new_lines = []
            for i, (l, v) in enumerate(zip(lines, vals)):
                if i == k:
                    continue
                new_lines.append(primitive(sub(scale(v0, l), scale(v, l0))))
            new_rays = []
            for r in rays:
                ar = dot(a, r)
                new_rays.append(primitive(sub(scale(abs(v0), r), scale(s0 * ar, l0))))
            new_rays.append(l0 if v0 < 0 else neg(l0))
            lines, rays = new_lines, new_rays
        else:
            pos, zero, negs = [], [], []
            for r in rays:
                v = dot(a, r)
                (pos if v > 0 else negs if v < 0 else zero).append((r, v))
            target = dim - len(lines) - 2
            combos = []
            if pos and negs:
                for p, vp in pos:
                    zp = [b for b in processed if dot(b, p) == 0]
                    for q, vq in negs:
                        common = [b for b in zp if dot(b, q) == 0]
                        if len(common) < target or target < 0:
                            continue
                        if rank(common, dim) != target:
                            continue
                        combos.append(primitive(sub(scale(vp, q), scale(vq, p))))
            rays = [r for r, _ in zero] + [r for r, _ in negs] + combos
        seen = set()
        uniq = []
        for r in rays:
            if not is_zero(r) and r not in seen:
                seen.add(r)
                uniq.append(r)
        rays = uniq
        processed.append(a)
    return rays, lines


def dd_h_to_v(c: HCone) -> VCone:
    """Minimal generators of an H-cone (incremental double description)."""
    return _h_to_v_cached(c)


_V_CACHE: dict[HCone, VCone] = {}


def _h_to_v_cached(c: HCone) -> VCone:
    hit = _V_CACHE.get(c)
    if hit is not None:
        return hit
    rows = list(c.ineq)
    for e in c.eq:
        rows.append(e)
        rows.append(neg(e))
    # equalities first keeps the intermediate cones small
    rows = rows[len(c.ineq):] + rows[: len(c.ineq)]
    rays, lines = _dd(c.dim, rows)
    v = VCone(rays, lines, c.dim)
    if len(_V_CACHE) > 200_000:
        _V_CACHE.clear()
    _V_CACHE[c] = v
    return v


def dd_v_to_h(c: VCone) -> HCone:
    """Inequality description of a V-cone, via generators of its polar."""
    polar_v = dd_h_to_v(HCone(c.rays, c.lines, c.dim))
    return HCone(polar_v.rays, polar_v.lines, c.dim)


def as_h(c: HCone | VCone) -> HCone:
    return c if isinstance(c, HCone) else dd_v_to_h(c)


def as_v(c: HCone | VCone) -> VCone:
    return dd_h_to_v(c) if isinstance(c, HCone) else minimal(c)


def minimal(c: VCone) -> VCone:
    """Drop redundant generators of a V-cone."""
    return dd_h_to_v(dd_v_to_h(c))


def polar(c: HCone | VCone) -> HCone:
    """{v : <v, w> <= 0 for all w in c}."""
    if isinstance(c, VCone):
        return HCone(c.rays, c.lines, c.dim)
    return dd_v_to_h(VCone(c.ineq, c.eq, c.dim))


def is_trivial(c: HCone | VCone) -> bool:
    v = as_v(c)
    return not v.rays and not v.lines


def contains(c: HCone | VCone, y: Sequence) -> bool:
    return as_h(c).contains(y)


def subset(a: HCone | VCone, b: HCone | VCone) -> bool:
    hb = as_h(b)
    return all(hb.contains(g) for g in as_v(a).generators())


def cone_equal(a: HCone | VCone, b: HCone | VCone) -> bool:
    va, vb = as_v(a), as_v(b)
    return va.dim == vb.dim and va.rays == vb.rays and va.lines == vb.lines


def intersect(a: HCone, b: HCone) -> HCone:
    if a.dim != b.dim:
        raise GeometryError(f"dimension mismatch {a.dim} vs {b.dim}")
    return HCone(a.ineq + b.ineq, a.eq + b.eq, a.dim)


def linear_preimage(M: Sequence[Sequence], c: HCone) -> HCone:
    """{x : M x in c}."""
    if len(M) != c.dim:
        raise GeometryError(f"map has {len(M)} output rows, cone lives in R^{c.dim}")
    n = len(M[0]) if M else 0
    MT = transpose(M, n)

    def pull(a):
        return tuple(dot(a, col) for col in MT)

    return HCone([pull(a) for a in c.ineq], [pull(b) for b in c.eq], n)


def linear_image(M: Sequence[Sequence], c: HCone | VCone) -> VCone:
    """{M x : x in c} as a minimal V-cone."""
    v = as_v(c)
    if M and len(M[0]) != v.dim:
        raise GeometryError(f"map expects R^{len(M[0])}, cone lives in R^{v.dim}")
    m = len(M)
    rays = [mat_vec(M, r) for r in v.rays]
    lines = [mat_vec(M, l) for l in v.lines]
    return minimal(VCone([r for r in rays if not is_zero(r)], [l for l in lines if not is_zero(l)], m))


def product(cones: Sequence[HCone]) -> HCone:
    """Cartesian product as a block-diagonal H-cone."""
    n = sum(c.dim for c in cones)
    ineq, eq = [], []
    off = 0
    for c in cones:
        pad_l, pad_r = (0,) * off, (0,) * (n - off - c.dim)
        ineq += [pad_l + a + pad_r for a in c.ineq]
        eq += [pad_l + b + pad_r for b in c.eq]
        off += c.dim
    return HCone(ineq, eq, n)


def cone_dim(c: HCone | VCone) -> int:
    v = as_v(c)
    return rank(list(v.rays) + list(v.lines), v.dim)


# ---------------------------------------------------------------------------
# faces and interior points


def relint_point(c: HCone | VCone | Face) -> IntVec:
    """Deterministic relative-interior point: sum of minimal rays plus sum of lines."""
    if isinstance(c, Face):
        v = c.generators
    else:
        v = as_v(c)
    if not v.rays and not v.lines:
        raise GeometryError("no relative interior direction: cone is {0}")
    total = (0,) * v.dim
    for g in list(v.rays) + list(v.lines):
        total = add(total, g)
    return total


def faces(c: HCone, cap: int = DEFAULT_FACE_CAP) -> list[Face]:
    """All faces of c, each keyed by its closed active set of inequality rows."""
    v = dd_h_to_v(c)
    rays = v.rays

    def closure(S: frozenset[int]) -> tuple[frozenset[int], list[IntVec]]:
        fr = [r for r in rays if all(dot(c.ineq[j], r) == 0 for j in S)]
        act = frozenset(j for j, a in enumerate(c.ineq) if all(dot(a, r) == 0 for r in fr))
        return act, fr

    start, fr0 = closure(frozenset())
    seen = {start: fr0}
    queue = [start]
    while queue:
        S = queue.pop()
        for j in range(len(c.ineq)):
            if j in S:
                continue
            T, fr = closure(S | {j})
            if T not in seen:
                seen[T] = fr
                if len(seen) > cap:
                    raise FaceCapExceeded(cap)
                queue.append(T)
    out = []
    for S in sorted(seen, key=lambda s: (len(s), sorted(s))):
        as_cone = HCone([a for j, a in enumerate(c.ineq) if j not in S], list(c.eq) + [c.ineq[j] for j in S], c.dim)
        out.append(Face(S, as_cone, VCone(seen[S], v.lines, c.dim)))
    return out


# ---------------------------------------------------------------------------
# hyperplane arrangements


@dataclass(frozen=True)
class Cell:
    """Open cell of a central arrangement: sign of each row fixed (-1, 0, +1)."""

    signs: tuple[int, ...]
    closure: HCone
    generators: VCone = field(compare=False)

    @property
    def dimension(self) -> int:
        return rank(list(self.generators.rays) + list(self.generators.lines), self.closure.dim)

    def point(self) -> IntVec:
        return relint_point(self.generators)


def _signed_cone(base: HCone, rows: Sequence[IntVec], signs: Sequence[int]) -> HCone:
    ineq = list(base.ineq)
    eq = list(base.eq)
    for a, s in zip(rows, signs):
        if s == 0:
            eq.append(a)
        elif s > 0:
            ineq.append(neg(a))
        else:
            ineq.append(a)
    return HCone(ineq, eq, base.dim)


def arrangement_cells(rows: Sequence[Sequence], dim: int, base: HCone | None = None,
                      cap: int = DEFAULT_FACE_CAP) -> tuple[list[Cell], list[IntVec]]:
    """Nonempty open cells of the central arrangement cut by ``rows`` inside ``base``.

    ``base`` must be a linear subspace (default: all of R^dim). Parallel rows are
    merged; the second return value lists the canonical rows the sign vectors
    refer to. Each cell's relint point realises its sign vector exactly.
    """
    base = base or HCone.full(dim)
    canon: list[IntVec] = []
    for r in rows:
        p = primitive(r)
        if is_zero(p):
            continue
        if p not in canon and neg(p) not in canon:
            canon.append(p)
    cells: list[tuple[tuple[int, ...], HCone]] = [((), base)]
    for i, a in enumerate(canon):
        nxt = []
        for signs, cone in cells:
            for s in (-1, 0, 1):
                sg = signs + (s,)
                closed = _signed_cone(cone, [a], [s])
                v = dd_h_to_v(closed)
                if _realizable(v, canon[: i + 1], sg):
                    nxt.append((sg, closed))
        if len(nxt) > cap:
            raise FaceCapExceeded(cap)
        cells = nxt
    out = []
    for signs, closed in cells:
        v = dd_h_to_v(closed)
        out.append(Cell(signs, closed, v))
    return out, canon


def _realizable(v: VCone, rows: Sequence[IntVec], signs: Sequence[int]) -> bool:
    for a, s in zip(rows, signs):
        if s != 0 and not any(dot(a, r) != 0 for r in v.rays):
            return False
    return True


# ---------------------------------------------------------------------------
# exact Euclidean projection onto small polyhedra


def nearest_point(p: Sequence, A: Sequence[Sequence] = (), b: Sequence = (),
                  E: Sequence[Sequence] = (), e: Sequence = ()) -> Vec | None:
    """Exact projection of p onto {y : A y <= b, E y = e} by active-set enumeration.

    Returns None when the polyhedron is empty. Exponential in the number of
    inequality rows; intended for the small per-factor pieces used here.
    """
    p = vec(p)
    n = len(p)
    A = [vec(r) for r in A]
    b = vec(b)
    E_rows, e_vals = [], []
    if E:
        R, piv = rref([list(r) + [v] for r, v in zip(E, e)], n + 1)
        if n in piv:
            return None
        E_rows = [r[:n] for r in R]
        e_vals = [r[n] for r in R]
    m = len(A)
    for k in range(m + 1):
        for S in itertools.combinations(range(m), k):
            M = E_rows + [A[j] for j in S]
            rhs = list(e_vals) + [b[j] for j in S]
            if M and rank(M, n) < len(M):
                continue
            if M:
                G = [[dot(r1, r2) for r2 in M] for r1 in M]
                resid = [dot(r, p) - v for r, v in zip(M, rhs)]
                lam = solve(G, resid, len(M))
                if lam is None:
                    continue
                y = p
                for r, l in zip(M, lam):
                    y = sub(y, scale(l, r))
                mult = lam[len(E_rows):]
            else:
                y, mult = p, ()
            if any(l < 0 for l in mult):
                continue
            if all(dot(a, y) <= bv for a, bv in zip(A, b)):
                return y
    return None


def project_onto_cone(p: Sequence, c: HCone) -> Vec:
    y = nearest_point(p, c.ineq, [0] * len(c.ineq), c.eq, [0] * len(c.eq))
    assert y is not None
    return y
