"""Constraint maps, problem instances, and the complementarity / KKT encodings."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .cones import ComplFactor, ConeUnion, SetPoint, StructuredSet, ZeroSet, tangent_cone
from .ratgeom import HCone, Vec, dot, linear_preimage, mat_vec, vec


class CapabilityError(TypeError):
    """An exact operation was requested on a numeric-only map."""


class DirectionError(ValueError):
    """A direction outside the linearized cone was supplied."""


def _mat(rows: Iterable[Sequence], ncols: int | None = None) -> tuple[Vec, ...]:
    out = tuple(vec(r) for r in rows)
    if ncols is not None and any(len(r) != ncols for r in out):
        raise ValueError(f"expected rows of length {ncols}")
    return out


@dataclass(frozen=True)
class QuadMap:
    """x -> (1/2 x^T Q_r x + A_r x + c_r)_r with exact rational coefficients.

    Affine maps are the special case with every Q_r equal to zero.
    """

    Q: tuple[tuple[Vec, ...], ...]
    A: tuple[Vec, ...]
    c: Vec
    n: int

    def __init__(self, A: Iterable[Sequence], c: Iterable, Q: Iterable | None = None, n: int | None = None):
        A = list(A)
        c = vec(c)
        if n is None:
            if not A:
                raise ValueError("input dimension required when A has no rows")
            n = len(A[0])
        A = _mat(A, n)
        if len(A) != len(c):
            raise ValueError(f"A has {len(A)} rows but c has {len(c)} entries")
        if Q is None:
            Qs = tuple(tuple((Fraction(0),) * n for _ in range(n)) for _ in A)
        else:
            Qs = tuple(_mat(q, n) for q in Q)
            if len(Qs) != len(A):
                raise ValueError("one Hessian block per output row is required")
            for q in Qs:
                if len(q) != n:
                    raise ValueError(f"Hessian blocks must be {n}x{n}")
                if any(q[i][j] != q[j][i] for i in range(n) for j in range(n)):
                    raise ValueError("Hessian blocks must be symmetric")
        object.__setattr__(self, "Q", Qs)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "n", n)

    @classmethod
    def affine(cls, A, c, n: int | None = None) -> "QuadMap":
        return cls(A, c, None, n)

    @property
    def m(self) -> int:
        return len(self.c)

    @property
    def is_affine(self) -> bool:
        return all(x == 0 for q in self.Q for row in q for x in row)

    def __call__(self, x: Sequence) -> Vec:
        x = vec(x)
        return tuple(dot(x, mat_vec(q, x)) / 2 + dot(a, x) + ci for q, a, ci in zip(self.Q, self.A, self.c))

    def eval_float(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        Q, A, c = self.float_data()
        return 0.5 * np.einsum("i,rij,j->r", x, Q, x) + A @ x + c

    def jacobian_float(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        Q, A, _ = self.float_data()
        return np.einsum("rij,j->ri", Q, x) + A

    def float_data(self):
        cached = self.__dict__.get("_float")
        if cached is None:
            Q = np.array([[[float(v) for v in row] for row in q] for q in self.Q], dtype=float).reshape(self.m, self.n, self.n)
            A = np.array([[float(v) for v in r] for r in self.A], dtype=float).reshape(self.m, self.n)
            c = np.array([float(v) for v in self.c], dtype=float)
            cached = (Q, A, c)
            object.__setattr__(self, "_float", cached)
        return cached

    def jacobian(self, x: Sequence) -> tuple[Vec, ...]:
        x = vec(x)
        return tuple(tuple(g + a for g, a in zip(mat_vec(q, x), arow)) for q, arow in zip(self.Q, self.A))

    def second(self, u: Sequence) -> Vec:
        u = vec(u)
        return tuple(dot(u, mat_vec(q, u)) for q in self.Q)

    def rows(self, idx: Sequence[int]) -> "QuadMap":
        return QuadMap([self.A[i] for i in idx], [self.c[i] for i in idx], [self.Q[i] for i in idx], self.n)

    def scaled(self, s) -> "QuadMap":
        s = Fraction(s)
        return QuadMap([[s * v for v in r] for r in self.A], [s * v for v in self.c],
                       [[[s * v for v in row] for row in q] for q in self.Q], self.n)

    def to_dict(self) -> dict:
        d = {"type": "affine" if self.is_affine else "quadratic",
             "A": [[str(v) for v in r] for r in self.A], "c": [str(v) for v in self.c]}
        if not self.is_affine:
            d["Q"] = [[[str(v) for v in row] for row in q] for q in self.Q]
        if not self.A:
            d["n"] = self.n
        return d


def stack(maps: Sequence[QuadMap], n: int | None = None) -> QuadMap:
    if not maps:
        if n is None:
            raise ValueError("input dimension required for an empty stack")
        return QuadMap([], [], [], n)
    n = maps[0].n if n is None else n
    if any(m.n != n for m in maps):
        raise ValueError("stacked maps must share the input dimension")
    return QuadMap([r for m in maps for r in m.A], [v for m in maps for v in m.c],
                   [q for m in maps for q in m.Q], n)


@dataclass(frozen=True)
class Oracle:
    """Numeric-only map given by callbacks; usable by the floating-point verifier."""

    m: int
    n: int
    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    smoothness: str = "C1"

    is_affine = False

    def eval_float(self, x) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)


Atom = QuadMap | Oracle


def _exact(P: Atom) -> QuadMap:
    if not isinstance(P, QuadMap):
        raise CapabilityError("this operation needs an affine or quadratic map, not a numeric oracle")
    return P


def jacobian(P: Atom, x: Sequence) -> tuple[Vec, ...]:
    return _exact(P).jacobian(x)


def second_derivative(P: Atom, x: Sequence, u: Sequence) -> Vec:
    """The single element of the second-order graphical derivative of P at x in direction u."""
    return _exact(P).second(u)


# ---------------------------------------------------------------------------
# general instances


@dataclass(frozen=True)
class ProblemInstance:
    """The system P(x) in Lambda with a feasible anchor."""

    P: Atom
    Lambda: StructuredSet
    anchor: Vec
    source: object = field(default=None, compare=False)

    def __init__(self, P: Atom | Sequence[QuadMap], Lambda: StructuredSet, anchor: Sequence, source=None):
        if not isinstance(P, (QuadMap, Oracle)):
            P = stack(list(P))
        anchor = vec(anchor)
        if P.n != len(anchor):
            raise ValueError(f"map takes {P.n} variables but the anchor has {len(anchor)}")
        if P.m != Lambda.dim:
            raise ValueError(f"map has {P.m} outputs but the set lives in R^{Lambda.dim}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Lambda", Lambda)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "source", source)
        if self.exact:
            Lambda.point(P(anchor))

    @property
    def exact(self) -> bool:
        return isinstance(self.P, QuadMap)

    @property
    def n(self) -> int:
        return self.P.n

    @property
    def m(self) -> int:
        return self.P.m

    def image(self) -> SetPoint:
        return self.Lambda.point(_exact(self.P)(self.anchor))

    def jac(self) -> tuple[Vec, ...]:
        return jacobian(self.P, self.anchor)

    def is_affine(self) -> bool:
        return self.exact and self.P.is_affine


def linearized_cone(inst: ProblemInstance) -> ConeUnion:
    """{u : grad P(anchor) u in T_Lambda(P(anchor))}, one stratum per tangent piece."""
    J = inst.jac()
    T = tangent_cone(inst.Lambda, inst.image())
    pieces = [linear_preimage(J, p) if J else HCone.full(inst.n) for p in T.pieces]
    return ConeUnion(pieces, inst.n, T.tags, canonical=False)


def in_linearized_cone(inst: ProblemInstance, u: Sequence) -> bool:
    J = inst.jac()
    return tangent_cone(inst.Lambda, inst.image()).contains(mat_vec(J, vec(u)))


# ---------------------------------------------------------------------------
# complementarity systems


@dataclass(frozen=True)
class IndexSets:
    I00: tuple[int, ...]
    I0p: tuple[int, ...]
    Ip0: tuple[int, ...]
    I00_u: tuple[int, ...] = ()
    I0p_u: tuple[int, ...] = ()
    Ip0_u: tuple[int, ...] = ()


@dataclass(frozen=True)
class CSInstance:
    """H(x) = 0, 0 <= Phi(x) perp Psi(x) >= 0 with a feasible anchor."""

    H: QuadMap
    Phi: QuadMap
    Psi: QuadMap
    anchor: Vec

    def __init__(self, H: QuadMap | None, Phi: QuadMap, Psi: QuadMap, anchor: Sequence):
        anchor = vec(anchor)
        n = len(anchor)
        H = H if H is not None else QuadMap([], [], [], n)
        for name, M in (("H", H), ("Phi", Phi), ("Psi", Psi)):
            if M.n != n:
                raise ValueError(f"{name} takes {M.n} variables but the anchor has {n}")
        if Phi.m != Psi.m:
            raise ValueError("Phi and Psi must have the same number of outputs")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "Psi", Psi)
        object.__setattr__(self, "anchor", anchor)
        if any(v != 0 for v in H(anchor)):
            from .cones import InfeasiblePoint
            raise InfeasiblePoint("H(anchor) != 0")
        for i, (a, b) in enumerate(zip(Phi(anchor), Psi(anchor))):
            if not (a >= 0 and b >= 0 and a * b == 0):
                from .cones import InfeasiblePoint
                raise InfeasiblePoint(f"complementarity pair {i} = ({a}, {b}) is infeasible")

    @property
    def n(self) -> int:
        return len(self.anchor)

    @property
    def d(self) -> int:
        return self.H.m

    @property
    def m(self) -> int:
        return self.Phi.m

    def is_affine(self) -> bool:
        return self.H.is_affine and self.Phi.is_affine and self.Psi.is_affine


def _base_index_sets(cs: CSInstance):
    phi, psi = cs.Phi(cs.anchor), cs.Psi(cs.anchor)
    I00 = tuple(i for i in range(cs.m) if phi[i] == 0 and psi[i] == 0)
    I0p = tuple(i for i in range(cs.m) if phi[i] == 0 and psi[i] > 0)
    Ip0 = tuple(i for i in range(cs.m) if phi[i] > 0 and psi[i] == 0)
    return I00, I0p, Ip0


def cs_in_linearized_cone(cs: CSInstance, u: Sequence) -> bool:
    u = vec(u)
    I00, I0p, Ip0 = _base_index_sets(cs)
    JH, JF, JS = cs.H.jacobian(cs.anchor), cs.Phi.jacobian(cs.anchor), cs.Psi.jacobian(cs.anchor)
    if any(dot(r, u) != 0 for r in JH):
        return False
    if any(dot(JF[i], u) != 0 for i in I0p) or any(dot(JS[i], u) != 0 for i in Ip0):
        return False
    for i in I00:
        a, b = dot(JF[i], u), dot(JS[i], u)
        if not (a >= 0 and b >= 0 and a * b == 0):
            return False
    return True


def index_sets(cs: CSInstance, u: Sequence | None = None) -> IndexSets:
    I00, I0p, Ip0 = _base_index_sets(cs)
    if u is None:
        return IndexSets(I00, I0p, Ip0, I00)
    u = vec(u)
    if not cs_in_linearized_cone(cs, u):
        raise DirectionError("direction is not in the linearized cone")
    JF, JS = cs.Phi.jacobian(cs.anchor), cs.Psi.jacobian(cs.anchor)
    a = {i: dot(JF[i], u) for i in I00}
    b = {i: dot(JS[i], u) for i in I00}
    return IndexSets(I00, I0p, Ip0,
                     I00_u=tuple(i for i in I00 if a[i] == 0 and b[i] == 0),
                     I0p_u=tuple(i for i in I00 if a[i] == 0 and b[i] > 0),
                     Ip0_u=tuple(i for i in I00 if a[i] > 0 and b[i] == 0))


def cs_map(cs: CSInstance) -> QuadMap:
    """(H, Phi_1, Psi_1, ..., Phi_m, Psi_m) as one map."""
    parts = [cs.H]
    for i in range(cs.m):
        parts += [cs.Phi.rows([i]), cs.Psi.rows([i])]
    return stack(parts, cs.n)


def cs_set(cs: CSInstance) -> StructuredSet:
    factors = [ZeroSet(cs.d)] if cs.d else []
    return StructuredSet(factors + [ComplFactor() for _ in range(cs.m)])


def cs_to_general(cs: CSInstance) -> ProblemInstance:
    return ProblemInstance(cs_map(cs), cs_set(cs), cs.anchor, source=cs)


# ---------------------------------------------------------------------------
# KKT systems


@dataclass(frozen=True)
class KKTInstance:
    """Stationarity, sign and complementarity conditions of min f s.t. g <= 0, h = 0."""

    f: QuadMap
    g: QuadMap
    h: QuadMap
    x: Vec
    mu: Vec
    lam: Vec

    def __init__(self, f: QuadMap, g: QuadMap, h: QuadMap, x: Sequence, mu: Sequence, lam: Sequence):
        for name, M in (("f", f), ("g", g), ("h", h)):
            if not isinstance(M, QuadMap):
                raise CapabilityError(f"{name} needs exact second derivatives (affine or quadratic)")
        x, mu, lam = vec(x), vec(mu), vec(lam)
        if f.m != 1:
            raise ValueError("f must be scalar-valued")
        if g.m != len(mu) or h.m != len(lam):
            raise ValueError("multiplier lengths must match the constraint counts")
        if not (f.n == g.n == h.n == len(x)):
            raise ValueError("f, g, h must share the variable dimension")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", lam)
        from .cones import InfeasiblePoint
        if any(v != 0 for v in self.grad_lagrangian()(self.point)):
            raise InfeasiblePoint("stationarity fails at the anchor")
        if any(v != 0 for v in h(x)):
            raise InfeasiblePoint("h(x) != 0 at the anchor")
        for gi, mi in zip(g(x), mu):
            if not (gi <= 0 and mi >= 0 and gi * mi == 0):
                raise InfeasiblePoint("sign or complementarity condition fails at the anchor")

    @property
    def p(self) -> int:
        return len(self.x)

    @property
    def point(self) -> Vec:
        return self.x + self.mu + self.lam

    def _lift(self, M: QuadMap) -> QuadMap:
        """Extend a map of x to the variables (x, mu, lambda)."""
        p, N = self.p, self.p + len(self.mu) + len(self.lam)
        pad = N - p
        A = [tuple(r) + (Fraction(0),) * pad for r in M.A]
        Q = [[tuple(row) + (Fraction(0),) * pad for row in q] + [(Fraction(0),) * N] * pad for q in M.Q]
        return QuadMap(A, M.c, Q, N)

    def grad_lagrangian(self) -> QuadMap:
        """x-gradient of L = f + mu^T g + lambda^T h as a quadratic map of (x, mu, lambda)."""
        p, m, k = self.p, len(self.mu), len(self.lam)
        N = p + m + k
        zero = Fraction(0)
        A, c, Q = [], [], []
        Qf, Af = self.f.Q[0], self.f.A[0]
        for r in range(p):
            row = [zero] * N
            for a in range(p):
                row[a] = Qf[r][a]
            M = [[zero] * N for _ in range(N)]
            for i in range(m):
                row[p + i] = self.g.A[i][r]
                for a in range(p):
                    M[a][p + i] = M[p + i][a] = self.g.Q[i][r][a]
            for j in range(k):
                row[p + m + j] = self.h.A[j][r]
                for a in range(p):
                    M[a][p + m + j] = M[p + m + j][a] = self.h.Q[j][r][a]
            A.append(row)
            c.append(Af[r])
            Q.append(M)
        return QuadMap(A, c, Q, N)


def kkt_to_cs(k: KKTInstance) -> CSInstance:
    """H := (grad_x L, h), Phi := -g, Psi := mu over the variables (x, mu, lambda)."""
    N = k.p + len(k.mu) + len(k.lam)
    H = stack([k.grad_lagrangian(), k._lift(k.h)], N)
    Phi = k._lift(k.g).scaled(-1)
    m = len(k.mu)
    Psi = QuadMap([[1 if j == k.p + i else 0 for j in range(N)] for i in range(m)], [0] * m, None, N)
    return CSInstance(H, Phi, Psi, k.point)


def kkt_residual(k: KKTInstance, z) -> float:
    """max{||grad_x L||, ||h||, ||min(mu, -g)||} at z = (x, mu, lambda)."""
    z = np.asarray(z, dtype=float)
    p, m = k.p, len(k.mu)
    x, mu = z[:p], z[p:p + m]
    gl = k.grad_lagrangian().eval_float(z)
    hv = k.h.eval_float(x) if k.h.m else np.zeros(0)
    gv = k.g.eval_float(x) if k.g.m else np.zeros(0)
    comp = np.minimum(mu, -gv)
    return float(max(np.linalg.norm(gl), np.linalg.norm(hv), np.linalg.norm(comp)))
