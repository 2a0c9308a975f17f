"""Constraint-qualification checkers with three-valued verdicts.

Every HOLDS comes from a proved route, every FAILS carries a witness that
:func:`reverify` re-checks with exact arithmetic, and anything else is UNKNOWN.

Routes used by the directional checkers:

    R1  first-order condition holds (or no nonzero linearized direction)
    R2  affine map into a finite union of polyhedra
    R3  second-order condition holds
    R4  the sequence falsifier produced a witness
    R5  undecided
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .cones import (ConeUnion, directional_normal_cone, hyperplanes, limiting_normal_cone,
                    regular_normal_cone, tangent_cone)
from .ratgeom import (DEFAULT_FACE_CAP, FaceCapExceeded, HCone, VCone, Vec, arrangement_cells,
                      as_v, dd_h_to_v, dot, is_trivial, is_zero, mat_vec, neg, rref, transpose, vec)
from .system import (CapabilityError, CSInstance, DirectionError, KKTInstance, ProblemInstance,
                     cs_to_general, index_sets, kkt_to_cs)

HOLDS, FAILS, UNKNOWN = "HOLDS", "FAILS", "UNKNOWN"
DEFAULT_I00_CAP = 8

STRICT_FORM_NOTE = ("second-order test uses the strict form <zeta, l> > 0 for a violation; "
                    "the weak form >= 0 is not what the sufficiency result assumes")


def _s(v):
    return None if v is None else [str(Fraction(x)) for x in v]


@dataclass(frozen=True)
class Step:
    """One element (t_k, u^k, s^k, zeta^k) of a sequence prefix; s and zeta are absent in reduced forms."""

    t: Fraction
    u: Vec
    s: Vec | None = None
    zeta: Vec | None = None

    def to_dict(self) -> dict:
        d = {"t": str(self.t), "u": _s(self.u)}
        if self.s is not None:
            d["s"] = _s(self.s)
            d["zeta"] = _s(self.zeta)
        return d


@dataclass(frozen=True)
class Witness:
    condition: str
    zeta: Vec
    u: Vec | None = None
    stratum: str = ""
    prefix: tuple[Step, ...] = ()
    mode: str | None = None

    def to_dict(self) -> dict:
        d = {"condition": self.condition, "u": _s(self.u), "zeta": _s(self.zeta), "stratum": self.stratum}
        if self.mode:
            d["mode"] = self.mode
        if self.prefix:
            d["prefix"] = [s.to_dict() for s in self.prefix]
        return d


@dataclass(frozen=True)
class Verdict:
    condition: str
    status: str
    route: str = ""
    witness: Witness | None = None
    reason: str = ""
    diagnostics: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        d = {"condition": self.condition, "status": self.status, "route": self.route}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.reason:
            d["reason"] = self.reason
        d["strata"] = list(self.diagnostics)
        return d


class ChainInconsistency(RuntimeError):
    """Checker verdicts contradict a proved implication."""


# ---------------------------------------------------------------------------
# shared exact helpers


def _kernel_rows(J) -> list[tuple]:
    """Rows expressing grad P^T zeta = 0."""
    if not J:
        return []
    return [tuple(col) for col in transpose(J, len(J[0]))]


def _with_kernel(K: HCone, krows) -> HCone:
    return HCone(K.ineq, list(K.eq) + list(krows), K.dim)


def _generator(c: HCone) -> Vec:
    v = as_v(c)
    g = v.rays[0] if v.rays else v.lines[0]
    return vec(g)


def _zeta_gens(c: HCone) -> list[tuple]:
    v = as_v(c)
    return list(v.rays) + list(v.lines) + [neg(l) for l in v.lines]


def _det(M) -> Fraction:
    M = [list(map(Fraction, r)) for r in M]
    n, det = len(M), Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if M[r][i] != 0), None)
        if p is None:
            return Fraction(0)
        if p != i:
            M[i], M[p] = M[p], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] / M[i][i]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[i])]
    return det


def is_nsd(S) -> bool:
    """Negative semidefiniteness via principal minors of -S."""
    k = len(S)
    for size in range(1, k + 1):
        for idx in itertools.combinations(range(k), size):
            if _det([[-S[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


def _restrict(M, basis) -> list[list[Fraction]]:
    return [[dot(bi, mat_vec(M, bj)) for bj in basis] for bi in basis]


def _span_basis(v: VCone) -> list[tuple]:
    rows, _ = rref(list(v.rays) + list(v.lines), v.dim)
    return rows


def _quad(M, u) -> Fraction:
    return dot(u, mat_vec(M, u))


def _relint_samples(v: VCone, count: int, seed: int = 0) -> list[tuple]:
    """Canonical relint point, near-ray points and seeded positive combinations."""
    rays, lines = list(v.rays), list(v.lines)
    n = v.dim

    def combo(w, mu):
        out = [Fraction(0)] * n
        for wi, r in zip(w, rays):
            out = [a + wi * b for a, b in zip(out, r)]
        for mj, l in zip(mu, lines):
            out = [a + mj * b for a, b in zip(out, l)]
        return tuple(out)

    pts = [combo([1] * len(rays), [1] * len(lines))]
    for i in range(len(rays)):
        pts.append(combo([16 if j == i else 1 for j in range(len(rays))], [1] * len(lines)))
    for j in range(len(lines)):
        for sgn in (1, -1):
            pts.append(combo([1] * len(rays), [16 * sgn if k == j else 0 for k in range(len(lines))]))
    rng = random.Random(seed)
    for _ in range(count):
        pts.append(combo([rng.randint(1, 8) for _ in rays], [rng.randint(-4, 4) for _ in lines]))
    seen, out = set(), []
    for p in pts:
        if not is_zero(p) and p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _second_order(ucone: VCone, zcone: HCone, form, samples: int):
    """Second-order test on one stratum.

    ``form(z)`` returns M_z with <z, l(u)> = u^T M_z u. Returns ("pass", None),
    ("fail", (u, z)) or ("unknown", None).
    """
    zgens = _zeta_gens(zcone)
    v = as_v(zcone)
    if len(ucone.rays) == 1 and not ucone.lines:
        u = ucone.rays[0]
        for z in zgens:
            if _quad(form(z), u) > 0:
                return "fail", (vec(u), vec(z))
        return "pass", None
    basis = _span_basis(ucone)
    ok = all(is_nsd(_restrict(form(z), basis)) for z in v.rays) and all(
        all(x == 0 for row in _restrict(form(z), basis) for x in row) for z in v.lines)
    if ok:
        return "pass", None
    for u in _relint_samples(ucone, samples):
        for z in zgens:
            if _quad(form(z), u) > 0:
                return "fail", (vec(u), vec(z))
    return "unknown", None


def _zeta_candidates(zcone: HCone, lval, limit: int = 8) -> list[tuple]:
    """Multipliers to hand to the falsifier, most promising first."""
    v = as_v(zcone)
    cands = list(v.rays) + list(v.lines) + [neg(l) for l in v.lines]
    if len(v.rays) > 1 or v.lines:
        tot = [0] * zcone.dim
        for r in v.rays:
            tot = [a + b for a, b in zip(tot, r)]
        for l in v.lines:
            cands.append(tuple(a + b for a, b in zip(tot, l)))
            cands.append(tuple(a - b for a, b in zip(tot, l)))
        cands.append(tuple(tot))
    seen, out = set(), []
    for z in cands:
        if not is_zero(z) and tuple(z) not in seen:
            seen.add(tuple(z))
            out.append(vec(z))
    out.sort(key=lambda z: -lval(z))
    return out[:limit]


# ---------------------------------------------------------------------------
# general systems


@dataclass(frozen=True)
class Stratum:
    """A direction cell with its nonzero kernel-multiplier cones."""

    tag: str
    cell: VCone
    u: Vec
    xi: Vec
    cones: tuple[HCone, ...]


def _require_exact(inst: ProblemInstance):
    if not inst.exact:
        raise CapabilityError("exact checks need affine or quadratic atoms")


@lru_cache(maxsize=256)
def direction_cells(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP) -> tuple:
    """Nonzero cells of the linearized cone on which N(P(x); grad P u) is constant.

    Returns (signs, closure VCone, u) triples; the rows are the set's local
    hyperplanes pulled back through the Jacobian.
    """
    _require_exact(inst)
    s = inst.image()
    J = inst.jac()
    T = tangent_cone(inst.Lambda, s)
    rows = [tuple(dot(a, col) for col in transpose(J, inst.n)) for a in hyperplanes(inst.Lambda, s)]
    cells, _ = arrangement_cells(rows, inst.n, cap=cap)
    out = []
    for c in cells:
        if c.dimension == 0:
            continue
        u = vec(c.point())
        if T.contains(mat_vec(J, u)):
            out.append((c.signs, c.generators, u))
    return tuple(out)


@lru_cache(maxsize=256)
def violating_strata(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP) -> tuple[Stratum, ...]:
    s = inst.image()
    J = inst.jac()
    krows = _kernel_rows(J)
    out = []
    for signs, gens, u in direction_cells(inst, cap):
        xi = vec(mat_vec(J, u))
        D = directional_normal_cone(inst.Lambda, s, xi, cap)
        bad = tuple(C for C in (_with_kernel(K, krows) for K in D.pieces) if not is_trivial(C))
        if bad:
            out.append(Stratum("cell" + "".join("+0-"[1 - x] for x in signs), gens, u, xi, bad))
    return tuple(out)


def _cell_log(inst, cap) -> tuple:
    bad = {st.u for st in violating_strata(inst, cap)}
    return tuple({"u": _s(u), "signs": "".join("+0-"[1 - x] for x in signs), "violating": u in bad}
                 for signs, _, u in direction_cells(inst, cap))


def check_nnamcq(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP) -> Verdict:
    try:
        _require_exact(inst)
        N = limiting_normal_cone(inst.Lambda, inst.image(), cap)
    except FaceCapExceeded as e:
        return Verdict("nnamcq", UNKNOWN, reason=f"face cap {e.cap} exceeded")
    krows = _kernel_rows(inst.jac())
    for i, K in enumerate(N.pieces):
        C = _with_kernel(K, krows)
        if not is_trivial(C):
            return Verdict("nnamcq", FAILS, "kernel", Witness("nnamcq", _generator(C), None, f"normal piece {i}"))
    return Verdict("nnamcq", HOLDS, "kernel")


def check_foscms(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP) -> Verdict:
    try:
        _require_exact(inst)
        strata = violating_strata(inst, cap)
        log = _cell_log(inst, cap)
    except FaceCapExceeded as e:
        return Verdict("foscms", UNKNOWN, reason=f"face cap {e.cap} exceeded")
    if not strata:
        return Verdict("foscms", HOLDS, "directional kernel", diagnostics=log)
    st = strata[0]
    w = Witness("foscms", _generator(st.cones[0]), st.u, st.tag)
    return Verdict("foscms", FAILS, "directional kernel", w, diagnostics=log)


def _general_form(inst: ProblemInstance):
    Q = inst.P.Q

    def form(z):
        n = inst.n
        return [[sum(zr * q[i][j] for zr, q in zip(z, Q)) for j in range(n)] for i in range(n)]
    return form


def check_soscms(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP, samples: int = 8) -> Verdict:
    _require_exact(inst)
    try:
        strata = violating_strata(inst, cap)
    except FaceCapExceeded as e:
        return Verdict("soscms", UNKNOWN, reason=f"face cap {e.cap} exceeded")
    form = _general_form(inst)
    log, unknown = [], []
    for st in strata:
        for C in st.cones:
            res, wit = _second_order(st.cell, C, form, samples)
            log.append({"stratum": st.tag, "u": _s(st.u), "result": res})
            if res == "fail":
                u, z = wit
                return Verdict("soscms", FAILS, "second order", Witness("soscms", z, u, st.tag),
                               STRICT_FORM_NOTE, tuple(log))
            if res == "unknown":
                unknown.append(st.tag)
    if unknown:
        return Verdict("soscms", UNKNOWN, "second order",
                       reason="sampled strata of dimension >= 2 passed but are not certified: " + ", ".join(unknown),
                       diagnostics=tuple(log))
    return Verdict("soscms", HOLDS, "second order", reason=STRICT_FORM_NOTE, diagnostics=tuple(log))


def _check_dir(inst: ProblemInstance, mode: str, cap: int, cfg) -> Verdict:
    name = f"dir_{mode}"
    if not inst.exact:
        return Verdict(name, UNKNOWN, "R5", reason="numeric oracle atoms: structural routes unavailable")
    if inst.is_affine():
        return Verdict(name, HOLDS, "R2", reason="affine map into a finite union of polyhedra")
    try:
        strata = violating_strata(inst, cap)
    except FaceCapExceeded as e:
        return Verdict(name, UNKNOWN, "R5", reason=f"face cap {e.cap} exceeded")
    if not strata:
        return Verdict(name, HOLDS, "R1", reason="first-order condition holds")
    so = check_soscms(inst, cap)
    if so.status == HOLDS:
        why = "second-order condition holds"
        if mode == "quasi":
            why += "; pseudo-normality implies quasi-normality"
        return Verdict(name, HOLDS, "R3", reason=why, diagnostics=so.diagnostics)
    from .verify import SamplingConfig, sequence_falsifier
    cfg = cfg or SamplingConfig()
    form = _general_form(inst)
    unresolved = []
    for st in strata:
        for C in st.cones:
            for u in _relint_samples(st.cell, 2)[:3]:
                for z in _zeta_candidates(C, lambda z: _quad(form(z), u)):
                    w = sequence_falsifier(inst, u, z, mode, cfg, stratum=st.tag)
                    if w is not None:
                        return Verdict(name, FAILS, "R4", w, diagnostics=so.diagnostics)
            unresolved.append({"stratum": st.tag, "u": _s(st.u)})
    return Verdict(name, UNKNOWN, "R5", reason="no route decided the violating strata",
                   diagnostics=tuple(unresolved))


def check_dir_pseudo(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP, cfg=None) -> Verdict:
    return _check_dir(inst, "pseudo", cap, cfg)


def check_dir_quasi(inst: ProblemInstance, cap: int = DEFAULT_FACE_CAP, cfg=None) -> Verdict:
    return _check_dir(inst, "quasi", cap, cfg)


# ---------------------------------------------------------------------------
# complementarity systems


@dataclass(frozen=True)
class CSStratum:
    pattern: str
    cell: VCone
    u: Vec
    cones: tuple[HCone, ...]


def _cs_multiplier_cones(cs: CSInstance, I, krows) -> list[HCone]:
    d, m = cs.d, cs.m
    N = d + 2 * m

    def e(k):
        return tuple(1 if j == k else 0 for j in range(N))

    eq = list(krows)
    eq += [e(d + i) for i in set(I.Ip0) | set(I.Ip0_u)]
    eq += [e(d + m + i) for i in set(I.I0p) | set(I.I0p_u)]
    out = []
    for branch in itertools.product(range(3), repeat=len(I.I00_u)):
        beq, bineq = list(eq), []
        for i, b in zip(I.I00_u, branch):
            if b == 0:
                beq.append(e(d + i))
            elif b == 1:
                beq.append(e(d + m + i))
            else:
                bineq += [neg(e(d + i)), neg(e(d + m + i))]
        out.append(HCone(bineq, beq, N))
    return out


def _cs_kernel_rows(cs: CSInstance) -> list[tuple]:
    x = cs.anchor
    JH, JF, JS = cs.H.jacobian(x), cs.Phi.jacobian(x), cs.Psi.jacobian(x)
    rows = []
    for j in range(cs.n):
        rows.append(tuple([r[j] for r in JH] + [-r[j] for r in JF] + [-r[j] for r in JS]))
    return rows


@lru_cache(maxsize=256)
def cs_strata(cs: CSInstance, i00_cap: int = DEFAULT_I00_CAP) -> tuple[tuple, tuple[CSStratum, ...]]:
    """(all nonzero direction strata, violating ones) from the sign patterns on I_00."""
    base = index_sets(cs)
    if len(base.I00) > i00_cap:
        raise FaceCapExceeded(i00_cap)
    x = cs.anchor
    JH, JF, JS = cs.H.jacobian(x), cs.Phi.jacobian(x), cs.Psi.jacobian(x)
    krows = _cs_kernel_rows(cs)
    eq0 = list(JH) + [JF[i] for i in base.I0p] + [JS[i] for i in base.Ip0]
    cells, bad = [], []
    for pattern in itertools.product(("0+", "+0", "00"), repeat=len(base.I00)):
        eq, ineq, strict = list(eq0), [], []
        for i, p in zip(base.I00, pattern):
            if p == "0+":
                eq.append(JF[i])
                ineq.append(neg(JS[i]))
                strict.append(JS[i])
            elif p == "+0":
                eq.append(JS[i])
                ineq.append(neg(JF[i]))
                strict.append(JF[i])
            else:
                eq += [JF[i], JS[i]]
        v = dd_h_to_v(HCone(ineq, eq, cs.n))
        if not v.rays and not v.lines:
            continue
        u = vec(_relint_samples(v, 0)[0])
        if any(dot(a, u) <= 0 for a in strict):
            continue
        tag = "I00:" + ",".join(pattern)
        cells.append((tag, v, u))
        I = index_sets(cs, u)
        cones = tuple(C for C in _cs_multiplier_cones(cs, I, krows) if not is_trivial(C))
        if cones:
            bad.append(CSStratum(tag, v, u, cones))
    return tuple(cells), tuple(bad)


def _cs_form(cs: CSInstance):
    d, m, n = cs.d, cs.m, cs.n
    Qs = list(cs.H.Q) + [q for q in cs.Phi.Q] + [q for q in cs.Psi.Q]
    signs = [1] * d + [-1] * (2 * m)

    def form(z):
        return [[sum(sg * zr * q[i][j] for sg, zr, q in zip(signs, z, Qs)) for j in range(n)] for i in range(n)]
    return form


def check_cs_directional(cs: CSInstance, mode: str = "pseudo", i00_cap: int = DEFAULT_I00_CAP,
                         cfg=None, samples: int = 8) -> Verdict:
    if mode not in ("pseudo", "quasi"):
        raise ValueError("mode must be 'pseudo' or 'quasi'")
    name = f"cs_{mode}"
    if cs.is_affine():
        return Verdict(name, HOLDS, "R2", reason="affine data; the embedded set is a finite union of polyhedra")
    try:
        cells, strata = cs_strata(cs, i00_cap)
    except FaceCapExceeded as e:
        return Verdict(name, UNKNOWN, "R5", reason=f"|I00| above cap {e.cap}")
    bad = {s.pattern for s in strata}
    log = tuple({"stratum": t, "u": _s(u), "violating": t in bad} for t, _, u in cells)
    if not strata:
        return Verdict(name, HOLDS, "R1", reason="first-order condition holds", diagnostics=log)
    form = _cs_form(cs)
    unknown = False
    for st in strata:
        for C in st.cones:
            res, _ = _second_order(st.cell, C, form, samples)
            if res != "pass":
                unknown = True
                break
        if unknown:
            break
    if not unknown:
        return Verdict(name, HOLDS, "R3", reason="second-order condition holds", diagnostics=log)
    from .verify import SamplingConfig, cs_sequence_falsifier
    cfg = cfg or SamplingConfig()
    for st in strata:
        for C in st.cones:
            for u in _relint_samples(st.cell, 2)[:3]:
                for z in _zeta_candidates(C, lambda z: _quad(form(z), u)):
                    w = cs_sequence_falsifier(cs, u, z, mode, cfg, stratum=st.pattern)
                    if w is not None:
                        return Verdict(name, FAILS, "R4", w, diagnostics=log)
    return Verdict(name, UNKNOWN, "R5", reason="no route decided the violating strata", diagnostics=log)


# ---------------------------------------------------------------------------
# witness re-verification


def _directional_ok(inst: ProblemInstance, u, zeta) -> bool:
    s = inst.image()
    J = inst.jac()
    xi = mat_vec(J, u)
    if is_zero(u) or is_zero(zeta):
        return False
    if not tangent_cone(inst.Lambda, s).contains(xi):
        return False
    if any(dot(r, zeta) != 0 for r in _kernel_rows(J)):
        return False
    return directional_normal_cone(inst.Lambda, s, xi).contains(zeta)


def _sq(v) -> Fraction:
    return sum((Fraction(x) ** 2 for x in v), Fraction(0))


def _prefix_trend_ok(prefix, u) -> bool:
    if not prefix:
        return False
    prev = None
    for st in prefix:
        if st.t <= 0 or (prev is not None and st.t >= prev):
            return False
        if _sq([a - b for a, b in zip(st.u, u)]) > st.t:
            return False
        prev = st.t
    return True


def sign_ok(mode: str, zeta, diff) -> bool:
    if mode == "pseudo":
        return dot(zeta, diff) > 0
    return all(z * r > 0 for z, r in zip(zeta, diff) if z != 0)


def reverify(inst: ProblemInstance, w: Witness) -> bool:
    """Exact re-check of the conditions a general-form witness claims."""
    zeta = vec(w.zeta)
    if is_zero(zeta):
        return False
    if w.condition == "nnamcq":
        if any(dot(r, zeta) != 0 for r in _kernel_rows(inst.jac())):
            return False
        return limiting_normal_cone(inst.Lambda, inst.image()).contains(zeta)
    u = vec(w.u)
    if not _directional_ok(inst, u, zeta):
        return False
    if w.condition == "foscms":
        return True
    if w.condition == "soscms":
        return dot(zeta, inst.P.second(u)) > 0
    if w.condition in ("dir_pseudo", "dir_quasi"):
        mode = w.condition[4:]
        if not _prefix_trend_ok(w.prefix, u):
            return False
        pbar = inst.image().coordinates
        for st in w.prefix:
            x = tuple(a + st.t * b for a, b in zip(inst.anchor, st.u))
            if st.s is None or not inst.Lambda.contains(st.s):
                return False
            if not regular_normal_cone(inst.Lambda, st.s).contains(st.zeta):
                return False
            if _sq([a - b for a, b in zip(st.zeta, zeta)]) > _sq(zeta) * st.t ** 2:
                return False
            if _sq([a - b for a, b in zip(st.s, pbar)]) > st.t:
                return False
            if not sign_ok(mode, zeta, [a - b for a, b in zip(inst.P(x), st.s)]):
                return False
        return True
    return False


def cs_value(cs: CSInstance, zeta, x) -> list[Fraction]:
    """Signed components whose positivity the reduced sequential condition asks for."""
    d, m = cs.d, cs.m
    H, F, S = cs.H(x), cs.Phi(x), cs.Psi(x)
    return list(H) + [-v for v in F] + [-v for v in S]


def reverify_cs(cs: CSInstance, w: Witness) -> bool:
    """Exact re-check of a complementarity-form witness (multiplier layout eta, gamma, nu)."""
    zeta, u = vec(w.zeta), vec(w.u)
    if is_zero(zeta) or is_zero(u) or len(zeta) != cs.d + 2 * cs.m:
        return False
    try:
        I = index_sets(cs, u)
    except DirectionError:
        return False
    if any(dot(r, zeta) != 0 for r in _cs_kernel_rows(cs)):
        return False
    d, m = cs.d, cs.m
    gam, nu = zeta[d:d + m], zeta[d + m:]
    if any(gam[i] != 0 for i in set(I.Ip0) | set(I.Ip0_u)):
        return False
    if any(nu[i] != 0 for i in set(I.I0p) | set(I.I0p_u)):
        return False
    if any(not ((gam[i] > 0 and nu[i] > 0) or gam[i] * nu[i] == 0) for i in I.I00_u):
        return False
    mode = w.condition[3:]
    if not _prefix_trend_ok(w.prefix, u):
        return False
    for st in w.prefix:
        x = tuple(a + st.t * b for a, b in zip(cs.anchor, st.u))
        if not sign_ok(mode, zeta, cs_value(cs, zeta, x)):
            return False
    return True


# ---------------------------------------------------------------------------
# implication-chain report


@dataclass(frozen=True)
class Report:
    verdicts: tuple[Verdict, ...]
    conclusion: str
    subregular: bool
    kind: str = "general"

    def get(self, condition: str) -> Verdict | None:
        return next((v for v in self.verdicts if v.condition == condition), None)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "conclusion": self.conclusion, "subregular": self.subregular,
                "verdicts": [v.to_dict() for v in self.verdicts]}


_CHAIN = (
    ("nnamcq", "foscms", "NNAMCQ holds but FOSCMS does not"),
    ("foscms", "dir_pseudo", "FOSCMS holds but directional pseudo-normality does not"),
    ("foscms", "dir_quasi", "FOSCMS holds but directional quasi-normality does not"),
    ("soscms", "dir_pseudo", "SOSCMS holds but directional pseudo-normality does not"),
    ("dir_pseudo", "dir_quasi", "pseudo-normality holds but quasi-normality does not"),
    ("cs_pseudo", "cs_quasi", "pseudo-normality holds but quasi-normality does not"),
)


def chain_violations(verdicts: Sequence[Verdict]) -> list[str]:
    st = {v.condition: v.status for v in verdicts}
    out = []
    for a, b, msg in _CHAIN:
        if st.get(a) == HOLDS and st.get(b) == FAILS:
            out.append(msg)
    return out


SUBREGULAR = "metrically subregular at (x̄, 0)"
NO_CONCLUSION = "no sufficient condition verified"


def report_chain(inst, cap: int = DEFAULT_FACE_CAP, i00_cap: int = DEFAULT_I00_CAP, cfg=None) -> Report:
    kind = "general"
    cs = None
    if isinstance(inst, KKTInstance):
        kind, cs = "kkt", kkt_to_cs(inst)
    elif isinstance(inst, CSInstance):
        kind, cs = "cs", inst
    gen = cs_to_general(cs) if cs is not None else inst
    verdicts = []
    if gen.exact:
        verdicts += [check_nnamcq(gen, cap), check_foscms(gen, cap), check_soscms(gen, cap)]
    else:
        verdicts += [Verdict(c, UNKNOWN, reason="numeric oracle atoms") for c in ("nnamcq", "foscms", "soscms")]
    verdicts += [check_dir_pseudo(gen, cap, cfg), check_dir_quasi(gen, cap, cfg)]
    if cs is not None:
        verdicts += [check_cs_directional(cs, "pseudo", i00_cap, cfg), check_cs_directional(cs, "quasi", i00_cap, cfg)]
    bad = chain_violations(verdicts)
    if bad:
        raise ChainInconsistency("; ".join(bad))
    ok = any(v.status == HOLDS for v in verdicts)
    return Report(tuple(verdicts), SUBREGULAR if ok else NO_CONCLUSION, ok, kind)
