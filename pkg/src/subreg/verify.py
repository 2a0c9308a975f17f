"""Floating-point verification: residuals, distance estimates, empirical moduli.

Also hosts the sequence falsifier, which works in exact arithmetic so that any
prefix it returns can be re-checked by :func:`subreg.cq.reverify`.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .cones import ComplFactor, Factor, Orthant, PolyUnion, StructuredSet, ZeroSet, factor_cells
from .cq import Step, Witness, _directional_ok, _sq, cs_value, reverify, reverify_cs, sign_ok
from .ratgeom import dot, is_zero, project_onto_cone, relint_point, to_fraction, vec
from .system import CSInstance, KKTInstance, ProblemInstance, cs_to_general, kkt_residual, kkt_to_cs

CHUNK = 16


@dataclass(frozen=True)
class SamplingConfig:
    radii: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
    samples_per_radius: int = 32
    seed: int = 0
    projection_tol: float = 1e-9
    residual_floor: float = 1e-8
    t0: Fraction = Fraction(1, 10)
    shrink: Fraction = Fraction(1, 2)
    depth: int = 6
    jobs: int = 1
    max_pieces: int = 64

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        if not r or any(x <= 0 for x in r) or any(a <= b for a, b in zip(r, r[1:])):
            raise ValueError("radii must be positive and strictly decreasing")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "t0", to_fraction(self.t0))
        object.__setattr__(self, "shrink", to_fraction(self.shrink))
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.t0 <= 0 or self.depth < 1 or self.samples_per_radius < 1 or self.jobs < 1:
            raise ValueError("t0, depth, samples_per_radius and jobs must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["radii"] = list(self.radii)
        d["t0"], d["shrink"] = str(self.t0), str(self.shrink)
        return d


# ---------------------------------------------------------------------------
# projections


def project_polyhedron(p, A=None, b=None, E=None, e=None, tol: float = 1e-9):
    """Euclidean projection onto {z : A z <= b, E z = e}; None if infeasible."""
    p = np.asarray(p, dtype=float)
    n = p.size
    A = np.zeros((0, n)) if A is None or len(A) == 0 else np.asarray(A, dtype=float).reshape(-1, n)
    b = np.zeros(0) if b is None or len(b) == 0 else np.asarray(b, dtype=float)
    E = np.zeros((0, n)) if E is None or len(E) == 0 else np.asarray(E, dtype=float).reshape(-1, n)
    e = np.zeros(0) if e is None or len(e) == 0 else np.asarray(e, dtype=float)
    k = A.shape[0]
    scale = 1.0 + float(np.max(np.abs(p), initial=0.0))
    if 2 ** k <= 4096:
        for size in range(0, min(k, n) + 1):
            for S in itertools.combinations(range(k), size):
                G = np.vstack([E, A[list(S)]])
                h = np.concatenate([e, b[list(S)]])
                if G.shape[0]:
                    lam, *_ = np.linalg.lstsq(G @ G.T, G @ p - h, rcond=None)
                    z = p - G.T @ lam
                    if np.linalg.norm(G @ z - h) > tol * scale:
                        continue
                    if size and np.any(lam[E.shape[0]:] < -tol * scale):
                        continue
                else:
                    z = p.copy()
                if k and np.any(A @ z - b > tol * scale):
                    continue
                return z
    cons = []
    if k:
        cons.append({"type": "ineq", "fun": lambda z: b - A @ z, "jac": lambda z: -A})
    if E.shape[0]:
        cons.append({"type": "eq", "fun": lambda z: E @ z - e, "jac": lambda z: E})
    res = minimize(lambda z: 0.5 * np.sum((z - p) ** 2), p, jac=lambda z: z - p,
                   constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    z = res.x
    if (k and np.any(A @ z - b > 1e-7 * scale)) or (E.shape[0] and np.any(np.abs(E @ z - e) > 1e-7 * scale)):
        return None
    return z


def _float_polys(f: Factor):
    cached = f.__dict__.get("_fpolys")
    if cached is None:
        cached = []
        for poly in f.polyhedra():
            cached.append(tuple(np.array([[float(x) for x in r] for r in rows], dtype=float).reshape(len(rows), f.dim)
                                if i % 2 == 0 else np.array([float(x) for x in rows], dtype=float)
                                for i, rows in enumerate((poly.A, poly.b, poly.E, poly.e))))
        object.__setattr__(f, "_fpolys", cached)
    return cached


def project_factor(f: Factor, y, tol: float = 1e-9) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if isinstance(f, ZeroSet):
        return np.zeros_like(y)
    if isinstance(f, Orthant):
        return np.maximum(y, 0.0) if f.sign > 0 else np.minimum(y, 0.0)
    if isinstance(f, ComplFactor):
        a, b = y
        c1, c2 = np.array([max(a, 0.0), 0.0]), np.array([0.0, max(b, 0.0)])
        return c1 if np.linalg.norm(y - c1) <= np.linalg.norm(y - c2) else c2
    best, bd = None, np.inf
    for A, b, E, e in _float_polys(f):
        z = project_polyhedron(y, A, b, E, e, tol)
        if z is not None and np.linalg.norm(z - y) < bd:
            best, bd = z, np.linalg.norm(z - y)
    if best is None:
        raise RuntimeError("projection failed on every piece")
    return best


def project(S: StructuredSet, y, tol: float = 1e-9) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    out, o = [], 0
    for f in S.factors:
        out.append(project_factor(f, y[o:o + f.dim], tol))
        o += f.dim
    return np.concatenate(out) if out else np.zeros(0)


def set_distance(S: StructuredSet, y, tol: float = 1e-9) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.linalg.norm(y - project(S, y, tol)))


def residual(inst: ProblemInstance, x, tol: float = 1e-9) -> float:
    """d(P(x), Lambda)."""
    if inst.exact and all(isinstance(v, (int, Fraction)) for v in x):
        if inst.Lambda.contains(inst.P(vec(x))):
            return 0.0
    return set_distance(inst.Lambda, inst.P.eval_float(x), tol)


# ---------------------------------------------------------------------------
# distance to the solution set


def _active_pieces(inst: ProblemInstance, cap: int):
    """Per-factor polyhedra containing P(anchor); the product gives local solution pieces."""
    if inst.exact:
        parts = inst.Lambda.split(inst.image().coordinates)
    else:
        parts = inst.Lambda.split(tuple(project(inst.Lambda, inst.P.eval_float(inst.anchor))))
    per = []
    for f, y in zip(inst.Lambda.factors, parts):
        fp = _float_polys(f)
        if inst.exact:
            idx = [i for i, p in enumerate(f.polyhedra()) if p.contains(y)]
        else:
            idx = [i for i, (A, b, E, e) in enumerate(fp)
                   if np.all(A @ np.asarray(y, float) <= b + 1e-9) and np.all(np.abs(E @ np.asarray(y, float) - e) <= 1e-9)]
        per.append([fp[i] for i in idx])
    combos = list(itertools.islice(itertools.product(*per), cap))
    out = []
    offs = inst.Lambda.offsets()
    m = inst.m
    for combo in combos:
        As, bs, Es, es = [], [], [], []
        for o, f, (A, b, E, e) in zip(offs, inst.Lambda.factors, combo):
            pad = lambda M: np.hstack([np.zeros((M.shape[0], o)), M, np.zeros((M.shape[0], m - o - f.dim))])
            As.append(pad(A))
            bs.append(b)
            Es.append(pad(E))
            es.append(e)
        out.append((np.vstack(As), np.concatenate(bs), np.vstack(Es), np.concatenate(es)))
    return out


def distance_to_solutions(inst: ProblemInstance, x, budget: int = 64, tol: float = 1e-9) -> float:
    """Upper estimate of the distance from x to {x : P(x) in Lambda}; never above ||x - anchor||."""
    x = np.asarray(x, dtype=float)
    xbar = np.array([float(v) for v in inst.anchor])
    best = float(np.linalg.norm(x - xbar))
    pieces = _active_pieces(inst, budget)
    if inst.is_affine():
        _, A0, c0 = inst.P.float_data()
        for A, b, E, e in pieces:
            z = project_polyhedron(x, A @ A0, b - A @ c0, E @ A0, e - E @ c0, tol)
            if z is not None:
                best = min(best, float(np.linalg.norm(z - x)))
        return best
    for A, b, E, e in pieces:
        cons = []
        if A.shape[0]:
            cons.append({"type": "ineq", "fun": lambda z, A=A, b=b: b - A @ inst.P.eval_float(z)})
        if E.shape[0]:
            cons.append({"type": "eq", "fun": lambda z, E=E, e=e: E @ inst.P.eval_float(z) - e})
        jac = getattr(inst.P, "jacobian_float", None) or getattr(inst.P, "jacobian", None)
        if jac is not None:
            for c in cons:
                M = A if c["type"] == "ineq" else E
                sgn = -1.0 if c["type"] == "ineq" else 1.0
                c["jac"] = lambda z, M=M, sgn=sgn: sgn * (M @ np.asarray(jac(z), dtype=float))
        for start in (x, 0.5 * (x + xbar)):
            res = minimize(lambda z: 0.5 * np.sum((z - x) ** 2), start, jac=lambda z: z - x,
                           constraints=cons, method="SLSQP", options={"ftol": 1e-16, "maxiter": 300})
            z = res.x
            if np.all(np.isfinite(z)) and residual(inst, z, tol) <= tol:
                best = min(best, float(np.linalg.norm(z - x)))
    return best


# ---------------------------------------------------------------------------
# empirical modulus


@dataclass(frozen=True)
class ModulusRow:
    radius: float
    samples: int
    counted: int
    max_ratio: float | None
    serrorb_max_ratio: float | None = None
    exact_feasible: int = 0

    @property
    def trend_value(self) -> float | None:
        """Max ratio, or 0 when every sample is a solution (distance exactly 0)."""
        if self.counted:
            return self.max_ratio
        if self.samples and self.exact_feasible == self.samples:
            return 0.0
        return None


@dataclass(frozen=True)
class ModulusTable:
    rows: tuple[ModulusRow, ...]
    bounded: bool | None
    config: SamplingConfig = field(compare=False)

    def ratio(self, radius: float) -> float | None:
        return next((r.max_ratio for r in self.rows if r.radius == radius), None)

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows], "bounded": self.bounded, "config": self.config.to_dict(),
                "note": "distances are local-search upper estimates, so ratios over-estimate the modulus"}


def _directions(n: int, seed: int, count: int) -> np.ndarray:
    out = []
    for c in range((count + CHUNK - 1) // CHUNK):
        rng = np.random.default_rng([seed, c])
        g = rng.standard_normal((CHUNK, n))
        out.append(g)
    D = np.vstack(out)[:count] if out else np.zeros((0, n))
    norms = np.linalg.norm(D, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return D / norms


FEASIBLE = object()


def _exactly_feasible(inst: ProblemInstance, x) -> bool:
    # float samples are rationals, so exact atoms decide membership without tolerance
    if not inst.exact:
        return False
    return inst.Lambda.contains(inst.P(tuple(Fraction(float(v)) for v in x)))


def _bounded(values: list[float | None]) -> bool | None:
    vals = [v for v in values if v is not None]
    if len(vals) < 2:
        return None
    a, b = vals[-2], vals[-1]
    return bool(b <= 2 * a and a <= 2 * b)


def empirical_modulus(inst, cfg: SamplingConfig | None = None) -> ModulusTable:
    """Max of d(x, S) / d(P(x), Lambda) over points on spheres around the anchor."""
    cfg = cfg or SamplingConfig()
    kkt = inst if isinstance(inst, KKTInstance) else None
    if kkt is not None:
        inst = cs_to_general(kkt_to_cs(kkt))
    elif isinstance(inst, CSInstance):
        inst = cs_to_general(inst)
    xbar = np.array([float(v) for v in inst.anchor])
    D = _directions(inst.n, cfg.seed, cfg.samples_per_radius)

    def work(task):
        r, lo = task
        out = []
        for d in D[lo:lo + CHUNK]:
            x = xbar + r * d
            res = residual(inst, x, cfg.projection_tol)
            if res <= cfg.residual_floor:
                out.append(FEASIBLE if _exactly_feasible(inst, x) else None)
                continue
            dist = distance_to_solutions(inst, x, cfg.max_pieces, cfg.projection_tol)
            ser = None
            if kkt is not None:
                sr = kkt_residual(kkt, x)
                ser = dist / sr if sr > cfg.residual_floor else None
            out.append((dist / res, ser))
        return out

    tasks = [(r, lo) for r in cfg.radii for lo in range(0, len(D), CHUNK)]
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    rows = []
    per_radius = len(tasks) // len(cfg.radii)
    for i, r in enumerate(cfg.radii):
        vals = [v for chunk in results[i * per_radius:(i + 1) * per_radius] for v in chunk]
        got = [v for v in vals if v is not None and v is not FEASIBLE]
        sers = [v[1] for v in got if v[1] is not None]
        rows.append(ModulusRow(r, len(vals), len(got), max(v[0] for v in got) if got else None,
                               max(sers) if sers else None, sum(v is FEASIBLE for v in vals)))
    return ModulusTable(tuple(rows), _bounded([r.trend_value for r in rows]), cfg)


# ---------------------------------------------------------------------------
# sequence falsifier (exact)


def _u_families(u, n: int):
    yield lambda t: u
    for i in range(n):
        for sgn in (1, -1):
            yield lambda t, i=i, sgn=sgn: tuple(a + (sgn * t if j == i else 0) for j, a in enumerate(u))


def _factor_options(f: Factor, pbar, y, zeta, t, budget, mode):
    """Admissible (s_f, zeta_f^k, score) choices for one factor."""
    d = [a - b for a, b in zip(y, pbar)]
    cands = [tuple(pbar)]
    for cell in factor_cells(f, pbar):
        p = project_onto_cone(d, cell.closure)
        if cell.dimension > 0:
            p = tuple(a + t * t * b for a, b in zip(p, relint_point(cell.generators)))
        cands.append(tuple(a + b for a, b in zip(pbar, p)))
    seen, out = set(), []
    zz = _sq(zeta)
    for s in cands:
        if s in seen or not f.contains(s):
            continue
        seen.add(s)
        if _sq([a - b for a, b in zip(s, pbar)]) > budget:
            continue
        N = f.regular_normal(s)
        zk = tuple(zeta) if N.contains(zeta) else project_onto_cone(zeta, N)
        if _sq([a - b for a, b in zip(zk, zeta)]) > zz * t * t:
            continue
        diff = [a - b for a, b in zip(y, s)]
        if mode == "pseudo":
            score = dot(zeta, diff)
        else:
            terms = [z * r for z, r in zip(zeta, diff) if z != 0]
            if terms and min(terms) <= 0:
                continue
            score = min(terms) if terms else Fraction(0)
        out.append((score, s, zk))
    return out


def _select(S: StructuredSet, pbar, y, zeta, t, mode):
    F = max(len(S.factors), 1)
    s_all, z_all, total = [], [], Fraction(0)
    for f, pb, yf, zf in zip(S.factors, S.split(pbar), S.split(y), S.split(zeta)):
        opts = _factor_options(f, pb, yf, zf, t, t / F, mode)
        if not opts:
            return None
        score, s, zk = max(opts, key=lambda o: o[0])
        s_all += list(s)
        z_all += list(zk)
        total += score
    if mode == "pseudo" and total <= 0:
        return None
    return vec(s_all), vec(z_all)


def sequence_falsifier(inst: ProblemInstance, u, zeta, mode: str = "pseudo", cfg: SamplingConfig | None = None,
                       stratum: str = "") -> Witness | None:
    """Search for a finite sequence prefix violating directional quasi-/pseudo-normality."""
    if mode not in ("pseudo", "quasi"):
        raise ValueError("mode must be 'pseudo' or 'quasi'")
    cfg = cfg or SamplingConfig()
    u, zeta = vec(u), vec(zeta)
    if not _directional_ok(inst, u, zeta):
        raise ValueError("(u, zeta) do not satisfy the first-order conditions at the anchor")
    pbar = inst.image().coordinates
    for t0 in (cfg.t0, cfg.t0 * cfg.shrink ** 4):
        for fam in _u_families(u, inst.n):
            prefix = []
            for k in range(cfg.depth):
                t = t0 * cfg.shrink ** k
                uk = vec(fam(t))
                x = tuple(a + t * b for a, b in zip(inst.anchor, uk))
                sel = _select(inst.Lambda, pbar, inst.P(x), zeta, t, mode)
                if sel is None:
                    break
                prefix.append(Step(t, uk, sel[0], sel[1]))
            if len(prefix) == cfg.depth:
                w = Witness(f"dir_{mode}", zeta, u, stratum, tuple(prefix), mode)
                if reverify(inst, w):
                    return w
    return None


def cs_sequence_falsifier(cs: CSInstance, u, mult, mode: str = "pseudo", cfg: SamplingConfig | None = None,
                          stratum: str = "") -> Witness | None:
    """Reduced-form search: only (t_k, u^k) are needed for complementarity systems."""
    if mode not in ("pseudo", "quasi"):
        raise ValueError("mode must be 'pseudo' or 'quasi'")
    cfg = cfg or SamplingConfig()
    u, mult = vec(u), vec(mult)
    for t0 in (cfg.t0, cfg.t0 * cfg.shrink ** 4):
        for fam in _u_families(u, cs.n):
            prefix = []
            for k in range(cfg.depth):
                t = t0 * cfg.shrink ** k
                uk = vec(fam(t))
                x = tuple(a + t * b for a, b in zip(cs.anchor, uk))
                if not sign_ok(mode, mult, cs_value(cs, mult, x)):
                    break
                prefix.append(Step(t, uk))
            if len(prefix) == cfg.depth:
                w = Witness(f"cs_{mode}", mult, u, stratum, tuple(prefix), mode)
                if reverify_cs(cs, w):
                    return w
    return None
