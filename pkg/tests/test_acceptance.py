"""Acceptance suite: eight end-to-end criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` or directly with
``python3 tests/test_acceptance.py``.
"""

import functools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from gen import affine_polyunion, cs_instance, mixed_instance, polyunion_around, rng_for  # noqa: E402
from subreg import (FAILS, HOLDS, UNKNOWN, ComplFactor, ConeUnion, HCone, KKTInstance, PolyUnion,  # noqa: E402
                    Polyhedron, ProblemInstance, QuadMap, SamplingConfig, StructuredSet, ZeroSet,
                    check_cs_directional, check_dir_pseudo, check_foscms, check_nnamcq, check_soscms,
                    cs_to_general, directional_normal_cone, empirical_modulus, kkt_to_cs, limiting_normal_cone,
                    regular_normal_cone, report_chain, reverify, reverify_cs, tangent_cone)
from subreg.cones import union_subset  # noqa: E402
from subreg.ratgeom import as_v, cone_equal, relint_point  # noqa: E402
from subreg.verify import _bounded  # noqa: E402

FAST = SamplingConfig(depth=4)


class Outcome:
    def __init__(self, ok, detail, witnesses=()):
        self.ok, self.detail, self.witnesses = ok, detail, list(witnesses)


def announce(n, title, out, capsys=None):
    line = f"{'PASS' if out.ok else 'FAIL'} criterion {n}: {title} ({out.detail})"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


def collect(inst, verdicts, exact_cs=None):
    out = []
    for v in verdicts:
        if v.status == FAILS:
            out.append(("cs" if v.condition.startswith("cs_") else "general", exact_cs if
                        v.condition.startswith("cs_") else inst, v))
    return out


# --- 1. worked two-halfplane example


EX41_SET = StructuredSet([PolyUnion(2, [Polyhedron([[0, 1]], [0]), Polyhedron([[-1, 1]], [0])])])
EX41 = ProblemInstance(QuadMap([[1], [0]], [0, 0], [[[0]], [[-2]]]), EX41_SET, [0])


@functools.cache
def criterion_1():
    t0 = time.perf_counter()
    T = tangent_cone(EX41_SET, (0, 0))
    grid = [(a, b) for a in range(-3, 4) for b in range(-3, 4)]
    t_ok = all(T.contains(y) == EX41_SET.contains(y) for y in grid)
    N = limiting_normal_cone(EX41_SET, (0, 0))
    n_ok = N.same_set(ConeUnion([HCone([(0, -1)], [(1, 0)], 2), HCone([(0, -1)], [(1, 1)], 2)], 2))
    fo = check_foscms(EX41)
    w = fo.witness
    # (u, zeta) equivalent to (-1, (0, 1)) up to positive scaling
    fo_ok = fo.status == FAILS and w.u[0] < 0 and w.zeta[0] == 0 and w.zeta[1] > 0
    so_ok = check_soscms(EX41).status == HOLDS
    dp = check_dir_pseudo(EX41)
    rep = report_chain(EX41)
    elapsed = time.perf_counter() - t0
    ok = t_ok and n_ok and fo_ok and so_ok and (dp.status, dp.route) == (HOLDS, "R3") and rep.subregular \
        and elapsed < 1.0
    return Outcome(ok, f"T={t_ok} N={n_ok} FOSCMS witness={fo_ok} SOSCMS={so_ok} dir-pseudo={dp.status}/{dp.route}"
                       f" subregular={rep.subregular} {elapsed:.2f}s",
                   collect(EX41, rep.verdicts) + collect(EX41, [fo, check_nnamcq(EX41)]))


# --- 2. complementarity-set table


def _u(*cones):
    return ConeUnion(list(cones), 2)


@functools.cache
def criterion_2():
    t0 = time.perf_counter()
    S = StructuredSet([ComplFactor()])
    E1, E2 = (1, 0), (0, 1)
    # normals written -(gamma, nu)
    neg_orthant = HCone([E1, E2], (), 2)
    nu_zero, gamma_zero = HCone((), [E2], 2), HCone((), [E1], 2)
    lim00 = _u(gamma_zero, nu_zero, neg_orthant)
    cells = {
        ("0=a<b", "regular"): (regular_normal_cone(S, (0, 1)), nu_zero),
        ("a=b=0", "regular"): (regular_normal_cone(S, (0, 0)), neg_orthant),
        ("a>b=0", "regular"): (regular_normal_cone(S, (1, 0)), gamma_zero),
        ("0=a<b", "limiting"): (limiting_normal_cone(S, (0, 1)), _u(nu_zero)),
        ("a=b=0", "limiting"): (limiting_normal_cone(S, (0, 0)), lim00),
        ("a>b=0", "limiting"): (limiting_normal_cone(S, (1, 0)), _u(gamma_zero)),
        ("0=a<b", "tangent"): (tangent_cone(S, (0, 1)), _u(HCone((), [E1], 2))),
        ("a=b=0", "tangent"): (tangent_cone(S, (0, 0)), _u(HCone([(-1, 0)], [E2], 2), HCone([(0, -1)], [E1], 2))),
        ("a>b=0", "tangent"): (tangent_cone(S, (1, 0)), _u(HCone((), [E2], 2))),
        ("d=(1,0)", "directional"): (directional_normal_cone(S, (0, 0), (1, 0)), _u(gamma_zero)),
        ("d=(0,1)", "directional"): (directional_normal_cone(S, (0, 0), (0, 1)), _u(nu_zero)),
        ("d=(0,0)", "directional"): (directional_normal_cone(S, (0, 0), (0, 0)), lim00),
    }
    bad = []
    for key, (got, want) in cells.items():
        same = cone_equal(got, want) if isinstance(got, HCone) else got.same_set(want)
        if not same:
            bad.append("/".join(key))
    elapsed = time.perf_counter() - t0
    return Outcome(not bad and elapsed < 1.0, f"{len(cells) - len(bad)}/{len(cells)} cells exact, "
                                              f"mismatches={bad} {elapsed:.2f}s")


# --- 3. affine maps into polyhedral unions


CRIT3_CFG = SamplingConfig(samples_per_radius=16)


@functools.cache
def criterion_3():
    t0 = time.perf_counter()
    not_r2, not_bounded, sampled = [], [], 0
    for seed in range(200):
        inst = affine_polyunion(rng_for(30_000 + seed))
        v = check_dir_pseudo(inst)
        if (v.status, v.route) != (HOLDS, "R2"):
            not_r2.append(seed)
        tab = empirical_modulus(inst, CRIT3_CFG)
        if any(r.counted for r in tab.rows):
            sampled += 1
            if tab.bounded is not True:
                not_bounded.append((seed, tab.bounded))
    elapsed = time.perf_counter() - t0
    ok = not not_r2 and not not_bounded and elapsed < 60
    return Outcome(ok, f"non-R2={not_r2} instances with infeasible samples={sampled} "
                       f"flag not bounded={not_bounded} {elapsed:.1f}s")


# --- 4. implication chain


def chain_ok(verdicts):
    st = {v.condition: v.status for v in verdicts}
    implies = [("nnamcq", "foscms"), ("foscms", "dir_pseudo"), ("foscms", "dir_quasi"), ("soscms", "dir_pseudo")]
    return all(not (st[a] == HOLDS and st[b] == FAILS) for a, b in implies)


@functools.cache
def criterion_4():
    t0 = time.perf_counter()
    violations, unknown, wits = [], 0, []
    for seed in range(500):
        inst = mixed_instance(rng_for(40_000 + seed))
        rep = report_chain(inst, cfg=FAST)
        if not chain_ok(rep.verdicts):
            violations.append(seed)
        unknown += sum(v.status == UNKNOWN for v in rep.verdicts)
        wits += collect(inst, rep.verdicts)
    elapsed = time.perf_counter() - t0
    return Outcome(not violations, f"violations={violations} unknown verdicts={unknown} {elapsed:.1f}s", wits)


# --- 5. limiting normal cone against sampled regular normals


def _direction(v):
    a = np.array([float(x) for x in v])
    return a / np.linalg.norm(a)


def _sampled(S, s):
    h = Fraction(1, 1000)
    if S.dim == 3:
        offsets = [(a, b, c) for a in range(-4, 6) for b in range(-4, 6) for c in range(-4, 6)]
    else:
        offsets = [(a, b) for a in range(-16, 16) for b in range(-16, 16)]
    cache, cones = {}, []
    for off in offsets:
        p = tuple(a + h * b for a, b in zip(s, off))
        if not S.contains(p):
            continue
        f = S.factors[0]
        key = tuple(tuple(a for a, bv in zip(piece.A, piece.b) if sum(x * y for x, y in zip(a, p)) == bv)
                    for piece in f.pieces if piece.contains(p))
        if key not in cache:
            cache[key] = regular_normal_cone(S, p)
            cones.append(cache[key])
    return cones


@functools.cache
def criterion_5():
    t0 = time.perf_counter()
    not_contained, not_reproduced = [], []
    for seed in range(100):
        rng = rng_for(50_000 + seed)
        d = rng.choice((2, 3))
        pt = [rng.randint(-1, 1) for _ in range(d)]
        f = polyunion_around(rng, d, pt, coeffs=(-1, 1) if d == 3 else (-2, 2))
        S = StructuredSet([f])
        N = limiting_normal_cone(S, pt)
        cones = _sampled(S, pt)
        if not all(union_subset(ConeUnion([c], d), N) for c in cones):
            not_contained.append(seed)
        dirs = []
        for c in cones:
            v = as_v(c)
            if v.rays or v.lines:
                dirs.append(_direction(relint_point(c)))
                dirs += [_direction(g) for g in v.generators()]
        for piece in N.pieces:
            v = as_v(piece)
            if not v.rays and not v.lines:
                continue
            r = _direction(relint_point(piece))
            if not any(math.acos(max(-1.0, min(1.0, float(r @ q)))) <= 1e-6 for q in dirs):
                not_reproduced.append(seed)
                break
    elapsed = time.perf_counter() - t0
    ok = not not_contained and not not_reproduced
    return Outcome(ok, f"uncontained={not_contained} unreproduced={not_reproduced} {elapsed:.1f}s")


# --- 6. negative control


SQUARE = ProblemInstance(QuadMap([[0]], [0], [[[2]]]), StructuredSet([ZeroSet(1)]), [0])
CRIT6_CFG = SamplingConfig(radii=(1e-2, 1e-3, 1e-4), samples_per_radius=32, residual_floor=1e-12)


@functools.cache
def criterion_6():
    rep = report_chain(SQUARE, cfg=FAST)
    all_fail = all(v.status == FAILS and v.witness is not None for v in rep.verdicts)
    tab = empirical_modulus(SQUARE, CRIT6_CFG)
    ratios_ok = all(r.max_ratio is not None and abs(r.max_ratio * r.radius - 1) <= 0.1 for r in tab.rows)
    ok = all_fail and ratios_ok and tab.bounded is False
    ratios = ", ".join(f"{r.radius:g}:{r.max_ratio:.4g}" for r in tab.rows)
    return Outcome(ok, f"all FAIL={all_fail} ratios {ratios} bounded={tab.bounded}",
                   collect(SQUARE, rep.verdicts))


# --- 7. complementarity and KKT systems


def kkt_qp():
    # min |x|^2 / 2  s.t.  1 - x1 <= 0, -x2 <= 0, x1 - x2 = 1
    f = QuadMap([[0, 0]], [0], [[[1, 0], [0, 1]]])
    g = QuadMap([[-1, 0], [0, -1]], [1, 0])
    h = QuadMap([[1, -1]], [-1])
    return KKTInstance(f, g, h, [1, 0], [1, 0], [0])


@functools.cache
def criterion_7():
    t0 = time.perf_counter()
    mismatch, wits = [], []
    for seed in range(100):
        cs = cs_instance(rng_for(70_000 + seed))
        a = check_cs_directional(cs, "pseudo", cfg=FAST)
        g = cs_to_general(cs)
        b = check_dir_pseudo(g, cfg=FAST)
        if a.status != b.status:
            mismatch.append(seed)
        if a.status == FAILS:
            wits.append(("cs", cs, a))
        if b.status == FAILS:
            wits.append(("general", g, b))
    k = kkt_qp()
    rep = report_chain(k, cfg=FAST)
    pseudo = rep.get("dir_pseudo").status == HOLDS and rep.get("cs_pseudo").status == HOLDS
    tab = empirical_modulus(k, SamplingConfig(samples_per_radius=16))
    ser_bounded = _bounded([r.serrorb_max_ratio for r in tab.rows])
    wits += collect(cs_to_general(kkt_to_cs(k)), rep.verdicts, kkt_to_cs(k))
    elapsed = time.perf_counter() - t0
    ok = not mismatch and pseudo and tab.bounded is True and ser_bounded is True
    return Outcome(ok, f"CS mismatches={mismatch} KKT pseudo={pseudo} bounded={tab.bounded} "
                       f"serrorb bounded={ser_bounded} {elapsed:.1f}s", wits)


# --- 8. every witness above re-verifies


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7)


def criterion_8():
    total, bad = 0, []
    for n, crit in enumerate(CRITERIA, 1):
        for kind, inst, v in crit().witnesses:
            total += 1
            ok = reverify_cs(inst, v.witness) if kind == "cs" else reverify(inst, v.witness)
            if not ok:
                bad.append((n, v.condition))
    return Outcome(total > 0 and not bad, f"{total} witnesses, failures={bad}")


TITLES = {
    1: "two-halfplane worked example end to end",
    2: "complementarity-set cone table",
    3: "affine maps into polyhedral unions (200 instances)",
    4: "implication-chain consistency (500 instances)",
    5: "limiting normals against sampled regular normals (100 sets)",
    6: "negative control x^2 in {0}",
    7: "CS/KKT cross-validation",
    8: "witness re-verification",
}


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n, capsys):
    out = (CRITERIA + (criterion_8,))[n - 1]()
    announce(n, TITLES[n], out, capsys)
    assert out.ok, out.detail


if __name__ == "__main__":
    results = []
    for n, crit in enumerate(CRITERIA + (criterion_8,), 1):
        out = crit()
        announce(n, TITLES[n], out)
        results.append(out.ok)
    sys.exit(0 if all(results) else 1)
