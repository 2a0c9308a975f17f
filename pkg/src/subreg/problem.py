"""Problem files: JSON schema, parsing into instances, and normalized re-emission."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Annotated, Literal, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError

from .cones import ComplFactor, Orthant, PolyUnion, Polyhedron, StructuredSet, ZeroSet
from .ratgeom import to_fraction
from .system import CSInstance, KKTInstance, ProblemInstance, QuadMap, stack
from .verify import SamplingConfig

SCHEMA_VERSION = 1
CHECKS = ("nnamcq", "foscms", "soscms", "dir_pseudo", "dir_quasi", "cs_pseudo", "cs_quasi")


class ProblemError(ValueError):
    """Malformed or inconsistent problem file."""


def _rational(v) -> Fraction:
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    try:
        return to_fraction(v)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ValueError(f"not a rational number: {v!r}") from e


Num = Annotated[Fraction, BeforeValidator(_rational)]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


class AtomSpec(_Model):
    type: Literal["affine", "quadratic"]
    A: list[list[Num]]
    c: list[Num]
    Q: list[list[list[Num]]] | None = None
    n: int | None = None

    def build(self) -> QuadMap:
        if self.type == "affine" and self.Q is not None:
            raise ValueError("affine atoms take no Q")
        if self.type == "quadratic" and self.Q is None:
            raise ValueError("quadratic atoms need Q")
        return QuadMap(self.A, self.c, self.Q, self.n)


class PieceSpec(_Model):
    A: list[list[Num]] = Field(default_factory=list)
    b: list[Num] = Field(default_factory=list)
    E: list[list[Num]] = Field(default_factory=list)
    e: list[Num] = Field(default_factory=list)


class ZeroSpec(_Model):
    type: Literal["zero"]
    dim: int = Field(ge=1)


class OrthantSpec(_Model):
    type: Literal["orthant"]
    dim: int = Field(ge=1)
    sign: Literal[1, -1] = 1


class PolyUnionSpec(_Model):
    type: Literal["polyunion"]
    dim: int = Field(ge=1)
    pieces: list[PieceSpec] = Field(min_length=1)


class ComplSpec(_Model):
    type: Literal["compl"]


FactorSpec = Annotated[Union[ZeroSpec, OrthantSpec, PolyUnionSpec, ComplSpec], Field(discriminator="type")]


def _factor(f):
    if isinstance(f, ZeroSpec):
        return ZeroSet(f.dim)
    if isinstance(f, OrthantSpec):
        return Orthant(f.dim, f.sign)
    if isinstance(f, ComplSpec):
        return ComplFactor()
    return PolyUnion(f.dim, [Polyhedron(p.A, p.b, p.E, p.e) for p in f.pieces])


class SamplingSpec(_Model):
    radii: list[float] | None = None
    samples_per_radius: int | None = None
    seed: int | None = None
    projection_tol: float | None = None
    residual_floor: float | None = None
    t0: Num | None = None
    shrink: Num | None = None
    depth: int | None = None

    def build(self, **override) -> SamplingConfig:
        kw = {k: v for k, v in self.model_dump().items() if v is not None}
        if "radii" in kw:
            kw["radii"] = tuple(kw["radii"])
        kw.update({k: v for k, v in override.items() if v is not None})
        return SamplingConfig(**kw)


class _Common(_Model):
    schema_: Literal[1] = Field(alias="schema")
    checks: list[Literal[CHECKS]] | None = None
    sampling: SamplingSpec | None = None


class GeneralSpec(_Common):
    kind: Literal["general"]
    atoms: list[AtomSpec] = Field(min_length=1)
    lambda_: list[FactorSpec] = Field(alias="lambda", min_length=1)
    anchor: list[Num]


class CSSpec(_Common):
    kind: Literal["cs"]
    H: AtomSpec | None = None
    Phi: AtomSpec
    Psi: AtomSpec
    anchor: list[Num]


class KKTAnchor(_Model):
    x: list[Num]
    mu: list[Num] = Field(default_factory=list)
    lambda_: list[Num] = Field(alias="lambda", default_factory=list)


class KKTSpec(_Common):
    kind: Literal["kkt"]
    f: AtomSpec
    g: AtomSpec
    h: AtomSpec
    anchor: KKTAnchor


ProblemSpec = Annotated[Union[GeneralSpec, CSSpec, KKTSpec], Field(discriminator="kind")]


class ProblemFile(_Model):
    problem: ProblemSpec


def _reject_constant(name):
    raise ProblemError(f"non-finite number {name} is not allowed")


def loads(text: str):
    """Parse problem JSON into (instance, parsed file). Decimal literals are read exactly."""
    try:
        raw = json.loads(text, parse_float=str, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ProblemError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        pfile = ProblemFile.model_validate({"problem": raw}).problem
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(x) for x in first["loc"][2:]) or "<root>"
        raise ProblemError(f"field {loc}: {first['msg']}") from None
    try:
        return build(pfile), pfile
    except (ValueError, TypeError) as e:
        raise ProblemError(str(e)) from None


def load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ProblemError(f"cannot read {path}: {e.strerror}") from None
    return loads(text)


def build(pfile):
    if isinstance(pfile, GeneralSpec):
        atoms = [a.build() for a in pfile.atoms]
        P = atoms[0] if len(atoms) == 1 else stack(atoms)
        return ProblemInstance(P, StructuredSet([_factor(f) for f in pfile.lambda_]), pfile.anchor)
    if isinstance(pfile, CSSpec):
        return CSInstance(pfile.H.build() if pfile.H else None, pfile.Phi.build(), pfile.Psi.build(), pfile.anchor)
    a = pfile.anchor
    return KKTInstance(pfile.f.build(), pfile.g.build(), pfile.h.build(), a.x, a.mu, a.lambda_)


def _vec(v):
    return [str(x) for x in v]


def _atom(M: QuadMap) -> dict:
    d = {"type": "affine" if M.is_affine else "quadratic", "A": [_vec(r) for r in M.A], "c": _vec(M.c)}
    if not M.is_affine:
        d["Q"] = [[_vec(r) for r in q] for q in M.Q]
    d["n"] = M.n
    return d


def normalized(inst, pfile=None) -> dict:
    """Canonical document that parses back to an equal instance."""
    out: dict = {"schema": SCHEMA_VERSION}
    if isinstance(inst, ProblemInstance):
        out.update(kind="general", atoms=[_atom(inst.P)], anchor=_vec(inst.anchor))
        out["lambda"] = [f.to_dict() for f in inst.Lambda.factors]
    elif isinstance(inst, CSInstance):
        out.update(kind="cs", Phi=_atom(inst.Phi), Psi=_atom(inst.Psi), anchor=_vec(inst.anchor))
        if inst.d:
            out["H"] = _atom(inst.H)
    else:
        out.update(kind="kkt", f=_atom(inst.f), g=_atom(inst.g), h=_atom(inst.h))
        out["anchor"] = {"x": _vec(inst.x), "mu": _vec(inst.mu), "lambda": _vec(inst.lam)}
    if pfile is not None:
        if pfile.checks is not None:
            out["checks"] = list(pfile.checks)
        if pfile.sampling is not None:
            s = pfile.sampling.model_dump(exclude_none=True)
            for k in ("t0", "shrink"):
                if k in s:
                    s[k] = str(s[k])
            out["sampling"] = s
    return out
