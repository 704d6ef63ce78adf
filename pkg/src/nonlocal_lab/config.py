"""Strict JSON experiment and audit documents.

Every key is checked against a fixed schema; unknown keys and out-of-range
values are rejected with the offending key path in the message.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from .convergence import FUNCTIONAL_KINDS, ExperimentConfig, FunctionalSpec
from .estimators import CORRECTIONS, DiagonalPolicy
from .fields import FIELD_KINDS, REGION_KINDS, FieldSpec, RegionSpec
from .manifold import KINDS as MANIFOLD_KINDS
from .manifold import ManifoldSpec
from .mollifiers import DEFAULT_DELTA_GRID, DEFAULT_SIGMA_GRID, make_family

TOP_KEYS = ("manifold", "field", "functional", "grid", "policy", "test_field", "seed", "tolerance")
MANIFOLD_KEYS = ("kind", "dimension", "lengths", "radius", "mesh_path", "resolution")
FIELD_KEYS = ("kind", "terms", "coefficients", "value", "region")
REGION_KEYS = ("kind", "start", "length", "lower", "upper", "center", "radius")
FUNCTIONAL_KEYS = ("kind", "p", "family", "params", "region")
POLICY_KEYS = ("cutoff_factor", "correction")
AUDIT_KEYS = ("families", "sigma_grid", "delta_grid")
AUDIT_FAMILY_KEYS = ("kind", "n", "params", "scale")


class ConfigError(ValueError):
    pass


def _obj(doc, path, allowed, required=()):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object, got {type(doc).__name__}")
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key (allowed: {', '.join(allowed)})".lstrip("."))
    for key in required:
        if key not in doc:
            raise ConfigError(f"{path}.{key}: required key missing".lstrip("."))
    return doc


def _num(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{path}: expected a finite number, got {x!r}")
    return float(x)


def _int(x, path):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{path}: expected an integer, got {x!r}")
    return x


def _str(x, path, choices=None):
    if not isinstance(x, str):
        raise ConfigError(f"{path}: expected a string, got {x!r}")
    if choices is not None and x not in choices:
        raise ConfigError(f"{path}: must be one of {', '.join(choices)}, got {x!r}")
    return x


def _vec(x, path):
    if not isinstance(x, list) or not x:
        raise ConfigError(f"{path}: expected a nonempty list of numbers")
    return tuple(_num(v, f"{path}[{i}]") for i, v in enumerate(x))


def _build(cls, path, **kw):
    try:
        return cls(**kw)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _manifold(doc, base_dir):
    d = _obj(doc, "manifold", MANIFOLD_KEYS, ("kind",))
    kw = {"kind": _str(d["kind"], "manifold.kind", MANIFOLD_KINDS)}
    if "dimension" in d:
        kw["dimension"] = _int(d["dimension"], "manifold.dimension")
        if kw["dimension"] < 1:
            raise ConfigError("manifold.dimension: must be >= 1")
    if "lengths" in d:
        kw["lengths"] = _vec(d["lengths"], "manifold.lengths")
    if "radius" in d:
        kw["radius"] = _num(d["radius"], "manifold.radius")
    if "resolution" in d:
        kw["resolution"] = _int(d["resolution"], "manifold.resolution")
    if "mesh_path" in d:
        p = _str(d["mesh_path"], "manifold.mesh_path")
        if base_dir and not os.path.isabs(p):
            p = os.path.join(base_dir, p)
        kw["mesh_path"] = p
    return _build(ManifoldSpec, "manifold", **kw)


def _region(doc, path):
    d = _obj(doc, path, REGION_KEYS, ("kind",))
    kw = {"kind": _str(d["kind"], f"{path}.kind", REGION_KINDS)}
    for key in ("start", "length", "radius"):
        if key in d:
            kw[key] = _num(d[key], f"{path}.{key}")
    for key in ("lower", "upper", "center"):
        if key in d:
            kw[key] = _vec(d[key], f"{path}.{key}")
    return _build(RegionSpec, path, **kw)


def _field(doc, path):
    d = _obj(doc, path, FIELD_KEYS, ("kind",))
    kw = {"kind": _str(d["kind"], f"{path}.kind", FIELD_KINDS)}
    if "terms" in d:
        if not isinstance(d["terms"], list):
            raise ConfigError(f"{path}.terms: expected a list of [coef, sin|cos, freq]")
        terms = []
        for i, t in enumerate(d["terms"]):
            tp = f"{path}.terms[{i}]"
            if not isinstance(t, list) or len(t) != 3:
                raise ConfigError(f"{tp}: expected [coef, sin|cos, freq]")
            freq = t[2] if isinstance(t[2], list) else [t[2]]
            terms.append((_num(t[0], tp), _str(t[1], tp, ("sin", "cos")),
                          tuple(_int(k, f"{tp}.freq") for k in freq)))
        kw["terms"] = tuple(terms)
    if "coefficients" in d:
        kw["coefficients"] = _vec(d["coefficients"], f"{path}.coefficients")
    if "value" in d:
        kw["value"] = _num(d["value"], f"{path}.value")
    if "region" in d:
        kw["region"] = _region(d["region"], f"{path}.region")
    return _build(FieldSpec, path, **kw)


def _family_params(doc, path):
    d = _obj(doc, path, ("p", "rate", "power", "profile"))
    return {k: (_str(v, f"{path}.{k}") if k == "profile" else _num(v, f"{path}.{k}"))
            for k, v in d.items()}


def _functional(doc):
    d = _obj(doc, "functional", FUNCTIONAL_KEYS, ("kind",))
    kind = _str(d["kind"], "functional.kind", FUNCTIONAL_KINDS)
    p = _num(d.get("p", 1.0), "functional.p")
    if not p >= 1.0:
        raise ConfigError(f"functional.p: must satisfy p ≥ 1, got {p}")
    kw = {"kind": kind, "p": p}
    if "family" in d:
        kw["family"] = _str(d["family"], "functional.family")
        kw["family_params"] = _family_params(d.get("params", {}), "functional.params")
    elif "params" in d:
        raise ConfigError("functional.params: given without a family")
    if "region" in d:
        kw["region"] = _region(d["region"], "functional.region")
    fs = _build(FunctionalSpec, "functional", **kw)
    if fs.family is not None:
        try:
            make_family(fs.family, 1, **fs.family_params)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"functional.family: {exc}") from None
    return fs


def _policy(doc):
    d = _obj(doc, "policy", POLICY_KEYS)
    kw = {}
    if "cutoff_factor" in d:
        kw["cutoff_factor"] = _num(d["cutoff_factor"], "policy.cutoff_factor")
    if "correction" in d:
        kw["correction"] = _str(d["correction"], "policy.correction", CORRECTIONS)
    return _build(DiagonalPolicy, "policy", **kw)


def config_from_dict(doc: dict, base_dir: str | None = None) -> ExperimentConfig:
    d = _obj(doc, "", TOP_KEYS, ("manifold", "field", "functional"))
    manifold = _manifold(d["manifold"], base_dir)
    fld = _field(d["field"], "field")
    functional = _functional(d["functional"])
    grid = ()
    if "grid" in d:
        if not isinstance(d["grid"], list):
            raise ConfigError("grid: expected a list of numbers")
        grid = tuple(_num(g, f"grid[{i}]") for i, g in enumerate(d["grid"]))
        name = "s" if functional.uses_s_grid else "sigma"
        for i, g in enumerate(grid):
            if not 0.0 < g < 1.0:
                raise ConfigError(f"grid[{i}]: {name} = {g!r} violates 0 < {name} < 1")
    policy = _policy(d["policy"]) if "policy" in d else DiagonalPolicy()
    test_field = _field(d["test_field"], "test_field") if d.get("test_field") is not None else None
    seed = _int(d.get("seed", 0), "seed")
    tolerance = _num(d.get("tolerance", 0.05), "tolerance")
    try:
        return ExperimentConfig(manifold, fld, functional, grid, policy, test_field, seed, tolerance)
    except ValueError as exc:
        key = "grid" if "grid" in str(exc) else ("test_field" if "test_field" in str(exc) else "tolerance")
        raise ConfigError(f"{key}: {exc}") from None


def parse_config(text: str, base_dir: str | None = None) -> ExperimentConfig:
    """Parse and validate an experiment document. Relative mesh paths resolve
    against ``base_dir``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    return config_from_dict(doc, base_dir)


def _region_dict(r: RegionSpec | None):
    if r is None:
        return None
    out = {"kind": r.kind}
    for key in ("start", "length", "radius"):
        v = getattr(r, key)
        if v is not None and not (key == "start" and r.kind != "Arc"):
            out[key] = v
    for key in ("lower", "upper", "center"):
        v = getattr(r, key)
        if v is not None:
            out[key] = [float(x) for x in v]
    return out


def _field_dict(f: FieldSpec | None):
    if f is None:
        return None
    out = {"kind": f.kind}
    if f.kind == "TorusTrig":
        out["terms"] = [[c, fn, list(freq)] for c, fn, freq in f.terms]
    elif f.kind == "SphereCoord":
        out["coefficients"] = list(f.coefficients)
    elif f.kind == "Constant":
        out["value"] = f.value
    else:
        out["region"] = _region_dict(f.region)
    return out


def config_to_dict(config: ExperimentConfig) -> dict:
    """Canonical document for ``config``; ``config_from_dict`` inverts it."""
    m = config.manifold
    man = {"kind": m.kind}
    if m.kind == "FlatTorus":
        man.update(dimension=m.dimension, lengths=list(m.lengths), resolution=m.resolution)
    elif m.kind in ("Circle", "Sphere2"):
        man.update(radius=m.radius, resolution=m.resolution)
    else:
        man["mesh_path"] = m.mesh_path
    fs = config.functional
    fun = {"kind": fs.kind, "p": fs.p}
    if fs.family is not None:
        fun["family"] = fs.family
        fun["params"] = dict(fs.family_params)
    if fs.region is not None:
        fun["region"] = _region_dict(fs.region)
    return {
        "manifold": man,
        "field": _field_dict(config.field),
        "functional": fun,
        "grid": list(config.grid),
        "policy": {"cutoff_factor": config.policy.cutoff_factor, "correction": config.policy.correction},
        "test_field": _field_dict(config.test_field),
        "seed": config.seed,
        "tolerance": config.tolerance,
    }


# ---------------------------------------------------------------------------
# audit documents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditFamily:
    kind: str
    n: int
    params: dict
    scale: float = 1.0  # != 1 gives a deliberately unnormalized family

    def build(self):
        fam = make_family(self.kind, self.n, **self.params)
        if self.scale == 1.0:
            return fam

        def scaled(sigma):
            return fam(sigma).scaled(self.scale)

        scaled.__name__ = f"{self.kind}*{self.scale:g}"
        return scaled


@dataclass(frozen=True)
class AuditConfig:
    families: tuple
    sigma_grid: tuple = DEFAULT_SIGMA_GRID
    delta_grid: tuple = DEFAULT_DELTA_GRID


def parse_audit_config(text: str) -> AuditConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    d = _obj(doc, "", AUDIT_KEYS, ("families",))
    if not isinstance(d["families"], list) or not d["families"]:
        raise ConfigError("families: expected a nonempty list")
    fams = []
    for i, f in enumerate(d["families"]):
        path = f"families[{i}]"
        f = _obj(f, path, AUDIT_FAMILY_KEYS, ("kind", "n"))
        n = _int(f["n"], f"{path}.n")
        if n < 1:
            raise ConfigError(f"{path}.n: must be >= 1")
        fam = AuditFamily(_str(f["kind"], f"{path}.kind"), n,
                          _family_params(f.get("params", {}), f"{path}.params"),
                          _num(f.get("scale", 1.0), f"{path}.scale"))
        if not fam.scale > 0:
            raise ConfigError(f"{path}.scale: must be > 0")
        try:
            fam.build()
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        fams.append(fam)
    kw = {}
    for key in ("sigma_grid", "delta_grid"):
        if key in d:
            g = _vec(d[key], key)
            if any(not 0 < x < 1 for x in g):
                raise ConfigError(f"{key}: entries must lie in (0, 1)")
            kw[key] = g
    return AuditConfig(tuple(fams), **kw)
