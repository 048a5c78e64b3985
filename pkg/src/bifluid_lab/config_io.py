"""JSON configuration documents: schemas and builders.

Every document is validated against its schema (unknown keys rejected)
before any object is built.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from . import spectral_ops as so
from .bifluid import BiFluidSystem, effective_pressure, make_phase
from .constitutive.audit import AuditSampling
from .constitutive.laws import make_law
from .constitutive.region import AdmissibleRegion
from .constitutive.regularize import RegularizedPressureParams
from .errors import ConfigError
from .solver.config import SCHEMES, ApproxConfig
from .solver.problems import RECIPES, make_initial
from .solver.run import prepare_initial

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

GRID_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["dim", "n"],
    "properties": {"dim": {"type": "integer", "minimum": 1, "maximum": 3},
                   "n": {"type": "integer", "minimum": 4}},
}

REGION_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["a_lower", "a_upper"],
    "properties": {"a_lower": {"type": "array", "items": _NUM, "minItems": 1},
                   "a_upper": {"type": "array", "items": _NUM, "minItems": 1}},
}

PHASE_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["gamma"],
    "properties": {"law": {"enum": ["power"]}, "gamma": _POS, "coef": _POS,
                   "slope": {"type": "number", "minimum": 0}, "name": {"type": "string"}},
}

BIFLUID_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["plus", "minus"],
    "properties": {"plus": PHASE_SCHEMA, "minus": PHASE_SCHEMA},
}

LAW_SCHEMA = {
    "type": "object", "additionalProperties": False,
    "properties": {"name": {"type": "string"}, "params": {"type": "object"},
                   "bifluid": BIFLUID_SCHEMA},
    "oneOf": [{"required": ["name"], "not": {"required": ["bifluid"]}},
              {"required": ["bifluid"], "not": {"required": ["name"]}}],
}

INITIAL_SCHEMA = {
    "type": "object", "additionalProperties": False, "required": ["recipe"],
    "properties": {"recipe": {"enum": sorted(RECIPES)}, "params": {"type": "object"},
                   "smoothing": {"type": ["integer", "null"], "minimum": 1}},
}

RUN_PROPERTIES = {
    "grid": GRID_SCHEMA, "law": LAW_SCHEMA, "region": REGION_SCHEMA,
    "N": {"type": "integer", "minimum": 1}, "epsilon": _NUM, "delta": _NUM, "B": _NUM,
    "mu": _NUM, "lambda": _NUM, "dt": _NUM, "t_end": _NUM,
    "scheme": {"enum": list(SCHEMES)}, "dealias": {"type": "boolean"},
    "cfl_limit": _POS, "cg_rtol": _POS, "positivity_clamp": {"type": "boolean"},
    "initial": INITIAL_SCHEMA,
    "monitor": {"type": "object", "additionalProperties": False,
                "properties": {"checkpoint_every": {"type": "integer", "minimum": 1},
                               "band_threshold": {"type": "number", "minimum": 0}}},
    "output": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
}
RUN_REQUIRED = ["grid", "law", "N", "epsilon", "delta", "B", "mu", "lambda", "dt", "t_end",
                "initial"]

RUN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema", "title": "run configuration",
    "type": "object", "additionalProperties": False, "required": RUN_REQUIRED,
    "properties": RUN_PROPERTIES,
}

_SAMPLING_PROPS = {}
for _name, _default in AuditSampling().to_dict().items():
    if isinstance(_default, tuple):
        _SAMPLING_PROPS[_name] = {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2}
    elif isinstance(_default, int):
        _SAMPLING_PROPS[_name] = {"type": "integer", "minimum": 0}
    else:
        _SAMPLING_PROPS[_name] = _POS

AUDIT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema", "title": "audit configuration",
    "type": "object", "additionalProperties": False, "required": ["law"],
    "properties": {"law": LAW_SCHEMA, "region": REGION_SCHEMA,
                   "sampling": {"type": "object", "additionalProperties": False,
                                "properties": _SAMPLING_PROPS},
                   "output": {"type": "string"}},
}

_AXIS_SPEC = {
    "type": "object", "additionalProperties": False, "required": ["min", "max", "n"],
    "properties": {"min": {"type": "number", "minimum": 0}, "max": _POS,
                   "n": {"type": "integer", "minimum": 1},
                   "spacing": {"enum": ["linear", "log"]}},
}

TABLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "bi-fluid table configuration",
    "type": "object", "additionalProperties": False, "required": ["bifluid", "rho", "Z"],
    "properties": {"bifluid": BIFLUID_SCHEMA, "region": REGION_SCHEMA, "rho": _AXIS_SPEC,
                   "Z": _AXIS_SPEC, "output": {"type": "string"}},
}

_BASE_RUN = {
    "type": "object", "additionalProperties": False, "required": RUN_REQUIRED,
    "properties": {k: v for k, v in RUN_PROPERTIES.items() if k != "output"},
}

STUDY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema", "title": "study configuration",
    "type": "object", "additionalProperties": False, "required": ["base", "axis", "values"],
    "properties": {
        "base": _BASE_RUN,
        "axis": {"enum": ["epsilon", "delta", "dt", "n"]},
        "values": {"type": "array", "items": _POS, "minItems": 1},
        "theta": {"type": ["number", "null"]},
        "flux_k": {"type": ["number", "null"]},
        "p": {"enum": [1, 2]},
        "slopes_for": {"type": "array", "items": {"type": "string"}},
        "reuse": {"type": ["string", "null"]},
        "save_checkpoints": {"type": "boolean"},
        "output": {"type": "string"},
    },
}

SCHEMAS = {"run": RUN_SCHEMA, "audit": AUDIT_SCHEMA, "bifluid-table": TABLE_SCHEMA,
           "study": STUDY_SCHEMA}


def load_document(path):
    """Read a JSON file; malformed JSON raises :class:`ConfigError`."""
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc


def validate(doc, kind):
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid {kind} configuration at {where}: {exc.message}") from None
    return doc


def build_region(doc):
    if doc is None:
        return AdmissibleRegion.single(0.0, 1.0)
    return AdmissibleRegion(tuple(doc["a_lower"]), tuple(doc["a_upper"]))


def build_bifluid(doc, region):
    return BiFluidSystem(make_phase(doc["plus"]), make_phase(doc["minus"]), region)


def build_law(doc, region):
    """A catalog law or the effective law of a bi-fluid pair."""
    if "bifluid" in doc:
        return effective_pressure(build_bifluid(doc["bifluid"], region))
    try:
        return make_law(doc["name"], region=region, **doc.get("params", {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for law {doc['name']!r}: {exc}") from None


def build_run(doc, grid_n=None, **overrides):
    """Validated run document -> ``(ApproxConfig, initial MixtureState)``.

    ``grid_n`` and keyword overrides (ApproxConfig field names, plus
    ``delta``) replace the document values; studies use them to walk a ladder.
    """
    validate(doc, "run")
    region = build_region(doc.get("region"))
    law = build_law(doc["law"], region)
    grid = so.TorusGrid(doc["grid"]["dim"], grid_n or doc["grid"]["n"])
    delta = overrides.pop("delta", doc["delta"])
    monitor = doc.get("monitor", {})
    params = dict(
        grid=grid, law=law, N=doc["N"], epsilon=doc["epsilon"],
        pressure_params=RegularizedPressureParams(delta, doc["B"]), mu=doc["mu"],
        lam=doc["lambda"], dt=doc["dt"], t_end=doc["t_end"],
        scheme=doc.get("scheme", "imex1"), dealias=doc.get("dealias", True),
        cfl_limit=doc.get("cfl_limit", 0.5), cg_rtol=doc.get("cg_rtol", 1e-13),
        positivity_clamp=doc.get("positivity_clamp", False),
        checkpoint_every=monitor.get("checkpoint_every", 1),
        band_threshold=monitor.get("band_threshold", 1e-8),
    )
    params.update(overrides)
    config = ApproxConfig(**params)
    init = doc["initial"]
    recipe_params = copy.deepcopy(init.get("params", {}))
    if init["recipe"] == "random_band_limited":
        recipe_params.setdefault("seed", doc.get("seed", 0))
    try:
        rho0, Z0, u0 = make_initial(init["recipe"], grid, region, **recipe_params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for recipe {init['recipe']!r}: {exc}") from None
    state = prepare_initial(rho0, Z0, u0, config, smoothing=init.get("smoothing"))
    return config, state


def build_sampling(doc):
    data = dict(doc or {})
    for key, val in data.items():
        if isinstance(val, list):
            data[key] = tuple(val)
    return AuditSampling(**data)
