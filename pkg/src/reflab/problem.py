"""JSON problem files: schema validation and construction of contexts and filters."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from . import errors
from .algebra import AlgebraicContext, ZLambdaElement, build_context, parse_rational
from .filter import BasisCoords, Filter, bernoulli_filter, box_filter, cantor_filter, growth_filter, three_term_filter

NAMED_FILTERS = {
    "box": box_filter,
    "cantor": cantor_filter,
    "three_term": three_term_filter,
    "growth": growth_filter,
}

_RATIONAL = {"oneOf": [{"type": "integer"}, {"type": "string"}]}
_NUMBER_LIST = {"type": "array", "items": {"type": "number"}}
_MINPOLY = {"oneOf": [{"type": "string"}, {"type": "array", "items": {"type": "integer"}, "minItems": 1}]}

FILTER_SCHEMA = {
    "oneOf": [
        {"type": "string", "enum": sorted(NAMED_FILTERS) + ["bernoulli"]},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["lambda", "coeffs", "translations"],
            "properties": {
                "lambda": {
                    "oneOf": [
                        {"type": "number"},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["minpoly"],
                            "properties": {"minpoly": _MINPOLY, "value": {"type": "number"}},
                        },
                    ]
                },
                "coeffs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "oneOf": [
                            {"type": "number"},
                            {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                        ]
                    },
                },
                "translations": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "oneOf": [
                            {"type": "number"},
                            {"type": "string"},
                            {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["zlambda"],
                                "properties": {"zlambda": {"type": "array", "items": {"type": "integer"}}},
                            },
                            {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["coords"],
                                "properties": {"coords": {"type": "array", "items": _RATIONAL}},
                            },
                        ]
                    },
                },
                "basis": _NUMBER_LIST,
            },
        },
    ]
}

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "context": {
            "oneOf": [
                _MINPOLY,
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["minpoly"],
                    "properties": {"minpoly": _MINPOLY},
                },
            ]
        },
        "filter": FILTER_SCHEMA,
        "task": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
    },
}

# parameters accepted in "task" for each subcommand
TASK_KEYS = {
    "context": set(),
    "mahler": {"poly", "samples"},
    "filter-mean": {"L", "clip", "panels_per_unit", "samples"},
    "sublevel": {"L", "v", "grid"},
    "fhat": {"y", "y_min", "y_max", "n", "tail_eps"},
    "rho": {"L_grid", "panels_per_unit", "method", "tail_eps"},
    "scaling": {"alpha", "q", "k_max", "tail_eps"},
    "orbit": {"q"},
    "lattice": {"sigma", "L"},
    "multiscale": {"sigma", "L"},
    "diffraction": {"sigma", "L", "y", "y_min", "y_max", "n"},
}


def load_problem(path) -> dict:
    """Read and validate a problem file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise errors.ValidationError(f"cannot read problem file {path}: {exc}") from exc
    validate_problem(data)
    return data


def validate_problem(data: dict, command: str | None = None) -> None:
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise errors.ValidationError(f"problem file: {exc.message}") from exc
    if command is not None:
        unknown = set(data.get("task", {})) - TASK_KEYS[command]
        if unknown:
            raise errors.ValidationError(f"unknown task fields for {command}: {sorted(unknown)}")


def context_from_spec(spec) -> AlgebraicContext:
    """``"z^2-z-1"`` or the list ``[c_0, ..., c_{n-1}]`` of a monic polynomial."""
    if isinstance(spec, dict):
        spec = spec["minpoly"]
    return build_context(spec if isinstance(spec, str) else list(spec))


def _translation(t):
    if isinstance(t, dict):
        if "zlambda" in t:
            return ZLambdaElement(t["zlambda"])
        return BasisCoords(t["coords"])
    if isinstance(t, str):
        return parse_rational(t)
    if isinstance(t, int):
        return parse_rational(t)
    return float(t)


def filter_from_spec(spec, ctx: AlgebraicContext | None = None) -> tuple[Filter, AlgebraicContext | None]:
    """Build a filter (and the context it lives in, if any) from its JSON form."""
    if isinstance(spec, str):
        if spec == "bernoulli":
            if ctx is None:
                raise errors.ValidationError("the bernoulli filter needs a context")
            return bernoulli_filter(ctx), ctx
        if spec not in NAMED_FILTERS:
            raise errors.ValidationError(f"unknown filter {spec!r}; choose from {sorted(NAMED_FILTERS) + ['bernoulli']}")
        return NAMED_FILTERS[spec](), ctx
    lam = spec["lambda"]
    if isinstance(lam, dict):
        ctx = context_from_spec(lam["minpoly"])
        if "value" in lam and abs(lam["value"] - ctx.lam) > 1e-9 * abs(ctx.lam):
            raise errors.ValidationError(f"lambda value {lam['value']} does not match root {ctx.lam}")
        lam_value = ctx.lam
    else:
        lam_value = float(lam)
    coeffs = [complex(c[0], c[1]) if isinstance(c, list) else complex(c) for c in spec["coeffs"]]
    trans = [_translation(t) for t in spec["translations"]]
    uses_ctx = any(isinstance(t, ZLambdaElement) for t in trans)
    if uses_ctx and ctx is None:
        raise errors.ValidationError("Z[lambda] translations need lambda given by a minimal polynomial")
    f = Filter(lam_value, coeffs, trans, context=ctx if uses_ctx or isinstance(lam, dict) else None,
               basis=spec.get("basis"))
    return f, ctx
