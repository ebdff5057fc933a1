"""JSON schema of the degeneration report emitted by ``degenerate`` and ``sweep``."""

_STR_LIST = {"type": "array", "items": {"type": "string"}}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["spec", "change_of_variables", "model_equations", "effective_model",
                 "identified", "domination", "fiber_class", "stabilizer", "verdict",
                 "faithful", "invariants_ok"],
    "properties": {
        "spec": {
            "type": "object",
            "required": ["p", "m1", "m2", "n1", "m1_tilde"],
            "properties": {
                "p": {"type": "integer", "minimum": 2},
                "m1": {"type": "integer"},
                "m2": {"type": "integer"},
                "n1": {"type": ["integer", "null"]},
                "m1_tilde": {"type": ["integer", "null"]},
            },
            "additionalProperties": False,
        },
        "change_of_variables": _STR_LIST,
        "model_equations": _STR_LIST,
        "effective_model": {
            "type": "object",
            "required": ["generators", "relation_constants", "comul"],
            "properties": {
                "generators": _STR_LIST,
                "relation_constants": _STR_LIST,
                "comul": {"type": "object", "additionalProperties": {"type": "string"}},
            },
            "additionalProperties": False,
        },
        "identified": {
            "oneOf": [
                {"type": "null"},
                {"type": "object", "required": ["lambda", "nu"],
                 "properties": {"lambda": {"type": "string"}, "nu": {"type": "string"}},
                 "additionalProperties": False},
            ]
        },
        "domination": {
            "type": "array",
            "items": {"type": "object", "required": ["generator", "image"],
                      "properties": {"generator": {"type": "string"}, "image": {"type": "string"}},
                      "additionalProperties": False},
        },
        "fiber_class": {"type": "string"},
        "stabilizer": {
            "type": "object",
            "required": ["ideal", "order"],
            "properties": {"ideal": _STR_LIST, "order": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "verdict": {"enum": ["Torsor", "FaithfulNotFree", "NotFaithful"]},
        "faithful": {"type": "boolean"},
        "invariants_ok": {"type": "boolean"},
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
    },
    "additionalProperties": False,
}

SWEEP_SCHEMA = {"type": "array", "items": REPORT_SCHEMA}
