"""JSON Schemas (draft 2020-12) for every CLI output.  ``scripts/write_schemas.py``
copies them to docs/schemas/."""

NUMBER_OR_NULL = {"type": ["number", "null"]}
COMPLEX_OR_REAL = {
    "oneOf": [
        {"type": "number"},
        {"type": "object", "required": ["re", "im"],
         "properties": {"re": {"type": "number"}, "im": {"type": "number"}}},
    ]
}

EIGENVALUE = {
    "type": "object",
    "required": ["re", "im", "multiplicity", "residual", "stability"],
    "properties": {
        "re": {"type": "number"},
        "im": {"type": "number"},
        "multiplicity": {"type": "integer", "minimum": 1},
        "residual": {"type": "number", "minimum": 0},
        "stability": {"type": "number", "minimum": 0},
        "sensitivity": {"type": "number", "minimum": 0},
        "unconfirmed": {"type": "boolean"},
    },
}

SPECTRUM = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spectrum",
    "type": "object",
    "required": ["regime", "order", "grid", "eigenvalues"],
    "properties": {
        "regime": {"type": ["string", "null"],
                   "enum": ["finite", "infinite", "quasinilpotent", "mixed", "indeterminate", None]},
        "order": {"type": ["integer", "null"]},
        "grid": {"type": ["integer", "null"]},
        "discarded": {"type": "integer", "minimum": 0},
        "eigenvalues": {"type": "array", "items": EIGENVALUE},
    },
}

CLASSIFICATION = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "classification",
    "type": "object",
    "required": ["phi_at_zero", "right_flat_epsilon", "strictly_above_diagonal",
                 "fixed_points", "iterate_count_N", "regime", "indeterminate"],
    "properties": {
        "phi_at_zero": {"type": "number", "minimum": 0, "maximum": 1},
        "right_flat_epsilon": NUMBER_OR_NULL,
        "strictly_above_diagonal": {"type": "boolean"},
        "fixed_points": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0,
                                                    "exclusiveMaximum": 1}},
        "iterate_count_N": {"type": ["integer", "null"], "minimum": 1},
        "regime": {"enum": ["finite", "infinite", "quasinilpotent", "mixed", "indeterminate"]},
        "segment_count": {"type": "integer", "minimum": 1},
        "indeterminate": {"type": "boolean"},
        "note": {"type": "string"},
    },
}

SERIES = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fredholm series",
    "type": "object",
    "required": ["order", "grid", "coefficients", "errors"],
    "properties": {
        "order": {"type": "integer", "minimum": 1},
        "grid": {"type": "integer", "minimum": 64},
        "coefficients": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "errors": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2},
        "coarse_coefficients": {"type": "array", "items": {"type": "number"}},
    },
}

TRACES = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "trace report",
    "type": "object",
    "required": ["trace2_formula", "trace3_formula", "trace2_spectral", "trace3_spectral",
                 "fourier_partial", "discrepancies", "budget", "flags", "ok"],
    "properties": {
        "trace2_formula": {"type": "number", "minimum": -1, "maximum": 1},
        "trace3_formula": NUMBER_OR_NULL,
        "trace1_spectral": COMPLEX_OR_REAL,
        "trace2_spectral": COMPLEX_OR_REAL,
        "trace3_spectral": COMPLEX_OR_REAL,
        "trace2_determinant": NUMBER_OR_NULL,
        "trace3_determinant": NUMBER_OR_NULL,
        "fourier_partial": {"type": "array", "items": {"type": "number"}},
        "fourier_under_resolved": {"type": "boolean"},
        "discrepancies": {"type": "object", "additionalProperties": {"type": "number"}},
        "budget": {"type": "object", "additionalProperties": {"type": "number"}},
        "flags": {"type": "array", "items": {"type": "string"}},
        "notes": {"type": "array", "items": {"type": "string"}},
        "ok": {"type": "boolean"},
    },
}

NYSTROM = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "nystrom oracle",
    "type": "object",
    "required": ["map", "m", "spectrum", "singular_values"],
    "properties": {
        "map": {"type": "string"},
        "m": {"type": "integer", "minimum": 16},
        "spectrum": SPECTRUM,
        "singular_values": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "export": {"type": ["string", "null"]},
    },
}

SEGMENT = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "segment report",
    "type": "object",
    "required": ["map", "segments", "merged", "measure_above_diagonal", "partial_trace"],
    "properties": {
        "map": {"type": "string"},
        "segments": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["interval", "scale", "above_diagonal", "spectrum"],
                "properties": {
                    "interval": {"type": "array", "items": {"type": "number"},
                                 "minItems": 2, "maxItems": 2},
                    "scale": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    "above_diagonal": {"type": "boolean"},
                    "map": {"type": "string"},
                    "spectrum": SPECTRUM,
                },
            },
        },
        "merged": SPECTRUM,
        "measure_above_diagonal": {"type": "number", "minimum": 0, "maximum": 1},
        "partial_trace": {"type": "number"},
        "epsilon": {"type": "number"},
    },
}

VALIDATION = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "validation report",
    "type": "object",
    "required": ["map", "regime", "ok", "checks"],
    "properties": {
        "map": {"type": "string"},
        "regime": {"type": "string"},
        "ok": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value", "reference", "discrepancy", "budget", "ok"],
                "properties": {
                    "name": {"type": "string"},
                    "value": {"type": "number"},
                    "reference": {"type": "number"},
                    "discrepancy": {"type": "number", "minimum": 0},
                    "budget": {"type": "number", "minimum": 0},
                    "ok": {"type": "boolean"},
                    "note": {"type": "string"},
                },
            },
        },
    },
}

ERROR = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "error diagnostic",
    "type": "object",
    "required": ["error", "message", "command"],
    "properties": {
        "error": {"type": "string"},
        "message": {"type": "string"},
        "command": {"type": "string"},
    },
}

SCHEMAS = {
    "classify": CLASSIFICATION,
    "coeffs": SERIES,
    "spectrum": SPECTRUM,
    "traces": TRACES,
    "nystrom": NYSTROM,
    "segment": SEGMENT,
    "validate": VALIDATION,
    "error": ERROR,
}
