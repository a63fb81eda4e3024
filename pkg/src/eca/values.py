"""Runtime values shared by the interpreter and the term evaluator.

A value is one of: UNIT, a Python bool, an arbitrary-precision int, a
64-bit float, or an immutable struct instance. Floats never flow into
energy arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass


class Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "unit"


UNIT = Unit()


@dataclass(frozen=True)
class StructValue:
    struct_name: str
    fields: tuple[tuple[str, object], ...]

    @classmethod
    def make(cls, struct_name: str, field_values: dict) -> "StructValue":
        return cls(struct_name, tuple(field_values.items()))

    def get(self, name: str):
        for fname, fval in self.fields:
            if fname == name:
                return fval
        raise KeyError(name)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.fields)
        return f"{self.struct_name}({inner})"


Value = object  # Unit | bool | int | float | StructValue


def value_repr(v) -> str:
    if v is UNIT:
        return "unit"
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def value_to_json(v):
    """JSON-friendly encoding used by reports and traces."""
    if v is UNIT:
        return None
    if isinstance(v, StructValue):
        return {"struct": v.struct_name,
                "fields": {k: value_to_json(x) for k, x in v.fields}}
    return v
