"""JSON and CSV rendering with lossless float formatting.

All real-valued output is rendered at 17 significant digits so that any
downstream diff or re-parse round-trips the exact double.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from typing import Any, Sequence

from .errors import ParameterOutOfRange
from .measures import DiscreteMeasure, ScalarDistribution, make_measure


def fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ParameterOutOfRange(f"non-finite value {x!r} in output")
    return format(float(x), ".17g")


def render_json(obj: Any, indent: int = 0) -> str:
    """Render nested dicts/lists/scalars; floats go through fmt_float."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key, value in obj.items():
            items.append(
                f'{pad}  {json.dumps(str(key))}: {render_json(value, indent + 1)}'
            )
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ", ".join(render_json(v, indent + 1) for v in obj)
        return "[" + inner + "]"
    if isinstance(obj, Enum):
        return json.dumps(obj.value)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, (int, str)) or obj is None:
        return json.dumps(obj)
    raise TypeError(f"cannot render {type(obj).__name__}")


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    def cell(v: Any) -> str:
        if isinstance(v, float):
            return fmt_float(v)
        if isinstance(v, Enum):
            return str(v.value)
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def measure_to_dict(m: DiscreteMeasure) -> dict:
    return {"weights": list(m.weights)}


def measure_from_dict(doc: dict) -> DiscreteMeasure:
    if not isinstance(doc, dict) or "weights" not in doc:
        raise ParameterOutOfRange('measure document must look like {"weights": [...]}')
    return make_measure(doc["weights"])


def load_measure(path: str) -> DiscreteMeasure:
    with open(path, "r", encoding="utf-8") as fh:
        return measure_from_dict(json.load(fh))


def distribution_to_dict(d: ScalarDistribution) -> dict:
    return {"atoms": [[v, p] for v, p in zip(d.values, d.probs)]}
