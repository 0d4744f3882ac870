"""Report of one scenario verification and its serialisations."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class FlowReport:
    label: str
    sf_partition: int
    sf_oracle: int | None
    maslov_partition: int
    maslov_crossings: int | None
    gsff_lhs: int
    gsff_rhs: int
    equal: bool
    crossings: list = field(default_factory=list)
    cauchy_gap_profile: dict = field(default_factory=dict)
    timings: dict | None = None
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self):
        out = asdict(self)
        if out["timings"] is None:
            del out["timings"]
        return to_jsonable(out)

    def to_json(self) -> str:
        return dumps(self.to_dict())


def to_jsonable(obj):
    """Numpy scalars and arrays to plain JSON types; complex numbers become ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            obj = np.stack([obj.real, obj.imag], axis=-1)
        # adding 0.0 turns -0.0 into 0.0
        return (obj + 0.0).tolist() if obj.dtype.kind == "f" else obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) + 0.0
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def csv_text(header, rows) -> str:
    """CSV with a header row and LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def complex_columns(name, values):
    """Column names and values for complex data split into re/im pairs."""
    values = np.asarray(values)
    return [f"{name}_re", f"{name}_im"], np.column_stack([values.real, values.imag])
