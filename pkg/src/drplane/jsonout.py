"""JSON emission with floats at 17 significant digits.

The stock encoder's shortest-roundtrip floats vary in digit count; analysis
outputs are diffed byte-for-byte across runs and machines, so every float is
printed with a fixed 17-significant-digit format instead.
"""

from __future__ import annotations

import math

import numpy as np


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value in JSON output: {x}")
    return format(x, ".17g")


def dumps(obj, indent: int | None = None) -> str:
    out = []
    _write(obj, out, indent, 0)
    return "".join(out)


def _write(obj, out, indent, level):
    nl = "\n" + " " * (indent * (level + 1)) if indent else ""
    nl_close = "\n" + " " * (indent * level) if indent else ""
    sep = "," + (nl if indent else " ")
    colon = ": "
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.append("{" + nl)
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(sep)
            out.append('"' + str(k) + '"' + colon)
            _write(v, out, indent, level + 1)
        out.append(nl_close + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[" + nl)
        for i, v in enumerate(seq):
            if i:
                out.append(sep)
            _write(v, out, indent, level + 1)
        out.append(nl_close + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")
