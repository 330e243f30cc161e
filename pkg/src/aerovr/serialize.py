"""JSON export of subspaces and summary plots.

Reals are written with 17 significant digits so exports round-trip float64
exactly and identical inputs produce byte-identical files.
"""
from __future__ import annotations

import json

import numpy as np

from .surrogate import ActiveSubspace, SummaryPlot


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    if isinstance(value, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def dumps_17(obj) -> str:
    """json.dumps-alike with floats at 17 significant digits."""
    return _fmt(obj)


def subspace_to_json(qoi: str, subspace: ActiveSubspace) -> str:
    return dumps_17({
        "qoi": qoi,
        "eigenvalues": list(subspace.eigenvalues),
        "W": [list(row) for row in subspace.W],
        "m": subspace.m,
        "degenerate": subspace.degenerate,
    })


def plot_to_json(plot: SummaryPlot) -> str:
    return dumps_17({
        "qoi": plot.qoi_name,
        "m": plot.m,
        "points": [plot.point(i) for i in range(len(plot.design_index))],
    })
