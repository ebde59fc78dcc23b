"""Flat ``key = value`` model files.

Example::

    # isentropic gas with a degenerate pressure law
    model = gas:P=(v-1)^4
    bounds = -2, 2, 0.5, 1.5
    grid = 512

Exactly one definition group is allowed: ``model`` (a model id), ``h`` (a
Hamiltonian density) or all four matrix entries ``A``, ``B``, ``C``, ``D``.
Optional analysis defaults are ``name``, ``bounds`` (umin, umax, vmin, vmax),
``tol`` (tolerance scale), ``step`` (arc step) and ``grid`` (grid size).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from . import expr as ex
from .errors import ModelError
from .models import from_hamiltonian, model_from_id
from .syscore import Provenance, SystemDef

DEFINITION_KEYS = {"model", "h", "A", "B", "C", "D"}
DEFAULT_KEYS = {"name", "bounds", "tol", "step", "grid"}


@dataclass(frozen=True)
class ModelFile:
    system: SystemDef
    bounds: Optional[tuple] = None
    tol: Optional[float] = None
    step: Optional[float] = None
    grid: Optional[int] = None


def _floats(text, count, key):
    parts = [p.strip() for p in text.split(",")]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ModelError(f"{key}: expected {count} numbers, got {text!r}") from None
    if len(vals) != count:
        raise ModelError(f"{key}: expected {count} numbers, got {len(vals)}")
    return vals


def parse_model_file(text: str) -> ModelFile:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ModelError(f"line {lineno}: expected key = value")
        if key not in DEFINITION_KEYS | DEFAULT_KEYS:
            raise ModelError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ModelError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value

    groups = [g for g, present in (("model", "model" in entries), ("h", "h" in entries),
                                   ("matrix", any(k in entries for k in "ABCD"))) if present]
    if len(groups) != 1:
        raise ModelError("exactly one of model, h or the matrix entries A, B, C, D is required")
    name = entries.get("name")
    if groups == ["model"]:
        system = model_from_id(entries["model"])
    elif groups == ["h"]:
        system = from_hamiltonian(ex.parse(entries["h"]), name)
    else:
        missing = [k for k in "ABCD" if k not in entries]
        if missing:
            raise ModelError(f"matrix definition is missing {', '.join(missing)}")
        system = SystemDef(*(ex.parse(entries[k]) for k in "ABCD"),
                           provenance=Provenance("matrix", name))

    bounds = _floats(entries["bounds"], 4, "bounds") if "bounds" in entries else None
    tol = _floats(entries["tol"], 1, "tol")[0] if "tol" in entries else None
    step = _floats(entries["step"], 1, "step")[0] if "step" in entries else None
    grid = None
    if "grid" in entries:
        try:
            grid = int(entries["grid"])
        except ValueError:
            raise ModelError(f"grid: expected an integer, got {entries['grid']!r}") from None
    return ModelFile(system, bounds, tol, step, grid)


def load_model(spec: str) -> ModelFile:
    """A model id, or the path of a model file when ``spec`` names an existing file."""
    if os.path.isfile(spec):
        with open(spec, encoding="utf-8") as fh:
            return parse_model_file(fh.read())
    return ModelFile(model_from_id(spec))
