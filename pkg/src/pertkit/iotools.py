"""File formats: JSON matrices, schedules, interaction models, state specs.

Matrix files are ``{"rows": n, "cols": m, "data": [...]}`` with row-major
``data`` whose entries are ``[re, im]`` pairs or bare numbers for real
matrices; a nested list of rows is also accepted.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import MatrixFormatError
from .symdiag import MultisetState, TrilinearVertex, box_grid


def _entry_to_complex(entry, where: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and all(isinstance(x, (int, float)) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise MatrixFormatError(f"bad matrix entry at {where}: {entry!r}")


def _is_entry(x) -> bool:
    if isinstance(x, (int, float)):
        return True
    return (
        isinstance(x, (list, tuple))
        and len(x) == 2
        and all(isinstance(c, (int, float)) for c in x)
    )


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"matrix object needs rows/cols/data: {exc}") from exc
    if rows < 1 or cols < 1 or not isinstance(data, list):
        raise MatrixFormatError("rows/cols must be positive and data a list")
    out = np.empty((rows, cols), dtype=complex)
    if len(data) == rows * cols and all(_is_entry(x) for x in data):
        for k, entry in enumerate(data):
            out[k // cols, k % cols] = _entry_to_complex(entry, f"index {k}")
        return out
    if len(data) == rows and all(
        isinstance(row, list) and len(row) == cols and all(_is_entry(x) for x in row)
        for row in data
    ):
        for r, row in enumerate(data):
            for c, entry in enumerate(row):
                out[r, c] = _entry_to_complex(entry, f"({r},{c})")
        return out
    raise MatrixFormatError(
        f"ragged or malformed data: expected {rows * cols} flat entries or {rows} rows of {cols}"
    )


def load_matrix(path: str) -> np.ndarray:
    """Parse a matrix file; errors carry file and field context."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    try:
        return matrix_from_json(obj)
    except MatrixFormatError as exc:
        raise MatrixFormatError(f"{path}: {exc}") from exc


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def save_matrix(path: str, m) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)


def load_schedule(path: str):
    """Schedule file: ``{"a": "A.json", "b": "B.json", "ramp": "linear"}``.

    Matrix paths are resolved relative to the schedule file.  Returns the
    pair of matrices and the ramp name.
    """
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFormatError(f"cannot read schedule {path}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path))
    try:
        a = load_matrix(os.path.join(base, obj["a"]))
        b = load_matrix(os.path.join(base, obj["b"]))
        ramp = obj.get("ramp", "linear")
    except KeyError as exc:
        raise MatrixFormatError(f"schedule {path}: missing key {exc}") from exc
    return a, b, ramp


def load_model(path: str) -> TrilinearVertex:
    """Interaction model file.

    ``{"species": [{"name": "a", "mass": 1.0}, ...],
       "grid": {"dim": 1, "radius": 2}}`` with the trilinear vertex rule
    and dispersion ``sqrt(m^2 + p^2)``.
    """
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFormatError(f"cannot read model {path}: {exc}") from exc
    try:
        masses = {sp["name"]: float(sp["mass"]) for sp in obj["species"]}
        names = tuple(sp["name"] for sp in obj["species"])
        grid = box_grid(int(obj["grid"]["dim"]), int(obj["grid"]["radius"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixFormatError(f"model {path}: {exc}") from exc
    if len(names) != 3:
        raise MatrixFormatError("the trilinear model needs exactly three species")
    return TrilinearVertex(masses=masses, grid=grid, species=names)


def parse_state(spec: str) -> MultisetState:
    """State literal ``"a:1,b:-1"``; momentum components separated by ';'.

    Example in two dimensions: ``"a:1;0,b:0;1"``.
    """
    particles = []
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            species, momentum = item.split(":")
            p = tuple(int(c) for c in momentum.split(";"))
        except ValueError as exc:
            raise MatrixFormatError(f"bad state item {item!r}: {exc}") from exc
        particles.append((species, p))
    if not particles:
        raise MatrixFormatError("empty state literal")
    return MultisetState.of(*particles)
