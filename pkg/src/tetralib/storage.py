"""Table persistence and deterministic JSON / CSV output."""

import json
import math
import os
from pathlib import Path

import numpy as np

from .cauchy_solver import SolverParams, TetrationTable, table_from_nodes
from .errors import MissingTable, UsageError

TABLE_DIR_ENV = "TETRALIB_TABLE_DIR"


def format_number(x, digits: int = 17) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, f".{digits}g")


def dumps(obj, digits: int = 17) -> str:
    """JSON text with every float written at ``digits`` significant digits.

    NaN and infinities become ``null`` so the output stays valid JSON.
    """
    if isinstance(obj, bool) or obj is None:
        return "true" if obj is True else "false" if obj is False else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(obj, digits) if math.isfinite(obj) else "null"
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], digits)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{dumps(str(k))}: {dumps(v, digits)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v, digits) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def table_to_dict(table: TetrationTable) -> dict:
    p = table.params
    return {
        "base": table.base.b,
        "L": [table.fp.L.real, table.fp.L.imag],
        "A": p.height,
        "N": p.n_nodes,
        "residual": table.final_residual,
        "tol": p.tol,
        "max_iters": p.max_iters,
        "damping": p.damping,
        "tail": p.tail,
        "iterations": table.iterations,
        "update_norm": table.update_norm,
        "nodes": [[y, f.real, f.imag] for y, f in zip(table.y, table.f)],
    }


def save_table(table: TetrationTable, path) -> Path:
    path = Path(path)
    path.write_text(dumps(table_to_dict(table)) + "\n")
    return path


def load_table(path) -> TetrationTable:
    path = Path(path)
    if not path.is_file():
        raise MissingTable(f"table file not found: {path}")
    data = json.loads(path.read_text())
    try:
        params = SolverParams(
            n_nodes=int(data["N"]),
            height=float(data["A"]),
            tol=float(data.get("tol", 1e-10)),
            max_iters=int(data.get("max_iters", 5000)),
            damping=float(data.get("damping", 0.5)),
            tail=data.get("tail", "asymptotic"),
        )
        nodes = np.array(data["nodes"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed table file {path}: {exc}") from None
    residual = data.get("residual")
    return table_from_nodes(
        float(data["base"]),
        nodes[:, 0],
        nodes[:, 1] + 1j * nodes[:, 2],
        params,
        final_residual=float("nan") if residual is None else float(residual),
        iterations=int(data.get("iterations", 0)),
        update_norm=float(data.get("update_norm") or float("nan")),
    )


def base_token(b) -> str:
    """File-name token for a base: ``e`` for Euler's number, else the shortest decimal."""
    b = float(b)
    if b == math.e:
        return "e"
    return str(int(b)) if b.is_integer() else repr(b)


def table_dir() -> Path:
    return Path(os.environ.get(TABLE_DIR_ENV, "."))


def default_table_path(b) -> Path:
    return table_dir() / f"table_{base_token(b)}.json"


def write_csv(path, header, rows, digits: int = 17) -> Path:
    """Comma separated, header first; floats at ``digits`` significant digits, NaN as ``nan``."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_number(v, digits) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path
