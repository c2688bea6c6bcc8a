"""JSON and CSV serialization.

Reals are written with 17 significant digits so every float64 survives a
round trip bit-for-bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .game import AgentPartition, GameClass, PolymatrixGame


class FormatError(ValueError):
    """Malformed game file."""


def format_real(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value!r}")
    return f"{value:.16e}"


def dumps(obj: Any, indent: int = 2) -> str:
    """``json.dumps`` with fixed-precision floats and numpy support."""
    return "".join(_encode(obj, indent, 0)) + "\n"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None or isinstance(obj, (bool, np.bool_)):
        yield json.dumps(None if obj is None else bool(obj))
    elif isinstance(obj, (int, np.integer)):
        yield str(int(obj))
    elif isinstance(obj, (float, np.floating)):
        yield format_real(obj)
    elif isinstance(obj, str):
        yield json.dumps(obj)
    elif isinstance(obj, dict):
        if not obj:
            yield "{}"
            return
        yield "{\n"
        for n, (key, val) in enumerate(obj.items()):
            yield pad + json.dumps(str(key)) + ": "
            yield from _encode(val, indent, level + 1)
            yield ",\n" if n < len(obj) - 1 else "\n"
        yield end + "}"
    elif isinstance(obj, (list, tuple)):
        if not obj:
            yield "[]"
        elif all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            yield "[" + ", ".join("".join(_encode(v, indent, level)) for v in obj) + "]"
        else:
            yield "[\n"
            for n, val in enumerate(obj):
                yield pad
                yield from _encode(val, indent, level + 1)
                yield ",\n" if n < len(obj) - 1 else "\n"
            yield end + "]"
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def game_to_dict(game: PolymatrixGame) -> dict:
    return {
        "dims": list(game.partition.dims),
        "class": game.game_class.value,
        "blocks": [
            {
                "i": i,
                "j": j,
                "rows": int(payoff.shape[0]),
                "cols": int(payoff.shape[1]),
                "data": [float(v) for v in payoff.ravel()],
            }
            for (i, j), payoff in sorted(game.blocks.items())
        ],
        "costs": [float(v) for v in game.costs],
    }


def game_from_dict(data: dict) -> PolymatrixGame:
    try:
        part = AgentPartition(tuple(int(k) for k in data["dims"]))
        game_class = GameClass(data["class"])
        blocks = {}
        for entry in data["blocks"]:
            i, j = int(entry["i"]), int(entry["j"])
            rows, cols = int(entry["rows"]), int(entry["cols"])
            values = np.asarray(entry["data"], dtype=float)
            if values.size != rows * cols:
                raise FormatError(f"block ({i},{j}) has {values.size} values, expected {rows * cols}")
            if (i, j) in blocks:
                raise FormatError(f"duplicate block ({i},{j})")
            blocks[(i, j)] = values.reshape(rows, cols)
        costs = np.asarray(data.get("costs", np.zeros(part.K)), dtype=float)
        return PolymatrixGame(part, blocks, costs, game_class)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"invalid game: {exc}") from exc


def dump_game(game: PolymatrixGame) -> str:
    return dumps(game_to_dict(game))


def load_game(source: str | Path) -> PolymatrixGame:
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise FormatError(str(exc)) from exc
    return loads_game(text)


def loads_game(text: str) -> PolymatrixGame:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("game file must contain a JSON object")
    return game_from_dict(data)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value
