"""Chain files.

A 1-chain is stored as ``{"dim": 1, "cells": [{"a": [x, y], "b": [x, y], "w": w}, ...]}``
and a 2-chain as ``{"dim": 2, "cells": [{"p": [[x, y], [x, y], [x, y]], "w": w}, ...]}``.
Floats are written with ``repr`` precision so a write/read cycle is lossless,
and the output text depends only on the chain.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .chains import Chain, Chain1, Chain2
from .errors import ChainError, ChainFormatError


def chain_to_dict(chain: Chain) -> dict:
    if isinstance(chain, Chain1):
        cells = [
            {"a": [float(a[0]), float(a[1])], "b": [float(b[0]), float(b[1])], "w": float(w)}
            for a, b, w in zip(chain.a, chain.b, chain.w)
        ]
        return {"dim": 1, "cells": cells}
    if isinstance(chain, Chain2):
        cells = [
            {"p": [[float(x), float(y)] for x, y in tri], "w": float(w)}
            for tri, w in zip(chain.p, chain.w)
        ]
        return {"dim": 2, "cells": cells}
    raise TypeError(f"cannot serialise {type(chain).__name__}")


def dumps(chain: Chain) -> str:
    return json.dumps(chain_to_dict(chain), separators=(",", ":"), allow_nan=False) + "\n"


def _number(value, index: int, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ChainFormatError(f"cell {index}: field '{name}' must be a number", index, name)
    if not math.isfinite(value):
        raise ChainFormatError(f"cell {index}: field '{name}' is not finite", index, name)
    return float(value)


def _point(value, index: int, name: str) -> list[float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ChainFormatError(f"cell {index}: field '{name}' must be [x, y]", index, name)
    return [_number(v, index, name) for v in value]


def chain_from_dict(data) -> Chain:
    if not isinstance(data, dict):
        raise ChainFormatError("chain file must hold a JSON object", field="<root>")
    dim = data.get("dim")
    if dim not in (1, 2) or isinstance(dim, bool):
        raise ChainFormatError(f"field 'dim' must be 1 or 2, got {dim!r}", field="dim")
    cells = data.get("cells")
    if not isinstance(cells, list):
        raise ChainFormatError("field 'cells' must be a list", field="cells")
    keys = {"a", "b", "w"} if dim == 1 else {"p", "w"}
    parsed = []
    for i, cell in enumerate(cells):
        if not isinstance(cell, dict):
            raise ChainFormatError(f"cell {i} must be an object", i, "cells")
        for k in sorted(keys):
            if k not in cell:
                raise ChainFormatError(f"cell {i}: missing field '{k}'", i, k)
        extra = sorted(set(cell) - keys)
        if extra:
            raise ChainFormatError(f"cell {i}: unknown field '{extra[0]}'", i, extra[0])
        w = _number(cell["w"], i, "w")
        if w == 0:
            raise ChainFormatError(f"cell {i}: field 'w' must be nonzero", i, "w")
        if dim == 1:
            a, b = _point(cell["a"], i, "a"), _point(cell["b"], i, "b")
            if a == b:
                raise ChainFormatError(f"cell {i}: degenerate segment (a == b)", i, "b")
            parsed.append((a, b, w))
        else:
            p = cell["p"]
            if not isinstance(p, list) or len(p) != 3:
                raise ChainFormatError(f"cell {i}: field 'p' must hold three points", i, "p")
            parsed.append(([_point(v, i, "p") for v in p], w))
    try:
        if dim == 1:
            if not parsed:
                return Chain1()
            a, b, w = zip(*parsed)
            return Chain1(np.array(a), np.array(b), np.array(w))
        if not parsed:
            return Chain2()
        p, w = zip(*parsed)
        return Chain2(np.array(p), np.array(w))
    except ChainFormatError:
        raise
    except ChainError as exc:
        field = "p" if dim == 2 else "w"
        raise ChainFormatError(f"invalid chain: {exc}", exc.index, field) from exc


def loads(text: str) -> Chain:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChainFormatError(f"not valid JSON: {exc}", field="<json>") from exc
    return chain_from_dict(data)


def read_chain(path) -> Chain:
    return loads(Path(path).read_text())


def write_chain(chain: Chain, path) -> None:
    Path(path).write_text(dumps(chain))
