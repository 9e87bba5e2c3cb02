import json

import pytest

from polychains.chains import Chain1, Chain2
from polychains.errors import ChainFormatError
from polychains.generators import circle_chain, koch_chain
from polychains.io import dumps, loads, read_chain, write_chain
from polychains.render import chain_svg, raster_csv, raster_svg


def test_format_shape():
    J = Chain1([(0, 0)], [(1, 0.5)], [2.0])
    assert json.loads(dumps(J)) == {"dim": 1, "cells": [{"a": [0.0, 0.0], "b": [1.0, 0.5], "w": 2.0}]}
    K = Chain2([[(0, 0), (1, 0), (0, 1)]], [-1.0])
    assert json.loads(dumps(K)) == {"dim": 2, "cells": [{"p": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], "w": -1.0}]}


def test_file_round_trip(tmp_path):
    J = koch_chain(2)
    write_chain(J, tmp_path / "k.json")
    assert dumps(read_chain(tmp_path / "k.json")) == dumps(J)


def test_empty_chains():
    assert len(loads('{"dim": 1, "cells": []}')) == 0
    assert isinstance(loads('{"dim": 2, "cells": []}'), Chain2)


@pytest.mark.parametrize(
    "text,index,field",
    [
        ('{"dim": 3, "cells": []}', None, "dim"),
        ('{"dim": 1}', None, "cells"),
        ('{"dim": 1, "cells": [{"a": [0, 0], "b": [1, 0], "w": 1}, {"a": [0, 0], "w": 1}]}', 1, "b"),
        ('{"dim": 1, "cells": [{"a": [0, 0], "b": [1], "w": 1}]}', 0, "b"),
        ('{"dim": 1, "cells": [{"a": [0, 0], "b": [1, 0], "w": "x"}]}', 0, "w"),
        ('{"dim": 1, "cells": [{"a": [0, 0], "b": [1, 0], "w": 0}]}', 0, "w"),
        ('{"dim": 1, "cells": [{"a": [0, 0], "b": [0, 0], "w": 1}]}', 0, "b"),
        ('{"dim": 1, "cells": [{"a": [0, 0], "b": [1, 0], "w": 1, "c": 2}]}', 0, "c"),
        ('{"dim": 2, "cells": [{"p": [[0, 0], [1, 0]], "w": 1}]}', 0, "p"),
        ('{"dim": 2, "cells": [{"p": [[0, 0], [1, 0], [0, 1]], "w": 1}, {"p": [[0, 0], [1, 1], [2, 2]], "w": 1}]}', 1, "p"),
        ("not json", None, "<json>"),
    ],
)
def test_validation_names_index_and_field(text, index, field):
    with pytest.raises(ChainFormatError) as exc:
        loads(text)
    assert exc.value.index == index
    assert exc.value.field == field


def test_svg_outputs_are_deterministic():
    J = circle_chain(n=12)
    assert chain_svg(J) == chain_svg(J)
    assert chain_svg(J).count("<line") == 12
    K = Chain2.fan([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert chain_svg(K).count("<polygon") == 2


def test_raster_svg_merges_runs():
    import numpy as np

    grid = np.ones((3, 5))
    grid[1, 2] = np.nan
    svg = raster_svg(grid, (0, 0, 1, 1), width=100)
    # rows 0 and 2 are single runs; row 1 splits into three
    assert svg.count("<rect") == 1 + 2 + 3


def test_raster_csv():
    import numpy as np

    text = raster_csv(np.array([[1.0, np.nan]]), (0, 0, 2, 1))
    assert text.splitlines() == ["x,y,value", "0.5,0.5,1.0", "1.5,0.5,nan"]
