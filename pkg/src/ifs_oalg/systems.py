"""Built-in systems and the JSON system-file format."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .errors import IFSError, SpecParseError
from .exact import format_rational
from .ifs import AffineContraction, IFSystem
from .piecewise import PiecewiseAffineMap, Piece

F = Fraction


def _scalar(a, b) -> AffineContraction:
    return AffineContraction(((F(a),),), (F(b),))


def _interval_piece(lo, hi, slope, shift) -> Piece:
    return Piece(lower=(F(lo),), upper=(F(hi),), matrix=((F(slope),),), offset=(F(shift),))


def cantor3() -> IFSystem:
    return IFSystem(
        (_scalar(F(1, 3), 0), _scalar(F(1, 3), F(2, 3))),
        name="CANTOR3",
        left_inverse=PiecewiseAffineMap([
            _interval_piece(0, F(1, 3), 3, 0),
            _interval_piece(F(2, 3), 1, 3, -2),
        ]),
    )


def halves() -> IFSystem:
    # doubling map; the [1/2, 1] piece is listed first so that 1/2 -> 0
    return IFSystem(
        (_scalar(F(1, 2), 0), _scalar(F(1, 2), F(1, 2))),
        name="HALVES",
        left_inverse=PiecewiseAffineMap([
            _interval_piece(F(1, 2), 1, 2, -1),
            _interval_piece(0, F(1, 2), 2, 0),
        ]),
    )


def tentinv() -> IFSystem:
    return IFSystem(
        (_scalar(F(1, 2), 0), _scalar(F(-1, 2), 1)),
        name="TENTINV",
        left_inverse=PiecewiseAffineMap([
            _interval_piece(0, F(1, 2), 2, 0),
            _interval_piece(F(1, 2), 1, -2, 2),
        ]),
    )


SIERP_VERTICES = ((F(0), F(0)), (F(1), F(0)), (F(1, 2), F(1)))


def sierp() -> IFSystem:
    half = ((F(1, 2), F(0)), (F(0), F(1, 2)))
    return IFSystem(
        tuple(AffineContraction(half, (p[0] / 2, p[1] / 2)) for p in SIERP_VERTICES),
        name="SIERP",
    )


BUILTINS = {"CANTOR3": cantor3, "HALVES": halves, "TENTINV": tentinv, "SIERP": sierp}


def builtin(name: str) -> IFSystem:
    try:
        return BUILTINS[name.upper()]()
    except KeyError:
        raise SpecParseError(f"unknown built-in system {name!r}; choose from {sorted(BUILTINS)}") from None


def system_from_json(data: dict, name: str = "") -> IFSystem:
    try:
        maps = tuple(AffineContraction(m["matrix"], m["offset"]) for m in data["maps"])
        dim = data.get("dimension")
        if dim is not None and any(g.dimension != dim for g in maps):
            raise SpecParseError(f"declared dimension {dim} does not match the maps")
        li = data.get("left_inverse")
        left = PiecewiseAffineMap.from_json(li) if li else None
        return IFSystem(maps, name=data.get("name", name), left_inverse=left)
    except SpecParseError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError, IFSError) as exc:
        raise SpecParseError(f"invalid IFS spec: {exc}") from exc


def system_to_json(sys: IFSystem) -> dict:
    out = {
        "dimension": sys.dimension,
        "maps": [{"matrix": [[format_rational(v) for v in row] for row in g.matrix],
                  "offset": [format_rational(v) for v in g.offset]} for g in sys.maps],
    }
    if sys.left_inverse is not None:
        out["left_inverse"] = sys.left_inverse.to_json()
    return out


def load_system(ref: str) -> IFSystem:
    """A built-in name or a path to a JSON spec file."""
    if ref.upper() in BUILTINS:
        return builtin(ref)
    path = Path(ref)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise SpecParseError(f"cannot read {ref}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{ref}: malformed JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise SpecParseError(f"{ref}: top level must be an object")
    return system_from_json(data, name=path.stem)
