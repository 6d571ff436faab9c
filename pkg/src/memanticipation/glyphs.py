"""Bundled 5x9 digit bitmaps (fixture data). ``#`` is ink (black, bit 0)."""
from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 5, 9

_FONT = {
    0: ".###. #...# #...# #..## #.#.# ##..# #...# #...# .###.",
    1: "..#.. .##.. #.#.. ..#.. ..#.. ..#.. ..#.. ..#.. #####",
    2: ".###. #...# ....# ....# ...#. ..#.. .#... #.... #####",
    3: ".###. #...# ....# ....# ..##. ....# ....# #...# .###.",
    4: "...#. ..##. .#.#. #..#. #..#. ##### ...#. ...#. ...#.",
    5: "##### #.... #.... ####. ....# ....# ....# #...# .###.",
    6: ".###. #...# #.... #.... ####. #...# #...# #...# .###.",
    7: "##### ....# ....# ...#. ..#.. ..#.. .#... .#... .#...",
    8: ".###. #...# #...# #...# .###. #...# #...# #...# .###.",
    9: ".###. #...# #...# #...# .#### ....# ....# #...# .###.",
}


def glyph(digit: int) -> np.ndarray:
    """Gray image of shape (9, 5): 0.0 for ink, 1.0 for background."""
    rows = _FONT[int(digit)].split()
    return np.array([[0.0 if c == "#" else 1.0 for c in row] for row in rows])


def all_glyphs() -> dict[int, np.ndarray]:
    return {d: glyph(d) for d in _FONT}
