import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from memanticipation import glyphs, pgm
from memanticipation.signals import FrameSequence


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))), st.booleans())
def test_round_trip(tmp_path_factory, raw, binary):
    path = tmp_path_factory.mktemp("pgm") / "x.pgm"
    pgm.write_pgm(path, raw / 255.0, binary=binary)
    np.testing.assert_array_equal(np.rint(pgm.read_pgm(path) * 255), raw)


def test_ascii_with_comments(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_text("P2\n# made by hand\n3 2\n# max\n255\n0 128 255\n255 0 0\n")
    img = pgm.read_pgm(p)
    assert img.shape == (2, 3)
    assert img[0, 2] == 1.0 and img[0, 1] == pytest.approx(128 / 255)


def test_sixteen_bit(tmp_path):
    p = tmp_path / "w.pgm"
    pgm.write_pgm(p, np.array([[0.0, 0.5, 1.0]]), maxval=65535)
    np.testing.assert_allclose(pgm.read_pgm(p), [[0.0, 0.5, 1.0]], atol=1e-5)


def test_glyph_layout(tmp_path):
    p = tmp_path / "g.pgm"
    pgm.write_pgm(p, glyphs.glyph(1))
    data = p.read_bytes()
    assert data.startswith(b"P5\n5 9\n255\n")
    assert len(data) == len(b"P5\n5 9\n255\n") + 45


@pytest.mark.parametrize("content", [b"P6\n1 1\n255\n\x00", b"P5\n2 2\n255\n\x00", b"P2\n1 1\n0\n0"])
def test_rejects_bad_files(tmp_path, content):
    p = tmp_path / "bad.pgm"
    p.write_bytes(content)
    with pytest.raises(pgm.PGMError):
        pgm.read_pgm(p)


def test_manifest_round_trip(tmp_path):
    frames = FrameSequence(np.stack([glyphs.glyph(2), glyphs.glyph(5)]), (1e-3, 2e-3))
    pgm.write_manifest(tmp_path / "seq" / "m.txt", frames)
    back = pgm.read_manifest(tmp_path / "seq" / "m.txt")
    assert back.slot_times == frames.slot_times
    np.testing.assert_array_equal(back.frames, frames.frames)


def test_manifest_errors(tmp_path):
    pgm.write_pgm(tmp_path / "a.pgm", np.zeros((2, 2)))
    pgm.write_pgm(tmp_path / "b.pgm", np.zeros((3, 2)))
    (tmp_path / "m.txt").write_text("0.0, a.pgm\n1.0, b.pgm\n")
    with pytest.raises(ValueError):
        pgm.read_manifest(tmp_path / "m.txt")
    (tmp_path / "e.txt").write_text("# nothing\n")
    with pytest.raises(ValueError):
        pgm.read_manifest(tmp_path / "e.txt")


def test_glyphs_are_binary_and_distinct():
    g = glyphs.all_glyphs()
    assert sorted(g) == list(range(10))
    for img in g.values():
        assert img.shape == (9, 5) and set(np.unique(img)) <= {0.0, 1.0}
    flat = {img.tobytes() for img in g.values()}
    assert len(flat) == 10
