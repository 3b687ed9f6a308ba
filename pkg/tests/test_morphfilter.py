import numpy as np
import pytest

from vesselmat import morphfilter as mf
from vesselmat.errors import ConfigError

import oracles


def _offsets(se):
    return set(se.offsets)


def test_linear_se_vertical_column():
    se = mf.linear_se(21, 90.0)
    assert _offsets(se) == {(dy, 0) for dy in range(-10, 11)}
    assert len(se.offsets) == 21


def test_linear_se_15_degrees_matches_integer_oracle():
    se = mf.linear_se(21, 15.0)
    assert _offsets(se) == oracles.line_offsets(21, 15.0)
    # endpoints at (+-round(10 cos15), -+round(10 sin15)) = (+-10, -+3)
    assert (-3, 10) in _offsets(se) and (3, -10) in _offsets(se)
    assert len(se.offsets) == 21


@pytest.mark.parametrize("angle", [0.0, 30.0, 45.0, 77.5, 120.0, 165.0])
def test_linear_se_matches_integer_oracle(angle):
    se = mf.linear_se(21, angle)
    assert _offsets(se) == oracles.line_offsets(21, angle)


def test_linear_se_degenerate_length():
    for angle in (0.0, 33.0, 90.0):
        assert _offsets(mf.linear_se(1, angle)) == {(0, 0)}


def test_linear_se_symmetric_and_connected(rng):
    for _ in range(20):
        angle = rng.uniform(0, 180)
        length = int(rng.integers(2, 40))
        offs = list(mf.linear_se(length, angle).offsets)
        assert (0, 0) in offs
        assert set(offs) == {(-dy, -dx) for dy, dx in offs}  # symmetric
        span_y = max(abs(dy) for dy, _ in offs)
        span_x = max(abs(dx) for _, dx in offs)
        key = (lambda o: o[1]) if span_x >= span_y else (lambda o: o[0])
        chain = sorted(offs, key=key)
        for a, b in zip(chain[:-1], chain[1:]):  # 8-connected walk
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1


def test_default_angles():
    assert mf.DEFAULT_ANGLES == tuple(float(a) for a in range(15, 180, 15))
    assert len(mf.DEFAULT_ANGLES) == 11
    assert mf.default_angles(include_horizontal=True)[0] == 0.0
    assert len(mf.default_angles(include_horizontal=True)) == 12


def test_flat_invariance():
    img = np.full((12, 12), 0.37)
    se = mf.linear_se(21, 45.0)
    for op in (mf.erode, mf.dilate, mf.opening):
        assert np.array_equal(op(img, se), img)


def test_single_pixel_removed_by_opening():
    img = np.zeros((30, 30))
    img[15, 15] = 1.0
    out = mf.opening(img, mf.linear_se(21, 30.0))
    assert (out == 0.0).all()


def test_erode_dilate_open_match_oracle(rng):
    se = mf.linear_se(3, 0.0)  # 3-pixel horizontal line
    for _ in range(5):
        img = rng.random((8, 8))
        offs = list(se.offsets)
        assert np.array_equal(mf.erode(img, se), oracles.gray_erode(img, offs))
        assert np.array_equal(mf.dilate(img, se), oracles.gray_dilate(img, offs))
        assert np.array_equal(mf.opening(img, se), oracles.gray_open(img, offs))


def test_tophat_constant_is_zero():
    img = np.full((15, 15), 0.6)
    assert (mf.tophat_directional(img, 75.0) == 0.0).all()


def test_tophat_dark_line_bright_under_crossing_se():
    # dark vertical 1-px line on bright background, probed horizontally
    img = np.full((25, 25), 0.8)
    img[:, 12] = 0.2
    th = mf.tophat_directional(img, 0.0)
    assert np.array_equal(th, oracles.tophat(img, oracles.line_offsets(21, 0.0)))
    assert th[:, 12].min() > 0.5
    off_line = np.delete(th, 12, axis=1)
    assert off_line.max() < 1e-12


def test_tophat_dark_line_invisible_to_parallel_se():
    img = np.full((25, 25), 0.8)
    img[:, 12] = 0.2
    th = mf.tophat_directional(img, 90.0)
    assert np.array_equal(th, oracles.tophat(img, oracles.line_offsets(21, 90.0)))
    assert np.abs(th[:, 12]).max() < 1e-12  # line longer than the SE: no response


def test_tophat_nonnegative(rng):
    for _ in range(10):
        img = rng.random((16, 16))
        angle = float(rng.uniform(0, 180))
        assert mf.tophat_directional(img, angle).min() >= 0.0


def test_morph_reconstructed_constant_zero():
    img = np.full((20, 20), 0.42)
    assert (mf.morph_reconstructed(img) == 0.0).all()


def test_morph_reconstructed_empty_angles():
    with pytest.raises(ConfigError):
        mf.morph_reconstructed(np.zeros((5, 5)), angles=())


def test_morph_reconstructed_plus_sign_matches_oracle():
    img = np.full((31, 31), 0.9)
    img[15, 5:26] = 0.2
    img[5:26, 15] = 0.2
    got = mf.morph_reconstructed(img, normalize=False)
    want = np.zeros_like(img)
    for angle in mf.DEFAULT_ANGLES:
        want += oracles.tophat(img, oracles.line_offsets(21, angle))
    assert np.max(np.abs(got - want)) <= 0.01 * max(want.max(), 1e-12)
    norm = mf.morph_reconstructed(img)
    # both arms respond strongly (away from the intersection)
    assert norm[15, 8] > 0.5 and norm[8, 15] > 0.5
    assert norm.min() >= 0.0 and norm.max() == 1.0


def test_morph_reconstructed_shift_invariant_before_complement():
    rng = np.random.default_rng(7)
    # dyadic grid values keep every subtraction exact, so the invariance is
    # bitwise rather than approximate
    img = rng.integers(0, 33, (16, 16)) / 64.0
    a = mf.morph_reconstructed(img, normalize=False)
    b = mf.morph_reconstructed(img + 0.25, normalize=False)
    assert np.array_equal(a, b)  # top-hat removes additive constants


def test_opening_antiextensive_idempotent_quick(rng):
    se = mf.linear_se(21, 105.0)
    for _ in range(10):
        img = rng.random((10, 10))
        opened = mf.opening(img, se)
        assert (opened <= img).all()
        assert np.array_equal(mf.opening(opened, se), opened)
