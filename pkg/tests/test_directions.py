import math

import numpy as np
import pytest

from footinterface.directions import (ALL_LABELS, AXIS_PAIRS, DIAGONAL, DIAGONAL_ORDER, SINGLE, SINGLE_ORDER,
                                      direction_endpoint, direction_vector, is_diagonal)


class TestLabels:
    def test_counts(self):
        assert len(SINGLE_ORDER) == 8 and len(DIAGONAL_ORDER) == 12
        assert len(set(ALL_LABELS)) == 20

    def test_axis_pairs_cover_singles(self):
        assert sorted(l for pair in AXIS_PAIRS.values() for l in pair) == sorted(SINGLE)
        for axis, (pos, neg) in AXIS_PAIRS.items():
            assert SINGLE[pos] == (axis, 1) and SINGLE[neg] == (axis, -1)

    def test_diagonals_use_two_axes(self):
        for first, second in DIAGONAL.values():
            assert SINGLE[first][0] != SINGLE[second][0]

    def test_yaw_never_in_a_diagonal(self):
        assert all("LT" not in pair and "RT" not in pair for pair in DIAGONAL.values())


class TestVectors:
    @pytest.mark.parametrize("label", ALL_LABELS)
    def test_unit(self, label):
        assert np.linalg.norm(direction_vector(label)) == pytest.approx(1.0)

    def test_lf(self):
        assert direction_vector("LF") == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])
        assert direction_endpoint("LF") == pytest.approx([-1, 1, 0, 0])
        assert is_diagonal("LF") and not is_diagonal("F")

    def test_unknown(self):
        with pytest.raises(ValueError, match="UP"):
            direction_vector("UP")
