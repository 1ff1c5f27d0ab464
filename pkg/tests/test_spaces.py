"""Coordinate spaces, elements, and level embeddings."""

import numpy as np
import pytest

from opsyscone.errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidGeneratorError,
    InvalidParameterError,
    NumericInputError,
)
from opsyscone.spaces import (
    HermLevel,
    VElement,
    build_space,
    compress,
    element_from_json,
    hermitize,
)


def test_sic_space_shape():
    space = build_space("sic", 3)
    assert space.kind == "sic"
    assert space.d == 3
    assert space.dim == 9
    assert space.n_labels == 9
    assert space.constant == pytest.approx(1.0 / 4.0)
    # unit is the normalized sum of all labels
    total = sum(space.label_element(k).coeffs for k in range(1, 10))
    assert np.allclose(space.unit_coeffs, total / 3.0)


def test_mub_space_shape():
    space = build_space("mub", 3)
    assert space.dim == 1 + (3 + 1) * (3 - 1)
    assert space.constant == pytest.approx(1.0 / 3.0)
    # first coordinate is the unit itself
    assert np.allclose(space.unit_coeffs[0], 1.0)


def test_bad_dimensions_rejected():
    with pytest.raises(InvalidDimensionError):
        build_space("sic", 1)
    with pytest.raises(InvalidDimensionError):
        build_space("sic", 0)
    # abstract MUB coordinates exist for composite d; only instance
    # generation is prime-restricted
    assert build_space("mub", 4).dim == 1 + 5 * 3
    with pytest.raises(InvalidParameterError):
        build_space("nope", 2)


def test_label_index_bounds():
    space = build_space("sic", 2)
    with pytest.raises(InvalidGeneratorError):
        space.label_element(0)
    with pytest.raises(InvalidGeneratorError):
        space.label_element(5)


def test_velement_arithmetic():
    space = build_space("sic", 2)
    p1 = space.label_element(1)
    p2 = space.label_element(2)
    y = 2.0 * p1 - p2
    assert y.coeffs[0] == pytest.approx(2.0)
    assert y.coeffs[1] == pytest.approx(-1.0)
    assert (-y).coeffs[0] == pytest.approx(-2.0)
    assert (p1 + p2).norm() == pytest.approx(np.sqrt(2.0))


def test_velement_wrong_length():
    space = build_space("sic", 2)
    with pytest.raises(DimensionMismatchError):
        VElement(space, np.ones(3))
    with pytest.raises(NumericInputError):
        VElement(space, [np.nan, 0, 0, 0])


def test_mixed_space_arithmetic_rejected():
    a = build_space("sic", 2).unit()
    b = build_space("sic", 3).unit()
    with pytest.raises(DimensionMismatchError):
        a + b


def test_level_embedding_corner():
    space = build_space("sic", 2)
    x = space.label_element(1)
    lifted = x.to_level(3)
    assert lifted.n == 3
    assert np.allclose(lifted.blocks[:, 0, 0], x.coeffs)
    assert np.allclose(lifted.blocks[:, 1:, :], 0)
    back = x.to_level(1).to_velement()
    assert np.allclose(back.coeffs, x.coeffs)


def test_hermlevel_validation():
    space = build_space("sic", 2)
    with pytest.raises(DimensionMismatchError):
        HermLevel(space, np.zeros((3, 2, 2)))
    with pytest.raises(DimensionMismatchError):
        HermLevel(space, np.zeros((4, 2, 3)))
    blocks = np.zeros((4, 2, 2), dtype=complex)
    blocks[0] = [[1.0, 1j], [-1j, 0.0]]
    lvl = HermLevel(space, blocks)
    assert np.allclose(lvl.blocks[0], lvl.blocks[0].conj().T)


def test_hermitize_symmetrizes():
    a = np.array([[[1.0, 2.0], [0.0, 3.0]]], dtype=complex)
    h = hermitize(a)
    assert np.allclose(h[0], h[0].conj().T)
    # upper triangle is the source of truth, diagonal forced real
    assert h[0, 0, 1] == pytest.approx(2.0)
    assert h[0, 1, 0] == pytest.approx(2.0)
    assert np.allclose(np.diagonal(h[0]).real, [1.0, 3.0])


def test_pad_grows_level():
    space = build_space("sic", 2)
    x = space.unit().to_level(2)
    y = x.pad(4)
    assert y.n == 4
    assert np.allclose(y.blocks[:, :2, :2], x.blocks)
    assert np.allclose(y.blocks[:, 2:, :], 0)
    with pytest.raises(Exception):
        y.pad(2)


def test_unit_level_element():
    space = build_space("sic", 2)
    u = HermLevel.unit(space, 3)
    assert u.n == 3
    assert np.allclose(u.blocks[:, 0, 0], space.unit_coeffs)
    assert np.allclose(u.blocks[:, 0, 1], 0)


def test_compress_to_scalar():
    space = build_space("sic", 2)
    x = space.label_element(2).to_level(2)
    alpha = np.array([[1.0], [0.0]], dtype=complex)  # pick out the (1,1) corner
    y = compress(x, alpha)
    assert isinstance(y, HermLevel) and y.n == 1
    assert np.allclose(y.blocks[:, 0, 0], space.label_element(2).coeffs)


def test_element_json_round_trip():
    space = build_space("mub", 3)
    x = space.label_element(4) - 0.25 * space.unit()
    back = element_from_json(x.to_json_dict())
    assert isinstance(back, VElement)
    assert np.allclose(back.coeffs, x.coeffs)

    lvl = x.to_level(2)
    lvl_back = element_from_json(lvl.to_json_dict(), space)
    assert lvl_back.n == 2
    assert np.allclose(lvl_back.blocks, lvl.blocks)
