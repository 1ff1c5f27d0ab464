"""Compression lemma, projection lifts, cnp search, and d-minimal refutation."""

import numpy as np
import pytest

from opsyscone.cones import ConeOracle, TSequence, build_initial_cone
from opsyscone.instances import MatrixModelOracle, sic_search
from opsyscone.projections import (
    SearchBudget,
    cnp_member,
    dmin_refute,
    dmin_sampled_certify,
    lemma_compression_witness,
    projection_lift,
    projection_pad,
    relation_check,
)
from opsyscone.rng import generator
from opsyscone.spaces import build_space


def _random_projection(rng, n, rank):
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    q, _ = np.linalg.qr(a)
    return q @ q.conj().T


def _random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def test_compression_witness_matches_direct_eigencheck():
    agree = 0
    cases = 60
    for k in range(cases):
        rng = generator(k, 0x31)
        n = int(rng.integers(2, 5))
        rank = int(rng.integers(1, n))
        P = _random_projection(rng, n, rank)
        T = _random_hermitian(rng, n)
        verdict = lemma_compression_witness(P, T, 1e-9)
        # direct route: PTP restricted to range(P)
        w, v = np.linalg.eigh(P)
        basis = v[:, w > 0.5]
        direct = np.linalg.eigvalsh(basis.conj().T @ T @ basis)[0]
        if direct >= -1e-9:
            agree += verdict.to_json_dict()["found"]
        else:
            agree += not verdict.to_json_dict()["found"]
    assert agree == cases


def test_compression_witness_t_monotone():
    rng = generator(9, 0x32)
    P = _random_projection(rng, 3, 2)
    T = _random_hermitian(rng, 3)
    res = lemma_compression_witness(P, T, 1e-9)
    if res.to_json_dict()["found"]:
        # the padded matrix stays PSD for any larger t
        bigger = T + (2 * res.t) * (np.eye(3) - P)
        assert np.linalg.eigvalsh(bigger)[0] >= -1e-8


def test_projection_lift_affine_in_t():
    space = build_space("sic", 2)
    x = space.label_element(2).to_level(2)
    p = space.label_element(1)
    l1 = projection_lift(x, p, 1e-6, 3.0)
    l2 = projection_lift(x, p, 1e-6, 5.0)
    pad = projection_pad(space, p, 2)
    assert np.allclose(l2.blocks - l1.blocks, 2.0 * pad.blocks)
    assert l1.n == 4


def test_projection_lift_corners():
    space = build_space("sic", 2)
    x = space.unit().to_level(1)
    p = space.label_element(1)
    lift = projection_lift(x, p, 0.0, 7.0)
    perp = space.unit_coeffs - p.coeffs
    assert np.allclose(lift.blocks[:, 0, 0], space.unit_coeffs + 7.0 * perp)
    assert np.allclose(lift.blocks[:, 1, 1], space.unit_coeffs + 7.0 * p.coeffs)
    assert np.allclose(lift.blocks[:, 0, 1], space.unit_coeffs)


@pytest.fixture(scope="module")
def sic2():
    space = build_space("sic", 2)
    cone = build_initial_cone(space, TSequence.affine(8.07, 1.0), 3)
    instance = sic_search(2, restarts=4, seed=11)
    return space, cone, instance


def test_cnp_row_corner_refutation(sic2):
    space, cone, _ = sic2
    oracle = ConeOracle(cone)
    x = (-1.0 * space.unit()).to_level(1)
    res = cnp_member(oracle, x, space.label_element(1), 1e-6, oracle_1=oracle)
    assert res.is_outside
    assert res.diagnostics["t_independent"]
    assert res.diagnostics["fast_path"] == "row_corner"
    assert res.certificate.validation["ok"]


def test_cnp_concrete_inside(sic2):
    space, _, instance = sic2
    concrete = MatrixModelOracle(space, instance)
    x = space.label_element(2).to_level(1)
    res = cnp_member(concrete, x, space.label_element(1), 1e-6)
    assert res.is_inside
    assert res.certificate.t >= 1.0


def test_cnp_unknown_is_capped(sic2):
    space, cone, _ = sic2
    oracle = ConeOracle(cone)
    x = space.label_element(2).to_level(1)
    res = cnp_member(oracle, x, space.label_element(1), 1e-6, oracle_1=oracle,
                     unknown_patience=2, max_attempts=6)
    # the level-1 initial cone cannot decide this; the budget keeps it honest
    assert res.verdict == "unknown"
    assert res.diagnostics["stopped"] in ("unknown_patience", "attempt_budget",
                                          "grid_exhausted")


def test_relation_yes_concrete(sic2):
    space, _, instance = sic2
    concrete = MatrixModelOracle(space, instance)
    verdict = relation_check(concrete, space.label_element(1),
                             space.label_element(2), space.constant)
    assert verdict.holds == "yes"
    assert verdict.witnesses


def test_relation_no_for_wrong_constant(sic2):
    space, _, instance = sic2
    concrete = MatrixModelOracle(space, instance)
    verdict = relation_check(concrete, space.label_element(1),
                             space.label_element(2), 0.9)
    assert verdict.holds == "no"
    assert verdict.refutation is not None


def _planted_dmin_case(space, concrete, seed, psd):
    """Level d+1 element whose inflated image has a planted sign pattern."""
    rng = generator(seed, 0x33)
    d = space.d
    n = d + 1
    a = rng.standard_normal((n * d, n * d)) + 1j * rng.standard_normal((n * d, n * d))
    m = a @ a.conj().T
    if not psd:
        w, v = np.linalg.eigh(m)
        w[0] = -0.5 * max(w.max(), 1.0)
        m = (v * w) @ v.conj().T
    return concrete.pullback(m)


def test_dmin_refutes_planted_negatives(sic2):
    space, _, instance = sic2
    concrete = MatrixModelOracle(space, instance)
    hits = 0
    for seed in range(12):
        x = _planted_dmin_case(space, concrete, seed, psd=False)
        out = dmin_refute(concrete, x, 1e-8, search=SearchBudget(restarts=16, steps=120, seed=seed))
        if out.to_json_dict().get("refuted"):
            hits += 1
    assert hits >= 11


def test_dmin_no_false_refutation_on_psd(sic2):
    space, _, instance = sic2
    concrete = MatrixModelOracle(space, instance)
    for seed in range(6):
        x = _planted_dmin_case(space, concrete, seed, psd=True)
        out = dmin_refute(concrete, x, 1e-8, search=SearchBudget(restarts=6, steps=40, seed=seed))
        assert not out.to_json_dict().get("refuted")


def test_dmin_sampled_certify_survives_psd(sic2):
    space, _, instance = sic2
    concrete = MatrixModelOracle(space, instance)
    x = _planted_dmin_case(space, concrete, 3, psd=True)
    res = dmin_sampled_certify(concrete, x, 1e-8, samples=40, seed=1)
    assert res.verdict in ("inside", "unknown")
    if res.verdict == "inside":
        assert res.diagnostics.get("samples_survived", 0) >= 40
