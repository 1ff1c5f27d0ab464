"""Gram data, padding thresholds, generator cones, and membership oracles."""

import numpy as np
import pytest

from opsyscone.cones import (
    BudgetExhausted,
    ConeOracle,
    EPS_SCHEDULE,
    ProbeBudget,
    TSequence,
    WorkBudget,
    build_initial_cone,
    gram_matrix,
    lp_member,
    omax_member,
    properness_probe,
    reevaluate_certificate,
    schedule_member,
    t_thresholds,
)
from opsyscone.errors import InvalidDimensionError, InvalidParameterError
from opsyscone.rng import generator
from opsyscone.spaces import HermLevel, VElement, build_space

# independently recomputed from the closed forms (plain math, no package code)
T_STAR = {2: 8.06215118571251, 3: 3.34319324518943, 4: 2.41956923763884}


def test_sic_gram_closed_forms():
    for d in range(2, 7):
        space = build_space("sic", d)
        g = gram_matrix(space)
        lam = 1.0 / (d + 1)
        e = space.unit_coeffs
        p1 = space.label_element(1).coeffs
        p2 = space.label_element(2).coeffs
        assert g.inner(e, e) == pytest.approx(1.0, abs=1e-12)
        assert g.inner(e, p1) == pytest.approx(1.0 / d, abs=1e-12)
        assert g.inner(p1, p1) == pytest.approx(1.0 / d, abs=1e-12)
        assert g.inner(p1, p2) == pytest.approx(lam / d, abs=1e-12)
        assert g.inner(p1, e - p2) == pytest.approx((1 - lam) / d, abs=1e-12)
        assert g.inner(e - p1, e - p1) == pytest.approx(1 - 1.0 / d, abs=1e-12)
        assert g.rank == d * d


def test_mub_gram_closed_forms():
    for d in (2, 3, 5):
        space = build_space("mub", d)
        g = gram_matrix(space)
        e = space.unit_coeffs
        # labels are ordered p_i^x for i = 1..d-1, x = 1..d+1
        same_basis = (space.label_element(2).coeffs, space.label_element(2 + (d + 1)).coeffs)
        cross = (space.label_element(2).coeffs, space.label_element(3).coeffs)
        assert g.inner(e, e) == pytest.approx(1.0, abs=1e-12)
        assert g.inner(e, same_basis[0]) == pytest.approx(1.0 / d, abs=1e-12)
        assert g.inner(*same_basis) == pytest.approx(0.0, abs=1e-12)
        assert g.inner(*cross) == pytest.approx(1.0 / (d * d), abs=1e-12)
        assert g.rank == space.dim


def test_thresholds_match_independent_derivation():
    for d, want in T_STAR.items():
        th = t_thresholds(d)
        assert th.t_star == pytest.approx(want, abs=1e-10)
        assert th.t_star == pytest.approx(max(th.bound1, th.bound2, th.bound3))
        assert th.lam == pytest.approx(1.0 / (d + 1))
    with pytest.raises(InvalidDimensionError):
        t_thresholds(1)


def test_tsequence_rules():
    aff = TSequence.affine(8.07, 1.0)
    assert aff.value(1) == pytest.approx(8.07)
    assert aff.value(4) == pytest.approx(11.07)
    geo = TSequence.geometric(2.0, 2.0)
    assert geo.value(3) == pytest.approx(8.0)
    exp = TSequence.explicit([1.0, 3.0, 7.0])
    assert exp.value(2) == pytest.approx(3.0)
    assert exp.value(5) == pytest.approx(15.0)  # extended by the last gap
    for bad in (lambda: TSequence.affine(0.0, 1.0),
                lambda: TSequence.affine(1.0, 0.0),
                lambda: TSequence.geometric(1.0, 1.0),
                lambda: TSequence.explicit([2.0, 2.0])):
        with pytest.raises(InvalidParameterError):
            bad()
    back = TSequence.from_json_dict(aff.to_json_dict())
    assert back == aff


def test_initial_cone_generator_count():
    space = build_space("sic", 2)
    cone = build_initial_cone(space, TSequence.affine(8.07, 1.0), 3)
    assert len(cone.generators) == 80
    assert len(cone.labels) == 80
    assert cone.level == 1


def test_generator_pairs_nonnegative_at_t_star():
    # positivity of every pairwise inner product is what the thresholds buy
    for d in (2, 3):
        space = build_space("sic", d)
        tseq = TSequence.affine(T_STAR[d], 1.0)
        cone = build_initial_cone(space, tseq, 4)
        g = gram_matrix(space).matrix
        m = np.stack([gen.coeffs for gen in cone.generators])
        pairwise = m @ g @ m.T
        assert float(pairwise.min()) >= -1e-10


def test_generators_dip_negative_below_threshold():
    space = build_space("sic", 2)
    cone = build_initial_cone(space, TSequence.affine(0.01, 1.0), 3)
    g = gram_matrix(space).matrix
    m = np.stack([gen.coeffs for gen in cone.generators])
    assert float((m @ g @ m.T).min()) < -1e-6


@pytest.fixture(scope="module")
def sic2_cone():
    space = build_space("sic", 2)
    return build_initial_cone(space, TSequence.affine(8.07, 1.0), 3)


def test_lp_member_inside_with_recombination(sic2_cone):
    space = sic2_cone.space
    res = lp_member(sic2_cone, space.unit(), 1e-6)
    assert res.is_inside
    assert reevaluate_certificate(sic2_cone, space.unit(), res) <= 1e-7


def test_lp_member_outside_validated(sic2_cone):
    space = sic2_cone.space
    res = lp_member(sic2_cone, -space.unit(), 1e-6)
    assert res.is_outside
    cert = res.certificate
    assert cert.validation["ok"]
    assert cert.validation["min_generator_value"] >= -1e-9
    assert cert.validation["target_value"] <= -1e-7


def test_lp_member_generator_membership(sic2_cone):
    # every generator is trivially inside at any eps
    for gen in sic2_cone.generators[::9]:
        res = lp_member(sic2_cone, gen, 1e-8)
        assert res.is_inside


def test_omax_planted_feasible(sic2_cone):
    rng = generator(0, 0x21)
    n = 3
    idx = rng.choice(len(sic2_cone.generators), size=4, replace=False)
    blocks = np.zeros((sic2_cone.space.dim, n, n), dtype=complex)
    for k in idx:
        y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks += sic2_cone.generators[k].coeffs[:, None, None] * (y @ y.conj().T)
    x = HermLevel(sic2_cone.space, blocks)
    res = omax_member(sic2_cone, x, 1e-6)
    assert res.is_inside
    assert reevaluate_certificate(sic2_cone, x, res) <= 1e-7


def test_omax_negative_corner_outside(sic2_cone):
    space = sic2_cone.space
    x = (-1.0 * space.unit()).to_level(2)
    res = omax_member(sic2_cone, x, 1e-6)
    assert res.is_outside
    assert res.certificate.validation["ok"]


def test_schedule_member_walks_up():
    calls = []

    def query(eps):
        calls.append(eps)
        from opsyscone.cones import MembershipResult
        if eps >= 1e-4:
            return MembershipResult.unknown(eps)
        return MembershipResult.unknown(eps)

    out = schedule_member(query, schedule=EPS_SCHEDULE)
    assert out.verdict == "unknown"
    assert calls == sorted(EPS_SCHEDULE)
    assert out.diagnostics.get("schedule_exhausted")


def test_work_budget_exhaustion(sic2_cone):
    work = WorkBudget(3)
    work.charge(2)
    work.charge(1)
    with pytest.raises(BudgetExhausted):
        work.charge(1)
    # a charged-out oracle degrades level-2 queries, never fabricates verdicts
    x = HermLevel.unit(sic2_cone.space, 4)
    with pytest.raises(BudgetExhausted):
        omax_member(sic2_cone, x, 1e-6, work=WorkBudget(1))


def test_probe_none_found_on_proper_cone(sic2_cone):
    probe = properness_probe(ConeOracle(sic2_cone), sic2_cone.space,
                             budget=ProbeBudget(directions=60, ascent_steps=10, seed=2))
    assert not probe.found
    assert probe.probes_used >= 2 * 60


def test_probe_finds_planted_line(sic2_cone):
    space = sic2_cone.space
    y0 = np.zeros(space.dim)
    y0[0], y0[2] = 0.6, -0.8
    planted = sic2_cone.augmented([y0, -y0])
    probe = properness_probe(ConeOracle(planted), space,
                             budget=ProbeBudget(seed=1))
    assert probe.found
    got = probe.direction.coeffs / np.linalg.norm(probe.direction.coeffs)
    err = min(np.linalg.norm(got - y0), np.linalg.norm(got + y0))
    assert err <= 1e-3
    assert probe.result_plus.is_inside and probe.result_minus.is_inside


def test_probe_candidates_short_circuit(sic2_cone):
    space = sic2_cone.space
    y0 = np.zeros(space.dim)
    y0[1] = 1.0
    y0[3] = -0.5
    planted = sic2_cone.augmented([y0, -y0])
    probe = properness_probe(ConeOracle(planted), space,
                             budget=ProbeBudget(directions=4, ascent_steps=0, seed=0),
                             candidates=planted.generators)
    assert probe.found


def test_cone_oracle_dispatch(sic2_cone):
    oracle = ConeOracle(sic2_cone)
    res1 = oracle(sic2_cone.space.unit(), 1e-6)
    assert res1.is_inside and res1.certificate.__class__.__name__ == "ConeCoeffs"
    res2 = oracle(HermLevel.unit(sic2_cone.space, 2), 1e-6)
    assert res2.is_inside
