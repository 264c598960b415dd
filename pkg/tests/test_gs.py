import random

import pytest

from cosetope.arith import Mat2
from cosetope.errors import PreconditionError
from cosetope.groupcore import (
    SdElement,
    brute_force_product,
    product_member,
    sd_inv,
    sd_mul,
    subgroup_from_elements,
)
from cosetope.gs import (
    _h_prime_image_mod,
    gs_build,
    gs_hk_member,
    gs_hk_witness,
    gs_intersection,
    gs_wz_failure,
    hk_member_sd,
)
from cosetope.budgets import active_budgets
from cosetope.modular import (
    ModularWord,
    congruence_rep,
    is_congruence,
    low_index_reps,
    rep_contains,
    word_eval,
)
from cosetope.profinite import GroupWord, QuotientSpec, project, quotient_context


def minimal_noncongruence():
    return next(r for r in low_index_reps(7) if not is_congruence(r))


def random_groupword(rng, max_len=8, bound=4):
    a = Mat2.ambient(*(rng.randrange(-bound, bound + 1) for _ in range(4)))
    w = ModularWord.of(*[rng.choice((1, -1, 2, -2)) for _ in range(rng.randrange(0, max_len))])
    return GroupWord(a, w)


# ---------------------------------------------------------------------------
# instance construction


def test_build_sizes_at_level_two():
    inst = gs_build(QuotientSpec.make(2))
    assert len(inst.im_h) == 6
    assert len(inst.im_k) == 6


def test_conjugate_image_has_offset_form():
    for m in (2, 3):
        inst = gs_build(QuotientSpec.make(m))
        ident = Mat2.identity(m)
        for x in inst.im_k:
            assert x.a == ident - x.h


def test_conjugate_image_equals_closure_of_conjugated_generators():
    from cosetope.groupcore import subgroup_closure

    for m in (2, 3):
        inst = gs_build(QuotientSpec.make(m))
        closure = subgroup_closure(inst.ctx, inst.im_k.generators)
        assert closure.as_set() == inst.im_k.as_set()


def test_conjugator_has_additive_order_m():
    for m in (2, 3, 5):
        inst = gs_build(QuotientSpec.make(m))
        power = inst.i_elt
        for _ in range(m - 1):
            power = sd_mul(power, inst.i_elt)
        assert power == inst.ctx.identity
    inst = gs_build(QuotientSpec.make(5))
    sq = sd_mul(inst.i_elt, inst.i_elt)
    assert sq.a == Mat2.scalar(2, 5)
    assert sq.h == Mat2.identity(5)


# ---------------------------------------------------------------------------
# trivial intersection


def test_intersection_trivial_exhaustive_small_levels():
    for m in (2, 3):
        inst = gs_build(QuotientSpec.make(m))
        meet = gs_intersection(inst)
        assert len(meet) == 1
        # full-context filter oracle
        full = inst.ctx.enumerate()
        brute = [x for x in full.elements if x in inst.im_h and x in inst.im_k]
        assert brute == [inst.ctx.identity]


def test_intersection_trivial_membership_based_up_to_eight():
    for m in range(4, 9):
        inst = gs_build(QuotientSpec.make(m))
        assert len(gs_intersection(inst)) == 1


def test_identity_matrix_stabilizer_is_trivial():
    from cosetope.groupcore import sl2_context

    for m in range(2, 9):
        full = sl2_context(m).enumerate()
        stab = [h for h in full.elements if h * Mat2.identity(m) == Mat2.identity(m)]
        assert stab == [Mat2.identity(m)]


# ---------------------------------------------------------------------------
# determinant criterion


def test_det_criterion_matches_product_member_exhaustively_level_two():
    inst = gs_build(QuotientSpec.make(2))
    full = inst.ctx.enumerate()
    for g in full.elements:
        direct = product_member(inst.ctx, g, inst.im_h, inst.im_k)
        assert direct == hk_member_sd(g)


def test_det_criterion_exhaustive_m4_and_sampled_above():
    inst = gs_build(QuotientSpec.make(4))
    full = inst.ctx.enumerate()
    assert len(full) == 12288
    for g in full.elements:
        assert product_member(inst.ctx, g, inst.im_h, inst.im_k) == hk_member_sd(g)
    rng = random.Random(44)
    from cosetope.groupcore import sl2_context

    for m in (5, 6, 7, 8):
        inst = gs_build(QuotientSpec.make(m))
        sl2 = sl2_context(m).enumerate()
        for _ in range(40):
            a = Mat2.of_mod(*(rng.randrange(m) for _ in range(4)), m)
            g = SdElement(a, rng.choice(sl2.elements), None)
            assert product_member(inst.ctx, g, inst.im_h, inst.im_k) == hk_member_sd(g)


def test_hk_member_frozen_example():
    g = GroupWord.of_a(Mat2.scalar(2))
    # det(2I + I) = 9: residue 1 at level 2 (member), residue 0 at level 3
    assert gs_hk_member(g, 2) is True
    assert gs_hk_member(g, 3) is False


def test_hk_member_identity():
    assert gs_hk_member(GroupWord.identity(), 2)
    assert gs_hk_member(GroupWord.identity(), 7)


def test_hk_member_every_level_when_translated_det_is_one():
    rng = random.Random(41)
    found = 0
    while found < 10:
        w = ModularWord.of(*[rng.choice((1, -1, 2, -2)) for _ in range(rng.randrange(0, 8))])
        h = word_eval(w)
        u = word_eval(ModularWord.of(*[rng.choice((1, -1, 2, -2)) for _ in range(rng.randrange(0, 8))]))
        g = GroupWord(u - h, w)  # translated part is u, determinant 1
        for m in range(2, 9):
            assert gs_hk_member(g, m)
        found += 1


def test_hk_witness_frozen_examples():
    g = GroupWord.of_a(Mat2.scalar(2))
    cert = gs_hk_witness(g)
    assert cert.spec.m == 3
    assert cert.transcript["det"] == 9
    # a + I = S + I has determinant 2, so every level >= 2 certifies
    g2 = GroupWord.of_a(Mat2.ambient(0, -1, 1, 0))
    cert2 = gs_hk_witness(g2)
    assert cert2.spec.m == 2
    assert gs_hk_witness(GroupWord.identity()) is None


def test_hk_witness_replays_and_respects_bound():
    rng = random.Random(42)
    checked = 0
    while checked < 60:
        g = random_groupword(rng)
        det = (g.a + word_eval(g.w)).det()
        cert = gs_hk_witness(g)
        if det == 1:
            assert cert is None
            continue
        assert cert is not None
        m = cert.spec.m
        assert 2 <= m <= abs(det - 1) + 1
        assert gs_hk_member(g, m) is False
        if m <= 5:
            inst = gs_build(QuotientSpec.make(m))
            assert not product_member(inst.ctx, project(g, cert.spec), inst.im_h, inst.im_k)
        checked += 1


# ---------------------------------------------------------------------------
# orbit identities


def test_orbit_of_identity_equals_matrix_image():
    budgets = active_budgets()
    for rep in (congruence_rep(2), minimal_noncongruence()):
        for m in (2, 3, 4):
            image = _h_prime_image_mod(rep, m, budgets)
            spec = QuotientSpec.make(m)
            ctx = quotient_context(spec)
            i_elt = SdElement(Mat2.identity(m), Mat2.identity(m), None)
            orbit = set()
            for u in image.elements:
                h_elt = SdElement(Mat2.zero(m), u, None)
                conj = sd_mul(sd_mul(h_elt, i_elt), sd_inv(h_elt))
                assert conj.h == Mat2.identity(m)
                orbit.add(conj.a)
            assert orbit == set(image.elements)


def test_double_coset_with_conjugator_meets_additive_part_in_orbit():
    budgets = active_budgets()
    rep = congruence_rep(2)
    for m in (2, 3):
        spec = QuotientSpec.make(m)
        inst = gs_build(spec, budgets)
        image = _h_prime_image_mod(rep, m, budgets)
        im_hp = subgroup_from_elements(
            SdElement(Mat2.zero(m), u, None) for u in image.elements
        )
        i_elt = SdElement(Mat2.identity(m), Mat2.identity(m), None)
        hp_i = brute_force_product(inst.ctx, im_hp.elements, (i_elt,))
        hp_i_h = brute_force_product(inst.ctx, hp_i, inst.im_h.elements)
        additive = {x.a for x in hp_i_h if x.h == Mat2.identity(m)}
        assert additive == set(image.elements)


def test_reduced_membership_equals_double_coset_membership():
    budgets = active_budgets()
    rep = minimal_noncongruence()
    rng = random.Random(43)
    for m in (2, 3):
        spec = QuotientSpec.make(m)
        ctx = quotient_context(spec)
        inst = gs_build(spec, budgets)
        image = _h_prime_image_mod(rep, m, budgets)
        im_hp = subgroup_from_elements(
            SdElement(Mat2.zero(m), u, None) for u in image.elements
        )
        for _ in range(40):
            x = Mat2.ambient(*(rng.randrange(-6, 7) for _ in range(4)))
            g = GroupWord.of_a(x - Mat2.identity())
            direct = product_member(ctx, project(g, spec), im_hp, inst.im_k)
            assert direct == (x.reduce(m) in image)


# ---------------------------------------------------------------------------
# non-separability evidence


def test_wz_failure_rejects_congruence_rep():
    with pytest.raises(PreconditionError):
        gs_wz_failure(congruence_rep(2), 4)


def test_wz_failure_evidence_is_coherent():
    rep = minimal_noncongruence()
    evidence = gs_wz_failure(rep, 12, witness_level=12)
    assert evidence.status == "evidence"
    assert evidence.witness is not None
    assert not rep_contains(evidence.rep, evidence.witness.word)
    assert evidence.g.a == evidence.witness.x - Mat2.identity()
    assert evidence.g.w == ModularWord()
    recorded = {entry["m"] for entry in evidence.level_transcripts if entry["member"]}
    assert recorded == set(evidence.levels)
    for m in (2, 3, 4, 6, 12):
        assert m in evidence.levels
    for entry in evidence.level_transcripts:
        if "double_coset_member" in entry:
            assert entry["double_coset_member"] == entry["member"]
    assert evidence.witness_level == 12
