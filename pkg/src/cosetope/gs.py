"""The matrix semidirect-product example, end to end.

The ambient group is the additive 2x2 integer matrices acted on by the
determinant-1 group through left multiplication.  With H the determinant-1
part and K its conjugate by the identity matrix i of the additive part,
H meet K is trivial and the double coset HK is cut out by a determinant
criterion that certifies separability level by level.  A finite-index
subgroup with a congruence gap then produces desk-scale evidence that the
double coset H'K admits no such certificates: a concrete element outside
H'K whose image lies inside the image of H'K at every tested congruence
level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .arith import Mat2
from .budgets import Budgets, active_budgets
from .errors import BudgetError, PreconditionError, ValidationError
from .groupcore import (
    GeneratedSubgroup,
    GroupContext,
    SdElement,
    product_member,
    sd_inv,
    sd_mul,
    subgroup_closure,
    subgroup_from_elements,
    subgroup_intersection,
)
from .modular import (
    GapWitness,
    ModularWord,
    PermRep,
    congruence_gap_witness,
    is_congruence,
    rep_contains,
    subgroup_generators,
    word_eval,
)
from .profinite import (
    GroupWord,
    QuotientSpec,
    SeparabilityCertificate,
    project,
    quotient_context,
)


class GsInstance(NamedTuple):
    """One finite level of the example: images of H and K and the conjugator."""

    spec: QuotientSpec
    ctx: GroupContext
    im_h: GeneratedSubgroup
    im_k: GeneratedSubgroup
    i_elt: SdElement


def gs_build(spec: QuotientSpec, budgets: Budgets | None = None) -> GsInstance:
    """Images of H and of K = i H i^-1 in the quotient of ``spec``.

    The image of K is the elementwise conjugate of the image of H, so every
    element of it has the shape (I - h, h).
    """
    budgets = active_budgets(budgets)
    ctx = quotient_context(spec)
    h_gens = ctx.generators[4:6]
    im_h = subgroup_closure(ctx, h_gens, budgets)
    degree = spec.rep.degree if spec.rep is not None else None
    sigma = tuple(range(degree)) if degree is not None else None
    i_elt = SdElement(Mat2.identity(spec.m), Mat2.identity(spec.m), sigma)
    i_inv = sd_inv(i_elt)
    conj = lambda u: sd_mul(sd_mul(i_elt, u), i_inv)
    im_k = GeneratedSubgroup(
        tuple(conj(g) for g in h_gens),
        tuple(conj(u) for u in im_h.elements),
        frozenset(conj(u) for u in im_h.elements),
    )
    return GsInstance(spec, ctx, im_h, im_k, i_elt)


def gs_intersection(instance: GsInstance) -> GeneratedSubgroup:
    """image(H) meet image(K); trivial at every level, because the additive
    part of a common element forces its h part to be the identity."""
    return subgroup_intersection(instance.im_h, instance.im_k)


def hk_member_sd(x: SdElement) -> bool:
    """Determinant criterion for membership of a quotient element in HK's image.

    (a, h) lies in the image of HK exactly when a + h has determinant 1:
    the products (u - uv, uv) sweep exactly those pairs.  Only valid in
    plain congruence quotients; with a coset action attached the criterion
    is necessary but no longer sufficient.
    """
    if x.sigma is not None:
        raise ValidationError("the determinant criterion applies to plain congruence quotients only")
    return (x.a + x.h).det_int() == 1 % x.a.m


def gs_hk_member(g: GroupWord, m: int) -> bool:
    """Whether the level-m image of ``g`` lies in the image of HK."""
    if m < 2:
        raise ValidationError(f"modulus must be at least 2, got {m}")
    return hk_member_sd(project(g, QuotientSpec.make(m)))


def gs_hk_witness(g: GroupWord) -> Optional[SeparabilityCertificate]:
    """Smallest level separating ``g`` from HK, or None when no level can.

    Ambiently, g = (a, h) lies in HK exactly when det(a + h) = 1, so a
    determinant D != 1 is excluded at the smallest m >= 2 with D incongruent
    to 1; such an m exists and is at most |D - 1| + 1.  D = 1 means the
    element is in HK, hence inside the closure at every level: inconclusive.
    """
    d = (g.a + word_eval(g.w)).det()
    if d == 1:
        return None
    m = 2
    while d % m == 1 % m:
        m += 1
    certificate = SeparabilityCertificate(
        element=g,
        target="HK",
        spec=QuotientSpec.make(m),
        transcript={"det": d, "det_mod_m": d % m, "member": False},
    )
    return certificate


# ---------------------------------------------------------------------------
# non-separability evidence


@dataclass
class NonSepEvidence:
    """Desk-scale evidence that the double coset H'K is not separable.

    ``g`` is a concrete element outside H'K (because the witness matrix
    moves the basepoint of ``rep``), yet at every congruence level recorded
    in ``levels`` the image of ``g`` lies in the image of H'K.  The evidence
    tower is congruence-only by design: quotients carrying the coset action
    of H' itself are excluded, and ``towers_used`` documents that.
    """

    rep: PermRep
    witness: Optional[GapWitness]
    g: Optional[GroupWord]
    level_transcripts: list = field(default_factory=list)
    levels: tuple = ()
    witness_level: int = 0
    towers_used: str = ""
    conclusion: str = ""
    status: str = "evidence"


_CONCLUSION = (
    "HK is separable (determinant certificates exist for every element off it), "
    "while H'K resists every congruence level tested; by the double-coset "
    "characterization of tame intersections this makes the intersection of H "
    "and K profinitely intractable, so the ambient group fails the "
    "Wilson-Zalesskii property."
)

_CROSS_CHECK_MAX = 4


def _h_prime_image_mod(rep: PermRep, m: int, budgets: Budgets) -> GeneratedSubgroup:
    """Image of the (sign-saturated) subgroup of H attached to ``rep`` at level m."""
    from .groupcore import sl2_context

    ctx = sl2_context(m)
    gens = [word_eval(w).reduce(m) for w in subgroup_generators(rep)]
    gens.append((-Mat2.identity()).reduce(m))
    return subgroup_closure(ctx, gens, budgets)


def h_prime_group_words(rep: PermRep) -> list:
    """Ambient generator words of the subgroup attached to ``rep``, sign-saturated."""
    words = [GroupWord.of_word(w) for w in subgroup_generators(rep)]
    words.append(GroupWord.of_word(ModularWord.from_str("SS")))
    return words


def gs_wz_failure(
    rep: PermRep,
    m_max: int = 24,
    *,
    witness_level: int = 24,
    budgets: Budgets | None = None,
) -> NonSepEvidence:
    """Assemble non-separability evidence for H'K from a congruence-gap subgroup.

    The witness x comes from the principal congruence subgroup of
    ``witness_level`` and moves the basepoint of ``rep``; g = (x - I, 1)
    then lies in H'K exactly when x lies in H', so g is outside H'K.  At a
    congruence level m, membership of the image of g in the image of H'K
    reduces to membership of x mod m in the matrix image of H', which is
    what each transcript records (with a direct double-coset cross-check at
    the smallest levels).
    """
    if is_congruence(rep):
        raise PreconditionError("gs_wz_failure: the subgroup is congruence; no failure evidence exists")
    budgets = active_budgets(budgets)
    try:
        witness = congruence_gap_witness(rep, witness_level, m_max=m_max, budgets=budgets)
    except BudgetError:
        witness = None
    if witness is None:
        return NonSepEvidence(
            rep=rep,
            witness=None,
            g=None,
            witness_level=witness_level,
            towers_used=f"congruence levels 2..{m_max}",
            conclusion="witness search inconclusive; no evidence assembled",
            status="inconclusive",
        )
    x = witness.x
    g = GroupWord.of_a(x - Mat2.identity())
    if rep_contains(rep, witness.word):
        raise ValidationError("witness unexpectedly lies in the subgroup")

    transcripts = []
    passing = []
    for m in range(2, m_max + 1):
        image = _h_prime_image_mod(rep, m, budgets)
        member = x.reduce(m) in image
        entry = {"m": m, "member": member, "image_order": len(image)}
        if m <= _CROSS_CHECK_MAX:
            spec = QuotientSpec.make(m)
            ctx = quotient_context(spec)
            im_hp = subgroup_from_elements(
                SdElement(Mat2.zero(m), u, None) for u in image.elements
            )
            instance = gs_build(spec, budgets)
            direct = product_member(ctx, project(g, spec), im_hp, instance.im_k)
            entry["double_coset_member"] = direct
            if direct != member:
                raise ValidationError(
                    f"reduced membership and double-coset membership disagree at level {m}"
                )
        transcripts.append(entry)
        if member:
            passing.append(m)
    return NonSepEvidence(
        rep=rep,
        witness=witness,
        g=g,
        level_transcripts=transcripts,
        levels=tuple(passing),
        witness_level=witness_level,
        towers_used=(
            f"congruence levels 2..{m_max}; quotients carrying the coset action of "
            "the subgroup itself are excluded from the evidence tower"
        ),
        conclusion=_CONCLUSION,
        status="evidence",
    )
