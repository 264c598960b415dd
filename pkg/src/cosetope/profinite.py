"""Finite quotient towers of the matrix semidirect product.

Open normal subgroups are represented extensionally, as kernels of concrete
finite quotients described by a ``QuotientSpec``; towers are explicit finite
lists of specs.  On top of that sit the tractability inclusion check between
subgroup images, a double-coset separability probe along a tower, and the
transversal exclusion check.

Negative searches are always reported as inconclusive: only positive
certificates are decisions.
"""

from __future__ import annotations

import functools
import json
import os
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .arith import Mat2, sl2_group_order
from .budgets import Budgets, active_budgets
from .errors import PreconditionError, ValidationError
from .groupcore import (
    GeneratedSubgroup,
    GroupContext,
    SdElement,
    coset_reps,
    is_normal_by_generators,
    product_member,
    schreier_generator_words,
    sd_identity,
    sd_inv,
    sd_mul,
    subgroup_closure,
    subgroup_from_elements,
    subgroup_intersection,
)
from .modular import (
    ModularWord,
    PermRep,
    perm_identity,
    rep_contains,
    schreier_transversal_words,
    subgroup_generators,
    word_eval,
)

KERNEL_FILTER_CAP = 200_000


class Formation(NamedTuple):
    """Which finite quotients are admitted: every one, or only p-power ones."""

    kind: str = "all"
    p: Optional[int] = None

    @classmethod
    def make(cls, kind: str, p: Optional[int] = None) -> "Formation":
        if kind == "all":
            return cls("all", None)
        if kind == "pro-p":
            if p is None or p < 2:
                raise ValidationError("pro-p formation needs a prime p >= 2")
            return cls("pro-p", p)
        raise ValidationError(f"unknown formation kind: {kind!r}")

    def admits(self, spec: "QuotientSpec") -> bool:
        if self.kind == "all":
            return True
        m = spec.m
        while m % self.p == 0:
            m //= self.p
        if m != 1:
            return False
        if spec.rep is not None:
            size = _perm_group_order(spec.rep)
            while size % self.p == 0:
                size //= self.p
            if size != 1:
                return False
        return True


def _perm_group_order(rep: PermRep) -> int:
    ident = perm_identity(rep.degree)

    def mul(p, q):
        return tuple(q[i] for i in p)

    def inv(p):
        out = [0] * len(p)
        for i, pi in enumerate(p):
            out[pi] = i
        return tuple(out)

    ctx = GroupContext(ident, mul, inv, (rep.perm_s, rep.perm_t), name=f"perm image d={rep.degree}")
    return len(ctx.enumerate())


class QuotientSpec(NamedTuple):
    """One finite quotient: modulus ``m``, optional coset action, optional formation filter."""

    m: int
    rep: Optional[PermRep] = None
    formation: Optional[Formation] = None

    @classmethod
    def make(cls, m: int, rep: Optional[PermRep] = None, formation: Optional[Formation] = None) -> "QuotientSpec":
        if m < 2:
            raise ValidationError(f"modulus must be at least 2, got {m}")
        return cls(m, rep, formation)

    def refined_by(self, fine: "QuotientSpec") -> bool:
        """Whether this quotient factors through ``fine`` (fine is at least as fine)."""
        if fine.m % self.m != 0:
            return False
        if self.rep is None:
            return True
        if fine.rep is None:
            return self.rep.degree == 1
        return _rep_subgroup_contains(self.rep, fine.rep)

    def to_json(self) -> dict:
        out = {"m": self.m}
        out["rep"] = self.rep.to_json() if self.rep is not None else None
        if self.formation is not None:
            out["filter"] = {"type": self.formation.kind, "p": self.formation.p}
        else:
            out["filter"] = None
        return out

    @classmethod
    def from_json(cls, data: dict, base_dir: str = ".") -> "QuotientSpec":
        try:
            m = int(data["m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad quotient spec: {exc}") from exc
        rep = None
        raw_rep = data.get("rep")
        if isinstance(raw_rep, str):
            rep = load_rep(os.path.join(base_dir, raw_rep))
        elif isinstance(raw_rep, dict):
            rep = PermRep.from_json(raw_rep)
        elif raw_rep is not None:
            raise ValidationError("spec 'rep' must be a path, an object, or null")
        formation = None
        raw_filter = data.get("filter")
        if raw_filter is not None:
            kind = raw_filter.get("type", "all")
            p = raw_filter.get("p")
            formation = Formation.make(kind, int(p) if p is not None else None)
        return cls.make(m, rep, formation)


@functools.lru_cache(maxsize=None)
def _rep_subgroup_contains(outer: PermRep, inner: PermRep) -> bool:
    """Whether outer's subgroup contains inner's (generator containment)."""
    return all(rep_contains(outer, w) for w in subgroup_generators(inner))


def load_rep(path: str) -> PermRep:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read permutation representation {path!r}: {exc}") from exc
    return PermRep.from_json(data)


def load_tower(path: str) -> list:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read tower file {path!r}: {exc}") from exc
    if not isinstance(data, list):
        raise ValidationError("a tower file holds a list of quotient specs")
    base_dir = os.path.dirname(os.path.abspath(path))
    return [QuotientSpec.from_json(entry, base_dir) for entry in data]


def default_tower() -> list:
    """Congruence levels with useful divisibility structure at desk scale."""
    return [QuotientSpec.make(m) for m in (2, 3, 4, 5, 6, 8, 12)]


# ---------------------------------------------------------------------------
# elements of the ambient group and their projections


class GroupWord(NamedTuple):
    """An ambient group element: additive part ``a`` plus a word ``w``."""

    a: Mat2
    w: ModularWord

    @classmethod
    def identity(cls) -> "GroupWord":
        return cls(Mat2.zero(), ModularWord())

    @classmethod
    def of_a(cls, a: Mat2) -> "GroupWord":
        return cls(a.lift(), ModularWord())

    @classmethod
    def of_word(cls, w: ModularWord) -> "GroupWord":
        return cls(Mat2.zero(), w)


def gw_mul(x: GroupWord, y: GroupWord) -> GroupWord:
    return GroupWord(x.a + word_eval(x.w) * y.a, x.w * y.w)


def gw_inv(x: GroupWord) -> GroupWord:
    hinv = word_eval(x.w).inv_det1()
    return GroupWord(-(hinv * x.a), x.w.inverse())


@functools.lru_cache(maxsize=None)
def quotient_context(spec: QuotientSpec) -> GroupContext:
    """The finite quotient as a group context over SdElement.

    Generators, in fixed positional order: the four elementary additive
    matrices, then the images of S and T.  The positional order is shared by
    every spec, so refinement projections act generator-by-generator.
    """
    m = spec.m
    if m < 2:
        raise ValidationError(f"modulus must be at least 2, got {m}")
    degree = spec.rep.degree if spec.rep is not None else None
    ident = sd_identity(m, degree)
    hid = Mat2.identity(m)
    sig_id = None if degree is None else perm_identity(degree)
    gens = [
        SdElement(Mat2.of_mod(1, 0, 0, 0, m), hid, sig_id),
        SdElement(Mat2.of_mod(0, 1, 0, 0, m), hid, sig_id),
        SdElement(Mat2.of_mod(0, 0, 1, 0, m), hid, sig_id),
        SdElement(Mat2.of_mod(0, 0, 0, 1, m), hid, sig_id),
        SdElement(
            Mat2.zero(m),
            Mat2.ambient(0, -1, 1, 0).reduce(m),
            spec.rep.perm_s if spec.rep is not None else None,
        ),
        SdElement(
            Mat2.zero(m),
            Mat2.ambient(1, 1, 0, 1).reduce(m),
            spec.rep.perm_t if spec.rep is not None else None,
        ),
    ]
    name = f"M2(Z/{m}) x| subgroup-image" if spec.rep is not None else f"M2(Z/{m}) x| SL2(Z/{m})"
    return GroupContext(ident, sd_mul, sd_inv, gens, name=name)


def spec_group_order(spec: QuotientSpec) -> Optional[int]:
    """Exact order when no coset action is attached; None otherwise."""
    if spec.rep is not None:
        return None
    return spec.m ** 4 * sl2_group_order(spec.m)


def project(g: GroupWord, spec: QuotientSpec) -> SdElement:
    """The image of an ambient element in the quotient; a homomorphism."""
    sigma = spec.rep.word_perm(g.w) if spec.rep is not None else None
    return SdElement(g.a.reduce(spec.m), word_eval(g.w).reduce(spec.m), sigma)


def image_subgroup(gens: Sequence[GroupWord], spec: QuotientSpec, budgets: Budgets | None = None) -> GeneratedSubgroup:
    """Closure of the projections of ``gens`` in the quotient of ``spec``."""
    ctx = quotient_context(spec)
    return subgroup_closure(ctx, [project(g, spec) for g in gens], budgets)


# ---------------------------------------------------------------------------
# refinement kernels


def _coset_fibration(fine: PermRep, coarse: PermRep):
    """Point map fine -> coarse plus a section (one fine point per coarse point)."""
    words = schreier_transversal_words(fine)
    pmap = [0] * fine.degree
    for p, w in words.items():
        pmap[p] = coarse.word_point(ModularWord(w))
    section = [-1] * coarse.degree
    for p in range(fine.degree):
        if section[pmap[p]] < 0:
            section[pmap[p]] = p
    if any(v < 0 for v in section):
        raise ValidationError("coset fibration is not surjective; refinement is invalid")
    return tuple(pmap), tuple(section)


def element_restriction(fine: QuotientSpec, coarse: QuotientSpec):
    """The restriction homomorphism from the fine quotient to the coarse one."""
    if not coarse.refined_by(fine):
        raise PreconditionError("element_restriction: the first spec does not refine the second")
    cm = coarse.m
    if coarse.rep is None:
        def restrict(x: SdElement) -> SdElement:
            return SdElement(x.a.reduce(cm), x.h.reduce(cm), None)

        return restrict
    pmap, section = _coset_fibration(fine.rep, coarse.rep)

    def restrict(x: SdElement) -> SdElement:
        sigma = tuple(pmap[x.sigma[j]] for j in section)
        return SdElement(x.a.reduce(cm), x.h.reduce(cm), sigma)

    return restrict


def kernel_of_refinement(fine: QuotientSpec, coarse: QuotientSpec, budgets: Budgets | None = None) -> GeneratedSubgroup:
    """Elements of the fine quotient that map to the identity of the coarse one.

    Small quotients are filtered from the full enumeration; otherwise the
    kernel is generated by Schreier words read off the action of the fine
    generators on the coarse quotient, and closed.
    """
    if not coarse.refined_by(fine):
        raise PreconditionError("kernel_of_refinement: the first spec does not refine the second")
    budgets = active_budgets(budgets)
    fctx = quotient_context(fine)
    if fine == coarse:
        return subgroup_from_elements((fctx.identity,))
    order = spec_group_order(fine)
    if order is not None and order <= KERNEL_FILTER_CAP:
        restrict = element_restriction(fine, coarse)
        cid = quotient_context(coarse).identity
        full = fctx.enumerate(budgets)
        return subgroup_from_elements(x for x in full.elements if restrict(x) == cid)

    cctx = quotient_context(coarse)
    restrict = element_restriction(fine, coarse)
    coarse_gens = [restrict(g) for g in fctx.generators]
    fine_gens = list(fctx.generators)

    def act(point, letter):
        idx = abs(letter) - 1
        g = coarse_gens[idx] if letter > 0 else sd_inv(coarse_gens[idx])
        return sd_mul(point, g)

    letters = []
    for i in range(len(fine_gens)):
        letters.extend((i + 1, -(i + 1)))

    def invert(word):
        return tuple(-l for l in reversed(word))

    words = schreier_generator_words(cctx.identity, act, tuple(letters), invert)
    kernel_gens = []
    for word in words:
        x = fctx.identity
        for letter in word:
            idx = abs(letter) - 1
            g = fine_gens[idx] if letter > 0 else sd_inv(fine_gens[idx])
            x = sd_mul(x, g)
        kernel_gens.append(x)
    return subgroup_closure(fctx, kernel_gens, budgets)


# ---------------------------------------------------------------------------
# tractability inclusion


@dataclass
class TractabilityReport:
    """Outcome of the inclusion search over a list of candidate quotients.

    When ``found`` is set, the inclusion image(H) meet image(K) inside
    image(H meet K) * kernel(found -> m_spec) was verified there, and the
    stored generator data makes that check replayable.
    """

    m_spec: QuotientSpec
    h_gens: tuple
    k_gens: tuple
    hcapk_gens: tuple
    entries: list = field(default_factory=list)
    found: Optional[QuotientSpec] = None
    counters: dict = field(default_factory=dict)


_VIOLATION_SAMPLE = 5


def tractable_at(
    h_gens: Sequence[GroupWord],
    k_gens: Sequence[GroupWord],
    hcapk_gens: Sequence[GroupWord],
    m_spec: QuotientSpec,
    candidates: Sequence[QuotientSpec],
    budgets: Budgets | None = None,
) -> TractabilityReport:
    """First candidate quotient where the intersection of images is tame.

    For each candidate N (which must refine ``m_spec``): compute
    U = image(H) meet image(K) and test U inside image(HcapK) * ker(N -> M);
    succeed on the first candidate where this holds, otherwise record
    violating elements.  Per-candidate precondition failures are recorded,
    not fatal.
    """
    budgets = active_budgets(budgets)
    report = TractabilityReport(m_spec, tuple(h_gens), tuple(k_gens), tuple(hcapk_gens))
    formation = m_spec.formation if m_spec.formation is not None else Formation.make("all")
    scanned = 0
    for cand in candidates:
        entry = {"spec": cand, "status": "", "detail": "", "violations": []}
        report.entries.append(entry)
        if not formation.admits(cand):
            entry["status"] = "skipped-formation"
            entry["detail"] = "candidate is outside the configured formation"
            continue
        if not m_spec.refined_by(cand):
            entry["status"] = "precondition"
            entry["detail"] = "candidate does not refine the target quotient"
            continue
        ctx = quotient_context(cand)
        uh = image_subgroup(h_gens, cand, budgets)
        uk = image_subgroup(k_gens, cand, budgets)
        ui = image_subgroup(hcapk_gens, cand, budgets)
        bad = [g for g in ui.generators if g not in uh or g not in uk]
        if bad:
            entry["status"] = "precondition"
            entry["detail"] = "claimed intersection generators do not land in both images"
            entry["violations"] = bad[:_VIOLATION_SAMPLE]
            continue
        inter = subgroup_intersection(uh, uk)
        kernel = kernel_of_refinement(cand, m_spec, budgets)
        violations = []
        for u in inter.elements:
            scanned += 1
            if not product_member(ctx, u, ui, kernel):
                violations.append(u)
                if len(violations) >= _VIOLATION_SAMPLE:
                    break
        entry["sizes"] = {
            "image_h": len(uh),
            "image_k": len(uk),
            "image_intersection": len(inter),
            "kernel": len(kernel),
        }
        if not violations:
            entry["status"] = "ok"
            report.found = cand
            break
        entry["status"] = "violation"
        entry["violations"] = violations
    report.counters = {"elements_scanned": scanned, "candidates_tried": len(report.entries)}
    return report


# ---------------------------------------------------------------------------
# separability probe


@dataclass
class SeparabilityCertificate:
    """A finite quotient excluding an element from a double coset; replayable."""

    element: GroupWord
    target: str
    spec: QuotientSpec
    transcript: dict = field(default_factory=dict)


def thm_b_probe(
    h_gens: Sequence[GroupWord],
    k_gens: Sequence[GroupWord],
    l_gens: Optional[Sequence[GroupWord]],
    g: GroupWord,
    tower: Sequence[QuotientSpec],
    budgets: Budgets | None = None,
) -> Optional[SeparabilityCertificate]:
    """Probe separability of (H meet L)K along the tower.

    ``l_gens`` of None means L is the whole group.  At each level, compute
    the image of H meet L as image(H) meet image(L) and test whether the
    image of ``g`` lies in the resulting double coset; the first excluding
    level yields a certificate.  None means inconclusive: the tower is
    exhausted without a decision.
    """
    if not tower:
        raise ValidationError("thm_b_probe needs a nonempty tower")
    budgets = active_budgets(budgets)
    for spec in tower:
        ctx = quotient_context(spec)
        uh = image_subgroup(h_gens, spec, budgets)
        uk = image_subgroup(k_gens, spec, budgets)
        if l_gens is None:
            hp = uh
        else:
            ul = image_subgroup(l_gens, spec, budgets)
            inter_hk = subgroup_intersection(uh, uk)
            for x in inter_hk.elements:
                if x not in ul:
                    raise PreconditionError(
                        "thm_b_probe: image(H) meet image(K) is not inside image(L) "
                        f"at modulus {spec.m}"
                    )
            hp = subgroup_intersection(uh, ul)
        if not product_member(ctx, project(g, spec), hp, uk):
            return SeparabilityCertificate(
                element=g,
                target="(H meet L)K" if l_gens is not None else "HK",
                spec=spec,
                transcript={
                    "image_hp": len(hp),
                    "image_k": len(uk),
                    "member": False,
                },
            )
    return None


# ---------------------------------------------------------------------------
# transversal exclusion


def hi_exclusion_offenders(
    ctx: GroupContext,
    h: GeneratedSubgroup,
    k: GeneratedSubgroup,
    hp: GeneratedSubgroup,
    n: GeneratedSubgroup,
    *,
    enforce: bool = True,
    budgets: Budgets | None = None,
) -> list:
    """Non-identity transversal elements of Hp in H that do land in Hp*K*N."""
    budgets = active_budgets(budgets)
    if enforce:
        if not is_normal_by_generators(ctx, n):
            raise PreconditionError("precondition failed: N is not normal (generator conjugation test)")
        for g in hp.generators:
            if g not in h:
                raise PreconditionError("precondition failed: Hp is not contained in H")
        hck = subgroup_intersection(h, k)
        for x in hck.elements:
            if x not in hp:
                raise PreconditionError("precondition failed: intersection(H, K) is not contained in Hp")
    kn = subgroup_closure(ctx, tuple(k.generators) + tuple(n.generators), budgets)
    decomposition = coset_reps(ctx, h, hp)
    return [x for x in decomposition.reps[1:] if product_member(ctx, x, hp, kn)]


def hi_exclusion_check(
    ctx: GroupContext,
    h: GeneratedSubgroup,
    k: GeneratedSubgroup,
    hp: GeneratedSubgroup,
    n: GeneratedSubgroup,
    *,
    enforce: bool = True,
    budgets: Budgets | None = None,
) -> bool:
    """Whether every non-identity transversal element stays outside Hp*K*N.

    Equivalent to the containment of H meet K*N in Hp, which is exactly what
    the offender list witnesses when nonempty.
    """
    return not hi_exclusion_offenders(ctx, h, k, hp, n, enforce=enforce, budgets=budgets)
