"""Checks for the axioms a tuple-scoring function may satisfy (dummy,
efficiency, symmetry, linearity, and their distribution-aware generalized
forms), plus the fresh-expansion construction, the component-product
identity for query probability, and the minimal-set decomposition check.

Each check takes an abstract score function ``(space, query, tid) ->
Fraction`` so the same machinery can vet the causal-effect score, Shapley,
Banzhaf, or anything user-supplied, and returns a verdict carrying every
counterexample found (exact LHS/RHS values, no sampling: the axioms'
hypotheses are universally quantified, so subsets are enumerated
exhaustively up to a cap).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import (
    InputError,
    InstanceStore,
    PDBSpace,
    Probability,
    ResourceLimitError,
    TupleIndependent,
    TupleRecord,
    fraction_to_decimal,
)
from .queries import (
    BCQ,
    ComponentPartition,
    ConjQuery,
    DisjQuery,
    Query,
    QueryOfSet,
    Var,
    components,
    evaluate,
    is_boolean,
    minimal_satisfiable_sets,
    query_probability,
)
from .scores import EndoWorlds, banzhaf, causal_effect, shapley

#: SYM and G-SYM quantify over all subsets excluding a tuple pair; the
#: exhaustive pair check is capped here.
DEFAULT_SYM_CAP = 20

ScoreFunction = Callable[[PDBSpace, Query, str], Fraction]


def gces_score(pdb: PDBSpace, q: Query, tid: str) -> Fraction:
    return causal_effect(pdb, q, tid)


def banzhaf_score(pdb: PDBSpace, q: Query, tid: str) -> Fraction:
    return banzhaf(pdb.instance, q, tid)


def shapley_score(pdb: PDBSpace, q: Query, tid: str) -> Fraction:
    return shapley(pdb.instance, q, tid)


def constant_score(value) -> ScoreFunction:
    frozen = Fraction(value)

    def score(pdb: PDBSpace, q: Query, tid: str) -> Fraction:
        return frozen

    return score


SCORE_FUNCTIONS: dict[str, ScoreFunction] = {
    "gces": gces_score,
    "banzhaf": banzhaf_score,
    "shapley": shapley_score,
}


@dataclass(frozen=True)
class Witness:
    subject: str
    lhs: Fraction
    rhs: Fraction

    def to_json_dict(self) -> dict:
        return {
            "subject": self.subject,
            "lhs": f"{self.lhs.numerator}/{self.lhs.denominator}",
            "rhs": f"{self.rhs.numerator}/{self.rhs.denominator}",
        }

    def __str__(self) -> str:
        return (
            f"{self.subject}: {self.lhs} != {self.rhs} "
            f"({fraction_to_decimal(self.lhs)} vs {fraction_to_decimal(self.rhs)})"
        )


@dataclass(frozen=True)
class AxiomVerdict:
    axiom: str
    holds: bool
    witnesses: tuple[Witness, ...]

    def to_json_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "holds": self.holds,
            "witnesses": [w.to_json_dict() for w in self.witnesses],
        }


def _verdict(axiom: str, witnesses: list[Witness]) -> AxiomVerdict:
    return AxiomVerdict(axiom, not witnesses, tuple(witnesses))


def _require_boolean(q: Query):
    if not is_boolean(q):
        raise InputError("axiom checks take monotone Boolean queries")


def _swings(values, worlds: EndoWorlds, bit: int):
    for mask in range(worlds.size):
        if not mask & bit:
            yield mask, values[mask | bit] - values[mask]


def check_dum(
    pdb: PDBSpace, q: Query, score_fn: ScoreFunction, cap: int | None = None
) -> AxiomVerdict:
    """Tuples that swing no subset must score zero."""
    _require_boolean(q)
    worlds = EndoWorlds(pdb.instance, cap)
    values = worlds.value_table(q)
    witnesses = []
    for tid in worlds.order:
        bit = 1 << worlds.bit[tid]
        power = sum(swing for _, swing in _swings(values, worlds, bit))
        if power == 0:
            score = score_fn(pdb, q, tid)
            if score != 0:
                witnesses.append(Witness(f"dummy tuple {tid}", score, Fraction(0)))
    return _verdict("DUM", witnesses)


def check_eff(
    pdb: PDBSpace, q: Query, score_fn: ScoreFunction, cap: int | None = None
) -> AxiomVerdict:
    """The scores must sum to the total power divided by 2^(N-1)."""
    _require_boolean(q)
    worlds = EndoWorlds(pdb.instance, cap)
    values = worlds.value_table(q)
    n = len(worlds.order)
    total = Fraction(0)
    for tid in worlds.order:
        bit = 1 << worlds.bit[tid]
        total += sum(swing for _, swing in _swings(values, worlds, bit))
    rhs = total / (1 << max(n - 1, 0))
    lhs = sum((score_fn(pdb, q, tid) for tid in worlds.order), Fraction(0))
    witnesses = [] if lhs == rhs else [Witness("sum of scores", lhs, rhs)]
    return _verdict("EFF", witnesses)


def check_sym(
    pdb: PDBSpace, q: Query, score_fn: ScoreFunction, cap: int | None = None
) -> AxiomVerdict:
    """Tuples that are interchangeable on every subset excluding both must
    score equally."""
    _require_boolean(q)
    worlds = EndoWorlds(pdb.instance, cap if cap is not None else DEFAULT_SYM_CAP)
    values = worlds.value_table(q)
    witnesses = []
    scores: dict[str, Fraction] = {}
    for ta, tb in itertools.combinations(worlds.order, 2):
        ba, bb = 1 << worlds.bit[ta], 1 << worlds.bit[tb]
        if any(
            values[mask | ba] != values[mask | bb]
            for mask in range(worlds.size)
            if not mask & (ba | bb)
        ):
            continue
        for tid in (ta, tb):
            if tid not in scores:
                scores[tid] = score_fn(pdb, q, tid)
        if scores[ta] != scores[tb]:
            witnesses.append(Witness(f"symmetric pair ({ta},{tb})", scores[ta], scores[tb]))
    return _verdict("SYM", witnesses)


def check_lin(
    pdb: PDBSpace, qa: Query, qb: Query, score_fn: ScoreFunction,
    cap: int | None = None,
) -> AxiomVerdict:
    """Scores must add across the world-level disjunction and conjunction of
    two monotone Boolean queries."""
    _require_boolean(qa)
    _require_boolean(qb)
    both = ConjQuery((qa, qb))
    either = DisjQuery((qa, qb))
    witnesses = []
    for tid in pdb.instance.endogenous_order:
        lhs = score_fn(pdb, either, tid) + score_fn(pdb, both, tid)
        rhs = score_fn(pdb, qa, tid) + score_fn(pdb, qb, tid)
        if lhs != rhs:
            witnesses.append(Witness(f"tuple {tid}", lhs, rhs))
    return _verdict("LIN", witnesses)


def check_g_eff(
    pdb: PDBSpace, q: Query, score_fn: ScoreFunction, cap: int | None = None
) -> AxiomVerdict:
    """The scores must sum to the swing total weighted, per subset and
    tuple, by the mass at the subset plus the mass with the tuple added."""
    _require_boolean(q)
    worlds = EndoWorlds(pdb.instance, cap)
    values = worlds.value_table(q)
    masses = worlds.mass_table(pdb)
    full = worlds.size - 1
    rhs = Fraction(0)
    for mask in range(worlds.size):
        if mask == full:
            continue
        rest = full & ~mask
        while rest:
            bit = rest & -rest
            swing = values[mask | bit] - values[mask]
            if swing:
                rhs += swing * (masses[mask] + masses[mask | bit])
            rest ^= bit
    lhs = sum((score_fn(pdb, q, tid) for tid in worlds.order), Fraction(0))
    witnesses = [] if lhs == rhs else [Witness("sum of scores", lhs, rhs)]
    return _verdict("G-EFF", witnesses)


def check_g_sym(
    pdb: PDBSpace, q: Query, score_fn: ScoreFunction, cap: int | None = None
) -> AxiomVerdict:
    """For pairs of tuples that swing nothing on subsets excluding both,
    score minus weighted power must coincide."""
    _require_boolean(q)
    worlds = EndoWorlds(pdb.instance, cap if cap is not None else DEFAULT_SYM_CAP)
    values = worlds.value_table(q)
    masses = worlds.mass_table(pdb)

    def weighted(tid: str) -> Fraction:
        bit = 1 << worlds.bit[tid]
        return sum(
            (swing * masses[mask] for mask, swing in _swings(values, worlds, bit) if swing),
            Fraction(0),
        )

    witnesses = []
    adjusted: dict[str, Fraction] = {}
    for ta, tb in itertools.combinations(worlds.order, 2):
        ba, bb = 1 << worlds.bit[ta], 1 << worlds.bit[tb]
        if any(
            values[mask | ba] != values[mask] or values[mask | bb] != values[mask]
            for mask in range(worlds.size)
            if not mask & (ba | bb)
        ):
            continue
        for tid in (ta, tb):
            if tid not in adjusted:
                adjusted[tid] = score_fn(pdb, q, tid) - weighted(tid)
        if adjusted[ta] != adjusted[tb]:
            witnesses.append(
                Witness(f"pair ({ta},{tb}) score minus weighted power",
                        adjusted[ta], adjusted[tb])
            )
    return _verdict("G-SYM", witnesses)


AXIOM_CHECKS = {
    "DUM": check_dum,
    "EFF": check_eff,
    "SYM": check_sym,
    "G-EFF": check_g_eff,
    "G-SYM": check_g_sym,
}


# ---------------------------------------------------------------------------
# Fresh expansion and the component-product identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreshExpansion:
    """The instance extended with one new endogenous tuple per query atom,
    over constants absent from the base active domain (one fresh constant
    per variable, substituted consistently across atoms)."""

    base: InstanceStore
    query: BCQ
    per_atom: tuple[TupleRecord, ...]
    expanded: InstanceStore
    partition: ComponentPartition

    def selection_functions(self) -> tuple[dict[int, TupleRecord], ...]:
        """Every way of picking one fresh tuple per component."""
        choices = [
            [(idx, self.per_atom[i]) for i in group]
            for idx, group in enumerate(self.partition.groups)
        ]
        return tuple(
            {idx: rec for idx, rec in combo}
            for combo in itertools.product(*choices)
        )


def fresh_expansion(instance: InstanceStore, q: BCQ) -> FreshExpansion:
    """Build the fresh expansion: fresh constants ``_f1, _f2, ...`` indexed
    by variable order of first occurrence (prefixed further if a user
    constant collides), one new tuple per atom."""
    if not isinstance(q, BCQ):
        raise InputError("fresh expansion takes a BCQ")
    taken = {c for c in instance.adom() if isinstance(c, str)}
    mapping: dict[str, str] = {}
    counter = 0
    for atom in q.atoms:
        for term in atom.terms:
            if isinstance(term, Var) and term.name not in mapping:
                counter += 1
                name = f"_f{counter}"
                while name in taken:
                    name = "_" + name
                taken.add(name)
                mapping[term.name] = name
    tids = set(instance.tids)
    records = []
    for i, atom in enumerate(q.atoms, start=1):
        tid = f"_u{i}"
        while tid in tids:
            tid = "_" + tid
        tids.add(tid)
        args = tuple(
            mapping[t.name] if isinstance(t, Var) else t for t in atom.terms
        )
        records.append(TupleRecord(tid, atom.predicate, args, "endogenous"))
    per_atom = tuple(records)
    return FreshExpansion(
        base=instance,
        query=q,
        per_atom=per_atom,
        expanded=instance.with_records(per_atom),
        partition=components(q),
    )


@dataclass(frozen=True)
class ProductFormulaReport:
    """Query probability versus the product, over components, of one minus
    the causal effect of the component's fresh tuple; identical for every
    selection function."""

    lhs: Fraction
    fresh_effects: dict[str, Fraction]
    per_sigma: tuple[tuple[str, Fraction], ...]

    @property
    def agree(self) -> bool:
        return all(rhs == self.lhs for _, rhs in self.per_sigma)

    def to_json_dict(self) -> dict:
        return {
            "lhs": f"{self.lhs.numerator}/{self.lhs.denominator}",
            "fresh_effects": {
                tid: f"{v.numerator}/{v.denominator}"
                for tid, v in sorted(self.fresh_effects.items())
            },
            "per_sigma": [
                {"sigma": desc, "rhs": f"{rhs.numerator}/{rhs.denominator}"}
                for desc, rhs in self.per_sigma
            ],
            "agree": self.agree,
        }


def verify_product_formula(
    pdb: PDBSpace, q: BCQ, cap: int | None = None
) -> ProductFormulaReport:
    """On a tuple-independent space, check that brute-force P(Q) equals the
    component product of (1 - causal effect) of fresh tuples at marginal 1,
    for every selection function."""
    if not pdb.is_tid:
        raise InputError("the product identity is stated for tuple-independent spaces")
    if not isinstance(q, BCQ):
        raise InputError("the product identity takes a BCQ")
    expansion = fresh_expansion(pdb.instance, q)
    rep = pdb.representation
    assert isinstance(rep, TupleIndependent)
    marginals = dict(rep.marginals)
    for rec in expansion.per_atom:
        marginals[rec.tid] = Probability(1)
    expanded_pdb = PDBSpace(expansion.expanded, TupleIndependent(marginals))
    effects = {
        rec.tid: causal_effect(expanded_pdb, q, rec.tid, cap)
        for rec in expansion.per_atom
    }
    lhs = Fraction(query_probability(pdb, q, "brute", cap))
    sigmas = []
    for sigma in expansion.selection_functions():
        rhs = Fraction(1)
        parts = []
        for idx in sorted(sigma):
            rec = sigma[idx]
            rhs *= 1 - effects[rec.tid]
            parts.append(f"C{idx + 1}->{rec.tid}")
        sigmas.append((", ".join(parts), rhs))
    return ProductFormulaReport(lhs, effects, tuple(sigmas))


# ---------------------------------------------------------------------------
# Minimal-set decomposition
# ---------------------------------------------------------------------------

def mss_decomposition_check(
    instance: InstanceStore, q: Query, cap: int = 12
) -> AxiomVerdict:
    """Exhaustively confirm that on every subinstance the query agrees with
    the disjunction of its minimal satisfiable sets' containment queries."""
    _require_boolean(q)
    tids = sorted(instance.tids)
    if len(tids) > cap:
        raise ResourceLimitError(
            f"{len(tids)} tuples exceed the decomposition check cap of {cap}"
        )
    family = minimal_satisfiable_sets(instance, q)
    decomposed = DisjQuery(tuple(QueryOfSet(s) for s in family))
    witnesses = []
    for mask in range(1 << len(tids)):
        world = frozenset(t for i, t in enumerate(tids) if mask >> i & 1)
        direct = evaluate(q, instance, world)
        via_family = evaluate(decomposed, instance, world) if len(family) else 0
        if direct != via_family:
            witnesses.append(
                Witness(f"world {sorted(world)}", Fraction(direct), Fraction(via_family))
            )
    return _verdict("mss-decomposition", witnesses)
