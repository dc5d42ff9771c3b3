"""Attribution scores for endogenous tuples: the causal-effect score under
an arbitrary world distribution, its uniform-1/2 independent special case,
Shapley and Banzhaf values, and the swing-counting power functions.

Every score is exact.  The causal effect of a target set is the difference
of the query's expectations under the do(T in) and do(T out) distributions;
for Boolean queries these are intervened probabilities.  On
tuple-independent spaces with self-join-free hierarchical BCQs the two
probabilities come from the lifted evaluator, otherwise from world sums.
Shapley and Banzhaf use subset enumeration with exact rational weights
(2^N subsets beat N! permutations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Union

from .core import (
    ExplicitWorlds,
    InputError,
    InstanceStore,
    PDBSpace,
    ResourceLimitError,
    TupleIndependent,
    enumerate_worlds,
    fraction_to_decimal,
    make_uniform_tid,
)
from .interventions import (
    Intervention,
    intervene,
    intervened_expectation,
    intervened_query_value,
)
from .queries import (
    SUM,
    Aggregate,
    Query,
    _unify,
    evaluate,
    is_boolean,
    lifted_rejections,
    query_probability,
    query_text,
)

#: Cap on endogenous tuples for subset-enumeration scores (shared with the
#: world-enumeration cap).
DEFAULT_SUBSET_CAP = 25

BRUTE = "brute"
LIFTED = "lifted"
CLOSED_FORM = "closed-form"


class ScoreKind(str, Enum):
    GCES = "gces"
    CES_TID = "ces-tid"
    CES_UI = "ces-ui"
    SHAPLEY = "shapley"
    BANZHAF = "banzhaf"
    POWER_TUPLE = "power"
    WEIGHTED_POWER = "weighted-power"


def _instance_of(source: Union[PDBSpace, InstanceStore]) -> InstanceStore:
    return source.instance if isinstance(source, PDBSpace) else source


class EndoWorlds:
    """Subsets of the endogenous tuples as bitmasks (bit order = sorted
    tids), with cached query values and distribution masses per mask."""

    def __init__(self, instance: InstanceStore, cap: int | None = None):
        limit = DEFAULT_SUBSET_CAP if cap is None else cap
        self.instance = instance
        self.order = instance.endogenous_order
        if len(self.order) > limit:
            raise ResourceLimitError(
                f"{len(self.order)} endogenous tuples exceed the subset "
                f"enumeration cap of {limit}"
            )
        self.bit = {tid: i for i, tid in enumerate(self.order)}
        self.size = 1 << len(self.order)

    def mask_of(self, tids: Iterable[str]) -> int:
        mask = 0
        for tid in tids:
            try:
                mask |= 1 << self.bit[tid]
            except KeyError:
                raise InputError(f"tuple {tid!r} is not endogenous") from None
        return mask

    def endo_tids(self, mask: int) -> frozenset[str]:
        return frozenset(t for i, t in enumerate(self.order) if mask >> i & 1)

    def world(self, mask: int) -> frozenset[str]:
        return self.endo_tids(mask) | self.instance.exogenous

    def value_table(self, q: Query) -> list:
        """Q[W union D_ex] for every endogenous subset W.  Boolean forms are
        monotone, so a mask whose strict submask already holds needs no
        homomorphism search."""
        table = [None] * self.size
        monotone = is_boolean(q)
        for mask in range(self.size):
            if monotone and mask:
                low = mask & -mask
                if table[mask ^ low] == 1:
                    table[mask] = 1
                    continue
            table[mask] = evaluate(q, self.instance, self.world(mask))
        return table

    def mass_table(self, pdb: PDBSpace) -> list[Fraction]:
        """p(W union D_ex) for every endogenous subset W."""
        if pdb.instance is not self.instance and pdb.instance.tids != self.instance.tids:
            raise InputError("space and subset table use different instances")
        rep = pdb.representation
        if isinstance(rep, ExplicitWorlds):
            table = [Fraction(0)] * self.size
            for world, mass in rep.masses.items():
                table[self.mask_of(world & self.instance.endogenous)] += mass
            return table
        assert isinstance(rep, TupleIndependent)
        table = [Fraction(1)]
        for tid in self.order:
            p = rep.marginals.get(tid)
            if p is None:
                raise InputError(f"tuple {tid!r} has no marginal")
            table = [t * (1 - p) for t in table] + [t * p for t in table]
        return table


def delta(
    instance: InstanceStore, q: Query, world: Iterable[str], tid: str
) -> Fraction:
    """Marginal contribution of an endogenous tuple on top of an endogenous
    subset (exogenous tuples always present); zero when the tuple is already
    in the subset."""
    instance.require_endogenous([tid])
    base = frozenset(world)
    outside = base - instance.endogenous
    if outside:
        raise InputError(f"subset contains non-endogenous tuples {sorted(outside)}")
    if tid in base:
        return Fraction(0)
    with_exo = base | instance.exogenous
    return Fraction(
        evaluate(q, instance, with_exo | {tid}) - evaluate(q, instance, with_exo)
    )


# ---------------------------------------------------------------------------
# Causal effect
# ---------------------------------------------------------------------------

def _closed_form_sum(pdb: PDBSpace, q: Aggregate) -> Fraction:
    """E(sum) for a single-atom body on an independent space: each matching
    fact contributes its target value times its presence probability."""
    rep = pdb.representation
    assert isinstance(rep, TupleIndependent)
    atom = q.atoms[0]
    absent: dict[tuple, Fraction] = {}
    for rec in pdb.instance.records():
        if rec.predicate != atom.predicate:
            continue
        marginal = rep.marginals.get(rec.tid)
        if marginal is None:
            raise InputError(f"tuple {rec.tid!r} has no marginal")
        absent.setdefault(rec.args, Fraction(1))
        absent[rec.args] *= 1 - marginal
    total = Fraction(0)
    for args, miss in absent.items():
        binding = _unify(atom, args, {})
        if binding is None:
            continue
        value = binding[q.target.name]
        if not isinstance(value, Fraction):
            raise InputError(
                f"non-numeric value {value!r} at aggregation target {q.target}"
            )
        total += value * (1 - miss)
    return total


def _causal_effect(
    pdb: PDBSpace, q: Query, targets: frozenset[str], cap: int | None = None
) -> tuple[Fraction, str]:
    if not targets:
        raise InputError("causal effect needs a nonempty target set")
    pdb.instance.require_endogenous(targets)
    going_in = Intervention.do_in(targets)
    going_out = Intervention.do_out(targets)
    if is_boolean(q):
        if not lifted_rejections(pdb, q):
            p_in = query_probability(intervene(pdb, going_in), q, "lifted")
            p_out = query_probability(intervene(pdb, going_out), q, "lifted")
            return Fraction(p_in - p_out), LIFTED
        p_in = intervened_query_value(pdb, q, going_in, 1, cap)
        p_out = intervened_query_value(pdb, q, going_out, 1, cap)
        return Fraction(p_in - p_out), BRUTE
    assert isinstance(q, Aggregate)
    if pdb.is_tid and q.op == SUM and len(q.atoms) == 1:
        e_in = _closed_form_sum(intervene(pdb, going_in), q)
        e_out = _closed_form_sum(intervene(pdb, going_out), q)
        return e_in - e_out, CLOSED_FORM
    e_in = intervened_expectation(pdb, q, going_in, cap)
    e_out = intervened_expectation(pdb, q, going_out, cap)
    return e_in - e_out, BRUTE


def causal_effect(
    pdb: PDBSpace, q: Query, targets: Union[str, Iterable[str]],
    cap: int | None = None,
) -> Fraction:
    """Generalized causal effect of a set of endogenous tuples: the query's
    expectation with the targets forced in, minus with them forced out."""
    if isinstance(targets, str):
        targets = [targets]
    value, _ = _causal_effect(pdb, q, frozenset(targets), cap)
    return value


def ces_ui(instance: InstanceStore, q: Query, tid: str, cap: int | None = None) -> Fraction:
    """Causal effect on the uniform-1/2 independent space built from the
    instance; on Boolean queries it coincides with the Banzhaf value."""
    return causal_effect(make_uniform_tid(instance), q, tid, cap)


def gces_subset_form(
    pdb: PDBSpace, q: Query, tid: str, cap: int | None = None
) -> Fraction:
    """Single-tuple causal effect as a swing sum: over subsets not holding
    the tuple, the contribution weighted by the mass at the subset plus the
    mass at the subset with the tuple added."""
    pdb.instance.require_endogenous([tid])
    worlds = EndoWorlds(pdb.instance, cap)
    values = worlds.value_table(q)
    masses = worlds.mass_table(pdb)
    bit = 1 << worlds.bit[tid]
    total = Fraction(0)
    for mask in range(worlds.size):
        if mask & bit:
            continue
        swing = values[mask | bit] - values[mask]
        if swing:
            total += swing * (masses[mask] + masses[mask | bit])
    return total


@dataclass(frozen=True)
class OracleReport:
    """One causal effect computed along independent routes; exactness means
    the routes must agree to the last digit."""

    targets: tuple[str, ...]
    materialized: Fraction
    direct: Fraction
    subset_form: Fraction | None

    @property
    def agree(self) -> bool:
        forms = [self.materialized, self.direct]
        if self.subset_form is not None:
            forms.append(self.subset_form)
        return all(f == forms[0] for f in forms)

    @property
    def value(self) -> Fraction:
        return self.materialized


def gces_oracle(
    pdb: PDBSpace, q: Query, targets: Union[str, Iterable[str]],
    cap: int | None = None,
) -> OracleReport:
    """Compute one causal effect three ways: on the materialized intervened
    spaces, by direct base-world sums, and (single Boolean targets) by the
    swing-sum form."""
    if isinstance(targets, str):
        targets = [targets]
    target_set = pdb.instance.require_endogenous(targets)
    going_in = Intervention.do_in(target_set)
    going_out = Intervention.do_out(target_set)
    if is_boolean(q):
        materialized = Fraction(
            query_probability(intervene(pdb, going_in), q, "brute", cap)
            - query_probability(intervene(pdb, going_out), q, "brute", cap)
        )
        direct = Fraction(
            intervened_query_value(pdb, q, going_in, 1, cap)
            - intervened_query_value(pdb, q, going_out, 1, cap)
        )
        subset = (
            gces_subset_form(pdb, q, next(iter(target_set)), cap)
            if len(target_set) == 1
            else None
        )
    else:
        materialized = intervened_expectation(pdb, q, going_in, cap) - \
            intervened_expectation(pdb, q, going_out, cap)
        direct = Fraction(0)
        for world, mass in enumerate_worlds(pdb, cap):
            direct += mass * (
                evaluate(q, pdb.instance, going_in.push(world))
                - evaluate(q, pdb.instance, going_out.push(world))
            )
        subset = None
    return OracleReport(tuple(sorted(target_set)), materialized, direct, subset)


# ---------------------------------------------------------------------------
# Shapley and Banzhaf
# ---------------------------------------------------------------------------

def _shapley_weights(n: int) -> list[Fraction]:
    total = math.factorial(n)
    return [
        Fraction(math.factorial(k) * math.factorial(n - k - 1), total)
        for k in range(n)
    ]


def _swing_masks(worlds: EndoWorlds, tid: str):
    bit = 1 << worlds.bit[tid]
    for mask in range(worlds.size):
        if not mask & bit:
            yield mask, bit


def shapley(
    instance: InstanceStore, q: Query, tid: str, cap: int | None = None
) -> Fraction:
    """Shapley value by subset enumeration with exact factorial weights."""
    instance.require_endogenous([tid])
    worlds = EndoWorlds(instance, cap)
    values = worlds.value_table(q)
    weights = _shapley_weights(len(worlds.order))
    total = Fraction(0)
    for mask, bit in _swing_masks(worlds, tid):
        swing = values[mask | bit] - values[mask]
        if swing:
            total += weights[mask.bit_count()] * swing
    return total


def banzhaf(
    instance: InstanceStore, q: Query, tid: str, cap: int | None = None
) -> Fraction:
    """Banzhaf value: the uniformly weighted swing sum."""
    instance.require_endogenous([tid])
    worlds = EndoWorlds(instance, cap)
    values = worlds.value_table(q)
    share = Fraction(1, 1 << max(len(worlds.order) - 1, 0))
    total = Fraction(0)
    for mask, bit in _swing_masks(worlds, tid):
        swing = values[mask | bit] - values[mask]
        if swing:
            total += swing
    return total * share


# ---------------------------------------------------------------------------
# Power functions
# ---------------------------------------------------------------------------

def power_of_set(
    source: Union[PDBSpace, InstanceStore], q: Query, world: Iterable[str]
) -> Fraction:
    """Number of tuples whose addition to the given strict endogenous subset
    changes the query value (for Boolean queries; the swing total in
    general)."""
    instance = _instance_of(source)
    base = frozenset(world)
    if base == instance.endogenous:
        raise InputError("power of a set is defined for strict subsets only")
    total = Fraction(0)
    for tid in instance.endogenous_order:
        total += delta(instance, q, base, tid)
    return total


def power_of_tuple(
    source: Union[PDBSpace, InstanceStore], q: Query, tid: str,
    cap: int | None = None,
) -> Fraction:
    """Number of endogenous subsets the tuple swings."""
    instance = _instance_of(source)
    instance.require_endogenous([tid])
    worlds = EndoWorlds(instance, cap)
    values = worlds.value_table(q)
    total = Fraction(0)
    for mask, bit in _swing_masks(worlds, tid):
        total += values[mask | bit] - values[mask]
    return total


def weighted_power(
    pdb: PDBSpace, q: Query, tid: str, cap: int | None = None
) -> Fraction:
    """Swing sum weighted by the distribution's mass at each subset."""
    pdb.instance.require_endogenous([tid])
    worlds = EndoWorlds(pdb.instance, cap)
    values = worlds.value_table(q)
    masses = worlds.mass_table(pdb)
    total = Fraction(0)
    for mask, bit in _swing_masks(worlds, tid):
        swing = values[mask | bit] - values[mask]
        if swing:
            total += swing * masses[mask]
    return total


def total_power(
    source: Union[PDBSpace, InstanceStore], q: Query, cap: int | None = None
) -> Fraction:
    """Double swing sum over all strict endogenous subsets and all tuples
    outside them; equals the sum of the tuples' powers."""
    instance = _instance_of(source)
    worlds = EndoWorlds(instance, cap)
    values = worlds.value_table(q)
    full = worlds.size - 1
    total = Fraction(0)
    for mask in range(worlds.size):
        if mask == full:
            continue
        rest = full & ~mask
        while rest:
            bit = rest & -rest
            total += values[mask | bit] - values[mask]
            rest ^= bit
    return total


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScoreEntry:
    tid: str
    value: Fraction
    backend: str
    positive_ceui: bool | None = None


@dataclass(frozen=True)
class ScoreReport:
    kind: ScoreKind
    query: str
    n_endogenous: int
    entries: tuple[ScoreEntry, ...]
    ranking: tuple[str, ...]

    def entry(self, tid: str) -> ScoreEntry:
        for e in self.entries:
            if e.tid == tid:
                return e
        raise InputError(f"no score entry for tuple {tid!r}")

    def values(self) -> dict[str, Fraction]:
        return {e.tid: e.value for e in self.entries}

    def to_json_dict(self) -> dict:
        scores = []
        for e in self.entries:
            item = {
                "tid": e.tid,
                "value": f"{e.value.numerator}/{e.value.denominator}",
                "decimal": fraction_to_decimal(e.value),
                "backend": e.backend,
            }
            if e.positive_ceui is not None:
                item["positive-ceui"] = e.positive_ceui
            scores.append(item)
        return {
            "kind": self.kind.value,
            "query": self.query,
            "n_endogenous": self.n_endogenous,
            "scores": scores,
            "ranking": list(self.ranking),
        }

    def to_table(self, by_rank: bool = False) -> str:
        order = list(self.ranking) if by_rank else [e.tid for e in self.entries]
        by_tid = {e.tid: e for e in self.entries}
        rank_of = {tid: i + 1 for i, tid in enumerate(self.ranking)}
        rows = [("rank", "tid", "value", "exact", "backend")]
        for tid in order:
            e = by_tid[tid]
            rows.append(
                (
                    str(rank_of[tid]),
                    tid,
                    fraction_to_decimal(e.value),
                    f"{e.value.numerator}/{e.value.denominator}",
                    e.backend,
                )
            )
        widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
        lines = [
            "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
            for row in rows
        ]
        return "\n".join(lines)


def _rank(values: dict[str, Fraction]) -> tuple[str, ...]:
    return tuple(sorted(values, key=lambda tid: (-values[tid], tid)))


def score_all(
    source: Union[PDBSpace, InstanceStore], q: Query, kind: ScoreKind,
    cap: int | None = None,
) -> ScoreReport:
    """Score every endogenous tuple and rank them (value descending, ties by
    tuple id)."""
    kind = ScoreKind(kind)
    instance = _instance_of(source)
    tids = instance.endogenous_order
    entries: list[ScoreEntry] = []
    if kind in (ScoreKind.GCES, ScoreKind.CES_TID):
        if not isinstance(source, PDBSpace):
            raise InputError(f"{kind.value} needs a probability space")
        if kind is ScoreKind.CES_TID and not source.is_tid:
            raise InputError("ces-tid needs a tuple-independent space")
        for tid in tids:
            value, backend = _causal_effect(source, q, frozenset([tid]), cap)
            entries.append(ScoreEntry(tid, value, backend))
    elif kind is ScoreKind.CES_UI:
        uniform = make_uniform_tid(instance)
        for tid in tids:
            value, backend = _causal_effect(uniform, q, frozenset([tid]), cap)
            entries.append(ScoreEntry(tid, value, backend, positive_ceui=value > 0))
    elif kind in (ScoreKind.SHAPLEY, ScoreKind.BANZHAF, ScoreKind.POWER_TUPLE):
        worlds = EndoWorlds(instance, cap)
        values = worlds.value_table(q)
        n = len(worlds.order)
        weights = _shapley_weights(n) if kind is ScoreKind.SHAPLEY else None
        share = Fraction(1, 1 << max(n - 1, 0))
        for tid in tids:
            total = Fraction(0)
            for mask, bit in _swing_masks(worlds, tid):
                swing = values[mask | bit] - values[mask]
                if swing:
                    if kind is ScoreKind.SHAPLEY:
                        total += weights[mask.bit_count()] * swing
                    else:
                        total += swing
            if kind is ScoreKind.BANZHAF:
                total *= share
            entries.append(ScoreEntry(tid, total, BRUTE))
    elif kind is ScoreKind.WEIGHTED_POWER:
        if not isinstance(source, PDBSpace):
            raise InputError("weighted-power needs a probability space")
        worlds = EndoWorlds(instance, cap)
        values = worlds.value_table(q)
        masses = worlds.mass_table(source)
        for tid in tids:
            total = Fraction(0)
            for mask, bit in _swing_masks(worlds, tid):
                swing = values[mask | bit] - values[mask]
                if swing:
                    total += swing * masses[mask]
            entries.append(ScoreEntry(tid, total, BRUTE))
    else:  # pragma: no cover - ScoreKind is exhaustive
        raise InputError(f"unknown score kind {kind!r}")
    report_values = {e.tid: e.value for e in entries}
    return ScoreReport(
        kind=kind,
        query=query_text(q),
        n_endogenous=len(tids),
        entries=tuple(entries),
        ranking=_rank(report_values),
    )
