"""Counterfactually intervened distributions: force endogenous tuples into
or out of every world and push the mass along.

On an explicit space each world is mapped to (W minus the out-targets) union
the in-targets and masses of colliding images are merged; on a
tuple-independent space the targets' marginals become 1 or 0 and every other
marginal is untouched, so the result is again tuple-independent.  A single
application may mix in- and out-targets (two disjoint sets pushed jointly);
the plain do(T in) / do(T out) constructors cover the common case.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .core import (
    ExplicitWorlds,
    InputError,
    PDBSpace,
    Probability,
    TupleIndependent,
    enumerate_worlds,
)
from .queries import Aggregate, Query, evaluate, expected_value, is_boolean


@dataclass(frozen=True)
class Intervention:
    """Disjoint sets of endogenous tuples to force present (``ins``) and
    absent (``outs``); at least one target overall."""

    ins: frozenset[str] = frozenset()
    outs: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ins", frozenset(self.ins))
        object.__setattr__(self, "outs", frozenset(self.outs))
        if not self.ins and not self.outs:
            raise InputError("intervention needs at least one target tuple")
        overlap = self.ins & self.outs
        if overlap:
            raise InputError(
                f"tuples {sorted(overlap)} cannot be forced both in and out"
            )

    @classmethod
    def do_in(cls, targets: Union[str, Iterable[str]]) -> "Intervention":
        return cls(ins=_as_set(targets))

    @classmethod
    def do_out(cls, targets: Union[str, Iterable[str]]) -> "Intervention":
        return cls(outs=_as_set(targets))

    @property
    def targets(self) -> frozenset[str]:
        return self.ins | self.outs

    def push(self, world: frozenset[str]) -> frozenset[str]:
        return (world - self.outs) | self.ins

    def __str__(self) -> str:
        parts = []
        if self.ins:
            parts.append("do({} in)".format(",".join(sorted(self.ins))))
        if self.outs:
            parts.append("do({} out)".format(",".join(sorted(self.outs))))
        return " ".join(parts)


def _as_set(targets) -> frozenset[str]:
    if isinstance(targets, str):
        return frozenset([targets])
    return frozenset(targets)


class IntervenedSpace(PDBSpace):
    """The push-forward of a base space under an intervention; usable
    anywhere a plain space is."""

    def __init__(self, base: PDBSpace, intervention: Intervention, representation):
        super().__init__(base.instance, representation)
        self.base = base
        self.intervention = intervention


def intervene(pdb: PDBSpace, iv: Intervention) -> IntervenedSpace:
    """Apply an intervention, keeping the representation kind of the base."""
    pdb.instance.require_endogenous(iv.targets)
    rep = pdb.representation
    if isinstance(rep, ExplicitWorlds):
        pushed: dict[frozenset[str], Fraction] = {}
        for world, mass in rep.masses.items():
            image = iv.push(world)
            pushed[image] = pushed.get(image, Fraction(0)) + mass
        return IntervenedSpace(pdb, iv, ExplicitWorlds(pushed.items()))
    assert isinstance(rep, TupleIndependent)
    marginals = dict(rep.marginals)
    for tid in iv.ins:
        marginals[tid] = Probability(1)
    for tid in iv.outs:
        marginals[tid] = Probability(0)
    return IntervenedSpace(pdb, iv, TupleIndependent(marginals))


def intervened_query_value(
    pdb: PDBSpace, q: Query, iv: Intervention, value, cap: int | None = None
) -> Probability:
    """P(Q = value) under the intervened distribution, computed directly as
    the base-world sum of masses whose pushed world evaluates to ``value``
    (no materialization of the intervened space)."""
    pdb.instance.require_endogenous(iv.targets)
    if is_boolean(q) and value not in (0, 1):
        raise InputError(f"Boolean queries take values 0 or 1, not {value!r}")
    total = Fraction(0)
    for world, mass in enumerate_worlds(pdb, cap):
        if evaluate(q, pdb.instance, iv.push(world)) == value:
            total += mass
    return Probability(total)


def intervened_expectation(
    pdb: PDBSpace, q: Aggregate, iv: Intervention, cap: int | None = None
) -> Fraction:
    """Expectation of a scalar aggregate under the materialized intervened
    space."""
    if not isinstance(q, Aggregate):
        raise InputError("intervened_expectation takes an aggregate query")
    return expected_value(intervene(pdb, iv), q, cap)
