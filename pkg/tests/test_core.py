"""Instance, probability, and world-enumeration behavior."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalpdb import (
    ExplicitWorlds,
    InputError,
    InstanceStore,
    PDBSpace,
    Probability,
    RelationSchema,
    ResourceLimitError,
    TupleIndependent,
    TupleRecord,
    enumerate_worlds,
    load_pdb_file,
    make_uniform_tid,
    parse_pdb_document,
    space_to_document,
    tuple_probability,
    validate,
    world_probability,
)
from causalpdb.core import fraction_to_decimal, fraction_to_wire

from helpers import FIXTURES, four_worlds_space


def small_instance(n=3, kinds=None):
    kinds = kinds or ["endogenous"] * n
    schema = {"P": RelationSchema("P", 1)}
    recs = [TupleRecord(f"t{i+1}", "P", (f"c{i+1}",), kinds[i]) for i in range(n)]
    return InstanceStore(schema, recs)


# ---------------------------------------------------------------------------
# Probability values
# ---------------------------------------------------------------------------

def test_probability_parses_decimal_strings():
    assert Probability.from_wire("0.25") == Fraction(1, 4)
    assert Probability.from_wire("1") == 1
    assert Probability.from_wire("0.125") == Fraction(1, 8)


def test_probability_parses_rational_strings():
    assert Probability.from_wire("1/12") == Fraction(1, 12)
    assert Probability.from_wire("5/6") == Fraction(5, 6)


@pytest.mark.parametrize("bad", ["1.5", "-0.1", "7/6", "abc", "", "1/0"])
def test_probability_rejects_bad_strings(bad):
    with pytest.raises(InputError):
        Probability.from_wire(bad)


def test_probability_rejects_floats():
    with pytest.raises(InputError):
        Probability(0.25)
    with pytest.raises(InputError):
        Probability.from_wire(0.25)


def test_probability_arithmetic_degrades_to_fraction():
    result = Probability(1, 4) + Probability(1, 4)
    assert result == Fraction(1, 2)
    assert not isinstance(Probability(1, 4) - Probability(1, 2), Probability)


@given(st.fractions(min_value=0, max_value=1))
def test_wire_round_trip(value):
    assert Probability.from_wire(fraction_to_wire(value)) == value


def test_decimal_rendering():
    assert fraction_to_decimal(Fraction(21, 32)) == "0.656250"
    assert fraction_to_decimal(Fraction(1, 3)) == "0.333333"
    assert fraction_to_decimal(Fraction(-1, 2)) == "-0.500000"
    assert fraction_to_decimal(Fraction(2, 3)) == "0.666667"


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

def test_duplicate_tid_rejected():
    schema = {"P": RelationSchema("P", 1)}
    recs = [
        TupleRecord("t1", "P", ("a",), "endogenous"),
        TupleRecord("t1", "P", ("b",), "endogenous"),
    ]
    with pytest.raises(InputError, match="duplicate"):
        InstanceStore(schema, recs)


def test_arity_mismatch_rejected():
    schema = {"P": RelationSchema("P", 2)}
    with pytest.raises(InputError, match="expects 2"):
        InstanceStore(schema, [TupleRecord("t1", "P", ("a",), "endogenous")])


def test_undeclared_relation_rejected():
    with pytest.raises(InputError, match="undeclared"):
        InstanceStore({}, [TupleRecord("t1", "P", ("a",), "endogenous")])


def test_numeric_tag_enforced():
    schema = {"S": RelationSchema("S", 2, ("symbolic", "numeric"))}
    inst = InstanceStore(schema, [TupleRecord("t1", "S", ("a", 3), "endogenous")])
    assert inst.record("t1").args == ("a", Fraction(3))
    with pytest.raises(InputError, match="numeric"):
        InstanceStore(schema, [TupleRecord("t1", "S", ("a", "oops"), "endogenous")])


def test_partition_and_adom():
    inst = small_instance(3, ["endogenous", "exogenous", "endogenous"])
    assert inst.endogenous == {"t1", "t3"}
    assert inst.exogenous == {"t2"}
    assert inst.adom() == {"c1", "c2", "c3"}


def test_bad_kind_rejected():
    with pytest.raises(InputError, match="kind"):
        TupleRecord("t1", "P", ("a",), "internal")


# ---------------------------------------------------------------------------
# Validation diagnostics
# ---------------------------------------------------------------------------

def test_four_worlds_space_is_valid():
    assert validate(four_worlds_space()) == []


def test_total_mass_violation():
    inst = small_instance(2)
    space = PDBSpace(
        inst,
        ExplicitWorlds([({"t1"}, Fraction(1, 2)), ({"t2"}, Fraction(2, 5))]),
    )
    codes = [v.code for v in validate(space)]
    assert codes == ["mass-total"]


def test_exogenous_missing_violation():
    inst = small_instance(2, ["endogenous", "exogenous"])
    space = PDBSpace(inst, ExplicitWorlds([({"t1"}, Fraction(1))]))
    codes = [v.code for v in validate(space)]
    assert "exogenous-missing" in codes


def test_zero_mass_world_may_omit_exogenous():
    inst = small_instance(2, ["endogenous", "exogenous"])
    space = PDBSpace(
        inst,
        ExplicitWorlds([({"t1", "t2"}, Fraction(1)), ({"t1"}, Fraction(0))]),
    )
    assert validate(space) == []


def test_tid_validation():
    inst = small_instance(2, ["endogenous", "exogenous"])
    space = PDBSpace(inst, TupleIndependent({"t1": Probability(1, 2)}))
    codes = sorted(v.code for v in validate(space))
    assert codes == ["missing-marginal"]
    space = PDBSpace(
        inst,
        TupleIndependent({"t1": Probability(1, 2), "t2": Probability(1, 2)}),
    )
    assert [v.code for v in validate(space)] == ["exogenous-marginal"]


def test_duplicate_world_entries_merge():
    inst = small_instance(1)
    space = PDBSpace(
        inst,
        ExplicitWorlds([({"t1"}, Fraction(1, 2)), ({"t1"}, Fraction(1, 2))]),
    )
    assert validate(space) == []
    assert world_probability(space, {"t1"}) == 1


# ---------------------------------------------------------------------------
# World and tuple probabilities
# ---------------------------------------------------------------------------

def test_world_probability_explicit():
    space = four_worlds_space()
    assert world_probability(space, {"t2", "t6"}) == Fraction(2, 5)
    assert world_probability(space, {"t1"}) == 0
    with pytest.raises(InputError):
        world_probability(space, {"nope"})


def test_world_probability_tid_product():
    inst = paths6()
    space = PDBSpace(inst, TupleIndependent({
        "t1": Probability.from_wire("0.9"), "t2": Probability.from_wire("0.3"),
        "t3": Probability.from_wire("0.8"), "t4": Probability.from_wire("0.5"),
        "t5": Probability.from_wire("0.9"), "t6": Probability.from_wire("0.2"),
    }))
    assert world_probability(space, {"t1", "t4", "t5"}) == Fraction(567, 12500)


def paths6():
    schema = {"E": RelationSchema("E", 2)}
    pairs = [("a", "b"), ("a", "c"), ("c", "b"), ("a", "d"), ("d", "e"), ("e", "b")]
    recs = [
        TupleRecord(f"t{i+1}", "E", pair, "endogenous")
        for i, pair in enumerate(pairs)
    ]
    return InstanceStore(schema, recs)


def test_sure_tuple_absent_means_zero():
    inst = small_instance(1)
    space = PDBSpace(inst, TupleIndependent({"t1": Probability(1)}))
    assert world_probability(space, set()) == 0


def test_tuple_probability_four_worlds():
    space = four_worlds_space()
    assert tuple_probability(space, "t1") == Fraction(9, 20)
    assert tuple_probability(space, "t5") == 0
    with pytest.raises(InputError):
        tuple_probability(space, "t99")


def test_exogenous_tuple_probability_is_one():
    inst = small_instance(2, ["endogenous", "exogenous"])
    space = PDBSpace(
        inst,
        ExplicitWorlds([({"t1", "t2"}, Fraction(1, 3)), ({"t2"}, Fraction(2, 3))]),
    )
    assert tuple_probability(space, "t2") == 1


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def test_enumerate_four_worlds():
    worlds = list(enumerate_worlds(four_worlds_space()))
    assert len(worlds) == 4
    assert sum(m for _, m in worlds) == 1


def test_uniform_cube():
    space = make_uniform_tid(small_instance(3))
    worlds = list(enumerate_worlds(space))
    assert len(worlds) == 8
    assert all(m == Fraction(1, 8) for _, m in worlds)


def test_zero_marginal_tuple_never_appears():
    inst = small_instance(2)
    space = PDBSpace(
        inst,
        TupleIndependent({"t1": Probability(0), "t2": Probability(1, 2)}),
    )
    worlds = list(enumerate_worlds(space))
    assert all("t1" not in w for w, _ in worlds)
    assert sum(m for _, m in worlds) == 1


def test_exogenous_only_instance_single_world():
    inst = small_instance(2, ["exogenous", "exogenous"])
    worlds = list(enumerate_worlds(make_uniform_tid(inst)))
    assert worlds == [(frozenset({"t1", "t2"}), Fraction(1))]


def test_uniform_tid_marginals_respect_the_partition():
    from helpers import power_p_space

    inst = power_p_space().instance  # t1 exogenous, t2..t4 endogenous
    uniform = make_uniform_tid(inst)
    marginals = uniform.representation.marginals
    assert marginals["t1"] == 1
    assert all(marginals[t] == Fraction(1, 2) for t in ("t2", "t3", "t4"))


def test_canonical_order_is_lexicographic():
    inst = small_instance(4, ["endogenous", "exogenous", "endogenous", "endogenous"])
    space = make_uniform_tid(inst)
    keys = [tuple(sorted(w)) for w, _ in enumerate_worlds(space)]
    assert keys == sorted(keys)
    assert len(keys) == 8


def test_enumeration_cap():
    inst = small_instance(6)
    space = make_uniform_tid(inst)
    with pytest.raises(ResourceLimitError, match="cap of 4"):
        list(enumerate_worlds(space, cap=4))
    assert len(list(enumerate_worlds(space, cap=6))) == 64


def test_enumeration_scales_to_mid_sized_spaces():
    space = make_uniform_tid(small_instance(14))
    total = Fraction(0)
    count = 0
    for _, mass in enumerate_worlds(space):
        total += mass
        count += 1
    assert count == 1 << 14
    assert total == 1


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.fractions(min_value=0, max_value=1), min_size=1, max_size=6)
)
def test_tid_enumeration_invariants(marginals):
    inst = small_instance(len(marginals))
    space = PDBSpace(
        inst,
        TupleIndependent(
            {f"t{i+1}": Probability(m) for i, m in enumerate(marginals)}
        ),
    )
    worlds = list(enumerate_worlds(space))
    assert sum(m for _, m in worlds) == 1
    if all(0 < m < 1 for m in marginals):
        assert len(worlds) == 2 ** len(marginals)
    for tid in inst.tids:
        collected = sum((m for w, m in worlds if tid in w), Fraction(0))
        assert collected == tuple_probability(space, tid)
    for world, mass in worlds:
        assert world_probability(space, world) == mass


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------

def test_load_fixture_round_trip():
    doc = load_pdb_file(FIXTURES / "four_worlds_pdb.json")
    assert doc.space is not None
    again = parse_pdb_document(space_to_document(doc.space))
    assert again.space.support() == doc.space.support()


def test_document_without_distribution():
    doc = load_pdb_file(FIXTURES / "paths_instance.json")
    assert doc.space is None
    assert len(doc.instance) == 6


def test_document_with_both_distributions_rejected():
    raw = json.loads((FIXTURES / "four_worlds_pdb.json").read_text())
    raw["marginals"] = {"t1": "0.5"}
    with pytest.raises(InputError, match="not both"):
        parse_pdb_document(raw)


def test_float_probability_rejected():
    raw = json.loads((FIXTURES / "four_worlds_pdb.json").read_text())
    raw["worlds"][0]["p"] = 0.2
    with pytest.raises(InputError):
        parse_pdb_document(raw)


def test_float_constant_rejected():
    raw = {
        "schema": {"S": ["symbolic", "numeric"]},
        "tuples": [
            {"tid": "t1", "predicate": "S", "args": ["a", 0.5], "kind": "endogenous"}
        ],
    }
    with pytest.raises(InputError, match="float"):
        parse_pdb_document(raw)


def test_rational_marginals_parse():
    raw = {
        "schema": {"P": 1},
        "tuples": [
            {"tid": "t1", "predicate": "P", "args": ["a"], "kind": "endogenous"}
        ],
        "marginals": {"t1": "1/3"},
    }
    doc = parse_pdb_document(raw)
    assert tuple_probability(doc.space, "t1") == Fraction(1, 3)
