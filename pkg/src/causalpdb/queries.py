"""Monotone queries over instances: concrete grammar, homomorphism
evaluation, structural analysis, and exact query probability.

Supported query classes: Boolean conjunctive queries, unions of them, and
scalar SUM/COUNT aggregates over a conjunctive body.  Query probability is
computed either by brute-force world enumeration or, for self-join-free
hierarchical BCQs on tuple-independent spaces, by lifted inference: split
the query into variable-connected components (independent, probabilities
multiply), read ground atoms off the marginals, and otherwise ground a root
variable that occurs in every atom of its component, combining groundings
as independent disjuncts.

Query grammar, one rule per line (``;`` also separates rules, ``#`` starts
a comment)::

    Q() :- R1(X,Y), R2(Y), R3(Z)
    Q(sum(Y)) :- S(X,Y)
    Q(count()) :- E(X,Y)

Several Boolean rules with the same head form a union.  Variables start
uppercase; constants are lowercase identifiers, quoted strings, or numeric
literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .core import (
    Constant,
    InputError,
    InstanceStore,
    PDBSpace,
    Probability,
    RelationSchema,
    TupleIndependent,
    TupleRecord,
    constant_repr,
    enumerate_worlds,
)

SUM = "sum"
COUNT = "count"


class QuerySyntaxError(InputError):
    """Query text rejected, with a line/column position in the message."""


class DichotomyError(Exception):
    """The lifted backend was asked to evaluate a query outside its PTIME
    class (non-hierarchical, self-joins, a union, or a non-independent
    space); exact evaluation then falls to the brute-force backend."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Var, Constant]


def term_repr(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, str):
        return term if re.fullmatch(r"[a-z_][A-Za-z0-9_]*", term) else f'"{term}"'
    return constant_repr(term)


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple[Term, ...]

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(t.name for t in self.terms if isinstance(t, Var))

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(term_repr(t) for t in self.terms)})"


@dataclass(frozen=True)
class BCQ:
    atoms: tuple[Atom, ...]

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(v for a in self.atoms for v in a.variables)

    def __str__(self) -> str:
        return ", ".join(str(a) for a in self.atoms)


@dataclass(frozen=True)
class UBCQ:
    disjuncts: tuple[BCQ, ...]

    def __str__(self) -> str:
        return " ; ".join(str(d) for d in self.disjuncts)


@dataclass(frozen=True)
class Aggregate:
    op: str  # SUM or COUNT
    target: Var | None
    atoms: tuple[Atom, ...]

    def __str__(self) -> str:
        head = f"sum({self.target})" if self.op == SUM else "count()"
        return f"{head} :- " + ", ".join(str(a) for a in self.atoms)


@dataclass(frozen=True)
class QueryOfSet:
    """The monotone Boolean query that is true exactly on supersets of a
    fixed tuple-id set."""

    base: frozenset[str]

    def __str__(self) -> str:
        return "contains{" + ",".join(sorted(self.base)) + "}"


@dataclass(frozen=True)
class ConjQuery:
    """World-level conjunction of monotone Boolean queries."""

    parts: tuple["BooleanQuery", ...]

    def __str__(self) -> str:
        return " AND ".join(f"({p})" for p in self.parts)


@dataclass(frozen=True)
class DisjQuery:
    """World-level disjunction of monotone Boolean queries."""

    parts: tuple["BooleanQuery", ...]

    def __str__(self) -> str:
        return " OR ".join(f"({p})" for p in self.parts)


BooleanQuery = Union[BCQ, UBCQ, QueryOfSet, ConjQuery, DisjQuery]
Query = Union[BooleanQuery, Aggregate]


def is_boolean(q: Query) -> bool:
    return not isinstance(q, Aggregate)


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>:-)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<comma>,)
  | (?P<dot>\.)
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line_no: int) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise QuerySyntaxError(
                f"line {line_no}, column {pos + 1}: unexpected character {text[pos]!r}"
            )
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, match.group(), line_no, pos + 1))
        pos = match.end()
    return tokens


class _RuleParser:
    def __init__(self, tokens: list[_Token], line_no: int):
        self.tokens = tokens
        self.line_no = line_no
        self.pos = 0

    def error(self, message: str) -> QuerySyntaxError:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            where = f"line {tok.line}, column {tok.col}"
        else:
            where = f"line {self.line_no}, end of rule"
        return QuerySyntaxError(f"{where}: {message}")

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.error(f"expected {what}")
        self.pos += 1
        return tok

    def parse_rule(self) -> tuple[str, tuple[str, Var | None], tuple[Atom, ...]]:
        head_name = self.take("ident", "query name").text
        self.take("lp", "'('")
        head: tuple[str, Var | None] = ("boolean", None)
        tok = self.peek()
        if tok is not None and tok.kind == "ident":
            if tok.text in (SUM, COUNT):
                op = tok.text
                self.pos += 1
                self.take("lp", "'('")
                target: Var | None = None
                if op == SUM:
                    name = self.take("ident", "aggregation variable").text
                    if not name[0].isupper():
                        raise self.error(
                            f"aggregation target {name!r} must be a variable"
                        )
                    target = Var(name)
                self.take("rp", "')'")
                head = (op, target)
            else:
                raise self.error(
                    f"free variables are not supported; head must be (), "
                    f"(sum(V)) or (count()), got {tok.text!r}"
                )
        self.take("rp", "')'")
        self.take("arrow", "':-'")
        atoms = [self.parse_atom()]
        while self.peek() is not None and self.peek().kind == "comma":
            self.pos += 1
            atoms.append(self.parse_atom())
        if self.peek() is not None and self.peek().kind == "dot":
            self.pos += 1
        if self.peek() is not None:
            raise self.error(f"unexpected token {self.peek().text!r}")
        return head_name, head, tuple(atoms)

    def parse_atom(self) -> Atom:
        pred = self.take("ident", "relation name").text
        self.take("lp", "'('")
        terms: list[Term] = []
        if self.peek() is not None and self.peek().kind != "rp":
            terms.append(self.parse_term())
            while self.peek() is not None and self.peek().kind == "comma":
                self.pos += 1
                terms.append(self.parse_term())
        self.take("rp", "')'")
        return Atom(pred, tuple(terms))

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self.error("expected a term")
        self.pos += 1
        if tok.kind == "number":
            return Fraction(tok.text)
        if tok.kind == "string":
            return tok.text[1:-1]
        if tok.kind == "ident":
            if tok.text[0].isupper():
                return Var(tok.text)
            return tok.text
        self.pos -= 1
        raise self.error(f"expected a term, got {tok.text!r}")


def parse_query(
    text: str, schema: Mapping[str, RelationSchema] | None = None
) -> Query:
    """Parse query text into an AST.  With a schema, relation names and
    arities are checked; without one, any atom is accepted."""
    rules = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        for piece in line.split(";"):
            tokens = _tokenize(piece, line_no)
            if not tokens:
                continue
            rules.append(_RuleParser(tokens, line_no).parse_rule())
    if not rules:
        raise QuerySyntaxError("no query rule found")
    names = {name for name, _, _ in rules}
    if len(names) > 1:
        raise QuerySyntaxError(
            f"all rules must share one head name, got {sorted(names)}"
        )
    heads = {head for _, head, _ in rules}
    if len(heads) > 1:
        raise QuerySyntaxError("rules mix aggregate and Boolean heads")
    (op, target), = heads
    if schema is not None:
        for _, _, atoms in rules:
            for atom in atoms:
                decl = schema.get(atom.predicate)
                if decl is None:
                    raise QuerySyntaxError(f"unknown relation {atom.predicate!r}")
                if len(atom.terms) != decl.arity:
                    raise QuerySyntaxError(
                        f"relation {atom.predicate!r} expects {decl.arity} "
                        f"arguments, got {len(atom.terms)} in {atom}"
                    )
    if op == "boolean":
        disjuncts = tuple(BCQ(atoms) for _, _, atoms in rules)
        return disjuncts[0] if len(disjuncts) == 1 else UBCQ(disjuncts)
    if len(rules) > 1:
        raise QuerySyntaxError("aggregate queries take a single rule")
    atoms = rules[0][2]
    if target is not None:
        body_vars = frozenset(v for a in atoms for v in a.variables)
        if target.name not in body_vars:
            raise QuerySyntaxError(
                f"aggregation target {target.name!r} does not occur in the body"
            )
    return Aggregate(op, target, atoms)


def load_query_file(path, schema=None) -> Query:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_query(handle.read(), schema)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

FactIndex = dict  # predicate -> tuple of args-tuples


def fact_index(facts: Iterable[tuple[str, tuple[Constant, ...]]]) -> FactIndex:
    index: dict[str, list] = {}
    for pred, args in facts:
        index.setdefault(pred, []).append(args)
    return index


def _unify(atom: Atom, args: tuple[Constant, ...], binding: dict) -> dict | None:
    # Constants are str or Fraction; cross-type values never compare equal.
    new = None
    for term, value in zip(atom.terms, args):
        if isinstance(term, Var):
            if new is not None and term.name in new:
                bound = new[term.name]
            else:
                bound = binding.get(term.name, _UNSET)
            if bound is _UNSET:
                if new is None:
                    new = {}
                new[term.name] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    if new is None:
        return binding
    merged = dict(binding)
    merged.update(new)
    return merged


_UNSET = object()


def _satisfied(atoms: tuple[Atom, ...], index: FactIndex, binding: dict) -> bool:
    if not atoms:
        return True
    atom, rest = atoms[0], atoms[1:]
    for args in index.get(atom.predicate, ()):
        merged = _unify(atom, args, binding)
        if merged is not None and _satisfied(rest, index, merged):
            return True
    return False


def _assignments(
    atoms: tuple[Atom, ...], index: FactIndex, binding: dict
) -> Iterator[dict]:
    if not atoms:
        yield binding
        return
    atom, rest = atoms[0], atoms[1:]
    for args in index.get(atom.predicate, ()):
        merged = _unify(atom, args, binding)
        if merged is not None:
            yield from _assignments(rest, index, merged)


def eval_boolean(q: BooleanQuery, facts: Iterable[tuple[str, tuple]]) -> int:
    """1 iff some homomorphism maps the query (one disjunct, for unions)
    into the given fact set."""
    index = fact_index(facts)
    return _eval_boolean_indexed(q, index)


def _eval_boolean_indexed(q: BooleanQuery, index: FactIndex) -> int:
    if isinstance(q, BCQ):
        return int(_satisfied(q.atoms, index, {}))
    if isinstance(q, UBCQ):
        return int(any(_satisfied(d.atoms, index, {}) for d in q.disjuncts))
    raise InputError(f"cannot evaluate {type(q).__name__} on bare facts")


def distinct_assignments(
    atoms: tuple[Atom, ...], facts: Iterable[tuple[str, tuple]]
) -> set[tuple]:
    """Distinct full assignments of the body variables admitting a
    homomorphism, each as a tuple sorted by variable name."""
    index = fact_index(facts)
    seen = set()
    for binding in _assignments(atoms, index, {}):
        seen.add(tuple(sorted(binding.items())))
    return seen


def eval_aggregate(q: Aggregate, facts: Iterable[tuple[str, tuple]]) -> Fraction:
    """SUM adds the target value once per distinct body assignment; COUNT
    counts distinct assignments."""
    assignments = distinct_assignments(q.atoms, facts)
    if q.op == COUNT:
        return Fraction(len(assignments))
    total = Fraction(0)
    for assignment in assignments:
        value = dict(assignment)[q.target.name]
        if not isinstance(value, Fraction):
            raise InputError(
                f"non-numeric value {value!r} at aggregation target {q.target}"
            )
        total += value
    return total


def evaluate(q: Query, instance: InstanceStore, tids: Iterable[str]):
    """Evaluate any query on the world given by a tuple-id set: 0/1 for
    Boolean forms, an exact rational for aggregates."""
    world = frozenset(tids)
    if isinstance(q, QueryOfSet):
        return int(q.base <= world)
    if isinstance(q, ConjQuery):
        return min(evaluate(p, instance, world) for p in q.parts)
    if isinstance(q, DisjQuery):
        return max(evaluate(p, instance, world) for p in q.parts)
    facts = instance.facts(world)
    if isinstance(q, Aggregate):
        return eval_aggregate(q, facts)
    return eval_boolean(q, facts)


# ---------------------------------------------------------------------------
# Structure
# ---------------------------------------------------------------------------

def is_self_join_free(q: BCQ) -> bool:
    preds = [a.predicate for a in q.atoms]
    return len(preds) == len(set(preds))


def _atoms_of_vars(q: BCQ) -> dict[str, frozenset[int]]:
    occ: dict[str, set[int]] = {}
    for i, atom in enumerate(q.atoms):
        for v in atom.variables:
            occ.setdefault(v, set()).add(i)
    return {v: frozenset(s) for v, s in occ.items()}


def is_hierarchical(q: BCQ) -> bool:
    """True iff every variable pair has nested or disjoint atom sets."""
    return hierarchy_violation(q) is None


def hierarchy_violation(q: BCQ) -> tuple[str, str] | None:
    """The first variable pair breaking the hierarchy condition, or None."""
    occ = _atoms_of_vars(q)
    names = sorted(occ)
    for i, x in enumerate(names):
        for y in names[i + 1:]:
            ax, ay = occ[x], occ[y]
            if not (ax <= ay or ay <= ax or not (ax & ay)):
                return (x, y)
    return None


@dataclass(frozen=True)
class ComponentPartition:
    """Variable-connected components of a BCQ's atoms (atom indices, in
    first-occurrence order; variable-free atoms are singletons)."""

    atoms: tuple[Atom, ...]
    groups: tuple[tuple[int, ...], ...]

    def atom_groups(self) -> tuple[tuple[Atom, ...], ...]:
        return tuple(tuple(self.atoms[i] for i in grp) for grp in self.groups)

    def subquery(self, index: int) -> BCQ:
        return BCQ(tuple(self.atoms[i] for i in self.groups[index]))

    def __len__(self) -> int:
        return len(self.groups)


def components(q: BCQ) -> ComponentPartition:
    n = len(q.atoms)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_var: dict[str, int] = {}
    for i, atom in enumerate(q.atoms):
        for v in atom.variables:
            if v in by_var:
                ri, rj = find(i), find(by_var[v])
                if ri != rj:
                    parent[ri] = rj
            else:
                by_var[v] = i
    grouped: dict[int, list[int]] = {}
    for i in range(n):
        grouped.setdefault(find(i), []).append(i)
    groups = tuple(
        tuple(members) for _, members in sorted(
            grouped.items(), key=lambda item: min(item[1])
        )
    )
    return ComponentPartition(q.atoms, groups)


# ---------------------------------------------------------------------------
# Query probability
# ---------------------------------------------------------------------------

def lifted_rejections(pdb: PDBSpace, q: Query) -> list[str]:
    """Why the lifted backend cannot run; empty means eligible."""
    reasons = []
    if not pdb.is_tid:
        reasons.append("the space is not tuple-independent")
    if isinstance(q, UBCQ):
        reasons.append("the query is a union, outside the hierarchical BCQ class")
    elif not isinstance(q, BCQ):
        reasons.append(f"the query is not a BCQ ({type(q).__name__})")
    else:
        if not is_self_join_free(q):
            reasons.append("the query has self-joins, outside the dichotomy's scope")
        elif not is_hierarchical(q):
            pair = hierarchy_violation(q)
            reasons.append(
                f"the query is non-hierarchical (variables {pair[0]} and {pair[1]} "
                f"overlap without containment), so exact evaluation is #P-hard"
            )
    return reasons


def query_probability(
    pdb: PDBSpace, q: Query, backend: str = "auto", cap: int | None = None
) -> Probability:
    """Exact probability that a monotone Boolean query holds.

    ``brute`` sums masses over the enumerated worlds; ``lifted`` runs the
    safe-plan recursion and requires a self-join-free hierarchical BCQ on a
    tuple-independent space; ``auto`` picks lifted when eligible.
    """
    if isinstance(q, Aggregate):
        raise InputError("aggregate queries have expectations, not probabilities")
    if backend not in ("auto", "brute", "lifted"):
        raise InputError(f"unknown backend {backend!r}")
    reasons = lifted_rejections(pdb, q)
    if backend == "lifted" and reasons:
        raise DichotomyError("; ".join(reasons))
    if backend == "brute" or (backend == "auto" and reasons):
        total = Fraction(0)
        for world, mass in enumerate_worlds(pdb, cap):
            if evaluate(q, pdb.instance, world):
                total += mass
        return Probability(total)
    return Probability(_lifted(pdb, q))


def expected_value(pdb: PDBSpace, q: Aggregate, cap: int | None = None) -> Fraction:
    """Exact expectation of a scalar aggregate by world enumeration."""
    if not isinstance(q, Aggregate):
        raise InputError("expected_value takes an aggregate query")
    total = Fraction(0)
    for world, mass in enumerate_worlds(pdb, cap):
        total += mass * evaluate(q, pdb.instance, world)
    return total


def _fact_probabilities(pdb: PDBSpace) -> dict[str, dict[tuple, Fraction]]:
    rep = pdb.representation
    assert isinstance(rep, TupleIndependent)
    absent: dict[str, dict[tuple, Fraction]] = {}
    for rec in pdb.instance.records():
        marginal = rep.marginals.get(rec.tid)
        if marginal is None:
            raise InputError(f"tuple {rec.tid!r} has no marginal")
        per_pred = absent.setdefault(rec.predicate, {})
        per_pred[rec.args] = per_pred.get(rec.args, Fraction(1)) * (1 - marginal)
    return {
        pred: {args: 1 - q for args, q in entries.items()}
        for pred, entries in absent.items()
    }


def _substitute(atoms: tuple[Atom, ...], var: str, value: Constant) -> tuple[Atom, ...]:
    out = []
    for atom in atoms:
        terms = tuple(
            value if isinstance(t, Var) and t.name == var else t for t in atom.terms
        )
        out.append(Atom(atom.predicate, terms))
    return tuple(out)


def _root_candidates(
    atom: Atom, var: str, facts: dict[tuple, Fraction]
) -> set[Constant]:
    found: set[Constant] = set()
    for args in facts:
        value = None
        ok = True
        for term, arg in zip(atom.terms, args):
            if isinstance(term, Var):
                if term.name == var:
                    if value is None:
                        value = arg
                    elif value != arg:
                        ok = False
                        break
            elif term != arg:
                ok = False
                break
        if ok and value is not None:
            found.add(value)
    return found


def _lifted(pdb: PDBSpace, q: BCQ) -> Fraction:
    fact_probs = _fact_probabilities(pdb)

    def prob(atoms: tuple[Atom, ...]) -> Fraction:
        if not atoms:
            return Fraction(1)
        parts = components(BCQ(atoms)).atom_groups()
        if len(parts) > 1:
            result = Fraction(1)
            for group in parts:
                result *= prob(group)
            return result
        if len(atoms) == 1 and not atoms[0].variables:
            return fact_probs.get(atoms[0].predicate, {}).get(
                atoms[0].terms, Fraction(0)
            )
        coverage: dict[str, int] = {}
        for atom in atoms:
            for v in atom.variables:
                coverage[v] = coverage.get(v, 0) + 1
        roots = sorted(v for v, c in coverage.items() if c == len(atoms))
        if not roots:
            raise DichotomyError(
                "no variable occurs in every atom of a connected component; "
                "the component is non-hierarchical"
            )
        root = roots[0]
        candidates: set[Constant] | None = None
        for atom in atoms:
            here = _root_candidates(
                atom, root, fact_probs.get(atom.predicate, {})
            )
            candidates = here if candidates is None else candidates & here
        miss = Fraction(1)
        for value in sorted(candidates, key=lambda c: (isinstance(c, str), str(c))):
            miss *= 1 - prob(_substitute(atoms, root, value))
        return 1 - miss

    return prob(q.atoms)


# ---------------------------------------------------------------------------
# Minimal satisfiable sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MssFamily:
    """All minimal tuple-id sets making the query true; no member contains
    another."""

    sets: tuple[frozenset[str], ...]

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def as_lists(self) -> list[list[str]]:
        return [sorted(s) for s in self.sets]


def _record_assignments(
    atoms: tuple[Atom, ...], by_pred: dict[str, list[TupleRecord]],
    binding: dict, chosen: list[str]
) -> Iterator[frozenset[str]]:
    if not atoms:
        yield frozenset(chosen)
        return
    atom, rest = atoms[0], atoms[1:]
    for rec in by_pred.get(atom.predicate, ()):
        merged = _unify(atom, rec.args, binding)
        if merged is not None:
            chosen.append(rec.tid)
            yield from _record_assignments(rest, by_pred, merged, chosen)
            chosen.pop()


def minimal_satisfiable_sets(instance: InstanceStore, q: BooleanQuery) -> MssFamily:
    """The minimal homomorphism images (as tuple-id sets) of a BCQ or a
    union of BCQs into the instance."""
    if isinstance(q, BCQ):
        disjuncts: tuple[BCQ, ...] = (q,)
    elif isinstance(q, UBCQ):
        disjuncts = q.disjuncts
    else:
        raise InputError(
            f"minimal satisfiable sets are defined for BCQs and unions, "
            f"not {type(q).__name__}"
        )
    by_pred: dict[str, list[TupleRecord]] = {}
    for rec in instance.records():
        by_pred.setdefault(rec.predicate, []).append(rec)
    images: set[frozenset[str]] = set()
    for disjunct in disjuncts:
        images.update(_record_assignments(disjunct.atoms, by_pred, {}, []))
    minimal: list[frozenset[str]] = []
    for image in sorted(images, key=len):
        if not any(kept <= image for kept in minimal):
            minimal.append(image)
    return MssFamily(tuple(sorted(minimal, key=lambda s: tuple(sorted(s)))))


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------

def is_monotone_check(q: Query, instance: InstanceStore, exhaustive_cap: int = 12) -> bool:
    """Boolean forms and COUNT are structurally monotone.  SUM is monotone
    when every reachable target value is nonnegative; with negative values
    in reach the check falls back to exhaustively testing single-tuple
    additions on small instances, and answers False beyond the cap."""
    if not isinstance(q, Aggregate):
        return True
    if q.op == COUNT:
        return True
    full = instance.tids
    values = [
        dict(assignment)[q.target.name]
        for assignment in distinct_assignments(q.atoms, instance.facts(full))
    ]
    if all(isinstance(v, Fraction) and v >= 0 for v in values):
        return True
    if len(full) > exhaustive_cap:
        return False
    tids = sorted(full)
    for mask in range(1 << len(tids)):
        world = frozenset(t for i, t in enumerate(tids) if mask >> i & 1)
        base = evaluate(q, instance, world)
        for tid in tids:
            if tid not in world:
                if evaluate(q, instance, world | {tid}) < base:
                    return False
    return True


def query_text(q: Query) -> str:
    return str(q)
