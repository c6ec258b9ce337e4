"""Finite relational structures and the morphism toolbox.

Structures are immutable: a signature, a domain 0..n-1 and one tuple set per
relation symbol.  Everything downstream (shop searches, model checking, core
computation) builds on the operations here: complement, disjoint union,
induced substructures, the interchangeability quotient, witness searches for
the five morphism kinds, isomorphism and Boolean closure tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from .errors import FomcError, ParseError, SignatureMismatchError
from .shops import HyperMap, inverse

MORPHISM_KINDS = ("homomorphism", "injective", "full", "fullSurjective", "surjectiveHyper")


@dataclass(frozen=True)
class Signature:
    """Ordered relation symbols; canonical order is by name."""

    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise FomcError("duplicate relation symbol")
        for name, arity in self.symbols:
            if arity < 1:
                raise FomcError(f"arity of {name} must be positive")
        object.__setattr__(self, "symbols", tuple(sorted(self.symbols)))

    @staticmethod
    def make(*symbols: tuple[str, int]) -> "Signature":
        return Signature(tuple(symbols))

    def arity(self, name: str) -> int:
        for sym, arity in self.symbols:
            if sym == name:
                return arity
        raise FomcError(f"unknown relation symbol {name!r}")

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def __contains__(self, name: str) -> bool:
        return any(sym == name for sym, _ in self.symbols)


GRAPH_SIGNATURE = Signature.make(("E", 2))


@dataclass(frozen=True)
class Structure:
    """Finite relational structure with elements 0..size-1.

    ``rels`` stores (name, tuple set) pairs sorted by symbol name.  The
    optional ``name`` is a display label and takes no part in equality.
    """

    signature: Signature
    size: int
    rels: tuple[tuple[str, frozenset[tuple[int, ...]]], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.size < 1:
            raise FomcError("domain must be nonempty")
        stored = dict(self.rels)
        if set(stored) != set(self.signature.names()):
            raise FomcError("relations must match the signature symbols")
        for sym, arity in self.signature.symbols:
            for t in stored[sym]:
                if len(t) != arity:
                    raise FomcError(f"tuple {t} has wrong arity for {sym}/{arity}")
                if any(not (0 <= e < self.size) for e in t):
                    raise FomcError(f"tuple {t} outside domain of size {self.size}")
        object.__setattr__(
            self, "rels",
            tuple((sym, frozenset(stored[sym])) for sym, _ in self.signature.symbols))

    @staticmethod
    def make(signature: Signature, size: int,
             relations: Mapping[str, Iterable[Sequence[int]]],
             name: str = "") -> "Structure":
        rels = tuple((sym, frozenset(tuple(t) for t in relations.get(sym, ())))
                     for sym, _ in signature.symbols)
        return Structure(signature, size, rels, name)

    @cached_property
    def relations(self) -> dict[str, frozenset[tuple[int, ...]]]:
        return dict(self.rels)

    def relation(self, name: str) -> frozenset[tuple[int, ...]]:
        try:
            return self.relations[name]
        except KeyError:
            raise FomcError(f"unknown relation symbol {name!r}") from None

    def total_tuples(self) -> int:
        return sum(len(ts) for _, ts in self.rels)

    def rename(self, name: str) -> "Structure":
        return Structure(self.signature, self.size, self.rels, name)

    def complement(self) -> "Structure":
        """Set-theoretic complement of every relation (loops included)."""
        rels = {}
        for sym, arity in self.signature.symbols:
            universe = set(itertools.product(range(self.size), repeat=arity))
            rels[sym] = universe - self.relation(sym)
        label = f"co-{self.name}" if self.name else ""
        return Structure.make(self.signature, self.size, rels, label)

    def relabel(self, permutation: Sequence[int]) -> "Structure":
        """Apply a domain permutation; handy for invariance tests."""
        if sorted(permutation) != list(range(self.size)):
            raise FomcError("not a permutation of the domain")
        rels = {sym: {tuple(permutation[e] for e in t) for t in ts}
                for sym, ts in self.rels}
        return Structure.make(self.signature, self.size, rels, self.name)

    def __str__(self) -> str:
        return render_structure(self)


def complement(structure: Structure) -> Structure:
    return structure.complement()


def disjoint_union(left: Structure, right: Structure) -> Structure:
    """Left's elements keep their names, right's shift up by left.size."""
    if left.signature != right.signature:
        raise SignatureMismatchError("disjoint union needs a shared signature")
    shift = left.size
    rels = {}
    for sym, _ in left.signature.symbols:
        rels[sym] = set(left.relation(sym)) | {
            tuple(e + shift for e in t) for t in right.relation(sym)}
    return Structure.make(left.signature, left.size + right.size, rels)


def induced_substructure(structure: Structure,
                         keep: Iterable[int]) -> tuple[Structure, dict[int, int]]:
    """Substructure on ``keep``; elements renumbered preserving order.

    Returns the structure and the old-to-new element map.  A tuple survives
    iff all its entries are kept.
    """
    kept = sorted(set(keep))
    if not kept:
        raise FomcError("cannot induce on an empty element set")
    if any(not (0 <= e < structure.size) for e in kept):
        raise FomcError("keep set outside the domain")
    element_map = {old: new for new, old in enumerate(kept)}
    rels = {}
    for sym, ts in structure.rels:
        rels[sym] = {tuple(element_map[e] for e in t)
                     for t in ts if all(e in element_map for e in t)}
    return Structure.make(structure.signature, len(kept), rels), element_map


def quotient_by_sim(structure: Structure) -> tuple[Structure, dict[int, int]]:
    """Quotient by coordinatewise interchangeability.

    Two elements are equivalent iff swapping one for the other in any single
    coordinate of any tuple never changes relation membership.  The quotient
    map is a full surjective homomorphism.
    """
    n = structure.size
    # profile of an element: every (symbol, position, other coordinates)
    # context in which it appears; two elements are interchangeable exactly
    # when their profiles coincide, no iteration needed
    profiles: dict[int, set] = {a: set() for a in range(n)}
    for sym, ts in structure.rels:
        for t in ts:
            for i, a in enumerate(t):
                context = (sym, i, t[:i], t[i + 1:])
                profiles[a].add(context)
    ordered = _refine_partition(n, profiles)
    class_of = {a: idx for idx, c in enumerate(ordered) for a in c}
    rels = {sym: {tuple(class_of[e] for e in t) for t in ts}
            for sym, ts in structure.rels}
    quotient = Structure.make(structure.signature, len(ordered), rels)
    return quotient, class_of


def _refine_partition(n: int, profiles: dict[int, set]) -> list[frozenset[int]]:
    groups: dict[frozenset, set[int]] = {}
    for a in range(n):
        groups.setdefault(frozenset(profiles[a]), set()).add(a)
    return sorted((frozenset(g) for g in groups.values()), key=min)


# -- morphism searches ---------------------------------------------------------

def find_morphism(source: Structure, target: Structure, kind: str):
    """Deterministic first witness of the requested morphism kind, or None.

    Function kinds return a tuple mapping source element -> target element;
    ``surjectiveHyper`` returns a HyperMap.  Variables are ordered by
    descending constraint degree, values lexicographically.
    """
    if source.signature != target.signature:
        raise SignatureMismatchError("morphism search needs a shared signature")
    if kind not in MORPHISM_KINDS:
        raise FomcError(f"unknown morphism kind {kind!r}")
    if kind == "surjectiveHyper":
        return _find_surjective_hyper(source, target)
    injective = kind == "injective"
    full = kind in ("full", "fullSurjective")
    surjective = kind == "fullSurjective"
    return _find_function_morphism(source, target, injective, full, surjective)


def _degree_order(structure: Structure) -> list[int]:
    degree = [0] * structure.size
    for _, ts in structure.rels:
        for t in ts:
            for a in t:
                degree[a] += 1
    return sorted(range(structure.size), key=lambda a: (-degree[a], a))


def _find_function_morphism(source: Structure, target: Structure,
                            injective: bool, full: bool, surjective: bool):
    order = _degree_order(source)
    position = {a: i for i, a in enumerate(order)}
    checks: list[list[tuple[str, tuple[int, ...], bool]]] = [[] for _ in order]
    for sym, arity in source.signature.symbols:
        in_rel = source.relation(sym)
        pool = in_rel if not full else set(
            itertools.product(range(source.size), repeat=arity))
        for t in pool:
            step = max(position[a] for a in t)
            checks[step].append((sym, t, t in in_rel))

    assignment: dict[int, int] = {}

    def ok(step: int) -> bool:
        for sym, t, positive in checks[step]:
            image = tuple(assignment[a] for a in t)
            present = image in target.relation(sym)
            if positive and not present:
                return False
            if full and not positive and present:
                return False
        return True

    def rec(step: int):
        if step == len(order):
            if surjective and len(set(assignment.values())) != target.size:
                return None
            return tuple(assignment[a] for a in range(source.size))
        a = order[step]
        for v in range(target.size):
            if injective and v in assignment.values():
                continue
            assignment[a] = v
            if ok(step):
                # surjectivity prune: remaining slots must cover the deficit
                remaining = len(order) - step - 1
                deficit = target.size - len(set(assignment.values()))
                if not (surjective and deficit > remaining):
                    got = rec(step + 1)
                    if got is not None:
                        return got
            del assignment[a]
        return None

    if surjective and target.size > source.size:
        return None
    if injective and target.size < source.size:
        return None
    return rec(0)


def _find_surjective_hyper(source: Structure, target: Structure) -> Optional[HyperMap]:
    """Backtracking over per-element image sets with forward checking."""
    from .shops import _ImageSearch

    search = _ImageSearch(source, target, _degree_order(source))
    return search.run(["subset"] * source.size, collect=False)


def verify_morphism(source: Structure, target: Structure, kind: str, witness) -> bool:
    """Check a claimed witness; used by evidence replay and tests."""
    if kind == "surjectiveHyper":
        f: HyperMap = witness
        if not (f.is_total and f.is_surjective):
            return False
        from .shops import _preserves_into
        return _preserves_into(f, source, target)
    mapping = tuple(witness)
    if len(mapping) != source.size:
        return False
    if kind == "injective" and len(set(mapping)) != source.size:
        return False
    if kind == "fullSurjective" and set(mapping) != set(range(target.size)):
        return False
    full = kind in ("full", "fullSurjective")
    for sym, arity in source.signature.symbols:
        in_rel = source.relation(sym)
        out_rel = target.relation(sym)
        pool = in_rel if not full else itertools.product(range(source.size), repeat=arity)
        for t in pool:
            image = tuple(mapping[a] for a in t)
            if (t in in_rel) and image not in out_rel:
                return False
            if full and (t not in in_rel) and image in out_rel:
                return False
    return True


def are_isomorphic(left: Structure, right: Structure,
                   want_witness: bool = False):
    """Brute-force isomorphism with per-element occurrence-profile pruning."""
    if left.signature != right.signature:
        raise SignatureMismatchError("isomorphism test needs a shared signature")
    if left.size != right.size:
        return (False, None) if want_witness else False
    if sorted(len(ts) for _, ts in left.rels) != sorted(len(ts) for _, ts in right.rels):
        return (False, None) if want_witness else False

    def profile(structure: Structure, a: int):
        counts = []
        for sym, ts in structure.rels:
            arity = structure.signature.arity(sym)
            for i in range(arity):
                counts.append(sum(1 for t in ts if t[i] == a))
        return tuple(counts)

    left_profiles = [profile(left, a) for a in range(left.size)]
    right_profiles = [profile(right, a) for a in range(right.size)]
    if sorted(left_profiles) != sorted(right_profiles):
        return (False, None) if want_witness else False

    order = _degree_order(left)
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(step: int) -> bool:
        a = order[step]
        for sym, ts in left.rels:
            rel_right = right.relation(sym)
            for t in ts:
                if all(e in mapping for e in t):
                    if tuple(mapping[e] for e in t) not in rel_right:
                        return False
        # reflect: right tuples over assigned elements must pull back
        inv = {v: k for k, v in mapping.items()}
        for sym, ts in right.rels:
            rel_left = left.relation(sym)
            for t in ts:
                if all(e in inv for e in t):
                    if tuple(inv[e] for e in t) not in rel_left:
                        return False
        return True

    def rec(step: int):
        if step == left.size:
            return tuple(mapping[a] for a in range(left.size))
        a = order[step]
        for v in range(right.size):
            if v in used or right_profiles[v] != left_profiles[a]:
                continue
            mapping[a] = v
            used.add(v)
            if consistent(step):
                got = rec(step + 1)
                if got is not None:
                    return got
            del mapping[a]
            used.remove(v)
        return None

    witness = rec(0)
    if want_witness:
        return witness is not None, witness
    return witness is not None


# -- Boolean operation tables ---------------------------------------------------

@dataclass(frozen=True)
class BooleanOperationTable:
    """A k-ary operation on {0,1} given by its full value table."""

    arity: int
    table: tuple[int, ...]  # indexed by the binary encoding of the arguments

    def __post_init__(self):
        if len(self.table) != 1 << self.arity:
            raise FomcError("table must cover all argument combinations")
        if any(v not in (0, 1) for v in self.table):
            raise FomcError("table values must be Boolean")

    def apply(self, args: Sequence[int]) -> int:
        index = 0
        for a in args:
            index = (index << 1) | a
        return self.table[index]


def _op(arity: int, fn) -> BooleanOperationTable:
    table = []
    for combo in itertools.product((0, 1), repeat=arity):
        table.append(fn(*combo))
    return BooleanOperationTable(arity, tuple(table))


CONSTANT_ZERO = _op(1, lambda a: 0)
CONSTANT_ONE = _op(1, lambda a: 1)
CONJUNCTION = _op(2, lambda a, b: a & b)
DISJUNCTION = _op(2, lambda a, b: a | b)
MAJORITY = _op(3, lambda a, b, c: (a & b) | (a & c) | (b & c))
MINORITY = _op(3, lambda a, b, c: a ^ b ^ c)


def closed_under_operation(structure: Structure, op: BooleanOperationTable) -> bool:
    """Coordinatewise closure of every relation under ``op``.

    Empty relations are vacuously closed: closure is a universally
    quantified statement over argument tuples.
    """
    if structure.size != 2:
        raise FomcError("operation closure is defined for Boolean structures only")
    for _, ts in structure.rels:
        tuples = sorted(ts)
        for args in itertools.product(tuples, repeat=op.arity):
            result = tuple(op.apply(column) for column in zip(*args))
            if result not in ts:
                return False
    return True


# -- hyper-morphism duality helper ----------------------------------------------

def hyper_witness_dual(f: HyperMap) -> HyperMap:
    """For tests: f witnesses A -> B surjectively-hyper iff inverse(f)
    witnesses co-B -> co-A."""
    return inverse(f)


# -- text format -----------------------------------------------------------------

def render_structure(structure: Structure) -> str:
    """Canonical text rendering: symbols by name, tuples lexicographic."""
    lines = [f"structure {structure.name or 'unnamed'}", f"domain {structure.size}"]
    for sym, _ in structure.signature.symbols:
        lines.append(f"relation {sym}/{structure.signature.arity(sym)}")
        for t in sorted(structure.relation(sym)):
            lines.append(" ".join(str(e) for e in t))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_structure(text: str) -> Structure:
    """Parse the structure file format (see ``render_structure``)."""
    name = ""
    size = None
    symbols: list[tuple[str, int]] = []
    relations: dict[str, set[tuple[int, ...]]] = {}
    current: str | None = None
    ended = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ended:
            raise ParseError("content after 'end'", lineno, 1)
        parts = line.split()
        if parts[0] == "structure":
            if len(parts) != 2:
                raise ParseError("expected 'structure <name>'", lineno, 1)
            name = parts[1]
        elif parts[0] == "domain":
            try:
                size = int(parts[1])
            except (IndexError, ValueError):
                raise ParseError("expected 'domain <n>'", lineno, 1) from None
        elif parts[0] == "relation":
            if len(parts) != 2 or "/" not in parts[1]:
                raise ParseError("expected 'relation <Name>/<arity>'", lineno, 1)
            sym, _, arity_text = parts[1].partition("/")
            try:
                arity = int(arity_text)
            except ValueError:
                raise ParseError(f"bad arity {arity_text!r}", lineno, 1) from None
            if any(s == sym for s, _ in symbols):
                raise ParseError(f"duplicate relation {sym!r}", lineno, 1)
            symbols.append((sym, arity))
            relations[sym] = set()
            current = sym
        elif parts[0] == "end":
            ended = True
        else:
            if current is None or size is None:
                raise ParseError("tuple outside a relation block", lineno, 1)
            try:
                t = tuple(int(p) for p in parts)
            except ValueError:
                raise ParseError(f"bad tuple {line!r}", lineno, 1) from None
            relations[current].add(t)
    if size is None:
        raise ParseError("missing 'domain' line")
    if not ended:
        raise ParseError("missing 'end' line")
    signature = Signature(tuple(symbols))
    try:
        return Structure.make(signature, size, relations, name)
    except FomcError as exc:
        raise ParseError(str(exc)) from exc
