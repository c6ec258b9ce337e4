"""Formula ASTs, the text grammar, normal forms and canonical sentences.

The grammar (whitespace-insensitive)::

    formula := quant | disj
    quant   := ("forall" | "exists") VAR ["in" "{" NUM {"," NUM} "}"] "." formula
    disj    := conj {"|" conj}
    conj    := unit {"&" unit}
    unit    := ["~"] (atom | "(" formula ")" | "true" | "false")
    atom    := NAME "(" VAR {"," VAR} ")" | VAR "=" VAR | VAR "!=" VAR

``x != y`` is sugar for a negated equality atom.  ``true``/``false`` are leaf
constants; the canonical-sentence builders need them for structures with no
facts, where the conjunction of positive facts is empty.  Parsing rejects
unbound and shadowed variables, so every parsed formula is a sentence.
"""

from __future__ import annotations

import bisect
import itertools
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, Optional, Sequence

from .errors import BudgetExceededError, FomcError, FormulaError, ParseError

if TYPE_CHECKING:  # pragma: no cover
    from .structures import Signature, Structure


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Rel(Formula):
    symbol: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise FormulaError("conjunction needs at least two children")


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise FormulaError("disjunction needs at least two children")


@dataclass(frozen=True)
class Quant(Formula):
    kind: str  # "forall" | "exists"
    var: str
    restriction: Optional[frozenset[int]]
    body: Formula

    def __post_init__(self):
        if self.kind not in ("forall", "exists"):
            raise FormulaError(f"bad quantifier kind {self.kind!r}")
        if self.restriction is not None and not self.restriction:
            raise FormulaError("empty restriction set")


TOP = Top()
BOTTOM = Bottom()


def conj(children: Sequence[Formula]) -> Formula:
    children = tuple(children)
    if not children:
        return TOP
    if len(children) == 1:
        return children[0]
    return And(children)


def disj(children: Sequence[Formula]) -> Formula:
    children = tuple(children)
    if not children:
        return BOTTOM
    if len(children) == 1:
        return children[0]
    return Or(children)


def exists_block(variables: Sequence[str], body: Formula,
                 restriction: Optional[frozenset[int]] = None) -> Formula:
    for var in reversed(variables):
        body = Quant("exists", var, restriction, body)
    return body


def forall_block(variables: Sequence[str], body: Formula,
                 restriction: Optional[frozenset[int]] = None) -> Formula:
    for var in reversed(variables):
        body = Quant("forall", var, restriction, body)
    return body


def walk(formula: Formula) -> Iterator[Formula]:
    stack = [formula]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.extend(node.children)
        elif isinstance(node, Quant):
            stack.append(node.body)


def node_count(formula: Formula) -> int:
    return sum(1 for _ in walk(formula))


def free_variables(formula: Formula) -> frozenset[str]:
    if isinstance(formula, (Top, Bottom)):
        return frozenset()
    if isinstance(formula, Rel):
        return frozenset(formula.args)
    if isinstance(formula, Eq):
        return frozenset((formula.left, formula.right))
    if isinstance(formula, Not):
        return free_variables(formula.child)
    if isinstance(formula, (And, Or)):
        return frozenset().union(*(free_variables(c) for c in formula.children))
    if isinstance(formula, Quant):
        return free_variables(formula.body) - {formula.var}
    raise FormulaError(f"unknown node {formula!r}")


def check_formula(formula: Formula, signature: Optional["Signature"] = None,
                  domain_size: Optional[int] = None,
                  allow_free: Iterable[str] = ()) -> None:
    """Validate closedness (minus ``allow_free``), no-shadowing, and, when a
    signature or domain size is given, arities and restriction ranges."""
    allow = frozenset(allow_free)

    def rec(node: Formula, bound: frozenset[str]):
        if isinstance(node, (Top, Bottom)):
            return
        if isinstance(node, Rel):
            if signature is not None:
                if node.symbol not in signature:
                    raise FormulaError(f"unknown relation symbol {node.symbol!r}")
                if signature.arity(node.symbol) != len(node.args):
                    raise FormulaError(
                        f"arity mismatch for {node.symbol!r}: got {len(node.args)}")
            for v in node.args:
                if v not in bound and v not in allow:
                    raise FormulaError(f"unbound variable {v!r}")
            return
        if isinstance(node, Eq):
            for v in (node.left, node.right):
                if v not in bound and v not in allow:
                    raise FormulaError(f"unbound variable {v!r}")
            return
        if isinstance(node, Not):
            rec(node.child, bound)
            return
        if isinstance(node, (And, Or)):
            for c in node.children:
                rec(c, bound)
            return
        if isinstance(node, Quant):
            if node.var in bound:
                raise FormulaError(f"shadowed variable {node.var!r}")
            if node.restriction is not None and domain_size is not None:
                if any(not (0 <= e < domain_size) for e in node.restriction):
                    raise FormulaError("restriction outside the domain")
            rec(node.body, bound | {node.var})
            return
        raise FormulaError(f"unknown node {node!r}")

    rec(formula, frozenset())


# -- fragments -----------------------------------------------------------------

@dataclass(frozen=True)
class FragmentKey:
    """Symbol budget: quantifiers, connectives, extras ('eq', 'neq', 'neg')."""

    quantifiers: frozenset[str]
    connectives: frozenset[str]
    extras: frozenset[str]

    def __str__(self) -> str:
        symbols = {"exists": "E", "forall": "A", "and": "&", "or": "|",
                   "eq": "=", "neq": "!=", "neg": "~"}
        parts = [symbols[q] for q in sorted(self.quantifiers)]
        parts += [symbols[c] for c in sorted(self.connectives)]
        parts += [symbols[e] for e in sorted(self.extras)]
        return "{" + ",".join(parts) + "}"


def fragment_of(formula: Formula) -> FragmentKey:
    """Minimal symbol budget covering an NNF formula."""
    quantifiers: set[str] = set()
    connectives: set[str] = set()
    extras: set[str] = set()

    def rec(node: Formula):
        if isinstance(node, (Top, Bottom)):
            return
        if isinstance(node, Rel):
            return
        if isinstance(node, Eq):
            extras.add("eq")
            return
        if isinstance(node, Not):
            if isinstance(node.child, Eq):
                extras.add("neq")
            elif isinstance(node.child, Rel):
                extras.add("neg")
            else:
                raise FormulaError("fragment_of expects an NNF formula")
            return
        if isinstance(node, And):
            connectives.add("and")
        elif isinstance(node, Or):
            connectives.add("or")
        elif isinstance(node, Quant):
            quantifiers.add(node.kind)
            rec(node.body)
            return
        else:
            raise FormulaError(f"unknown node {node!r}")
        for c in node.children:
            rec(c)

    rec(formula)
    return FragmentKey(frozenset(quantifiers), frozenset(connectives), frozenset(extras))


# -- normal forms ----------------------------------------------------------------

def to_nnf(formula: Formula) -> Formula:
    """Push negation to the atoms; quantifiers flip, restrictions carry over."""

    def pos(node: Formula) -> Formula:
        if isinstance(node, (Top, Bottom, Rel, Eq)):
            return node
        if isinstance(node, Not):
            return neg(node.child)
        if isinstance(node, And):
            return And(tuple(pos(c) for c in node.children))
        if isinstance(node, Or):
            return Or(tuple(pos(c) for c in node.children))
        if isinstance(node, Quant):
            return Quant(node.kind, node.var, node.restriction, pos(node.body))
        raise FormulaError(f"unknown node {node!r}")

    def neg(node: Formula) -> Formula:
        if isinstance(node, Top):
            return BOTTOM
        if isinstance(node, Bottom):
            return TOP
        if isinstance(node, (Rel, Eq)):
            return Not(node)
        if isinstance(node, Not):
            return pos(node.child)
        if isinstance(node, And):
            return Or(tuple(neg(c) for c in node.children))
        if isinstance(node, Or):
            return And(tuple(neg(c) for c in node.children))
        if isinstance(node, Quant):
            flipped = "forall" if node.kind == "exists" else "exists"
            return Quant(flipped, node.var, node.restriction, neg(node.body))
        raise FormulaError(f"unknown node {node!r}")

    return pos(formula)


def dualize(formula: Formula) -> Formula:
    """The dual sentence: NNF of the negation with every relational atom's
    polarity flipped.

    Equality atoms keep their polarity (equality is not complemented along
    with the structure).  Contract: S satisfies the input iff the complement
    of S falsifies the output.
    """

    def flip(node: Formula) -> Formula:
        if isinstance(node, (Top, Bottom, Eq)):
            return node
        if isinstance(node, Rel):
            return Not(node)
        if isinstance(node, Not):
            if isinstance(node.child, Rel):
                return node.child
            if isinstance(node.child, Eq):
                return node
            raise FormulaError("dualize expects NNF after negation")
        if isinstance(node, And):
            return And(tuple(flip(c) for c in node.children))
        if isinstance(node, Or):
            return Or(tuple(flip(c) for c in node.children))
        if isinstance(node, Quant):
            return Quant(node.kind, node.var, node.restriction, flip(node.body))
        raise FormulaError(f"unknown node {node!r}")

    return flip(to_nnf(Not(formula)))


def relativise(formula: Formula, U: Iterable[int], X: Iterable[int],
               mode: str = "both") -> Formula:
    """Attach restriction sets to quantifiers.

    ``mode`` is one of ``universalOnly``, ``existentialOnly``, ``both``.
    Pre-existing restrictions are intersected; an empty intersection is an
    error.  Expects NNF (negation below quantifiers is fine either way, but
    the fragment transforms all operate on NNF).
    """
    if mode not in ("universalOnly", "existentialOnly", "both"):
        raise FomcError(f"unknown relativisation mode {mode!r}")
    U = frozenset(U)
    X = frozenset(X)
    if mode in ("universalOnly", "both") and not U:
        raise FomcError("empty universal restriction")
    if mode in ("existentialOnly", "both") and not X:
        raise FomcError("empty existential restriction")

    def rec(node: Formula) -> Formula:
        if isinstance(node, (Top, Bottom, Rel, Eq)):
            return node
        if isinstance(node, Not):
            return Not(rec(node.child))
        if isinstance(node, And):
            return And(tuple(rec(c) for c in node.children))
        if isinstance(node, Or):
            return Or(tuple(rec(c) for c in node.children))
        if isinstance(node, Quant):
            restriction = node.restriction
            wanted = None
            if node.kind == "forall" and mode in ("universalOnly", "both"):
                wanted = U
            if node.kind == "exists" and mode in ("existentialOnly", "both"):
                wanted = X
            if wanted is not None:
                restriction = wanted if restriction is None else restriction & wanted
                if not restriction:
                    raise FomcError(
                        f"restriction of {node.var!r} became empty")
            return Quant(node.kind, node.var, restriction, rec(node.body))
        raise FormulaError(f"unknown node {node!r}")

    return rec(formula)


# -- canonical sentences -----------------------------------------------------------

DEFAULT_NODE_BUDGET = 10 ** 6

CANONICAL_FRAGMENTS = ("pp", "pp-neq", "eqfree-neg", "pos-eqfree")


def positive_facts(structure: "Structure", elements: Sequence[int],
                   variables: Sequence[str]) -> list[Formula]:
    """Atoms over ``variables`` mirroring every fact the corresponding
    ``elements`` satisfy; index tuples run lexicographically."""
    atoms: list[Formula] = []
    l = len(elements)
    for sym, arity in structure.signature.symbols:
        rel = structure.relation(sym)
        for idx in itertools.product(range(l), repeat=arity):
            if tuple(elements[i] for i in idx) in rel:
                atoms.append(Rel(sym, tuple(variables[i] for i in idx)))
    return atoms


def negative_facts(structure: "Structure", elements: Sequence[int],
                   variables: Sequence[str]) -> list[Formula]:
    atoms: list[Formula] = []
    l = len(elements)
    for sym, arity in structure.signature.symbols:
        rel = structure.relation(sym)
        for idx in itertools.product(range(l), repeat=arity):
            if tuple(elements[i] for i in idx) not in rel:
                atoms.append(Not(Rel(sym, tuple(variables[i] for i in idx))))
    return atoms


def canonical_sentence(structure: "Structure", fragment: str,
                       m: Optional[int] = None,
                       budget: int = DEFAULT_NODE_BUDGET) -> Formula:
    """The fragment's canonical sentence for ``structure``.

    pp         : existential conjunction of all positive facts.
    pp-neq     : pp plus pairwise disequalities (forces injectivity).
    eqfree-neg : positive and negative facts plus a universal clause saying
                 every element is interchangeable with some witness.
    pos-eqfree : the two-block sentence whose models are exactly the targets
                 of surjective hyper-morphisms from ``structure``; ``m`` is
                 the universal block width (callers pass the intended target
                 size).
    """
    n = structure.size
    vs = [f"v{i}" for i in range(n)]
    elements = list(range(n))
    if fragment == "pp":
        return exists_block(vs, conj(positive_facts(structure, elements, vs)))
    if fragment == "pp-neq":
        atoms = positive_facts(structure, elements, vs)
        atoms += [Not(Eq(vs[i], vs[j]))
                  for i in range(n) for j in range(i + 1, n)]
        return exists_block(vs, conj(atoms))
    if fragment == "eqfree-neg":
        atoms = positive_facts(structure, elements, vs) + \
            negative_facts(structure, elements, vs)
        clauses = [sim_formula(structure.signature, "w", v) for v in vs]
        body = conj(atoms + [Quant("forall", "w", None, disj(clauses))])
        return exists_block(vs, body)
    if fragment == "pos-eqfree":
        if m is None or m < 1:
            raise FomcError("pos-eqfree needs a universal block width m >= 1")
        arity_cost = sum((n + m) ** arity for _, arity in structure.signature.symbols)
        if (n ** m) * max(arity_cost, 1) > budget:
            raise BudgetExceededError(
                f"canonical sentence would need about {(n ** m) * arity_cost} atoms")
        ws = [f"w{i}" for i in range(m)]
        names = vs + ws
        disjuncts = []
        for t in itertools.product(range(n), repeat=m):
            disjuncts.append(conj(positive_facts(structure, elements + list(t), names)))
        body = conj(positive_facts(structure, elements, vs)
                    + [forall_block(ws, disj(disjuncts))])
        return exists_block(vs, body)
    raise FomcError(f"unknown canonical fragment {fragment!r}")


def sim_formula(signature: "Signature", x: str, y: str) -> Formula:
    """Interchangeability of ``x`` and ``y``: for every symbol and every
    coordinate, membership with the other coordinates universally quantified
    is a biconditional, expanded as (P and Q) or (not P and not Q)."""
    conjuncts: list[Formula] = []
    for sym, arity in signature.symbols:
        zs = _fresh_names("z", arity - 1, avoid={x, y})
        pieces = []
        for i in range(arity):
            args_x = tuple(zs[:i]) + (x,) + tuple(zs[i:])
            args_y = tuple(zs[:i]) + (y,) + tuple(zs[i:])
            p = Rel(sym, args_x)
            q = Rel(sym, args_y)
            pieces.append(Or((And((p, q)), And((Not(p), Not(q))))))
        conjuncts.append(forall_block(zs, conj(pieces)))
    return conj(conjuncts)


def _fresh_names(prefix: str, count: int, avoid: set[str]) -> list[str]:
    names = []
    i = 0
    while len(names) < count:
        candidate = f"{prefix}{i}"
        if candidate not in avoid:
            names.append(candidate)
        i += 1
    return names


def defining_formula(structure: "Structure", relation: Iterable[Sequence[int]],
                     arity: int, budget: int = DEFAULT_NODE_BUDGET,
                     enumeration_bound: int = 6) -> Optional[Formula]:
    """A positive equality-free definition of ``relation`` over ``structure``,
    or None when one cannot exist.

    Definability holds exactly when every surjective hyper-endomorphism
    preserves the relation; the formula is then a disjunction over the
    relation's tuples of two-block sentences with free variables u1..u_arity.
    """
    from .shops import enumerate_she
    from .structures import Structure

    tuples = sorted(tuple(t) for t in relation)
    for t in tuples:
        if len(t) != arity or any(not (0 <= e < structure.size) for e in t):
            raise FomcError(f"bad relation tuple {t}")
    she = enumerate_she(structure, bound=enumeration_bound)
    rel_set = frozenset(tuples)
    for f in she:
        for t in rel_set:
            images = [sorted(f.image(e)) for e in t]
            for combo in itertools.product(*images):
                if combo not in rel_set:
                    return None
    if not tuples:
        return BOTTOM

    n = structure.size
    us = [f"u{i + 1}" for i in range(arity)]
    vs = [f"v{i}" for i in range(n)]
    ws = [f"w{i}" for i in range(n)]
    enumeration = list(range(n))
    cost = len(tuples) * (n ** n) * sum(
        (arity + 2 * n) ** a for _, a in structure.signature.symbols)
    if cost > budget:
        raise BudgetExceededError(f"defining formula would need about {cost} atoms")

    def theta(r: tuple[int, ...]) -> Formula:
        head = positive_facts(structure, list(r) + enumeration, us + vs)
        disjuncts = []
        for t in itertools.product(range(n), repeat=n):
            disjuncts.append(conj(positive_facts(
                structure, list(r) + enumeration + list(t), us + vs + ws)))
        return exists_block(vs, conj(head + [forall_block(ws, disj(disjuncts))]))

    return disj([theta(r) for r in tuples])


# -- parser ----------------------------------------------------------------------

_TOKEN = re.compile(r"(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<num>\d+)|"
                    r"(?P<op>!=|[().,&|~={}])")
_KEYWORDS = {"forall", "exists", "in", "true", "false"}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    line_starts = [0] + [i + 1 for i, ch in enumerate(text) if ch == "\n"]

    def linecol(pos: int) -> tuple[int, int]:
        idx = bisect.bisect_right(line_starts, pos) - 1
        return idx + 1, pos - line_starts[idx] + 1

    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(text, pos)
        if match is None:
            line, column = linecol(pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, column)
        kind = match.lastgroup
        tok_text = match.group(kind)
        if kind == "name" and tok_text in _KEYWORDS:
            kind = tok_text
        line, column = linecol(pos)
        tokens.append(_Token(kind, tok_text, line, column))
        pos = match.end()
    line, column = linecol(len(text))
    tokens.append(_Token("eof", "", line, column))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {what}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.column)
        return tok

    def formula(self) -> Formula:
        tok = self.peek()
        if tok.kind in ("forall", "exists"):
            return self.quantified()
        return self.disjunction()

    def quantified(self) -> Formula:
        q = self.next()
        var = self.expect("name", "a variable").text
        restriction = None
        if self.peek().kind == "in":
            self.next()
            brace = self.next()
            if brace.text != "{":
                raise ParseError("expected '{'", brace.line, brace.column)
            elems = [int(self.expect("num", "an element").text)]
            while self.peek().text == ",":
                self.next()
                elems.append(int(self.expect("num", "an element").text))
            closing = self.next()
            if closing.text != "}":
                raise ParseError("expected '}'", closing.line, closing.column)
            restriction = frozenset(elems)
        dot = self.next()
        if dot.text != ".":
            raise ParseError("expected '.' after quantifier",
                             dot.line, dot.column)
        return Quant(q.kind, var, restriction, self.formula())

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek().text == "|":
            self.next()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unit()]
        while self.peek().text == "&":
            self.next()
            parts.append(self.unit())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unit(self) -> Formula:
        tok = self.peek()
        if tok.text == "~":
            self.next()
            return Not(self.unit())
        if tok.text == "(":
            self.next()
            inner = self.formula()
            closing = self.next()
            if closing.text != ")":
                raise ParseError("expected ')'", closing.line, closing.column)
            return inner
        if tok.kind == "true":
            self.next()
            return TOP
        if tok.kind == "false":
            self.next()
            return BOTTOM
        if tok.kind == "name":
            return self.atom()
        raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.column)

    def atom(self) -> Formula:
        first = self.expect("name", "an identifier")
        tok = self.peek()
        if tok.text == "(":
            self.next()
            args = [self.expect("name", "a variable").text]
            while self.peek().text == ",":
                self.next()
                args.append(self.expect("name", "a variable").text)
            closing = self.next()
            if closing.text != ")":
                raise ParseError("expected ')'", closing.line, closing.column)
            return Rel(first.text, tuple(args))
        if tok.text == "=":
            self.next()
            other = self.expect("name", "a variable").text
            return Eq(first.text, other)
        if tok.text == "!=":
            self.next()
            other = self.expect("name", "a variable").text
            return Not(Eq(first.text, other))
        raise ParseError(f"expected an atom after {first.text!r}",
                         tok.line, tok.column)


def parse_formula(text: str, signature: Optional["Signature"] = None,
                  domain_size: Optional[int] = None) -> Formula:
    parser = _Parser(_tokenize(text))
    formula = parser.formula()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise ParseError(f"unexpected trailing input {trailing.text!r}",
                         trailing.line, trailing.column)
    try:
        check_formula(formula, signature, domain_size)
    except FormulaError as exc:
        raise ParseError(str(exc)) from exc
    return formula


def render_formula(formula: Formula) -> str:
    """Inverse of the parser; parse(render(f)) is structurally f."""

    def render(node: Formula, parent: str) -> str:
        if isinstance(node, Top):
            return "true"
        if isinstance(node, Bottom):
            return "false"
        if isinstance(node, Rel):
            return f"{node.symbol}({', '.join(node.args)})"
        if isinstance(node, Eq):
            return f"{node.left} = {node.right}"
        if isinstance(node, Not):
            if isinstance(node.child, Eq):
                return f"{node.child.left} != {node.child.right}"
            if isinstance(node.child, (Rel, Top, Bottom, Not)):
                return "~" + render(node.child, "not")
            return "~(" + render(node.child, "top") + ")"
        if isinstance(node, And):
            text = " & ".join(render(c, "and") for c in node.children)
            return f"({text})" if parent in ("and", "not") else text
        if isinstance(node, Or):
            text = " | ".join(render(c, "or") for c in node.children)
            return f"({text})" if parent in ("and", "or", "not") else text
        if isinstance(node, Quant):
            if node.restriction is not None:
                elems = ", ".join(str(e) for e in sorted(node.restriction))
                head = f"{node.kind} {node.var} in {{{elems}}}"
            else:
                head = f"{node.kind} {node.var}"
            text = f"{head}. {render(node.body, 'top')}"
            return f"({text})" if parent != "top" else text
        raise FormulaError(f"unknown node {node!r}")

    return render(formula, "top")
