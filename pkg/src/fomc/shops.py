"""Hyper-operation algebra.

A hyper-operation maps each source element to a *set* of target elements;
image sets are stored as bitmasks over the target domain so that product
containment checks and compositions are cheap integer operations.  A shop is
a total surjective hyper-operation from a domain to itself.  This module
implements composition, inversion, sub-shop tests, preservation against a
relational structure, exhaustive and profile-directed searches for preserving
shops, DSM closure, the canonical identity-form shop, the 3-permuted form and
its completion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Iterator, Optional, Sequence

from .errors import BudgetExceededError, FomcError, ParseError

if TYPE_CHECKING:  # pragma: no cover
    from .structures import Structure


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << e
    return m


def bits(mask: int) -> Iterator[int]:
    """Yield set bit positions in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def set_of(mask: int) -> frozenset[int]:
    return frozenset(bits(mask))


@dataclass(frozen=True, order=True)
class HyperMap:
    """Total-by-default hyper-operation between two finite domains.

    ``images[a]`` is the bitmask of the image set of element ``a``.  Empty
    images are allowed (partial hyper-operations); ``is_total`` and
    ``is_surjective`` test the shop conditions.  Ordering is lexicographic
    over ``(source_size, target_size, images)``, which is the canonical order
    used everywhere a deterministic listing of shops is needed.
    """

    source_size: int
    target_size: int
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.source_size:
            raise FomcError("image count does not match source size")
        full = (1 << self.target_size) - 1
        for m in self.images:
            if m & ~full:
                raise FomcError("image mask out of target range")

    @staticmethod
    def from_sets(source_size: int, target_size: int,
                  images: Sequence[Iterable[int]]) -> "HyperMap":
        return HyperMap(source_size, target_size,
                        tuple(mask_of(s) for s in images))

    def image(self, element: int) -> frozenset[int]:
        return set_of(self.images[element])

    def image_of_set(self, mask: int) -> int:
        out = 0
        for a in bits(mask):
            out |= self.images[a]
        return out

    @property
    def is_total(self) -> bool:
        return all(m != 0 for m in self.images)

    @property
    def is_surjective(self) -> bool:
        covered = 0
        for m in self.images:
            covered |= m
        return covered == (1 << self.target_size) - 1

    @property
    def is_shop(self) -> bool:
        return (self.source_size == self.target_size
                and self.is_total and self.is_surjective)

    def __str__(self) -> str:
        return render_shop(self)


def identity_shop(n: int) -> HyperMap:
    return HyperMap(n, n, tuple(1 << a for a in range(n)))


def shop_from_sets(images: Sequence[Iterable[int]]) -> HyperMap:
    """Build a shop on ``len(images)`` elements, validating the shop laws."""
    n = len(images)
    f = HyperMap.from_sets(n, n, images)
    if not f.is_shop:
        raise FomcError(f"not a shop (total={f.is_total}, surjective={f.is_surjective})")
    return f


def compose(g: HyperMap, f: HyperMap) -> HyperMap:
    """(g o f)(x) is the union of g over the image f(x)."""
    if f.target_size != g.source_size:
        raise FomcError("composition size mismatch")
    return HyperMap(f.source_size, g.target_size,
                    tuple(g.image_of_set(m) for m in f.images))


def inverse(f: HyperMap) -> HyperMap:
    """b in f(a) iff a in inverse(f)(b); involutive, antihomomorphic."""
    inv = [0] * f.target_size
    for a, m in enumerate(f.images):
        for b in bits(m):
            inv[b] |= 1 << a
    return HyperMap(f.target_size, f.source_size, tuple(inv))


def is_sub_shop(f: HyperMap, g: HyperMap) -> bool:
    """Pointwise image containment f(x) subseteq g(x)."""
    if (f.source_size, f.target_size) != (g.source_size, g.target_size):
        raise FomcError("sub-shop size mismatch")
    return all(fm & ~gm == 0 for fm, gm in zip(f.images, g.images))


def sub_shops(f: HyperMap) -> Iterator[HyperMap]:
    """All shops that are pointwise-subsets of ``f`` (including ``f``)."""
    choices = [_nonempty_submasks(m) for m in f.images]
    for combo in itertools.product(*choices):
        g = HyperMap(f.source_size, f.target_size, combo)
        if g.is_surjective:
            yield g


def _nonempty_submasks(mask: int) -> list[int]:
    out = []
    sub = mask
    while sub:
        out.append(sub)
        sub = (sub - 1) & mask
    out.reverse()
    return out


# -- preservation ------------------------------------------------------------

@lru_cache(maxsize=512)
def _mask_tables(structure: "Structure"):
    """Per-symbol adjacency masks: unary membership masks and, for binary
    symbols, out- and in-neighbourhood masks per element."""
    tables = {}
    n = structure.size
    for name, tuples in structure.rels:
        arity = structure.signature.arity(name)
        if arity == 1:
            tables[name] = ("unary", mask_of(t[0] for t in tuples))
        elif arity == 2:
            out = [0] * n
            inc = [0] * n
            for a, b in tuples:
                out[a] |= 1 << b
                inc[b] |= 1 << a
            tables[name] = ("binary", tuple(out), tuple(inc))
        else:
            tables[name] = ("general", tuples)
    return tables


def preserves(f: HyperMap, structure: "Structure") -> bool:
    """True iff every tuple's image product stays inside its relation.

    For each symbol R and tuple (a1..ar) in R, f(a1) x ... x f(ar) must be a
    subset of R.
    """
    if f.source_size != structure.size or f.target_size != structure.size:
        raise FomcError("shop size does not match structure domain")
    return _preserves_into(f, structure, structure)


def _preserves_into(f: HyperMap, source: "Structure", target: "Structure") -> bool:
    """Hyper-morphism preservation check from ``source`` into ``target``."""
    tables = _mask_tables(target)
    images = f.images
    for name, tuples in source.rels:
        table = tables[name]
        if table[0] == "unary":
            mask = table[1]
            for t in tuples:
                if images[t[0]] & ~mask:
                    return False
        elif table[0] == "binary":
            out = table[1]
            for a, b in tuples:
                fb = images[b]
                for y in bits(images[a]):
                    if fb & ~out[y]:
                        return False
        else:
            target_tuples = target.relation(name)
            for t in tuples:
                image_sets = [tuple(bits(images[a])) for a in t]
                for combo in itertools.product(*image_sets):
                    if combo not in target_tuples:
                        return False
    return True


# -- DSM ---------------------------------------------------------------------

@dataclass(frozen=True)
class DSM:
    """A down-shop-monoid: identity, composition closure, sub-shop closure."""

    size: int
    shops: tuple[HyperMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "_set", frozenset(self.shops))

    def __contains__(self, f: HyperMap) -> bool:
        return f in self._set

    def __iter__(self) -> Iterator[HyperMap]:
        return iter(self.shops)

    def __len__(self) -> int:
        return len(self.shops)

    def as_set(self) -> frozenset[HyperMap]:
        return self._set

    def is_closed(self) -> bool:
        """Verify the three DSM laws by direct enumeration."""
        members = self._set
        if identity_shop(self.size) not in members:
            return False
        for f in members:
            for g in members:
                if compose(g, f) not in members:
                    return False
            for s in sub_shops(f):
                if s not in members:
                    return False
        return True


def _dsm_from_set(n: int, shops: Iterable[HyperMap]) -> DSM:
    return DSM(n, tuple(sorted(set(shops))))


def generate_dsm(generators: Iterable[HyperMap], n: int) -> DSM:
    """Least set containing the generators and identity, closed under
    composition and sub-shops; computed by worklist fixpoint.

    Internally works on raw image tuples with per-shop union tables, so a
    composition is one table lookup per element.
    """
    full = (1 << n) - 1
    members: set[tuple[int, ...]] = set()
    work: list[tuple[int, ...]] = [tuple(1 << a for a in range(n))]
    for g in generators:
        if not g.is_shop or g.source_size != n:
            raise FomcError("generators must be shops on the given domain")
        work.append(g.images)
    union_table: dict[tuple[int, ...], list[int]] = {}

    def table(images: tuple[int, ...]) -> list[int]:
        tab = union_table.get(images)
        if tab is None:
            tab = [0] * (full + 1)
            for m in range(1, full + 1):
                low = m & -m
                tab[m] = tab[m ^ low] | images[low.bit_length() - 1]
            union_table[images] = tab
        return tab

    def raw_sub_shops(images: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        for combo in itertools.product(*[_nonempty_submasks(m) for m in images]):
            covered = 0
            for m in combo:
                covered |= m
            if covered == full:
                yield combo

    while work:
        f = work.pop()
        if f in members:
            continue
        fresh = [s for s in raw_sub_shops(f) if s not in members]
        members.update(fresh)
        snapshot = list(members)
        for s in fresh:
            stab = table(s)
            for g in snapshot:
                h = tuple(stab[m] for m in g)
                if h not in members:
                    work.append(h)
                gtab = table(g)
                h = tuple(gtab[m] for m in s)
                if h not in members:
                    work.append(h)
    return _dsm_from_set(n, (HyperMap(n, n, images) for images in members))


# -- the image-mask search engine ----------------------------------------------

def _degree_descending(structure: "Structure") -> list[int]:
    degree = [0] * structure.size
    for _, tuples in structure.rels:
        for t in tuples:
            for a in t:
                degree[a] += 1
    return sorted(range(structure.size), key=lambda a: (-degree[a], a))


class _ImageSearch:
    """Forward-checked backtracking over per-element image masks.

    Elements are assigned in a fixed order.  Before branching on an element,
    every binary tuple linking it to already-assigned elements is folded into
    an allowed mask, so only submasks of that mask are tried; loops and
    higher-arity tuples are verified per candidate once their last coordinate
    is assigned.
    """

    def __init__(self, source: "Structure", target: "Structure",
                 order: Sequence[int]):
        self.n = source.size
        self.m = target.size
        self.full = (1 << target.size) - 1
        self.order = list(order)
        position = {a: i for i, a in enumerate(self.order)}
        tables = _mask_tables(target)
        self.unary_masks = [self.full] * self.n
        self.pre: list[list[tuple[tuple[int, ...], int]]] = [[] for _ in self.order]
        self.loops: list[list[tuple[int, ...]]] = [[] for _ in self.order]
        self.general: list[list[tuple[str, tuple[int, ...]]]] = [[] for _ in self.order]
        self.target = target
        for name, tuples in source.rels:
            table = tables[name]
            for t in tuples:
                step = max(position[a] for a in t)
                if table[0] == "unary":
                    self.unary_masks[t[0]] &= table[1]
                elif table[0] == "binary":
                    a, b = t
                    if a == b:
                        self.loops[step].append(table[1])
                    elif position[a] < position[b]:
                        self.pre[step].append((table[1], a))  # f(b) within out-masks
                    else:
                        self.pre[step].append((table[2], b))  # f(a) within in-masks
                else:
                    self.general[step].append((name, t))

    def allowed(self, step: int, images: list[int]) -> int:
        allowed = self.unary_masks[self.order[step]]
        for masks, other in self.pre[step]:
            for y in bits(images[other]):
                allowed &= masks[y]
                if not allowed:
                    return 0
        return allowed

    def residual_ok(self, step: int, images: list[int]) -> bool:
        cand = images[self.order[step]]
        for out in self.loops[step]:
            for y in bits(cand):
                if cand & ~out[y]:
                    return False
        for name, t in self.general[step]:
            rel = self.target.relation(name)
            image_lists = [tuple(bits(images[a])) for a in t]
            for combo in itertools.product(*image_lists):
                if combo not in rel:
                    return False
        return True

    def run(self, kinds: Sequence[str], collect: bool,
            barrier: Optional[tuple[int, int]] = None):
        """Search; ``kinds[step]`` is 'subset' or 'singleton'.

        ``barrier = (step, mask)`` demands the union of the first ``step``
        images covers ``mask``.  Returns all hits or the first one.
        """
        images = [0] * self.n
        found: list[HyperMap] = []

        def rec(step: int, covered: int) -> Optional[HyperMap]:
            if barrier is not None and step == barrier[0] and covered & barrier[1] != barrier[1]:
                return None
            if step == len(self.order):
                if covered == self.full:
                    hit = HyperMap(self.n, self.m, tuple(images))
                    if collect:
                        found.append(hit)
                        return None
                    return hit
                return None
            e = self.order[step]
            allowed = self.allowed(step, images)
            if not allowed:
                return None
            if kinds[step] == "subset":
                candidates = _nonempty_submasks(allowed)
            else:
                candidates = [1 << b for b in bits(allowed)]
            for cand in candidates:
                images[e] = cand
                if self.residual_ok(step, images):
                    got = rec(step + 1, covered | cand)
                    if got is not None:
                        return got
            images[e] = 0
            return None

        hit = rec(0, 0)
        return found if collect else hit


# -- enumeration of shE ------------------------------------------------------

DEFAULT_ENUMERATION_BOUND = 6


def enumerate_she(structure: "Structure", bound: int = DEFAULT_ENUMERATION_BOUND,
                  force: bool = False) -> DSM:
    """All surjective hyper-endomorphisms of a structure, as a DSM.

    Backtracking over per-element image masks with forward checking.  The
    domain bound guards against the exponential blowup on weakly constrained
    structures; pass ``force`` to exceed it at your own risk.
    """
    n = structure.size
    if n > bound and not force:
        raise BudgetExceededError(
            f"domain size {n} exceeds enumeration bound {bound}")
    search = _ImageSearch(structure, structure, _degree_descending(structure))
    found = search.run(["subset"] * n, collect=True)
    return _dsm_from_set(n, found)


# -- profile-directed existence searches --------------------------------------

def exists_shop(structure: "Structure", profile: str, *args) -> Optional[HyperMap]:
    """Search for a preserving shop matching a profile.

    Profiles (``args`` gives the parameters):
      A-shop(u)        - f(u) = D
      E-shop(x)        - x in f(z) for every z
      singletonUX(u,x) - both at once ({u}-surjective, {x}-total)
      U-surjective(U)  - f(U) = D
      X-total(X)       - every image meets X
      UX(U,X)          - U-surjective and X-total

    Returns a witness shop or None.  E-shop and X-total are decided on the
    complement structure via inversion; UX composes the two one-sided
    witnesses.
    """
    n = structure.size
    full = (1 << n) - 1
    if profile == "A-shop":
        (u,) = args
        _check_elems(n, [u])
        return _search_u_surjective(structure, frozenset([u]))
    if profile == "E-shop":
        (x,) = args
        _check_elems(n, [x])
        w = _search_u_surjective(structure.complement(), frozenset([x]))
        return inverse(w) if w is not None else None
    if profile == "singletonUX":
        u, x = args
        _check_elems(n, [u, x])
        # the one candidate: any {u}-{x}-shop has this as a sub-shop
        candidate = HyperMap(n, n, tuple(full if z == u else 1 << x for z in range(n)))
        return candidate if preserves(candidate, structure) else None
    if profile == "U-surjective":
        (U,) = args
        U = frozenset(U)
        _check_elems(n, U)
        if not U:
            raise FomcError("U must be nonempty")
        return _search_u_surjective(structure, U)
    if profile == "X-total":
        (X,) = args
        X = frozenset(X)
        _check_elems(n, X)
        if not X:
            raise FomcError("X must be nonempty")
        w = _search_u_surjective(structure.complement(), X)
        return inverse(w) if w is not None else None
    if profile == "UX":
        U, X = args
        f = exists_shop(structure, "U-surjective", U)
        if f is None:
            return None
        g = exists_shop(structure, "X-total", X)
        if g is None:
            return None
        return compose(g, f)  # U-surjectivity survives on the left, X-totality on the right
    raise FomcError(f"unknown shop profile {profile!r}")


def _check_elems(n: int, elems: Iterable[int]):
    for e in elems:
        if not (0 <= e < n):
            raise FomcError(f"element {e} outside domain 0..{n - 1}")


def _search_u_surjective(structure: "Structure", U: frozenset[int]) -> Optional[HyperMap]:
    """First preserving shop with f(U) = D, subset images on U and singleton
    images elsewhere.

    Any U-surjective preserving shop can be shrunk to this form (shrinking
    keeps preservation and keeps f(U) untouched), so the restriction loses no
    witnesses.
    """
    n = structure.size
    full = (1 << n) - 1
    u_elems = sorted(U)
    others = [a for a in _degree_descending(structure) if a not in U]
    order = u_elems + others
    kinds = ["subset"] * len(u_elems) + ["singleton"] * len(others)
    search = _ImageSearch(structure, structure, order)
    return search.run(kinds, collect=False, barrier=(len(u_elems), full))


# -- canonical shop and permuted forms ----------------------------------------

def canonical_shop(structure: "Structure", U: Iterable[int], X: Iterable[int]) -> HyperMap:
    """The unique maximal identity-form U-X-shop of a reduced structure.

    Requires U union X to be the whole domain and the structure to admit a
    U-X-shop.  The canonical shop fixes U-and-X and X-only elements, and sends
    each U-only element u to {u} plus a maximal spray X_u inside X-minus-U.
    A single spray element {x} is admissible iff the one-step identity-form
    shop u -> {u,x} preserves the structure, and admissible sprays compose by
    union, so the maximum is computed pointwise.
    """
    n = structure.size
    U = frozenset(U)
    X = frozenset(X)
    if U | X != frozenset(range(n)):
        raise FomcError("canonical shop requires U union X = domain")
    u_only = sorted(U - X)
    x_only = sorted(X - U)
    sprays: dict[int, int] = {}
    for u in u_only:
        spray = 0
        for x in x_only:
            images = [1 << z for z in range(n)]
            images[u] |= 1 << x
            if preserves(HyperMap(n, n, tuple(images)), structure):
                spray |= 1 << x
        sprays[u] = spray
    images = [1 << z for z in range(n)]
    for u, spray in sprays.items():
        images[u] |= spray
    h = HyperMap(n, n, tuple(images))
    union_spray = 0
    for u in u_only:
        union_spray |= sprays[u]
    x_only_mask = mask_of(x_only)
    if union_spray != x_only_mask or any(sprays[u] == 0 for u in u_only):
        raise FomcError("structure admits no U-X-shop for the given U, X")
    if not preserves(h, structure):  # compositions of preserving pieces preserve
        raise FomcError("canonical shop assembly failed preservation")
    return h


@dataclass(frozen=True)
class PermutedFormWitness:
    """Decomposition of a shop over a cover U, X of its domain."""

    zeta: tuple[tuple[int, int], ...]    # permutation of U & X, as pairs
    chi: tuple[tuple[int, int], ...]     # permutation of X - U
    upsilon: tuple[tuple[int, int], ...] # permutation of U - X
    sprays: tuple[tuple[int, frozenset[int]], ...]  # X_u per u in U - X

    def rebuild(self, n: int) -> HyperMap:
        images = [0] * n
        for a, b in self.zeta + self.chi:
            images[a] = 1 << b
        spray_map = dict(self.sprays)
        for a, b in self.upsilon:
            images[a] = (1 << b) | mask_of(spray_map[a])
        return HyperMap(n, n, tuple(images))


def check_3_permuted(f: HyperMap, U: Iterable[int], X: Iterable[int]) -> Optional[PermutedFormWitness]:
    """Decompose ``f`` into the 3-permuted form, or return None.

    The form: a permutation on U & X, a permutation on X - U, and on U - X a
    permutation image plus an arbitrary spray inside X - U.
    """
    n = f.source_size
    U = frozenset(U)
    X = frozenset(X)
    if U | X != frozenset(range(n)):
        raise FomcError("3-permuted form requires U union X = domain")
    both = sorted(U & X)
    x_only = sorted(X - U)
    u_only = sorted(U - X)

    def singleton_perm(region: list[int]) -> Optional[tuple[tuple[int, int], ...]]:
        seen = set()
        pairs = []
        for a in region:
            img = f.images[a]
            if img & (img - 1):  # not a singleton
                return None
            b = img.bit_length() - 1
            if b not in region or b in seen:
                return None
            seen.add(b)
            pairs.append((a, b))
        return tuple(pairs)

    zeta = singleton_perm(both)
    chi = singleton_perm(x_only)
    if zeta is None or chi is None:
        return None
    x_only_mask = mask_of(x_only)
    u_only_mask = mask_of(u_only)
    seen = set()
    upsilon = []
    sprays = []
    for u in u_only:
        img = f.images[u]
        head = img & u_only_mask
        if head == 0 or head & (head - 1):
            return None
        b = head.bit_length() - 1
        if b in seen:
            return None
        if img & ~(u_only_mask | x_only_mask):
            return None  # image leaks into U & X
        seen.add(b)
        upsilon.append((u, b))
        sprays.append((u, set_of(img & x_only_mask)))
    witness = PermutedFormWitness(zeta, chi, tuple(upsilon), tuple(sprays))
    if witness.rebuild(n) != f:
        return None
    return witness


def completion_contains(f: HyperMap, U: Iterable[int], X: Iterable[int]) -> bool:
    """Membership in the completion: the DSM of all 3-permuted-form shops."""
    return check_3_permuted(f, U, X) is not None


def completion_generators(U: Iterable[int], X: Iterable[int], n: int | None = None) -> tuple[HyperMap, ...]:
    """Generators of the completion for disjoint U, X covering the domain.

    A transposition and a cyclic permutation on U, each spraying all of X
    from every U element, plus the same two permutations on X with the
    identity-plus-full-spray on U.  Degenerate region sizes drop the absent
    permutations; the full-spray identity-form shop is always included so the
    completion's canonical shop is generated even when both regions are
    singletons.
    """
    U = sorted(set(U))
    X = sorted(set(X))
    if set(U) & set(X):
        raise FomcError("completion generators require disjoint U and X")
    if n is None:
        n = len(U) + len(X)
    if set(U) | set(X) != set(range(n)):
        raise FomcError("U and X must cover the domain")
    x_mask = mask_of(X)

    def build(u_perm: dict[int, int], x_perm: dict[int, int]) -> HyperMap:
        images = [0] * n
        for u in U:
            images[u] = (1 << u_perm.get(u, u)) | x_mask
        for x in X:
            images[x] = 1 << x_perm.get(x, x)
        return HyperMap(n, n, tuple(images))

    gens = [build({}, {})]
    if len(U) >= 2:
        gens.append(build({U[0]: U[1], U[1]: U[0]}, {}))
        cycle = {U[i]: U[(i + 1) % len(U)] for i in range(len(U))}
        gens.append(build(cycle, {}))
    if len(X) >= 2:
        gens.append(build({}, {X[0]: X[1], X[1]: X[0]}))
        cycle = {X[i]: X[(i + 1) % len(X)] for i in range(len(X))}
        gens.append(build({}, cycle))
    seen = []
    for g in gens:
        if g not in seen:
            seen.append(g)
    return tuple(seen)


# -- text syntax ---------------------------------------------------------------

def render_shop(f: HyperMap) -> str:
    """Render as ``0->{0,1};1->{1}``."""
    parts = []
    for a, m in enumerate(f.images):
        elems = ",".join(str(b) for b in bits(m))
        parts.append(f"{a}->{{{elems}}}")
    return ";".join(parts)


def parse_shop(text: str) -> HyperMap:
    """Parse the ``0->{0,1};1->{1}`` syntax; sizes inferred from the content."""
    entries = {}
    max_elem = -1
    for chunk in text.strip().split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "->" not in chunk:
            raise ParseError(f"bad shop entry {chunk!r}")
        left, right = chunk.split("->", 1)
        right = right.strip()
        if not (right.startswith("{") and right.endswith("}")):
            raise ParseError(f"bad image set {right!r}")
        try:
            a = int(left)
            body = right[1:-1].strip()
            img = frozenset(int(p) for p in body.split(",") if p.strip()) if body else frozenset()
        except ValueError as exc:
            raise ParseError(f"bad shop entry {chunk!r}") from exc
        if a in entries:
            raise ParseError(f"duplicate source element {a}")
        entries[a] = img
        max_elem = max([max_elem, a, *img])
    n = max_elem + 1
    if set(entries) != set(range(n)):
        raise ParseError("shop must define every source element 0..n-1")
    return HyperMap.from_sets(n, n, [entries[a] for a in range(n)])
