"""Finite groups by multiplication table, permutations, quotients, and the
iterated wreath p-groups used as search targets.

Elements of a :class:`FiniteGroup` are the indices ``0..n-1`` with 0 the
identity.  Tables whose identity sits elsewhere are relabelled on load.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import BudgetExceeded, NotAGroup, NotNormal

ASSOC_EXHAUSTIVE_BOUND = 64
ASSOC_RANDOM_SAMPLES = 10_000
NORMAL_SUBGROUP_BOUND = 128
WREATH_POINT_BOUND = 2 ** 16


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group as an n x n multiplication table over 0..n-1."""

    n: int
    table: tuple[tuple[int, ...], ...]
    inv: tuple[int, ...]

    def mul(self, x: int, y: int) -> int:
        return self.table[x][y]

    def elements(self) -> range:
        return range(self.n)

    def conjugate(self, g: int, x: int) -> int:
        """g^-1 * x * g."""
        return self.mul(self.mul(self.inv[g], x), g)

    def power(self, x: int, k: int) -> int:
        if k < 0:
            return self.power(self.inv[x], -k)
        acc = 0
        base = x
        while k:
            if k & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            k >>= 1
        return acc

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self) -> int:
        return hash(self.table)


@dataclass(frozen=True)
class Permutation:
    """A bijection on 0..degree-1."""

    degree: int
    map: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.map) != list(range(self.degree)):
            raise ValueError("map is not a bijection")

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls(degree, tuple(range(degree)))

    def __call__(self, point: int) -> int:
        return self.map[point]

    def then(self, other: Permutation) -> Permutation:
        """self followed by other (left-to-right composition)."""
        return Permutation(self.degree, tuple(other.map[i] for i in self.map))

    def inverse(self) -> Permutation:
        out = [0] * self.degree
        for i, j in enumerate(self.map):
            out[j] = i
        return Permutation(self.degree, tuple(out))

    def power(self, k: int) -> Permutation:
        if k < 0:
            return self.inverse().power(-k)
        acc = Permutation.identity(self.degree)
        base = self
        while k:
            if k & 1:
                acc = acc.then(base)
            base = base.then(base)
            k >>= 1
        return acc

    def cycle_lengths(self) -> list[int]:
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            length = 0
            cur = start
            while not seen[cur]:
                seen[cur] = True
                cur = self.map[cur]
                length += 1
            out.append(length)
        return out

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.map))


def perm_order(g: Permutation) -> int:
    """Order of a permutation: lcm of its cycle lengths."""
    return math.lcm(*g.cycle_lengths()) if g.degree else 1


@dataclass(frozen=True)
class FactorHom:
    """A surjection of one free factor onto a finite group.

    ``kind`` is "finite" (element-wise ``map`` from a FiniteGroup source) or
    "infinite_cyclic" (reduction mod ``modulus``; the generator maps to 1).
    """

    kind: str
    target: FiniteGroup
    map: tuple[int, ...] = ()
    modulus: int = 0
    source: FiniteGroup | None = field(default=None, compare=False)

    def apply(self, value: int) -> int:
        """Image of a factor element (index, or Z exponent) in the target."""
        if self.kind == "finite":
            return self.map[value]
        return value % self.modulus

    def check(self) -> None:
        if self.kind == "finite":
            src = self.source
            if src is None or len(self.map) != src.n or self.map[0] != 0:
                raise NotAGroup("malformed factor homomorphism")
            for x in src.elements():
                for y in src.elements():
                    if self.map[src.mul(x, y)] != self.target.mul(self.map[x], self.map[y]):
                        raise NotAGroup(f"map not a homomorphism at ({x},{y})")
        elif self.kind == "infinite_cyclic":
            if self.modulus < 1 or self.target.n != self.modulus:
                raise NotAGroup("modulus does not match target size")
        else:
            raise NotAGroup(f"unknown factor hom kind {self.kind!r}")


def _find_identity(table: Sequence[Sequence[int]]) -> int:
    n = len(table)
    for e in range(n):
        if all(table[e][i] == i and table[i][e] == i for i in range(n)):
            return e
    raise NotAGroup("no identity element")


def validate_group(table: Sequence[Sequence[int]], *, rng: random.Random | None = None) -> FiniteGroup:
    """Validate a multiplication table and derive inverses.

    The identity is relabelled to index 0 if it sits elsewhere.  Associativity
    is checked exhaustively up to n=64 and on random triples beyond.
    """
    n = len(table)
    if n == 0:
        raise NotAGroup("empty table")
    for i, row in enumerate(table):
        if len(row) != n:
            raise NotAGroup(f"row {i} has wrong length")
        for v in row:
            if not isinstance(v, int) or not (0 <= v < n):
                raise NotAGroup(f"entry out of range in row {i}")

    e = _find_identity(table)
    if e != 0:
        relabel = list(range(n))
        relabel[0], relabel[e] = e, 0
        inverse_label = relabel
        table = [
            [inverse_label[table[relabel[i]][relabel[j]]] for j in range(n)]
            for i in range(n)
        ]

    for i in range(n):
        if sorted(table[i]) != list(range(n)):
            raise NotAGroup(f"row {i} not a permutation")
        if sorted(table[j][i] for j in range(n)) != list(range(n)):
            raise NotAGroup(f"column {i} not a permutation")

    inv = [-1] * n
    for i in range(n):
        for j in range(n):
            if table[i][j] == 0:
                if table[j][i] != 0:
                    raise NotAGroup(f"one-sided inverse at {i}")
                inv[i] = j
                break
        if inv[i] < 0:
            raise NotAGroup(f"no inverse for {i}")

    if n <= ASSOC_EXHAUSTIVE_BOUND:
        triples: Iterable[tuple[int, int, int]] = (
            (a, b, c) for a in range(n) for b in range(n) for c in range(n)
        )
    else:
        rng = rng or random.Random(0)
        triples = (
            (rng.randrange(n), rng.randrange(n), rng.randrange(n))
            for _ in range(ASSOC_RANDOM_SAMPLES)
        )
    for a, b, c in triples:
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise NotAGroup(f"associativity fails at ({a},{b},{c})")

    return FiniteGroup(n, tuple(tuple(row) for row in table), tuple(inv))


def cyclic_group(n: int) -> FiniteGroup:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return validate_group(table)


def element_order(group: FiniteGroup, x: int) -> int:
    """Least k >= 1 with x^k = identity."""
    k = 1
    cur = x
    while cur != 0:
        cur = group.mul(cur, x)
        k += 1
    return k


def _closure(group: FiniteGroup, seed: Iterable[int]) -> frozenset[int]:
    """Subgroup closure of a subset (products and inverses)."""
    members = {0} | set(seed)
    frontier = list(members)
    while frontier:
        nxt = []
        for x in frontier:
            for y in list(members):
                for z in (group.mul(x, y), group.mul(y, x)):
                    if z not in members:
                        members.add(z)
                        nxt.append(z)
            ix = group.inv[x]
            if ix not in members:
                members.add(ix)
                nxt.append(ix)
        frontier = nxt
    return frozenset(members)


def _normal_closure(group: FiniteGroup, x: int) -> frozenset[int]:
    conjugates = {group.conjugate(g, x) for g in group.elements()}
    return _closure(group, conjugates)


def normal_subgroups(group: FiniteGroup) -> list[frozenset[int]]:
    """All normal subgroups, as joins of principal normal closures.

    Every normal subgroup is the join of the normal closures of its elements,
    so closing {trivial}+principals under pairwise join enumerates them all.
    """
    if group.n > NORMAL_SUBGROUP_BOUND:
        raise BudgetExceeded(f"group order {group.n} over bound {NORMAL_SUBGROUP_BOUND}")
    principals = {_normal_closure(group, x) for x in group.elements()}
    known = {frozenset({0})} | principals
    changed = True
    while changed:
        changed = False
        for a in list(known):
            for b in principals:
                j = _closure(group, a | b)
                if j not in known:
                    known.add(j)
                    changed = True
    return sorted(known, key=lambda s: (len(s), sorted(s)))


def _is_normal(group: FiniteGroup, subset: frozenset[int]) -> bool:
    if 0 not in subset:
        return False
    for x in subset:
        if group.inv[x] not in subset:
            return False
        for y in subset:
            if group.mul(x, y) not in subset:
                return False
        for g in group.elements():
            if group.conjugate(g, x) not in subset:
                return False
    return True


def quotient(group: FiniteGroup, subset: Iterable[int]) -> tuple[FiniteGroup, FactorHom]:
    """Quotient by a normal subgroup plus the canonical projection."""
    sub = frozenset(subset)
    if not _is_normal(group, sub):
        raise NotNormal(sorted(sub))
    coset_of = [-1] * group.n
    reps: list[int] = []
    for x in group.elements():
        if coset_of[x] >= 0:
            continue
        idx = len(reps)
        reps.append(x)
        for h in sub:
            coset_of[group.mul(x, h)] = idx
    m = len(reps)
    table = [[coset_of[group.mul(reps[i], reps[j])] for j in range(m)] for i in range(m)]
    q = validate_group(table)
    hom = FactorHom(kind="finite", target=q, map=tuple(coset_of), source=group)
    hom.check()
    return q, hom


def wreath_p_group(p: int, m: int) -> list[Permutation]:
    """Generators of the m-fold iterated wreath power of the cyclic group of
    order p, acting on p^m points (a Sylow p-subgroup of the symmetric group).

    Generator k cycles the depth-k blocks under the leftmost branch; the
    product of all generators has order p^m.
    """
    points = p ** m
    if points > WREATH_POINT_BOUND:
        raise BudgetExceeded(f"{p}^{m} points over bound {WREATH_POINT_BOUND}")
    gens = []
    for level in range(1, m + 1):
        block = p ** (m - level)
        mapping = list(range(points))
        # rotate the p blocks of size `block` sitting at offset 0
        for i in range(p):
            for x in range(block):
                mapping[i * block + x] = ((i + 1) % p) * block + x
        gens.append(Permutation(points, tuple(mapping)))
    return gens


def random_wreath_element(p: int, m: int, rng: random.Random) -> Permutation:
    """Uniform random element of the iterated wreath p-group on p^m points."""
    def sample(depth: int) -> list[int]:
        if depth == 0:
            return [0]
        size = p ** (depth - 1)
        top = rng.randrange(p)
        out = []
        for i in range(p):
            part = sample(depth - 1)
            shift = ((i + top) % p) * size
            out.extend(shift + part[x] for x in range(size))
        return out

    return Permutation(p ** m, tuple(sample(m)))


def mulclose(gens: Sequence[Permutation], maxsize: int | None = None) -> set[Permutation]:
    """Closure of permutations under composition (test helper)."""
    els = set(gens)
    frontier = list(els)
    while frontier:
        nxt = []
        for a in gens:
            for b in frontier:
                c = b.then(a)
                if c not in els:
                    els.add(c)
                    nxt.append(c)
                    if maxsize and len(els) > maxsize:
                        raise BudgetExceeded(f"closure exceeded {maxsize}")
        frontier = nxt
    return els
