"""Independent certificate verification and a brute-force search oracle.

The verifier re-walks every target through the certificate's raw data with
its own reduction and action code (nothing shared with the construction
path), recomputes all orders, and checks the claims.  The oracle searches
small-degree permutation assignments exhaustively, deduplicated up to
simultaneous conjugation, and is used to cross-check engine results.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import BudgetExceeded, HypothesisViolation, InfiniteFactor

OracleImages = tuple[tuple[int, ...], ...]


@dataclass
class VerifyReport:
    orders: dict[int, int] = field(default_factory=dict)
    distinct: dict[tuple[int, int], bool] = field(default_factory=dict)
    checks: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "verdict": "pass" if self.verdict else "fail",
            "orders": {str(i): o for i, o in sorted(self.orders.items())},
            "distinct": [[i, j, ok] for (i, j), ok in sorted(self.distinct.items())],
            "checks": self.checks,
            "failures": self.failures,
        }


def _mul_table_ok(table: list[list[int]]) -> str | None:
    n = len(table)
    for i, row in enumerate(table):
        if len(row) != n:
            return f"row {i} wrong length"
        if sorted(row) != list(range(n)):
            return f"row {i} not a permutation"
    for j in range(n):
        if sorted(table[i][j] for i in range(n)) != list(range(n)):
            return f"column {j} not a permutation"
    if any(table[0][i] != i or table[i][0] != i for i in range(n)):
        return "identity is not element 0"
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if table[table[a][b]][c] != table[a][table[b][c]]:
                    return f"associativity fails at ({a},{b},{c})"
    return None


def _hom_ok(hom: dict, source: dict) -> str | None:
    table = hom.get("target_table")
    if not isinstance(table, list):
        return "missing target table"
    err = _mul_table_ok(table)
    if err:
        return f"target not a group: {err}"
    if hom["kind"] == "finite":
        if source.get("type") != "finite":
            return "finite hom on non-finite factor"
        src = source["table"]
        mapping = hom["map"]
        if len(mapping) != len(src) or mapping[0] != 0:
            return "map shape wrong"
        for x in range(len(src)):
            for y in range(len(src)):
                if mapping[src[x][y]] != table[mapping[x]][mapping[y]]:
                    return f"not a homomorphism at ({x},{y})"
        return None
    if hom["kind"] == "infinite_cyclic":
        if source.get("type") != "infinite_cyclic":
            return "modulus hom on finite factor"
        if hom.get("modulus") != len(table):
            return "modulus does not match target size"
        return None
    return f"unknown hom kind {hom.get('kind')!r}"


def _map_syllables(word: list[tuple[int, int]], homs: list[dict]) -> list[tuple[int, int]]:
    out = []
    for f, v in word:
        hom = homs[f]
        if hom["kind"] == "finite":
            img = hom["map"][v]
        else:
            img = v % hom["modulus"]
        out.append((f, img))
    return out


def _reduce(word: list[tuple[int, int]], tables: list[list[list[int]]]) -> list[tuple[int, int]]:
    stack: list[tuple[int, int]] = []
    for f, v in word:
        if v == 0:
            continue
        while stack and stack[-1][0] == f:
            prev_f, prev_v = stack.pop()
            v = tables[f][prev_v][v]
            if v == 0:
                break
        else:
            stack.append((f, v))
    return stack


def _graph_ok(graph: dict, hom_tables: list[list[list[int]]]) -> str | None:
    vcount = graph.get("vcount")
    if not isinstance(vcount, int) or vcount < 1:
        return "bad vertex count"
    tables = graph.get("factors")
    if tables != hom_tables:
        return "graph factors disagree with the factor homomorphisms"
    action = graph.get("action")
    if not isinstance(action, list) or len(action) != 2:
        return "bad action shape"
    for f in (0, 1):
        n = len(tables[f])
        rows = action[f]
        if len(rows) != vcount:
            return f"action[{f}] wrong length"
        for c in range(1, n):
            seen = [False] * vcount
            for v in range(vcount):
                row = rows[v]
                if len(row) != n - 1:
                    return f"action[{f}][{v}] wrong width"
                tgt = row[c - 1]
                if not isinstance(tgt, int) or not (0 <= tgt < vcount):
                    return "property (1): target out of range"
                if seen[tgt]:
                    return f"property (1) fails for factor {f} element {c}"
                seen[tgt] = True
                if tgt == v:
                    return f"property (2) fails: freeness at vertex {v}"
        # composition law
        for c in range(1, n):
            for d in range(1, n):
                e = tables[f][c][d]
                for v in range(vcount):
                    via = rows[rows[v][c - 1]][d - 1]
                    direct = v if e == 0 else rows[v][e - 1]
                    if via != direct:
                        return f"group law fails for factor {f} at ({c},{d})"
    return None


def _walk_order(word: list[tuple[int, int]], graph: dict) -> int:
    vcount = graph["vcount"]
    action = graph["action"]
    perm = list(range(vcount))
    for f, v in word:
        rows = action[f]
        perm = [rows[x][v - 1] for x in perm]
    seen = [False] * vcount
    order = 1
    for start in range(vcount):
        if seen[start]:
            continue
        length, cur = 0, start
        while not seen[cur]:
            seen[cur] = True
            cur = perm[cur]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def verify_certificate(instance_data: dict, cert_data: dict) -> VerifyReport:
    """Recompute every claim of a certificate from raw data.

    Validates the factor homomorphisms and every component graph, re-walks
    each original target through an independent reduction/action code path,
    and compares recomputed orders and their pairwise distinctness with the
    claims.
    """
    report = VerifyReport()

    def fail(msg: str) -> VerifyReport:
        report.failures.append(msg)
        return report

    try:
        factors = instance_data["factors"]
        raw_targets = [
            [(int(f), int(v)) for f, v in word] for word in instance_data["targets"]
        ]
        homs = cert_data["factor_homs"]
        components = cert_data["components"]
        claimed = {int(k): int(v) for k, v in cert_data["orders"].items()}
    except Exception as exc:
        return fail(f"unreadable data: {exc}")

    if len(homs) != 2:
        return fail("need exactly two factor homomorphisms")
    for f, hom in enumerate(homs):
        err = _hom_ok(hom, factors[f])
        if err:
            return fail(f"factor hom {f}: {err}")
    report.checks.append("factor homomorphisms are valid")

    hom_tables = [hom["target_table"] for hom in homs]
    mapped = [
        _reduce(_map_syllables(word, homs), hom_tables) for word in raw_targets
    ]

    graph_components = []
    for n, comp in enumerate(components):
        if comp.get("type") != "graph":
            return fail(f"component {n}: unknown type {comp.get('type')!r}")
        err = _graph_ok(comp["graph"], hom_tables)
        if err:
            return fail(f"component {n}: {err}")
        graph_components.append(comp["graph"])
    report.checks.append(f"{len(graph_components)} component graphs satisfy both graph properties")
    if not graph_components:
        return fail("certificate carries no components")

    recomputed: dict[int, int] = {}
    for i, word in enumerate(mapped):
        per_comp = [_walk_order(word, graph) for graph in graph_components]
        recomputed[i] = math.lcm(*per_comp)
    report.orders = recomputed
    report.checks.append("orders recomputed by independent word walking")

    if set(claimed) != set(recomputed):
        return fail("claimed orders do not cover the targets")
    for i in sorted(recomputed):
        if claimed[i] != recomputed[i]:
            report.failures.append(
                f"target {i}: claimed order {claimed[i]} != recomputed {recomputed[i]}"
            )
    if report.failures:
        return report

    for i in sorted(recomputed):
        for j in sorted(recomputed):
            if i < j:
                ok = recomputed[i] != recomputed[j]
                report.distinct[(i, j)] = ok
                if not ok:
                    report.failures.append(
                        f"targets {i} and {j} share the image order {recomputed[i]}"
                    )
    if report.failures:
        return report
    report.checks.append("image orders are pairwise distinct")

    product = cert_data.get("product")
    if product is not None:
        err = _graph_ok(product, hom_tables)
        if err:
            return fail(f"product graph: {err}")
        for i, word in enumerate(mapped):
            if _walk_order(word, product) != recomputed[i]:
                return fail(f"product order of target {i} deviates from the component lcm")
        report.checks.append("materialized product agrees with the component orders")

    if not cert_data.get("verified", False):
        report.failures.append("certificate does not claim verified status")
    return report


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

@dataclass
class OracleResult:
    found: bool
    degree: int = 0
    images: OracleImages | None = None
    orders: dict[int, int] | None = None

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "found": self.found,
            "degree": self.degree,
            "images": [list(p) for p in self.images] if self.images else None,
            "orders": {str(i): o for i, o in sorted(self.orders.items())} if self.orders else None,
        }


def _generating_sequence(table: list[list[int]]) -> list[int]:
    n = len(table)
    gens: list[int] = []
    closure = {0}
    while len(closure) < n:
        g = min(x for x in range(n) if x not in closure)
        gens.append(g)
        frontier = [g]
        while frontier:
            nxt = []
            for x in frontier:
                for y in list(closure) + [x]:
                    for z in (table[x][y], table[y][x]):
                        if z not in closure:
                            closure.add(z)
                            nxt.append(z)
            frontier = nxt
    return gens


def _element_words(table: list[list[int]], gens: list[int]) -> list[list[int]]:
    """For each element, a word over the generator indices reaching it."""
    n = len(table)
    words: list[list[int] | None] = [None] * n
    words[0] = []
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for gi, g in enumerate(gens):
                y = table[x][g]
                if words[y] is None:
                    words[y] = words[x] + [gi]
                    nxt.append(y)
        frontier = nxt
    if any(w is None for w in words):
        raise HypothesisViolation("generators do not generate")
    return words  # type: ignore[return-value]


def _perm_mul(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(q[x] for x in p)


def _perm_order(p: tuple[int, ...]) -> int:
    seen = [False] * len(p)
    order = 1
    for s in range(len(p)):
        if seen[s]:
            continue
        length, cur = 0, s
        while not seen[cur]:
            seen[cur] = True
            cur = p[cur]
            length += 1
        order = order * length // math.gcd(order, length)
    return order


def _conjugacy_class_reps(d: int, order_divides: int) -> list[tuple[int, ...]]:
    """Canonical representative per cycle type with order dividing the bound."""
    reps = []
    for partition in _partitions(d):
        if order_divides % math.lcm(*partition):
            continue
        perm = []
        offset = 0
        for part in partition:
            perm.extend((offset + (i + 1) % part) for i in range(part))
            offset += part
        reps.append(tuple(perm))
    return reps


def _partitions(d: int, cap: int | None = None):
    cap = cap or d
    if d == 0:
        yield []
        return
    for first in range(min(d, cap), 0, -1):
        for rest in _partitions(d - first, first):
            yield [first] + rest


@lru_cache(maxsize=64)
def _order_filtered(d: int, order_divides: int) -> tuple[tuple[int, ...], ...]:
    return tuple(
        p
        for p in itertools.permutations(range(d))
        if order_divides % _perm_order(p) == 0
    )


def _dedup_under(candidates, centralizer) -> list[tuple[int, ...]]:
    """One representative per conjugation orbit: candidates come sorted, so
    the first member seen of each orbit is its lexicographic minimum."""
    seen: set[tuple[int, ...]] = set()
    out = []
    for p in candidates:
        if p in seen:
            continue
        out.append(p)
        for c in centralizer:
            seen.add(_perm_mul(_perm_mul(_inv(c), p), c))
    return out


def brute_force_search(
    instance_data: dict,
    max_degree: int = 8,
    time_limit: float | None = None,
) -> OracleResult:
    """Exhaust homomorphisms into symmetric groups of growing degree until
    the target image orders come out pairwise distinct.

    Assignments are enumerated generator by generator, deduplicated up to
    simultaneous conjugation (class representatives for the first generator,
    minimum under the running centralizer for the rest).  The first hit in
    this deterministic order is returned.
    """
    if max_degree > 12:
        raise HypothesisViolation("oracle degree capped at 12")
    factors = instance_data["factors"]
    if any(f.get("type") != "finite" for f in factors):
        raise InfiniteFactor("oracle requires finite factors")
    targets = [[(int(f), int(v)) for f, v in w] for w in instance_data["targets"]]
    if len(targets) > 3:
        raise HypothesisViolation("oracle supports at most 3 targets")
    tables = [f["table"] for f in factors]
    gen_lists = [_generating_sequence(t) for t in tables]
    words = [_element_words(t, g) for t, g in zip(tables, gen_lists)]
    orders = [
        [_factor_element_order(t, g) for g in gen_list]
        for t, gen_list in zip(tables, gen_lists)
    ]
    flat_gens = [(f, gi) for f in (0, 1) for gi in range(len(gen_lists[f]))]
    deadline = time.monotonic() + time_limit if time_limit else None

    for d in range(1, max_degree + 1):
        identity = tuple(range(d))

        def element_image(f: int, x: int, assigned: dict) -> tuple[int, ...]:
            perm = identity
            for gi in words[f][x]:
                perm = _perm_mul(perm, assigned[(f, gi)])
            return perm

        def consistent(f: int, assigned: dict) -> bool:
            imgs = [element_image(f, x, assigned) for x in range(len(tables[f]))]
            for x in range(len(tables[f])):
                for y in range(len(tables[f])):
                    if _perm_mul(imgs[x], imgs[y]) != imgs[tables[f][x][y]]:
                        return False
            return True

        def search(pos: int, assigned: dict, centralizer: list) -> OracleResult | None:
            if deadline and time.monotonic() > deadline:
                raise BudgetExceeded("oracle wall-clock budget exhausted")
            if pos == len(flat_gens):
                image_cache = {}
                target_orders = {}
                for i, w in enumerate(targets):
                    perm = identity
                    for f, v in w:
                        key = (f, v)
                        if key not in image_cache:
                            image_cache[key] = element_image(f, v, assigned)
                        perm = _perm_mul(perm, image_cache[key])
                    target_orders[i] = _perm_order(perm)
                if len(set(target_orders.values())) == len(target_orders):
                    images = tuple(assigned[k] for k in flat_gens)
                    return OracleResult(True, d, images, target_orders)
                return None
            f, gi = flat_gens[pos]
            divides = orders[f][gi]
            if pos == 0:
                candidates = _conjugacy_class_reps(d, divides)
            else:
                candidates = _dedup_under(_order_filtered(d, divides), centralizer)
            last_of_factor = pos + 1 == len(flat_gens) or flat_gens[pos + 1][0] != f
            multi_gen = len(gen_lists[f]) > 1
            for p in candidates:
                assigned[(f, gi)] = p
                if last_of_factor and multi_gen and not consistent(f, assigned):
                    continue
                new_centralizer = [c for c in centralizer if _perm_mul(c, p) == _perm_mul(p, c)]
                result = search(pos + 1, assigned, new_centralizer)
                if result:
                    return result
            assigned.pop((f, gi), None)
            return None

        full = list(itertools.permutations(range(d)))
        result = search(0, {}, full)
        if result:
            return result
    return OracleResult(False, max_degree)


def _inv(p: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return out


def _factor_element_order(table: list[list[int]], x: int) -> int:
    k, cur = 1, x
    while cur != 0:
        cur = table[cur][x]
        k += 1
    return k
