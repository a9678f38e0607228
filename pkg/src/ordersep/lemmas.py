"""The four constructive engines behind the separation pipeline.

All four operate on words of the Cartesian subgroup C over two finite
factors and return graphs together with recomputed, verified order data.

* ``lemma1_boost``   -- make targets act with large p-power order, via a
  random fiber assignment into an iterated wreath p-group.
* ``lemma2_declose`` -- additionally make every target's cycles free of
  close edges, by repeated two-mark surgeries keyed to connecting elements
  of the form (prefix of root) * z * (suffix of root).
* ``lemma3_separate`` -- pairwise distinct orders, coprime to a given prime
  set, for words in pairwise non-conjugate cyclic subgroups; recursive
  order-splitting with an equalization loop in the middle.
* ``lemma4_power_separate`` -- distinct orders for powers of one word.

Everything a construction promises is recomputed from the produced graph
before it is returned; randomized search is seeded and budgeted.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
from sympy import factorint, isprime, nextprime

from .config import RunConfig, sub_seed
from .covergraph import (
    CoverGraph,
    SurgeryMark,
    close_edge_scan,
    gamma_surgery,
    induced_graph,
    perm_array_order,
    word_perm_array,
    word_order,
)
from .errors import (
    BudgetExceeded,
    ConflictingMarks,
    HypothesisViolation,
    InternalError,
    IterationBudgetExceeded,
    NotCyclicallyReduced,
    NotInCartesian,
    PostconditionFailed,
    SearchBudgetExceeded,
    TrivialTarget,
)
from .groupcore import perm_order, random_wreath_element
from .words import (
    IDENTITY,
    Factors,
    NormalForm,
    cartesian_basis,
    in_cartesian,
    is_conjugate,
    is_cyclically_reduced,
    minimal_cartesian_power,
    normalize,
    power,
    primitive_root,
    rewrite,
)


@dataclass
class Component:
    """One permutation action in a certificate; when ``prime`` is set, every
    Cartesian-subgroup word acts with p-power order on ``graph``."""

    graph: CoverGraph
    prime: int | None
    note: str = ""


@dataclass
class SeparationResult:
    components: list[Component]
    orders: dict[int, int]
    transcript: list[dict] = field(default_factory=list)

    def combined_order(self, w: NormalForm) -> int:
        return math.lcm(*(word_order(c.graph, w) for c in self.components))


def fresh_prime(excluded) -> int:
    p = 2
    while p in excluded:
        p = int(nextprime(p))
    return p


def is_prime_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _require_cartesian_targets(targets, factors: Factors) -> None:
    for i, w in enumerate(targets):
        if w.is_identity:
            raise TrivialTarget(f"target {i} is trivial")
        if not in_cartesian(w, factors):
            raise NotInCartesian(f"target {i} has nontrivial factor image")


# ---------------------------------------------------------------------------
# prime-power boosting
# ---------------------------------------------------------------------------

def lemma1_boost(
    targets: list[NormalForm],
    p: int,
    n_power: int,
    factors: Factors,
    *,
    seed: int = 0,
    config: RunConfig | None = None,
    fiber_exponent: int | None = None,
) -> Component:
    """A component where every target's order is a p-power above p^n_power.

    Targets are rewritten over the Cartesian basis; random fiber assignments
    into the wreath p-group on p^m points are drawn until all evaluated
    orders clear the threshold, growing m on sustained failure.  The winning
    assignment is materialized as an induced graph and re-verified there.
    ``fiber_exponent`` forces a larger starting fiber.
    """
    config = config or RunConfig()
    if not isprime(p):
        raise HypothesisViolation(f"{p} is not prime")
    if n_power < 0:
        raise HypothesisViolation("power threshold must be >= 0")
    ga, gb = factors.groups()
    _require_cartesian_targets(targets, factors)
    cb = cartesian_basis(factors)
    letters = [rewrite(w, factors) for w in targets]
    threshold = p ** n_power

    rng = random.Random(sub_seed(seed, "lemma1", p, n_power))
    m = max(n_power + 1, fiber_exponent or 0)
    while p ** m * ga.n * gb.n > config.max_vertices and m > n_power + 1:
        m -= 1
    attempts = 0
    while attempts < config.lemma1_attempts:
        if attempts and attempts % config.lemma1_grow_every == 0:
            if p ** (m + 1) * ga.n * gb.n <= config.max_vertices:
                m += 1
        attempts += 1
        y = p ** m
        psi = [random_wreath_element(p, m, rng) for _ in range(cb.rank)]
        maps = [np.array(q.map, dtype=np.int64) for q in psi]
        inv_maps = [np.array(q.inverse().map, dtype=np.int64) for q in psi]
        ok = True
        for word_letters in letters:
            cur = np.arange(y, dtype=np.int64)
            for idx, exp in word_letters:
                cur = (maps[idx] if exp > 0 else inv_maps[idx])[cur]
            if perm_array_order(cur) <= threshold:
                ok = False
                break
        if not ok:
            continue
        graph = induced_graph(ga, gb, y, psi, max_vertices=config.max_vertices)
        orders = [word_order(graph, w) for w in targets]
        if all(o > threshold and is_prime_power(o, p) for o in orders):
            return Component(
                graph,
                p,
                note=f"boost p={p} above {p}^{n_power} (fiber {y}, attempt {attempts})",
            )
    raise SearchBudgetExceeded(seed, attempts)


# ---------------------------------------------------------------------------
# close-edge elimination
# ---------------------------------------------------------------------------

def _root_data(u: NormalForm, factors: Factors) -> tuple[NormalForm, int]:
    """(root, m) for u = root^m, validating the minimal-power hypothesis:
    no proper divisor power of the root lands in the Cartesian subgroup."""
    if not is_cyclically_reduced(u):
        raise NotCyclicallyReduced(u.syllables)
    root, m = primitive_root(u, factors)
    if minimal_cartesian_power(root, factors) != m:
        raise HypothesisViolation(
            f"a smaller power of the root already lies in the Cartesian subgroup (m={m})"
        )
    return root, m


def _word_in_cyclic(chi: NormalForm, root: NormalForm, factors: Factors) -> bool:
    """Group-level membership of chi in the cyclic subgroup of the root."""
    if chi.is_identity:
        return True
    bound = len(chi) // len(root) + 1
    return any(chi == power(root, j, factors) for j in range(-bound, bound + 1))


def connecting_words(root: NormalForm, factors: Factors):
    """All admissible (z, mu, nu) connector words for a hyperbolic root.

    The connector is (first nu syllables) * z * (syllables mu..end), where z
    ranges over both factors including the identity; for z = 1 the index
    pairs that merely re-read the root are excluded.  Connectors that fall
    into the cyclic subgroup of the root cannot witness a pair of distinct
    close edges and are dropped.
    """
    syl = root.syllables
    n = len(syl)
    ga, gb = factors.groups()
    zs: list[NormalForm] = [IDENTITY]
    zs += [NormalForm(((0, v),)) for v in range(1, ga.n)]
    zs += [NormalForm(((1, v),)) for v in range(1, gb.n)]
    out = []
    for z in zs:
        for mu in range(1, n + 1):
            for nu in range(1, n + 1):
                if z.is_identity and (mu == nu + 1 or nu - mu >= n - 1):
                    continue
                mu_part = syl[mu - 1:] if mu > 1 else ()
                nu_part = syl[:nu] if nu < n else ()
                chi = normalize(nu_part + z.syllables + mu_part, factors)
                if _word_in_cyclic(chi, root, factors):
                    continue
                out.append((z, mu, nu, chi))
    return out


def _perm_orbit_labels(p: np.ndarray) -> np.ndarray:
    labels = np.full(len(p), -1, dtype=np.int64)
    for v in range(len(p)):
        if labels[v] < 0:
            orbit = [v]
            cur = int(p[v])
            while cur != v:
                orbit.append(cur)
                cur = int(p[cur])
            labels[np.array(orbit)] = v
    return labels


def _fixed_vertex_witness(g: CoverGraph, chi: NormalForm, u: NormalForm) -> int | None:
    """Least vertex r with r * chi * u^l = r for some integer l, else None."""
    labels = _perm_orbit_labels(word_perm_array(g, u))
    pchi = word_perm_array(g, chi)
    bad = np.flatnonzero(labels[pchi] == labels)
    return int(bad[0]) if bad.size else None


def _cyclic_membership(g: CoverGraph, chi: NormalForm, root: NormalForm) -> int | None:
    """Exponent j with perm(chi) = perm(root)^j on g, else None.

    Per-vertex discrete logs along root-orbits, merged by CRT; complete and
    linear in the vertex count.
    """
    pchi = word_perm_array(g, chi)
    proot = word_perm_array(g, root)
    n = len(proot)
    pos = np.empty(n, dtype=np.int64)
    length = np.empty(n, dtype=np.int64)
    label = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    for v in range(n):
        if seen[v]:
            continue
        orbit = [v]
        cur = int(proot[v])
        while cur != v:
            orbit.append(cur)
            cur = int(proot[cur])
        arr = np.array(orbit)
        seen[arr] = True
        pos[arr] = np.arange(len(orbit))
        length[arr] = len(orbit)
        label[arr] = v
    if not np.array_equal(label[pchi], label):
        return None
    residue, modulus = 0, 1
    for v in range(n):
        lv = int(length[v])
        jv = (int(pos[pchi[v]]) - int(pos[v])) % lv
        d = math.gcd(modulus, lv)
        if (jv - residue) % d:
            return None
        step = modulus // d
        t = ((jv - residue) // d * pow(step, -1, lv // d)) % (lv // d) if lv != d else 0
        residue = residue + modulus * t
        modulus = modulus // d * lv
        residue %= modulus
    # direct verification at the merged exponent
    acc = np.arange(n, dtype=np.int64)
    base = proot
    k = residue
    while k:
        if k & 1:
            acc = base[acc]
        base = base[base]
        k >>= 1
    return residue if np.array_equal(acc, pchi) else None


def _declose_surgery(
    g: CoverGraph,
    chi: NormalForm,
    root: NormalForm,
    r: int,
    p: int,
    factors: Factors,
    cap: int,
    flip: bool = False,
) -> CoverGraph:
    """The two-mark p-fold surgery breaking the fixed-vertex coincidence at r.

    The mark factor is chosen by comparing the first connector syllable with
    the last root syllable; ``flip`` selects the other variant (used on
    retry rounds when the prescribed one fails to clear the witness).
    """
    syl = root.syllables
    y1_f, y1_v = syl[0]
    yn_f, yn_v = syl[-1]
    d_factor = yn_f
    f_factor = 1 - yn_f
    x1_f = chi.syllables[0][0]
    use_d = (x1_f != yn_f) ^ flip
    if use_d:
        second = int(g.acts[y1_f][y1_v][r])  # end of the edge after r on the cycle
        marks = [SurgeryMark(r, d_factor), SurgeryMark(second, d_factor)]
    else:
        yn_inv = factors.inv(yn_f, yn_v)
        second = int(g.acts[yn_f][yn_inv][r])  # start of the edge into r
        marks = [SurgeryMark(r, f_factor), SurgeryMark(second, f_factor)]
    return gamma_surgery(g, p, marks, max_vertices=cap)


class _Restart(Exception):
    """Internal: abandon the current construction attempt, reseed."""


def _cycle_walks(g: CoverGraph, x: NormalForm):
    """Yield (orbit vertex list, per-step start vertices) for each x-cycle."""
    perm = word_perm_array(g, x)
    prefixes = [np.arange(g.vcount, dtype=np.int64)]
    for f, v in x.syllables[:-1]:
        prefixes.append(g.acts[f][v][prefixes[-1]])
    seen = np.zeros(g.vcount, dtype=bool)
    for base in range(g.vcount):
        if seen[base]:
            continue
        orbit = [base]
        cur = int(perm[base])
        while cur != base:
            orbit.append(cur)
            cur = int(perm[cur])
        seen[np.array(orbit)] = True
        walk = []
        for v in orbit:
            for t in range(len(x.syllables)):
                walk.append(int(prefixes[t][v]))
        yield orbit, walk


def _close_pairs_by_cycle(g: CoverGraph, root: NormalForm):
    """Yield (walk, i, j) for the first close pair of each offending cycle."""
    syl = root.syllables
    n = len(syl)
    orbit_labels = (g.factor_orbits(0), g.factor_orbits(1))
    for orbit, walk in _cycle_walks(g, root):
        keys: dict[tuple[int, int], int] = {}
        edges: dict[int, tuple[int, int, int]] = {}
        for pos, start in enumerate(walk):
            f, val = syl[pos % n]
            edge = (start, f, val)
            key = (f, int(orbit_labels[f][start]))
            prev_pos = keys.get(key)
            if prev_pos is None:
                keys[key] = pos
                edges[pos] = edge
            elif edges[prev_pos] != edge:
                yield walk, prev_pos, pos
                break


def _edge_deltas(walk, lo, hi, syl, deltas: dict) -> None:
    """Accumulate per-(vertex, factor) net out-minus-in counts over the walk
    edge positions lo..hi (inclusive, cyclically)."""
    total = len(walk)
    n = len(syl)
    pos = lo
    while True:
        f = syl[pos % n][0]
        start, end = walk[pos], walk[(pos + 1) % total]
        deltas[(start, f)] = deltas.get((start, f), 0) + 1
        deltas[(end, f)] = deltas.get((end, f), 0) - 1
        if pos == hi:
            break
        pos = (pos + 1) % total


def _pair_kill_marks(
    g: CoverGraph,
    root: NormalForm,
    walk: list[int],
    i: int,
    j: int,
    p: int,
) -> list[SurgeryMark] | None:
    """Marks whose p-fold surgery provably separates a close pair.

    The pair dies exactly when the layer displacement between the traversals
    of its two edges is nonzero mod p while the whole cycle's displacement is
    zero mod p (so the cycle lifts to p copies rather than one long cycle
    revisiting both layers).  Marks on the pair's own factor component are
    excluded since they would merge its layers.  A single mark is preferred;
    otherwise a compensating second mark outside the segment fixes the
    cycle displacement.  None when no such mark set exists here.
    """
    syl = root.syllables
    n = len(syl)
    f_pair = syl[j % n][0]
    pair_key = (f_pair, int(g.factor_orbits(f_pair)[walk[j]]))

    seg: dict[tuple[int, int], int] = {}
    _edge_deltas(walk, i, (j - 1) % len(walk), syl, seg)
    cyc: dict[tuple[int, int], int] = {}
    _edge_deltas(walk, 0, len(walk) - 1, syl, cyc)

    def orbit_key(v: int, f: int) -> tuple[int, int]:
        return (f, int(g.factor_orbits(f)[v]))

    primary = sorted(
        key for key, d in seg.items() if d % p and orbit_key(key[0], key[1]) != pair_key
    )
    for v1, f1 in primary:
        if cyc.get((v1, f1), 0) % p == 0:
            return [SurgeryMark(v1, f1)]
    for v1, f1 in primary:
        need = (-cyc.get((v1, f1), 0)) % p
        for (v2, f2), d in sorted(cyc.items()):
            if (v2, f2) == (v1, f1) or d % p != need:
                continue
            if seg.get((v2, f2), 0) % p:
                continue
            key2 = orbit_key(v2, f2)
            if key2 == pair_key or key2 == orbit_key(v1, f1):
                continue
            return [SurgeryMark(v1, f1), SurgeryMark(v2, f2)]
    return None


def _scan_repair_round(
    g: CoverGraph,
    target_roots,
    p: int,
    factors: Factors,
    config: RunConfig,
    round_no: int,
    cap: int,
) -> CoverGraph | None:
    """One surgery killing the first close pair while containing the rest.

    The targeted pair gets its kill marks; every other offending cycle whose
    total layer displacement would come out zero mod p (which would lift it
    to p separate copies of itself, multiplying the offender count) receives
    one extra mark pushing its displacement off zero, so it lifts to a single
    cycle instead.  Returns None when no cycle of any root is close-edged.
    """
    offenders: list[tuple[NormalForm, list[int], int, int]] = []
    for root in target_roots:
        offenders.extend(
            (root, walk, i, j) for walk, i, j in _close_pairs_by_cycle(g, root)
        )
    if not offenders:
        return None

    root0, walk0, i0, j0 = offenders[0]
    syl0 = root0.syllables
    f_pair = syl0[j0 % len(syl0)][0]
    pair_key = (f_pair, int(g.factor_orbits(f_pair)[walk0[j0]]))
    kill = _pair_kill_marks(g, root0, walk0, i0, j0, p)
    if kill is None:
        pos = (i0 + round_no) % len(walk0)
        kill = [SurgeryMark(walk0[pos], syl0[pos % len(syl0)][0])]
    marks = list(kill)
    used = {(m.factor, int(g.factor_orbits(m.factor)[m.vertex])) for m in marks}
    used.add(pair_key)

    seg0: dict[tuple[int, int], int] = {}
    _edge_deltas(walk0, i0, (j0 - 1) % len(walk0), syl0, seg0)
    cyc0: dict[tuple[int, int], int] = {}
    _edge_deltas(walk0, 0, len(walk0) - 1, syl0, cyc0)

    for root, walk, i, j in offenders[1:]:
        cyc: dict[tuple[int, int], int] = {}
        _edge_deltas(walk, 0, len(walk) - 1, root.syllables, cyc)
        if sum(cyc.get((m.vertex, m.factor), 0) for m in marks) % p:
            continue
        for (v, f), d in sorted(cyc.items()):
            if d % p == 0:
                continue
            key = (f, int(g.factor_orbits(f)[v]))
            if key in used:
                continue
            # do not disturb the targeted pair's conditions
            if (seg0.get((v, f), 0) % p) or (cyc0.get((v, f), 0) % p):
                continue
            marks.append(SurgeryMark(v, f))
            used.add(key)
            break
        # cycles with no usable containment mark just duplicate this round
    return gamma_surgery(g, p, marks, max_vertices=cap)


def _offending_cycles(g: CoverGraph, target_roots) -> int:
    return sum(len(list(_close_pairs_by_cycle(g, root))) for root in target_roots)


def lemma2_declose(
    targets: list[NormalForm],
    p: int,
    factors: Factors,
    *,
    seed: int = 0,
    config: RunConfig | None = None,
) -> SeparationResult:
    """A component where every target is a nonunit p-element and all of its
    cycles are free of close edges.

    Construction: start from a boost component for the whole target list;
    for every admissible connector of every target's root, clear the
    fixed-vertex coincidences by two-mark surgeries (each preserves the
    conditions already established, since fixed points project down through
    surgery layers); finish with an exhaustive scan and scan-driven repair
    rounds.  Fails over to fresh seeds, then reports the last witness.
    """
    config = config or RunConfig()
    if not isprime(p):
        raise HypothesisViolation(f"{p} is not prime")
    _require_cartesian_targets(targets, factors)
    roots = [_root_data(u, factors) for u in targets]
    transcript: list[dict] = []

    last_witness: object = None
    last_budget: BudgetExceeded | None = None
    target_roots = [root for root, _m in roots]
    for attempt in range(config.lemma2_retries):
        try:
            # draw a batch of candidate bases and keep the one with the
            # fewest close-edged cycles: base quality dominates the number of
            # (graph-multiplying) repair surgeries needed afterwards; later
            # attempts use larger fibers, which spread the orbits out
            best = None
            for k in range(12):
                cand = lemma1_boost(
                    targets, p, 1, factors,
                    seed=sub_seed(seed, "lemma2-base", attempt, k),
                    config=config,
                    fiber_exponent=2 + attempt,
                ).graph
                badness = _offending_cycles(cand, target_roots)
                if best is None or badness < best[0]:
                    best = (badness, cand)
                if badness == 0:
                    break
            g = best[1]
            cap = min(config.max_vertices, g.vcount * 1024)
            surgeries = 0
            # scan-driven elimination first: each round kills every currently
            # offending cycle that accepts a compatible mark
            for round_no in range(config.lemma2_scan_rounds):
                repaired = _scan_repair_round(g, target_roots, p, factors, config, round_no, cap)
                if repaired is None:
                    break
                g = repaired
                surgeries += 1
            else:
                raise _Restart("scan repair budget exhausted")
            # connector exclusions: no admissible connector may act as a
            # power of its root (close-edge freeness persists through these
            # surgeries, since close-edge-free cycles lift close-edge-free)
            for u, (root, m) in zip(targets, roots):
                for z, mu, nu, chi in connecting_words(root, factors):
                    rounds = 0
                    while (j := _cyclic_membership(g, chi, root)) is not None:
                        if rounds >= config.lemma2_triple_rounds:
                            raise _Restart(f"connector ({z.syllables},{mu},{nu}) not excluded")
                        g = _declose_surgery(
                            g, chi, root, rounds % g.vcount, p, factors, cap,
                            flip=rounds % 2 == 1,
                        )
                        surgeries += 1
                        rounds += 1
            # a connector surgery may in principle re-arrange cycles; rescan
            for round_no in range(config.lemma2_scan_rounds):
                repaired = _scan_repair_round(g, target_roots, p, factors, config, round_no, cap)
                if repaired is None:
                    break
                g = repaired
                surgeries += 1
            else:
                raise _Restart("scan repair budget exhausted")

            orders: dict[int, int] = {}
            for idx, (u, (root, m)) in enumerate(zip(targets, roots)):
                witness_pair = close_edge_scan(g, u)
                if witness_pair is not None:
                    last_witness = (idx, witness_pair)
                    raise _Restart("close edges survived")
                o = word_order(g, u)
                if o <= 1 or not is_prime_power(o, p):
                    raise _Restart(f"target {idx} order {o} not a nonunit {p}-power")
                if word_order(g, root) != m * o:
                    raise PostconditionFailed(
                        f"root order is not {m} times the target order for target {idx}"
                    )
                orders[idx] = o
            transcript.append(
                {
                    "stage": "declose",
                    "prime": p,
                    "attempt": attempt,
                    "surgeries": surgeries,
                    "vertices": g.vcount,
                }
            )
            return SeparationResult(
                [Component(g, p, note=f"declosed at p={p}")], orders, transcript
            )
        except (_Restart, ConflictingMarks, BudgetExceeded) as exc:
            if isinstance(exc, BudgetExceeded):
                last_budget = exc
            transcript.append({"stage": "declose-retry", "attempt": attempt, "why": str(exc)})
            continue
    if last_witness is None and last_budget is not None:
        raise last_budget
    raise PostconditionFailed((targets, last_witness))


# ---------------------------------------------------------------------------
# order separation of non-conjugate cyclic classes
# ---------------------------------------------------------------------------

def _max_cycles(g: CoverGraph, u: NormalForm) -> tuple[int, list[tuple[list[int], list[int]]]]:
    """(max length, all (orbit, walk) pairs of that length, by base order)."""
    cycles = list(_cycle_walks(g, u))
    top = max(len(orbit) for orbit, _ in cycles)
    return top, [(orbit, walk) for orbit, walk in cycles if len(orbit) == top]


def _path_occurrences(walk: list[int], labels_period: list, path_start: int, path_labels: tuple) -> list[int]:
    """Positions where the labelled path occurs in the cyclic walk."""
    total = len(walk)
    out = []
    for pos in range(total):
        if walk[pos] != path_start:
            continue
        if all(
            labels_period[(pos + t) % len(labels_period)] == path_labels[t]
            for t in range(len(path_labels))
        ):
            out.append(pos)
    return out


@dataclass
class _Path:
    start: int
    labels: tuple


def _equalize_until_split(
    g: CoverGraph,
    targets: list[NormalForm],
    p: int,
    factors: Factors,
    config: RunConfig,
    transcript: list[dict],
) -> CoverGraph:
    """Surger the first target's maximal cycles until the targets' maximal
    cycle lengths disagree (all orders here are p-powers, so maximal cycle
    length equals order)."""
    u1 = targets[0]
    syl = u1.syllables
    n_syl = len(syl)
    path: _Path | None = None

    for k in range(config.max_iterations):
        lengths = [_max_cycles(g, u)[0] for u in targets]
        if len(set(lengths)) > 1:
            transcript.append({"stage": "split", "iteration": k, "lengths": lengths})
            return g
        n = lengths[0]
        if k == 0:
            _, tops = _max_cycles(g, u1)
            orbit, walk = tops[0]
            v_old = g.vcount
            s = walk[1]
            t = walk[2 % len(walk)]
            d_factor = syl[0][0]
            f_factor = 1 - d_factor
            g = gamma_surgery(g, n, [SurgeryMark(s, d_factor)], max_vertices=config.max_vertices)
            t_layer1 = v_old + t
            g = gamma_surgery(
                g, n * n, [SurgeryMark(t_layer1, f_factor)], max_vertices=config.max_vertices
            )
            path = _Path(start=t_layer1, labels=(syl[1 % n_syl],))
        else:
            assert path is not None
            _, tops = _max_cycles(g, u1)
            chosen = None
            for orbit, walk in tops:
                occ = _path_occurrences(walk, [syl[i % n_syl] for i in range(n_syl)], path.start, path.labels)
                if occ:
                    chosen = (walk, occ[0])
                    break
            if chosen is None:
                raise PostconditionFailed("no maximal cycle of the lead target contains the tracked path")
            walk, pos = chosen
            total = len(walk)
            next_pos = (pos + len(path.labels)) % total
            f_label = syl[next_pos % n_syl]
            q = walk[(next_pos + 1) % total]
            g = gamma_surgery(
                g, n, [SurgeryMark(q, f_label[0])], max_vertices=config.max_vertices
            )
            path = _Path(start=path.start, labels=path.labels + (f_label,))

        # close-edge freeness must persist through every step
        for u in targets:
            if close_edge_scan(g, u) is not None:
                raise PostconditionFailed("close edges reappeared during equalization")

        new_lengths = [_max_cycles(g, u)[0] for u in targets]
        if len(set(new_lengths)) == 1:
            _assert_path_in_maximal_cycles(g, targets, path, factors)
    raise IterationBudgetExceeded(config.max_iterations)


def _assert_path_in_maximal_cycles(
    g: CoverGraph, targets: list[NormalForm], path: _Path, factors: Factors
) -> None:
    """While the maximal lengths still agree, the tracked path must lie in
    some maximal cycle of the lead target and in every maximal cycle of the
    others."""
    u1 = targets[0]
    _, tops = _max_cycles(g, u1)
    period1 = [u1.syllables[i % len(u1.syllables)] for i in range(len(u1.syllables))]
    if not any(
        _path_occurrences(walk, period1, path.start, path.labels) for _, walk in tops
    ):
        raise PostconditionFailed("tracked path left the lead target's maximal cycles")
    for u in targets[1:]:
        period = [u.syllables[i % len(u.syllables)] for i in range(len(u.syllables))]
        _, tops_j = _max_cycles(g, u)
        for _, walk in tops_j:
            if not _path_occurrences(walk, period, path.start, path.labels):
                raise PostconditionFailed("tracked path missing from a maximal cycle")


def lemma3_separate(
    targets: list[NormalForm],
    pi: frozenset[int] | set[int],
    factors: Factors,
    *,
    seed: int = 0,
    config: RunConfig | None = None,
    _repair: bool = True,
) -> SeparationResult:
    """Pairwise distinct orders, all coprime to ``pi``, for Cartesian words
    lying in pairwise non-conjugate cyclic subgroups.

    Recursive: pick a fresh prime p, declose, equalize until the maximal
    cycle lengths split the targets into a strictly-larger-order class and
    the rest, then recurse on both sides with growing prime exclusions.  The
    final orders are recomputed across all components and checked.
    """
    config = config or RunConfig()
    pi = frozenset(pi)
    _require_cartesian_targets(targets, factors)
    roots = [_root_data(u, factors) for u in targets]
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            if is_conjugate(roots[i][0], roots[j][0], factors, allow_inverse=True):
                raise HypothesisViolation(
                    f"targets {i} and {j} lie in conjugate cyclic subgroups"
                )

    transcript: list[dict] = []
    p = fresh_prime(pi)

    if len(targets) == 1:
        comp = lemma1_boost(targets, p, 1, factors, seed=sub_seed(seed, "l3-single"), config=config)
        orders = {0: word_order(comp.graph, targets[0])}
        transcript.append({"stage": "single", "prime": p, "order": orders[0]})
        return SeparationResult([comp], orders, transcript)

    result: SeparationResult | None = None
    for attempt in range(config.lemma3_retries):
        l2 = lemma2_declose(
            targets, p, factors, seed=sub_seed(seed, "l3-declose", attempt), config=config
        )
        g = l2.components[0].graph
        transcript.extend(l2.transcript)
        try:
            g = _equalize_until_split(g, targets, p, factors, config, transcript)
        except (BudgetExceeded, ConflictingMarks, PostconditionFailed) as exc:
            transcript.append({"stage": "equalize-retry", "attempt": attempt, "why": str(exc)})
            continue

        orders1 = [word_order(g, u) for u in targets]
        for o in orders1:
            if o <= 1 or not is_prime_power(o, p):
                raise InternalError(f"split-stage order {o} is not a nonunit {p}-power")
        top = max(orders1)
        alpha = [i for i, o in enumerate(orders1) if o == top]
        beta = [i for i, o in enumerate(orders1) if o < top]
        comp1 = Component(g, p, note=f"order split at p={p}: {orders1}")
        transcript.append({"stage": "alpha-beta", "prime": p, "orders": orders1})

        components = [comp1]
        pi_beta = pi | {p}
        res_beta = lemma3_separate(
            [targets[i] for i in beta], pi_beta, factors,
            seed=sub_seed(seed, "l3-beta", attempt), config=config,
        )
        components.extend(res_beta.components)
        rho: set[int] = set()
        for comp in res_beta.components:
            for u in targets:
                rho |= set(factorint(word_order(comp.graph, u)))
        res_alpha = lemma3_separate(
            [targets[i] for i in alpha], pi_beta | rho, factors,
            seed=sub_seed(seed, "l3-alpha", attempt), config=config,
        )
        components.extend(res_alpha.components)

        orders = {
            i: math.lcm(*(word_order(c.graph, targets[i]) for c in components))
            for i in range(len(targets))
        }
        result = SeparationResult(components, orders, transcript)
        break
    if result is None:
        raise IterationBudgetExceeded(config.max_iterations)

    ok = _verify_lemma3(result, targets, pi)
    if not ok and _repair:
        transcript.append({"stage": "repair", "exclude": sorted(pi | {p})})
        return lemma3_separate(
            targets, pi | {p}, factors,
            seed=sub_seed(seed, "l3-repair"), config=config, _repair=False,
        )
    if not ok:
        raise PostconditionFailed("orders not separated or not coprime to the exclusion set")
    return result


def _verify_lemma3(result: SeparationResult, targets, pi: frozenset[int]) -> bool:
    values = [result.orders[i] for i in range(len(targets))]
    if len(set(values)) != len(values):
        return False
    for o in values:
        if any(o % q == 0 for q in pi):
            return False
    for comp in result.components:
        if comp.prime is None:
            continue
        for u in targets:
            if not is_prime_power(word_order(comp.graph, u), comp.prime):
                return False
    return True


# ---------------------------------------------------------------------------
# power separation
# ---------------------------------------------------------------------------

def lemma4_power_separate(
    w: NormalForm,
    exponents: list[int],
    factors: Factors,
    *,
    seed: int = 0,
    config: RunConfig | None = None,
) -> SeparationResult:
    """Distinct orders for w^k over exponents with pairwise distinct absolute
    values: one boost per prime dividing some exponent, pushed above the
    largest valuation so the p-parts of the power orders differ."""
    config = config or RunConfig()
    _require_cartesian_targets([w], factors)
    if not is_cyclically_reduced(w):
        raise NotCyclicallyReduced(w.syllables)
    if any(k == 0 for k in exponents):
        raise HypothesisViolation("zero exponent")
    magnitudes = [abs(k) for k in exponents]
    if len(set(magnitudes)) != len(magnitudes):
        raise HypothesisViolation("exponents share an absolute value")

    product = math.prod(magnitudes)
    valuations = factorint(product)
    transcript: list[dict] = []
    components: list[Component] = []
    if not valuations:
        components.append(
            lemma1_boost([w], 2, 1, factors, seed=sub_seed(seed, "l4", 2), config=config)
        )
        transcript.append({"stage": "power-boost", "prime": 2, "threshold": 1})
    else:
        for p in sorted(valuations):
            n_i = valuations[p] + 1
            components.append(
                lemma1_boost([w], p, n_i, factors, seed=sub_seed(seed, "l4", p), config=config)
            )
            transcript.append({"stage": "power-boost", "prime": p, "threshold": n_i})

    orders: dict[int, int] = {}
    for j, k in enumerate(exponents):
        per_component = []
        for comp in components:
            base = word_order(comp.graph, w)
            direct = word_order(comp.graph, power(w, k, factors))
            if direct != base // math.gcd(base, k):
                raise InternalError(
                    f"power order law failed on component (k={k}, base={base}, got {direct})"
                )
            per_component.append(direct)
        orders[j] = math.lcm(*per_component)
    if len(set(orders.values())) != len(orders):
        raise PostconditionFailed(f"power orders collide: {orders}")
    return SeparationResult(components, orders, transcript)
