"""Seeded verification suites over small instances.

Each ``check_*`` function runs one family of exhaustive or seeded checks and
returns a :class:`Check`.  Suites group them; :func:`run_verify_suite` wraps a
suite into a :class:`RunReport` whose digest depends only on the seed and the
parameters.
"""

from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .absorbing import closed_partition, is_absorbing_edge, is_perfect_absorbing, lattice_merge, reach_count
from .constructions import complete, edgeless, parity_family, perturb, random_instance, space_barrier
from .core import (
    Bipartition,
    Hypergraph,
    Matching,
    Params,
    RefinedPartition,
    Vertex,
    codegrees,
    induced,
    partite_min_d_degree,
)
from .errors import KPMatchError, MalformedInput, StageFailed
from .extremal import even_extremal_matching, main_matching
from .io import Check, RunReport, parse_instance, render_instance
from .oracles import naive_is_absorbing, naive_is_perfect_absorbing
from .rng import SplitMix64, derive_seed
from .solvers import even_matching, greedy_fact_matching, has_perfect_matching, matching_number, max_matching


def _is_crossing_edge(e, sizes) -> bool:
    return len(e) == len(sizes) and all(0 <= x < s for x, s in zip(e, sizes))


def _valid_matching(H: Hypergraph, M: Matching) -> bool:
    """Edges belong to H and are pairwise vertex-disjoint, checked without Matching helpers."""
    seen = set()
    for e in M.edges:
        if tuple(e) not in H.edges:
            return False
        for j, x in enumerate(e):
            if (j, x) in seen:
                return False
            seen.add((j, x))
    return True


def _all_subsets(n: int) -> list[tuple[int, ...]]:
    return [c for r in range(n + 1) for c in itertools.combinations(range(n), r)]


# ---------------------------------------------------------------------------
# barriers


def check_space_barrier(params: Params, seed: int) -> Check:
    total = failures = 0
    bad = []
    for n in (3, 4, 5, 6):
        for a in itertools.product(range(n), repeat=3):
            if sum(a) > n - 1:
                continue
            H = space_barrier(3, n, a)
            nu = max_matching(H).size
            deg = codegrees(H)
            total += 1
            if nu != sum(a) or deg != a:
                failures += 1
                bad.append({"n": n, "a": list(a), "nu": nu, "codegrees": list(deg)})
    return Check("space-barrier", failures == 0, total - failures, total, {"failures": bad[:10]})


def check_divisibility_barrier(params: Params, seed: int) -> Check:
    n = 4
    total = failures = 0
    bad = []
    for a in itertools.product((1, 2, 3), repeat=3):
        if sum(a) % 2 == 0:
            continue
        bip = Bipartition.prefix((n,) * 3, a)
        H = parity_family(3, n, bip, "even")
        pm, _ = has_perfect_matching(H)
        nu = max_matching(H).size
        total += 1
        if pm or nu != n - 1:
            failures += 1
            bad.append({"a": list(a), "perfect": pm, "nu": nu})
    return Check("divisibility-barrier", failures == 0, total - failures, total, {"failures": bad})


# ---------------------------------------------------------------------------
# greedy


def check_greedy_bounds(params: Params, seed: int, count: int = 1000) -> Check:
    probs = (Fraction(3, 10), Fraction(3, 5), Fraction(9, 10))
    failures = 0
    bad = []
    for i in range(count):
        n = (4, 5, 6)[i % 3]
        p = probs[(i // 3) % 3]
        H = random_instance(3, n, p, derive_seed(seed, i))
        M = greedy_fact_matching(H)
        a = sorted(codegrees(H), reverse=True)
        first = min(n - 3 + 2, sum(a))
        second = min(n - 1, a[0] + a[1])
        ok = _valid_matching(H, M) and len(M) >= first and len(M) >= second
        if not ok:
            failures += 1
            bad.append({"i": i, "n": n, "p": str(p), "size": len(M), "bounds": [first, second]})
    return Check("greedy-bounds", failures == 0, count - failures, count, {"failures": bad[:10]})


# ---------------------------------------------------------------------------
# even matchings


def _even_edge(e, bip: Bipartition) -> bool:
    return sum(1 for j, x in enumerate(e) if x in bip.A[j]) % 2 == 0


def check_even_matching(params: Params, seed: int) -> Check:
    total = failures = 0
    bad = []
    for k in (3, 4):
        for n in (2, 4, 6):
            for rest in itertools.product(range(n + 1), repeat=k - 2):
                a = (n // 2, n // 2) + rest
                bip = Bipartition.prefix((n,) * k, a)
                M = even_matching(k, n, bip)
                want = n if sum(a) % 2 == 0 else n - 1
                seen = set()
                ok = len(M) == want
                for e in M.edges:
                    ok &= _is_crossing_edge(e, (n,) * k) and _even_edge(e, bip)
                    for j, x in enumerate(e):
                        ok &= (j, x) not in seen
                        seen.add((j, x))
                total += 1
                if not ok:
                    failures += 1
                    bad.append({"k": k, "n": n, "a": list(a), "size": len(M)})
    return Check("even-matching", failures == 0, total - failures, total, {"failures": bad[:10]})


# ---------------------------------------------------------------------------
# absorbing


def _random_balanced(rng: SplitMix64, n: int, k: int, per: int, avoid=frozenset()) -> Optional[list[Vertex]]:
    out = []
    for j in range(k):
        free = [x for x in range(n) if (j, x) not in avoid]
        if len(free) < per:
            return None
        out += [Vertex(j, x) for x in sorted(rng.sample(free, per))]
    return out


def check_absorbing_edges(params: Params, seed: int, count: int = 200) -> Check:
    probs = (Fraction(1, 5), Fraction(3, 10), Fraction(1, 2))
    n, k = 4, 3
    agree = positives = 0
    bad = []
    for i in range(count):
        j = 0
        while True:
            rng = SplitMix64(derive_seed(seed, 5, i, j))
            H = random_instance(k, n, probs[i % 3], rng.next())
            S = _random_balanced(rng, n, k, 2)
            used = {tuple(v) for v in S}
            cands = [e for e in H.sorted_edges if all((p, x) not in used for p, x in enumerate(e))]
            if cands:
                e = cands[rng.below(len(cands))]
                break
            j += 1
        got, cert = is_absorbing_edge(H, S, e)
        want = naive_is_absorbing(H, S, e)
        ok = got == want
        if got:
            try:
                cert.check(S, e, H)
            except KPMatchError:
                ok = False
        positives += want
        if ok:
            agree += 1
        else:
            bad.append({"i": i, "fast": got, "brute": want})
    return Check("absorbing-edge-oracle", agree == count, agree, count,
                 {"absorbing": positives, "failures": bad[:10]})


def check_perfect_absorbing(params: Params, seed: int, count: int = 100) -> Check:
    probs = (Fraction(3, 10), Fraction(1, 2), Fraction(3, 4))
    n, k = 4, 3
    agree = positives = 0
    bad = []
    for i in range(count):
        rng = SplitMix64(derive_seed(seed, 6, i))
        H = random_instance(k, n, probs[i % 3], rng.next())
        S = _random_balanced(rng, n, k, 1)
        T = _random_balanced(rng, n, k, 1 + rng.below(3), {tuple(v) for v in S})
        got = is_perfect_absorbing(H, S, T)
        exact = (has_perfect_matching(induced(H, T)[0])[0]
                 and has_perfect_matching(induced(H, list(S) + list(T))[0])[0])
        brute = naive_is_perfect_absorbing(H, S, T)
        positives += exact
        if got == exact == brute:
            agree += 1
        else:
            bad.append({"i": i, "fast": got, "exact": exact, "brute": brute})
    return Check("perfect-absorbing-oracle", agree == count, agree, count,
                 {"absorbing": positives, "failures": bad[:10]})


def check_reachability(params: Params, seed: int) -> Check:
    n, k = 4, 3
    bip = Bipartition.prefix((n,) * k, (2, 2, 2))
    H = parity_family(k, n, bip, "even")
    results = {}
    cross = within = True
    for p in range(k):
        for u, v in itertools.combinations(range(n), 2):
            c = reach_count(H, (p, u), (p, v), 1).count
            if (u in bip.A[p]) == (v in bip.A[p]):
                within &= c > 0
            else:
                cross &= c == 0
    results["zero-across"] = cross
    results["positive-within"] = within
    beta = Fraction(1, n ** (k - 1))
    cp = closed_partition(H, 0, beta, 1)
    results["closed-partition"] = (set(cp.classes) == {bip.A[0], bip.B(0)} and not cp.residue)
    _, log = lattice_merge(H, RefinedPartition.from_bipartition(bip), params.mu)
    refused = {rec.part for rec in log if not rec.merged}
    results["merge-refused"] = not any(rec.merged for rec in log) and {0, 1} <= refused
    passed = sum(results.values())
    return Check("reachability", passed == len(results), passed, len(results), results)


# ---------------------------------------------------------------------------
# pipelines


def admissible_bipartitions(k: int, n: int, eps0: Fraction) -> Iterator[Bipartition]:
    """Every bipartition with |A_1| = |A_2| = n/2 and other |A_i| zero or in [eps0 n, (1-eps0) n]."""
    half = list(itertools.combinations(range(n), n // 2))
    rest = [c for c in _all_subsets(n) if not c or eps0 * n <= len(c) <= (1 - eps0) * n]
    for A0, A1 in itertools.product(half, repeat=2):
        for tail in itertools.product(rest, repeat=k - 2):
            yield Bipartition((n,) * k, [A0, A1, *tail])


def check_even_extremal(params: Params, seed: int) -> Check:
    total = failures = 0
    bad = []
    for n in (2, 4):
        for bip in admissible_bipartitions(3, n, params.epsilon0):
            H = parity_family(3, n, bip, "even")
            want = n if bip.a_total() % 2 == 0 else n - 1
            total += 1
            try:
                M = even_extremal_matching(H, bip, eta=0, eps0=params.epsilon0)
                ok = _valid_matching(H, M) and len(M) == want == max_matching(H).size
            except KPMatchError:
                ok = False
            if not ok:
                failures += 1
                bad.append({"n": n, "A": [sorted(a) for a in bip.A]})
    return Check("even-extremal", failures == 0, total - failures, total, {"failures": bad[:10]})


def dispatcher_corpus(seed: int) -> Iterator[tuple[str, Hypergraph]]:
    for n in range(2, 7):
        yield f"complete-{n}", complete(3, n)
    for n in range(3, 7):
        for a in itertools.product(range(n + 1), repeat=3):
            if sum(a) in (n - 1, n):
                yield f"space-{n}-{''.join(map(str, a))}", space_barrier(3, n, a)
    for n in (4, 6):
        for a in itertools.product(range(1, n), range(1, n), range(n + 1)):
            if a[0] < a[1] or (n == 6 and a[0] != 3):
                continue
            bip = Bipartition.prefix((n,) * 3, a)
            for side in ("even", "odd"):
                yield f"{side}-{n}-{''.join(map(str, a))}", parity_family(3, n, bip, side)
    for i in range(200):
        yield f"random-{i}", random_instance(3, 6, Fraction(9, 10), derive_seed(seed, 8, i))


def check_dispatcher(params: Params, seed: int) -> Check:
    total = ok = 0
    stage_failures: dict[str, int] = {}
    routes: dict[str, int] = {}
    bad = []
    for name, H in dispatcher_corpus(seed):
        total += 1
        goal = min(H.n - 1, sum(codegrees(H)))
        try:
            M, tr = main_matching(H, params.replace(seed=derive_seed(seed, total)))
        except StageFailed as err:
            if err.stage:
                ok += 1
                stage_failures[err.stage] = stage_failures.get(err.stage, 0) + 1
            else:
                bad.append({"instance": name, "error": "stage failure without identifier"})
            continue
        except KPMatchError as err:
            bad.append({"instance": name, "error": f"{type(err).__name__}: {err}"})
            continue
        route = "/".join(tr.route)
        routes[route] = routes.get(route, 0) + 1
        if _valid_matching(H, M) and len(M) >= goal:
            ok += 1
        else:
            bad.append({"instance": name, "size": len(M), "goal": goal, "route": route})
    return Check("dispatcher", ok == total, ok, total,
                 {"routes": routes, "stage_failures": stage_failures, "failures": bad[:10]})


# ---------------------------------------------------------------------------
# threshold scan


def _scan_instance(rng: SplitMix64, n: int) -> tuple[str, Hypergraph, int]:
    kind = rng.below(3)
    if kind == 0:
        while True:
            a = tuple(rng.below(n + 1) for _ in range(3))
            if sum(a) >= n - 1:
                break
        base = space_barrier(3, n, a)
        label, weight = "space", sum(a)
    else:
        A = [[x for x in range(n) if rng.below(2)] for _ in range(3)]
        side = "even" if kind == 1 else "odd"
        base = parity_family(3, n, Bipartition((n,) * 3, A), side)
        label, weight = side, sum(map(len, A))
    cap = n ** 3 // 10
    add = min(rng.below(cap + 1), n ** 3 - len(base))
    remove = min(rng.below(cap + 1), len(base))
    return label, perturb(base, add, remove, rng.next()), weight


def check_threshold_scan(params: Params, seed: int, count: int = 500) -> Check:
    tested = violations_space = 0
    findings = []
    per_kind: dict[str, int] = {}
    for i in range(count):
        n = (4, 7)[i % 2]
        rng = SplitMix64(derive_seed(seed, 9, i))
        label, H, weight = _scan_instance(rng, n)
        if partite_min_d_degree(H, 2) < math.ceil(n / 3):
            continue
        tested += 1
        per_kind[label] = per_kind.get(label, 0) + 1
        rep = max_matching(H, params.node_budget, target=n - 1)
        if rep.size < n - 1:
            entry = {"i": i, "n": n, "kind": label, "weight": weight, "nu": rep.size}
            findings.append(entry)
            if label == "space":
                violations_space += 1
    return Check("threshold-scan", violations_space == 0, tested - len(findings), tested,
                 {"filtered_in": per_kind, "violations_space": violations_space, "findings": findings[:20]})


# ---------------------------------------------------------------------------
# io


def corpus(seed: int) -> Iterator[tuple[str, Hypergraph, Optional[Bipartition]]]:
    """The generated instance corpus used for round-trip checks."""
    for k in (2, 3, 4):
        for n in (1, 2, 3):
            yield f"complete-{k}-{n}", complete(k, n), None
            yield f"edgeless-{k}-{n}", edgeless(k, n), None
    yield "complete-unequal", complete(3, (2, 3, 4)), None
    for n in (3, 4, 5):
        for a in itertools.product(range(n + 1), repeat=3):
            if sum(a) == n - 1:
                yield f"space-{n}-{''.join(map(str, a))}", space_barrier(3, n, a), None
    for n in (2, 4):
        for a in itertools.product(range(n + 1), repeat=3):
            bip = Bipartition.prefix((n,) * 3, a)
            for side in ("even", "odd"):
                yield f"{side}-{n}-{''.join(map(str, a))}", parity_family(3, n, bip, side), bip
    for i in range(60):
        n = (3, 4, 5)[i % 3]
        H = random_instance(3, n, Fraction(1 + i % 9, 10), derive_seed(seed, 10, i))
        yield f"random-{i}", H, None
        yield f"perturbed-{i}", perturb(H, min(3, n ** 3 - len(H)), min(3, len(H)), derive_seed(seed, 11, i)), None


def check_round_trip(params: Params, seed: int) -> Check:
    total = ok = 0
    bad = []
    for name, H, bip in corpus(seed):
        total += 1
        text = render_instance(H, bip)
        H2, bip2 = parse_instance(text)
        if H2 == H and bip2 == bip and render_instance(H2, bip2) == text:
            ok += 1
        else:
            bad.append(name)
    return Check("round-trip", ok == total, ok, total, {"failures": bad[:10]})


def _sample_report(seed: int) -> RunReport:
    rep = RunReport("verify-sample", Params(seed=seed).as_dict(), seed)
    for i in range(5):
        H = random_instance(3, 4, Fraction(7, 10), derive_seed(seed, 12, i))
        M, tr = main_matching(H, Params(seed=seed))
        rep.data[f"instance{i}"] = {"edges": len(H), "nu": matching_number(H), "size": len(M),
                                    "route": "/".join(tr.route), "matching": [list(e) for e in M.edges]}
    rep.checks.append(Check("sample", True, 5, 5))
    return rep


def check_determinism(params: Params, seed: int) -> Check:
    first, second = _sample_report(seed), _sample_report(seed)
    strip = lambda r: "".join(line + "\n" for line in r.to_text().splitlines() if not line.startswith("timing."))
    same = first.digest() == second.digest() and strip(first) == strip(second)
    return Check("determinism", same, int(same), 1, {"digest": first.digest()})


# ---------------------------------------------------------------------------
# suites

SUITES: dict[str, list[Callable[[Params, int], Check]]] = {
    "barriers": [check_space_barrier, check_divisibility_barrier],
    "greedy": [check_greedy_bounds],
    "even": [check_even_matching],
    "absorbing": [check_absorbing_edges, check_perfect_absorbing, check_reachability],
    "pipelines": [check_even_extremal, check_dispatcher],
    "threshold-scan": [check_threshold_scan],
    "io": [check_round_trip, check_determinism],
}


def run_verify_suite(name: str, params: Params = Params(), seed: int = 0) -> RunReport:
    if name not in SUITES:
        raise MalformedInput(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    report = RunReport(f"verify {name}", params.as_dict(), seed)
    for fn in SUITES[name]:
        start = time.perf_counter()
        check = fn(params, seed)
        report.timings[check.name] = time.perf_counter() - start
        report.checks.append(check)
    return report
