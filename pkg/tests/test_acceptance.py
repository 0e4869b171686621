"""Acceptance checks; each prints one ``ACCEPTANCE`` line with its verdict."""

import itertools
import math
import time

import numpy as np
import pytest

from inducedtrees import (
    MomentParams,
    Seed,
    SearchBudget,
    chebyshev_bound,
    conditional_embedding_probability,
    count_ordered_embeddings,
    expected_count,
    is_induced_copy,
    k_max,
    overlap_profile,
    path_tree,
    s_bound,
    sample_gnp,
    sample_planted,
    star_tree,
    threshold_size,
)
from inducedtrees.audits import default_grid_text, parse_grid, run_grid
from inducedtrees.cli import main
from inducedtrees.experiments import ExperimentConfig, run_containment
from inducedtrees.graph import write_graph
from inducedtrees.moments import log_q
from inducedtrees.overlap import overlap_table
from inducedtrees.search import search_induced_embedding

from conftest import all_graphs, labelled_trees


@pytest.fixture
def verdict(capsys):
    def emit(label: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nACCEPTANCE {label}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok

    return emit


# --- 1. oracle equivalence ------------------------------------------------------


def _trees_up_to_5():
    return [t for b in range(1, 6) for t in labelled_trees(b, 3)]


def _pair_table(adj: np.ndarray, inj: np.ndarray, pairs) -> np.ndarray:
    return np.stack([adj[inj[:, u], inj[:, v]] for u, v in pairs], axis=1) if pairs else np.zeros((len(inj), 0), bool)


def _naive_counts(graph, trees, inj_cache):
    """Counts for every tree by brute force over all injections, vectorized per tree size."""
    adj = graph.to_matrix().astype(bool)
    out = []
    tables = {}
    for t in trees:
        b = t.b
        if b > graph.n:
            out.append(0)
            continue
        key = (graph.n, b)
        if key not in inj_cache:
            inj_cache[key] = np.array(list(itertools.permutations(range(graph.n), b)), dtype=np.intp).reshape(-1, b)
        pairs = list(itertools.combinations(range(b), 2))
        if b not in tables:
            tables[b] = _pair_table(adj, inj_cache[key], pairs)
        want = np.array([t.has_edge(u, v) for u, v in pairs], dtype=bool)
        out.append(int(np.all(tables[b] == want, axis=1).sum()))
    return out


def test_1_oracle_equivalence(verdict):
    start = time.perf_counter()
    trees = _trees_up_to_5()
    cache = {}
    graphs = [g for n in range(1, 6) for g in all_graphs(n)]
    exhaustive = len(graphs)
    for i in range(240):
        n = 6 + i % 2
        graphs.append(sample_gnp(n, [0.2, 0.35, 0.5, 0.65, 0.8][i % 5], Seed(1001, (i,))))
    mismatches = 0
    for g in graphs:
        want = _naive_counts(g, trees, cache)
        got = [count_ordered_embeddings(g, t) for t in trees]
        mismatches += sum(a != b for a, b in zip(want, got))
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed <= 120
    verdict("1 oracle equivalence", ok,
            f"{exhaustive} exhaustive + 240 random graphs x {len(trees)} labelled trees, "
            f"{mismatches} mismatches, {elapsed:.1f}s (limit 120s)")
    assert ok


# --- 2. first moment ---------------------------------------------------------------


def test_2_first_moment(verdict):
    start = time.perf_counter()
    n, p, samples = 10, 0.3, 100_000
    tree = path_tree(4)
    xs = np.fromiter((count_ordered_embeddings(sample_gnp(n, p, Seed(2002, (i,))), tree) for i in range(samples)),
                     dtype=np.float64, count=samples)
    mean, se = xs.mean(), xs.std(ddof=1) / math.sqrt(samples)
    want = float(expected_count(MomentParams(n, p, 2, 4)))
    elapsed = time.perf_counter() - start
    z = (mean - want) / se
    ok = abs(z) <= 4 and elapsed <= 60
    verdict("2 first moment", ok,
            f"MC mean {mean:.4f} vs E[X] {want:.4f}, z = {z:+.2f} (limit 4), {elapsed:.1f}s (limit 60s)")
    assert ok


# --- 3. conditional model -----------------------------------------------------------


def _pick_configs(tree, phi1, n, per_class=1):
    """Compatible ``phi_j`` for ``phi1``, one per (ell, k) class, lexicographically first."""
    seen, out = {}, []
    for phi in itertools.permutations(range(n), tree.b):
        prof = overlap_profile(tree, phi1, phi, n)
        if not prof.compatible or tuple(phi) == tuple(phi1):
            continue
        key = (prof.ell, prof.k)
        if seen.get(key, 0) < per_class:
            seen[key] = seen.get(key, 0) + 1
            out.append((phi, prof))
    return out


def test_3_conditional_model(verdict):
    samples, p = 100_000, 0.35
    setups = [
        (path_tree(3), (0, 1, 2), 5),
        (path_tree(4), (3, 0, 5, 1), 7),
        (star_tree(3), (2, 4, 0, 6), 8),
        (path_tree(2), (1, 3), 4),
    ]
    rows, worst = [], 0.0
    for idx, (tree, phi1, n) in enumerate(setups):
        configs = _pick_configs(tree, phi1, n)
        hits = np.zeros(len(configs), dtype=np.int64)
        for i in range(samples):
            g = sample_planted(tree, phi1, n, p, Seed(3003, (idx, i)))
            for j, (phi, _) in enumerate(configs):
                hits[j] += is_induced_copy(g, tree, phi)
        for j, (phi, prof) in enumerate(configs):
            want = conditional_embedding_probability(tree, prof, p)
            freq = hits[j] / samples
            se = math.sqrt(want * (1 - want) / samples)
            z = 0.0 if se == 0 and freq == want else (abs(freq - want) / se if se else math.inf)
            worst = max(worst, z)
            rows.append((tree.b, prof.ell, prof.k, z))
    ok = len(rows) >= 10 and worst <= 4
    classes = sorted({(b, ell, k) for b, ell, k, _ in rows})
    verdict("3 conditional model", ok,
            f"{len(rows)} compatible configurations, classes (b,ell,k) {classes}, max |z| = {worst:.2f} (limit 4)")
    assert ok


# --- 4. S(ell, k) framework -----------------------------------------------------------


def test_4_overlap_framework(verdict):
    viol_a = viol_b = viol_c = checked = 0
    trees = [t for b in range(1, 6) for t in labelled_trees(b, 3)]
    for tree in trees:
        b = tree.b
        for n in range(b, 10):
            table = overlap_table(tree, None, n)
            viol_c += table.total != math.perm(n, b)
            for delta in range(max(1, tree.max_degree), 4):
                params = MomentParams(n, 0.5, delta, b)
                for ell in range(2, b + 1):
                    km = k_max(ell, b, params.d)
                    for k in range(1, ell + 1):
                        s = table.S(ell, k)
                        checked += 1
                        if k > km:
                            viol_a += s != 0
                        elif s > float(s_bound(ell, k, params)) * (1 + 1e-12):
                            viol_b += 1
    ok = viol_a == viol_b == viol_c == 0
    verdict("4 S(ell,k) framework", ok,
            f"{len(trees)} labelled trees, n = b..9, delta = max degree..3: {checked} (ell, k) cells; "
            f"violations: k>k_ell {viol_a}, bound {viol_b}, partition {viol_c}")
    assert ok


# --- 5. analytic audits -------------------------------------------------------------------


@pytest.fixture(scope="module")
def grid_reports():
    start = time.perf_counter()
    reports = run_grid(parse_grid(default_grid_text()))
    return reports, time.perf_counter() - start


def _fail_summary(records, limit=4):
    bits = [f"(n={r.point['n']:g}, c={r.point['c']:g}, delta={r.point['delta']}"
            + (f", ell={r.point['ell']}" if "ell" in r.point else "")
            + f", log margin {r.log_margin:.3g})" for r in records[:limit]]
    return "; ".join(bits) + (" ..." if len(records) > limit else "")


def test_5a_claim2_ratios(grid_reports, verdict):
    reports, elapsed = grid_reports
    recs = [r for r in reports["claim2"].select("claim2_ratio") if r.point["c"] >= 1e3 * (1 - 1e-9)]
    bad = [r for r in recs if not r.passed]
    ok = not bad and elapsed <= 60
    verdict("5a claim 2 ratios >= 1 for c >= 1e3", ok,
            f"{len(recs) - len(bad)}/{len(recs)} records hold; failures {_fail_summary(bad) or 'none'}; "
            f"grid time {elapsed:.1f}s")
    assert ok


def test_5b_claim3(grid_reports, verdict):
    reports, elapsed = grid_reports
    recs = reports["claim3"].records
    bad = [r for r in recs if not r.passed]
    ok = not bad and elapsed <= 60
    verdict("5b claim 3 at ell in {2, b/2, b}", ok, f"{len(recs) - len(bad)}/{len(recs)} records hold")
    assert ok


def test_5c_lemma1(grid_reports, verdict):
    reports, elapsed = grid_reports
    recs = reports["proof_chain"].select("lemma1")
    bad = [r for r in recs if not r.passed]
    conditional = [r for r in recs if "claim2 holds" in r.note]
    cond_bad = [r for r in conditional if not r.passed]
    ok = not bad and elapsed <= 60
    verdict("5c lemma 1 direct sum", ok,
            f"{len(recs) - len(bad)}/{len(recs)} records hold; failures {_fail_summary(bad) or 'none'}; "
            f"restricted to points where claim 2 holds: {len(conditional) - len(cond_bad)}/{len(conditional)}")
    assert ok


def test_5d_r_endpoint(grid_reports, verdict):
    reports, elapsed = grid_reports
    recs = reports["proof_chain"].select("r_endpoint")
    bad = [r for r in recs if not r.passed]
    ok = not bad and elapsed <= 60
    verdict("5d r(x) endpoint", ok,
            f"{len(recs) - len(bad)}/{len(recs)} grid points hold; failures {_fail_summary(bad)}")
    assert ok


def test_5e_claim1(grid_reports, verdict):
    reports, elapsed = grid_reports
    recs = reports["claim1"].select("claim1_growth")
    ok = len(recs) == 3 and all(r.passed for r in recs) and elapsed <= 60
    logs = [f"{r.rhs.log:.1f}" for r in recs]
    verdict("5e claim 1 growth", ok, f"log E[X] at n = 1e5, 1e6, 1e7: {logs} (each above the previous)")
    assert ok


# --- 6. threshold experiment -------------------------------------------------------------


def test_6_threshold_experiment(verdict):
    start = time.perf_counter()
    n, p, delta, trials = 2000, 0.05, 3, 50
    lower_b = threshold_size(n, p, "lnform")
    upper_b = math.ceil(2.4 * log_q(n * p, p))
    rates = {}
    for b in (lower_b, upper_b):
        cfg = ExperimentConfig(n=n, p=p, delta=delta, b=b, trials=trials, max_steps=1_000_000, max_restarts=10,
                               seed=6006)
        rates[b] = run_containment(cfg).rows[0].success_rate
    elapsed = time.perf_counter() - start
    ok = rates[lower_b] >= 0.9 and rates[upper_b] <= 0.1 and elapsed <= 600
    verdict("6 threshold experiment", ok,
            f"b={lower_b}: success {rates[lower_b]:.2f} (need >= 0.90); b={upper_b}: success {rates[upper_b]:.2f} "
            f"(need <= 0.10); 10^7 steps per graph; {elapsed:.0f}s (limit 600s)")
    assert ok


# --- 7. Chebyshev audit ---------------------------------------------------------------------


def _informative_configs():
    """Smallest exact-oracle bound per tree over a grid at n <= 12."""
    best = []
    for name, tree in (("path3", path_tree(3)), ("path4", path_tree(4)), ("star3", star_tree(3)),
                       ("path5", path_tree(5))):
        cand = []
        for n in range(tree.b + 1, 13):
            for p in (0.2, 0.3, 0.4, 0.5, 0.6):
                cb = chebyshev_bound(MomentParams(n, p, max(2, tree.max_degree), tree.b), "exact-oracle", tree=tree)
                if cb.informative:
                    cand.append((cb.value, n, p))
        if cand:
            value, n, p = min(cand)
            best.append((name, tree, n, p, value))
    return best


def test_7_chebyshev(verdict):
    samples = 10_000
    configs = _informative_configs()
    lines, ok = [], len(configs) >= 3
    for idx, (name, tree, n, p, bound) in enumerate(configs):
        zero = 0
        for i in range(samples):
            res = search_induced_embedding(sample_gnp(n, p, Seed(7007, (idx, i))), tree,
                                           SearchBudget(10**7, 1, Seed(7007, (idx, i, 1))))
            assert res.found or res.exhausted
            zero += not res.found
        freq = zero / samples
        se = math.sqrt(freq * (1 - freq) / samples)
        ok &= freq <= bound + 4 * se
        lines.append(f"{name} n={n} p={p}: Pr(X=0) {freq:.4f} vs bound {bound:.4f}")
    verdict("7 chebyshev audit", ok, f"{len(configs)} configurations; " + "; ".join(lines))
    assert ok


# --- 8. determinism -----------------------------------------------------------------------


def _cli_outputs(tmp_path, threads: int, tag: str) -> dict[str, bytes]:
    d = tmp_path / f"{tag}-{threads}"
    d.mkdir()
    tree = d / "tree.txt"
    write_graph(path_tree(5), tree)
    grid = d / "grid.txt"
    grid.write_text("10000 100 2\n1000000 1000 3\n")
    common = ["--seed", "424242", "--threads", str(threads)]
    cmds = {
        "sample": ["sample", "--n", "40", "--p", "0.2", "--tree", str(tree), "--out", str(d / "sample.txt")],
        "find": ["find", "--graph", str(d / "sample.txt"), "--tree", str(tree), "--out", str(d / "find.json")],
        "count": ["count", "--graph", str(d / "small.txt"), "--tree", str(tree), "--out", str(d / "count.json"),
                  "--overlap-table", str(d / "overlap.csv")],
        "maxima": ["maxima", "--n", "10", "--p", "0.4", "--trials", "12", "--out", str(d / "maxima.csv")],
        "moments": ["moments", "--n", "10000", "--p", "0.05", "--out", str(d / "moments.json")],
        "sweep": ["sweep", "--n", "300", "--p", "0.1", "--b-min", "10", "--b-max", "13", "--trials", "10",
                  "--out", str(d / "sweep.csv")],
        "sweep-planted": ["sweep", "--n", "300", "--p", "0.1", "--b", "20", "--trials", "10", "--planted",
                          "--out", str(d / "planted.csv")],
        "audit": ["audit", "--grid", str(grid), "--out-dir", str(d / "audit"), "--expect-failures",
                  "--out", str(d / "audit-summary.txt")],
    }
    assert main(["sample", "--n", "11", "--p", "0.4", *common, "--out", str(d / "small.txt")]) == 0
    for name, argv in cmds.items():
        code = main(argv + common)
        assert code in (0, 1), name
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_8_determinism(tmp_path, verdict):
    runs = {(t, tag): _cli_outputs(tmp_path, t, tag) for t in (1, 4, 8) for tag in ("a", "b")}
    ref = runs[1, "a"]
    diffs = sorted({name for out in runs.values() for name in ref if out.get(name) != ref[name]})
    ok = not diffs and all(set(out) == set(ref) for out in runs.values())
    verdict("8 determinism", ok,
            f"{len(ref)} output files x 6 runs (threads 1, 4, 8, twice each); differing: {diffs or 'none'}")
    assert ok
