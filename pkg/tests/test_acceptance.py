"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line
that is repeated in the terminal summary."""

import time

import numpy as np

from interfere.achievable import achievable_rate, count_pieces, sample_rate_surface
from interfere.capacity import LadderError, build_ladder, verify_capacity
from interfere.decodable import classify_region_exhaustive, matching_regions, max_decodable_subset
from interfere.gic import (InterferenceNetwork, Strategy, all_strategies, is_strong_one_sided,
                           strategy_achievable, strong_one_sided_membership, successive_maximize)
from interfere.setfn import (BinaryAdderView, GaussianReceiverView, RateVector, UserSet,
                             decode_gap_oracle)
from interfere.sfm import minimize_exhaustive, minimize_min_norm

from oracles import gamma, log_uniform, subsets

TOL = 1e-9


# ---- 1 -------------------------------------------------------------------------

def _two_user_closed_form(r1, r2):
    a, b, c = gamma(0.5), gamma(1.0), gamma(2.0)
    le = lambda x, y: x <= y + TOL  # noqa: E731
    gt = lambda x, y: x > y + TOL  # noqa: E731
    labels = []
    if le(r1, b) and le(r2, b) and le(r1 + r2, c):
        labels.append("{1,2}")
    if le(r1, a) and gt(r2, b):
        labels.append("{1}")
    if le(r2, a) and gt(r1, b):
        labels.append("{2}")
    if gt(r1, a) and gt(r2, a) and gt(r1 + r2, c):
        labels.append("{}")
    return labels


def test_criterion_1_two_user_atlas(record):
    view = GaussianReceiverView((1.0, 1.0))
    E = UserSet.full(2)
    axis = np.linspace(0, 1.2, 200)
    t0 = time.perf_counter()
    bad = 0
    for r1 in axis:
        for r2 in axis:
            rates = RateVector((float(r1), float(r2)))
            expected = _two_user_closed_form(float(r1), float(r2))
            got = classify_region_exhaustive(view, E, rates).render()
            mds = max_decodable_subset(view, E, rates).render()
            if expected != [got] or mds != got:
                bad += 1
    elapsed = time.perf_counter() - t0
    passed = bad == 0 and elapsed < 10
    record(1, passed, f"{bad} mismatches on 200x200 grid, {elapsed:.1f}s")
    assert passed


# ---- 2 -------------------------------------------------------------------------

def test_criterion_2_sfm_oracle_equivalence(record):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    bad = total = 0
    for M in range(2, 11):
        E = UserSet.full(M)
        for _ in range(1000):
            view = GaussianReceiverView(tuple(log_uniform(rng, 0.1, 10, M)))
            rates = RateVector(tuple(rng.uniform(0, 2, M)))
            f = decode_gap_oracle(view, E, rates)
            a, b = minimize_exhaustive(f), minimize_min_norm(f)
            total += 1
            if abs(a.min_value - b.min_value) > 1e-9 or a.minimal_minimizer != b.minimal_minimizer:
                bad += 1
    elapsed = time.perf_counter() - t0
    passed = bad == 0 and elapsed < 120
    record(2, passed, f"{total - bad}/{total} agree, {elapsed:.1f}s")
    assert passed


# ---- 3 -------------------------------------------------------------------------

def test_criterion_3_algorithm_vs_exhaustive(record):
    rng = np.random.default_rng(3)
    bad = total = 0
    for M in range(2, 9):
        E = UserSet.full(M)
        for _ in range(500):
            view = GaussianReceiverView(tuple(log_uniform(rng, 0.1, 10, M)))
            # keep sum rates comparable to the sum capacity so every region shows up
            rates = RateVector(tuple(rng.uniform(0, 2.5 / np.sqrt(M), M)))
            found = matching_regions(view, E, rates)
            total += 1
            if len(found) != 1 or max_decodable_subset(view, E, rates) != found[0]:
                bad += 1
    record(3, bad == 0, f"{total - bad}/{total} agree")
    assert bad == 0


# ---- 4 -------------------------------------------------------------------------

def test_criterion_4_binary_adder_closed_form(record):
    rng = np.random.default_rng(4)
    worst = 0.0
    total = 0
    for M in range(2, 9):
        view = BinaryAdderView(M, intended_user=1)
        for _ in range(1000):
            r = rng.uniform(0, 1.5 / (M - 1), M - 1)
            d = achievable_rate(view, RateVector.for_interferers(M, 1, r.tolist()))
            worst = max(worst, abs(d.rate - max(0.0, 1.0 - float(np.sum(r)))))
            total += 1
    record(4, worst <= 1e-12, f"{total} cases, max error {worst:.2e}")
    assert worst <= 1e-12


# ---- 5 -------------------------------------------------------------------------

def _surface_stats(powers, step=0.01):
    view = GaussianReceiverView(tuple(powers), 1)
    pts = sample_rate_surface(view, [(0, 1.6, step), (0, 1.6, step)], workers=4)
    grid = {p.index: p for p in pts}
    jump = 0.0
    slopes_ok = True
    for (i, j), p in grid.items():
        for (di, dj), axis in (((1, 0), 2), ((0, 1), 3)):
            q = grid.get((i + di, j + dj))
            if q is None:
                continue
            d = q.rate - p.rate
            jump = max(jump, abs(d))
            if q.piece == p.piece:
                expected = -step if axis in p.active else 0.0
                slopes_ok &= abs(d - expected) <= 1e-9
    return count_pieces(pts), jump, slopes_ok


def test_criterion_5_piece_count(record):
    step = 0.01
    # candidate powers (intended first); the first with 9 pieces is reported
    candidates = [(1.0, 2.0, 4.0), (1.0, 1.0, 2.0), (2.0, 3.0, 5.0), (1.0, 3.0, 3.0)]
    found = None
    worst_jump, all_within, all_slopes = 0.0, True, True
    for powers in candidates:
        pieces, jump, slopes_ok = _surface_stats(powers, step)
        all_within &= pieces <= 9
        all_slopes &= slopes_ok
        worst_jump = max(worst_jump, jump)
        if pieces == 9:
            found = powers
            break
    continuous = worst_jump <= 1.5 * step
    passed = found is not None and all_within and continuous and all_slopes
    record(5, passed, f"9 pieces at powers {found}; max adjacent jump {worst_jump:.4f} "
                      f"(limit {1.5 * step}); slopes in {{0,-1}}: {all_slopes}")
    assert passed


# ---- 6 -------------------------------------------------------------------------

def _ladder_ok(p, r, lad):
    K = len(p)
    levels = [(lv.noise, [i - 1 for i in lv.users]) for lv in lad.levels]
    if sorted(i for _, u in levels for i in u) != list(range(K)):
        return False
    q = 0.0
    prev = 0.0
    placed = []
    for n, users in levels:
        if not n > prev:
            return False
        lhs = sum(r[i] for i in users)
        rhs = gamma(sum(p[i] for i in users) / (n + q))
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
            return False
        placed += users
        q_in = q + sum(p[i] for i in users)
        rest = [i for i in range(K) if i not in placed]
        for T in subsets(rest):
            if T and not sum(r[i] for i in T) < gamma(sum(p[i] for i in T) / (n + q_in)):
                return False
        q, prev = q_in, n
    return True


def test_criterion_6_broadcast_ladder(record):
    rng = np.random.default_rng(6)
    done = bad = rejected = 0
    while done < 500:
        K = int(rng.integers(1, 6))
        p = log_uniform(rng, 0.1, 10, K)
        r = rng.uniform(0.01, 1.5, K)
        try:
            lad = build_ladder(p, r)
        except LadderError:
            rejected += 1
            continue
        done += 1
        bad += not (_ladder_ok(p, r, lad) and all(c.passed for c in lad.constraints()))
    record(6, bad == 0, f"{done - bad}/{done} ladders valid ({rejected} inputs without a ladder)")
    assert bad == 0


# ---- 7 -------------------------------------------------------------------------

def _vuw_instance(rng):
    M = int(rng.integers(4, 6))
    p = log_uniform(rng, 0.1, 10, M)
    r = [0.0]
    for j in range(1, M):
        cap = gamma(p[j])
        r.append(cap * rng.choice([rng.uniform(0.05, 0.4), rng.uniform(0.6, 1.0), rng.uniform(1.05, 2.0)]))
    return GaussianReceiverView(tuple(p), 1), RateVector(tuple(r))


def test_criterion_7_capacity_certificate(record):
    rng = np.random.default_rng(7)
    done = bad = draws = 0
    while done < 500:
        view, rates = _vuw_instance(rng)
        draws += 1
        d = achievable_rate(view, rates)
        if not (d.V_noise and d.U_joint and d.W_first):
            continue
        done += 1
        bad += not verify_capacity(view, rates).passed
    record(7, bad == 0, f"{done - bad}/{done} certificates pass (V, U, W all nonempty; {draws} draws)")
    assert bad == 0


# ---- 8 -------------------------------------------------------------------------

def test_criterion_8_two_user_strong_corner(record):
    net = InterferenceNetwork.standard([[1, 2], [2, 1]])
    pt = successive_maximize(net, (1, 2))
    r1, r2 = pt.rates.rates
    # receiver 2 decoding both: R_2 <= gamma(P_2) with user 1 known
    slack = gamma(1.0) - r2
    passed = abs(r1 - 0.5) <= 1e-9 and abs(r2 - 0.5) <= 1e-9 and 0 <= slack < 1e-9
    record(8, passed, f"point ({r1:.9f}, {r2:.9f}), R_2 slack {slack:.1e}")
    assert passed


# ---- 9 -------------------------------------------------------------------------

def _strong_one_sided(rng, M):
    g2 = np.zeros((M, M))
    for j in range(M):
        g2[j, j] = 1.0
        g2[j + 1:, j] = np.sort(log_uniform(rng, 1.0, 10, M - j - 1))
    net = InterferenceNetwork.standard(np.sqrt(g2).tolist(), log_uniform(rng, 0.1, 10, M).tolist())
    return net.relabel([int(o) + 1 for o in rng.permutation(M)])


def test_criterion_9_membership(record):
    rng = np.random.default_rng(9)
    bad = total = accepted = 0
    for _ in range(200):
        M = int(rng.integers(2, 5))
        net = _strong_one_sided(rng, M)
        assert is_strong_one_sided(net)
        everyone = Strategy(tuple(net.audible(i) for i in range(1, M + 1)))
        for _ in range(100):
            rates = RateVector(tuple(rng.uniform(0, 1.5, M)))
            ok, _ = strong_one_sided_membership(net, rates)
            accepted += ok
            total += 1
            bad += ok != strategy_achievable(net, rates, everyone)
    record(9, bad == 0, f"{total - bad}/{total} agree ({accepted} members)")
    assert bad == 0


# ---- 10 ------------------------------------------------------------------------

def test_criterion_10_extremality(record):
    rng = np.random.default_rng(10)
    eps = 1e-6
    failures = []
    for t in range(100):
        M = 2 + t % 2
        g = np.sqrt(log_uniform(rng, 0.1, 10, (M, M)))
        np.fill_diagonal(g, 1.0)
        net = InterferenceNetwork.standard(g.tolist(), log_uniform(rng, 0.1, 10, M).tolist())
        pt = successive_maximize(net)
        strategies = list(all_strategies(M))
        for k in range(1, M + 1):
            bumped = pt.rates.replace(k, pt.rates[k] + eps)
            hit = next((s for s in strategies if strategy_achievable(net, bumped, s, tol=0.0)), None)
            if hit is not None:
                failures.append((t, M, k, hit.render()))
                break
    n_bad = len(failures)
    detail = f"{100 - n_bad}/100 extremal"
    if failures:
        t, M, k, s = failures[0]
        detail += f"; e.g. instance {t} (M={M}) allows R_{k}+{eps:g} under strategy {s}"
    record(10, n_bad == 0, detail)
    assert n_bad == 0, detail
