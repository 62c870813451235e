"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from relaymesh import experiments as ex
from relaymesh import strategy_rates as sr
from relaymesh.channel_model import PathLossModel, build_network, collinear_single_relay, single_relay_gains
from relaymesh.gaussian_info import broadcast_cut_capacity, broadcast_mi_t3, broadcast_mi_t4_beta
from relaymesh.opt_core import bell_number, set_partitions

SEED = 20240607
MPL = PathLossModel("mpl", 1.0, 2.0)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def log_uniform(rng, size, lo=0.1, hi=10.0):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=size))


# 1 ---------------------------------------------------------------------------
def test_criterion_1_correlation_never_helps():
    rng = np.random.default_rng(SEED)
    worst_t3 = -math.inf
    for _ in range(200):
        P1, P2, N2, N3 = log_uniform(rng, 4)
        at0 = broadcast_mi_t3(P1, P2, N2, N3, 0.0)
        amax = min(1.0, math.sqrt(P1 / P2))
        worst_t3 = max(worst_t3, max(broadcast_mi_t3(P1, P2, N2, N3, a) - at0
                                     for a in np.linspace(0.0, amax, 101)))
    worst_t4 = 0.0
    for _ in range(200):
        P1, N2, N3, N4, P3, PW = log_uniform(rng, 6)
        vals = [broadcast_mi_t4_beta(P1, N2, N3, N4, b, P3, PW) for b in np.linspace(0.0, 1.0, 101)]
        worst_t4 = max(worst_t4, max(vals) - min(vals))
    ok = worst_t3 <= 1e-12 and worst_t4 < 1e-10
    report(1, ok, f"T=3 max excess over alpha=0 {worst_t3:.2e} (tol 1e-12); "
                  f"T=4 max beta spread {worst_t4:.2e} (tol 1e-10)")


# 2 ---------------------------------------------------------------------------
def _decreasing_and_small(gaps):
    return all(b < a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-3


def test_criterion_2_cf_reaches_broadcast_cut():
    powers = (1e2, 1e4, 1e6)
    closed, t2_single, t2_pair = [], [], []
    for P2 in powers:
        net = collinear_single_relay(0.7, MPL, P1=1.0, P2=P2, N2=1.0, N3=1.0)
        C = broadcast_cut_capacity(net)
        closed.append(1 - sr.cf_single_relay(net).rate / C)
        t2_single.append(1 - sr.optimize_cf_q(net).rate / C)
        pair = build_network([1.0, P2, P2], [1.0, 1.0, 1.0], positions=[0.0, 0.7, 0.7, 1.0], path_loss=MPL)
        t2_pair.append(1 - sr.optimize_cf_q(pair).rate / broadcast_cut_capacity(pair))
    ok = all(_decreasing_and_small(g) for g in (closed, t2_single, t2_pair))
    fmt = lambda g: "/".join(f"{x:.2e}" for x in g)  # noqa: E731
    report(2, ok, f"gaps at P2=1e2/1e4/1e6: closed-form {fmt(closed)}; "
                  f"constraint-family T=3 {fmt(t2_single)}; constraint-family T=4 {fmt(t2_pair)}")


# 3 ---------------------------------------------------------------------------
def test_criterion_3_constraint_family_consistency():
    # ordering and the Psi identity on broad draws; the P2 = 1e6 gap on unit-scale draws
    rng = np.random.default_rng(SEED + 3)
    worst_order, worst_psi, worst_gap = -math.inf, 0.0, 0.0
    for _ in range(100):
        net = ex.random_single_relay(rng)
        res = sr.optimize_cf_q(net)
        worst_order = max(worst_order, res.rate - sr.cf_single_relay(net).rate)
        ref = sr.cf_rate_given_q(net, res.q)
        worst_psi = max(worst_psi, abs(ex.psi_identity_rate(net, res.q) - ref) / ref)
        big = ex.random_single_relay(rng, 0.5, 2.0, P2=1e6)
        gap = sr.cf_single_relay(big).rate - sr.optimize_cf_q(big).rate
        worst_order = max(worst_order, -gap)
        worst_gap = max(worst_gap, gap)
    ok = worst_order <= 1e-9 and worst_gap < 1e-4 and worst_psi <= 1e-10
    report(3, ok, f"max(R_T2 - R_CF) {worst_order:.2e} (tol 1e-9); max gap at P2=1e6 {worst_gap:.2e} bits "
                  f"(< 1e-4); max Psi-identity rel. error {worst_psi:.2e} (tol 1e-10)")


# 4 ---------------------------------------------------------------------------
def test_criterion_4_closed_form_q():
    net = build_network([1.0, 1.0], [1.0, 1.0], gains=single_relay_gains(1, 1, 1))
    q_closed = sr.cf_single_relay(net).q[2]
    q_t2 = sr.optimize_cf_q(net).q[2]
    ok = q_closed == 3.0 and abs(q_t2 - 4.0) <= 1e-6
    report(4, ok, f"closed-form Q = {q_closed!r}, constraint-family Q = {q_t2:.10f} (4 +- 1e-6)")


# 5 ---------------------------------------------------------------------------
def test_criterion_5_asymptotic_verdicts():
    mismatches, cells = [], 0
    for case in ex.CASE_IDS:
        for v in ex.asymptotic_probe(case):
            expected = ex.EXPECTED[case].get((v.strategy, v.direction))
            if expected is None:
                continue
            cells += 1
            if not ex.matches_expectation(v.verdict, expected):
                mismatches.append(f"{case}/{v.strategy}/{v.direction}: {v.verdict} != {expected}")
    ok = not mismatches and cells > 0
    report(5, ok, f"{cells - len(mismatches)}/{cells} reference verdicts reproduced" +
           (f"; mismatches {mismatches}" if mismatches else ""))


# 6 ---------------------------------------------------------------------------
def test_criterion_6_power_thresholds():
    t = ex.SingleRelayTemplate()
    near = ex.power_threshold(t, 0.05, 0.97)
    far = ex.power_threshold(t, 0.3, 0.97)
    spec = ex.SweepSpec("P2", ex.make_grid(1.0, 20.0, 39), template=t, d23=0.05, strategies=("CF", "MH"))
    rows = ex.run_sweep(spec)
    mh_below = all(r.rates["MH"] < r.rates["CF"] for r in rows)
    ok = near < 50 * t.P1 and far > near and mh_below
    report(6, ok, f"threshold(d23=0.05) = {near:.3f} P1 (< 50); threshold(d23=0.3) = {far:.3f} P1; "
                  f"MH < CF at all {len(rows)} sweep points: {mh_below}")


# 7 ---------------------------------------------------------------------------
def _grid_oracle(dec, inc, n=100_001):
    """Max of min(dec, inc) on a uniform grid, then again on a fine grid around the best cell."""
    a = np.linspace(0.0, 1.0, n)
    v = np.minimum(dec(a), inc(a))
    k = int(np.argmax(v))
    plain = float(v[k])
    b = np.linspace(a[max(k - 1, 0)], a[min(k + 1, n - 1)], n)
    return plain, max(plain, float(np.minimum(dec(b), inc(b)).max()))


def _terms(P1, P2, N2, N3, l12, l13, l23):
    L = lambda x: 0.5 * np.log2(1 + x)  # noqa: E731
    mac = lambda a: L((P1 * l13 + P2 * l23 + 2 * np.sqrt(a * l13 * l23 * P1 * P2)) / N3)  # noqa: E731
    s1, s2 = P1 * l12 / N2, P2 * l23 / N3

    def hop(snr):
        def f(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(t > 0, t * L(snr / np.where(t > 0, t, 1.0)), 0.0)
        return f

    h1, h2 = hop(s1), hop(s2)
    return {
        "CS": (lambda a: L((1 - a) * (P1 * l13 / N3 + P1 * l12 / N2)), mac),
        "DF": (lambda a: L((1 - a) * s1), mac),
        "MH": (lambda a: h1(1 - a), h2),
    }


def test_criterion_7_dominance_and_oracles():
    funcs = {"CS": sr.cutset_single_relay, "DF": sr.df_single_relay, "MH": sr.multihop_tdma}
    rng = np.random.default_rng(SEED + 7)
    worst_dom, worst_oracle, below_plain = -math.inf, 0.0, 0.0
    for _ in range(200):
        params = log_uniform(rng, 7)
        net = build_network(params[:2], params[2:4], gains=single_relay_gains(*params[4:]))
        cs = sr.cutset_single_relay(net).rate
        for fn in (sr.df_single_relay, sr.cf_single_relay, sr.multihop_tdma):
            worst_dom = max(worst_dom, fn(net).rate - cs)
        for name, (dec, inc) in _terms(*params).items():
            plain, refined = _grid_oracle(dec, inc)
            r = funcs[name](net).rate
            worst_oracle = max(worst_oracle, abs(r - refined))
            below_plain = max(below_plain, plain - r)
    # worked all-ones values sit on grid points of the plain oracle
    ones = build_network([1.0, 1.0], [1.0, 1.0], gains=single_relay_gains(1, 1, 1))
    for name, (dec, inc) in _terms(1, 1, 1, 1, 1, 1, 1).items():
        plain, _ = _grid_oracle(dec, inc)
        worst_oracle = max(worst_oracle, abs(funcs[name](ones).rate - plain))
    bell_ok = all(sum(1 for _ in set_partitions(n)) == bell_number(n) for n in range(1, 9))
    spec = ex.SweepSpec("d12", ex.make_grid(0.05, 0.95, 19), strategies=("DF", "CF", "MH", "CF_T2"))
    csv_ok = ex.sweep_csv(spec, ex.run_sweep(spec)) == ex.sweep_csv(spec, ex.run_sweep(spec))
    ok = worst_dom <= 1e-9 and worst_oracle <= 1e-8 and below_plain <= 1e-8 and bell_ok and csv_ok
    report(7, ok, f"max(R - R_CS) {worst_dom:.2e} (tol 1e-9); max |optimizer - grid oracle| {worst_oracle:.2e} "
                  f"(tol 1e-8); Bell counts n<=8: {bell_ok}; CSV bit-identical: {csv_ok}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
