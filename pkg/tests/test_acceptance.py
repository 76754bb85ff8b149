"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Each test runs the same runner and preset as ``bclab run --preset cN`` and
checks the pinned tolerances and runtimes. Red criteria are left red.
"""
import time

import pytest

from bclab import experiments as ex
from bclab.adapted import adapted_pair_build, adapted_params
from bclab.concentration import binomial_two_sided_tail


def run_preset(name, **overrides):
    cfg = ex.ExperimentConfig.preset(name)
    if overrides:
        cfg = cfg.with_overrides(overrides)
    t0 = time.perf_counter()
    res = ex.RUNNERS[cfg.command](cfg.params, 1)
    return res, time.perf_counter() - t0


def audit(res, name):
    return next(a for a in res.audits if a["name"] == name)


def table(res, name):
    return next(t for t in res.tables if t.name == name)


def test_c01_fourier_closed_form(verdict):
    res, wall = run_preset("c1")
    a = audit(res, "closed-form-oracle")
    ok = a["value"] < 1e-10 and wall < 1.0 and len(table(res, "fourier_scan").rows) == 2001
    assert verdict(1, ok, f"max |mu_hat - sin(2xi)/(2xi)| = {a['value']:.3e} < 1e-10, {wall:.2f} s < 1 s")


def test_c02_convolution_identity(verdict):
    res, wall = run_preset("c2")
    a = audit(res, "convolution-identity")
    cases = a["detail"]["cases"]
    ok = a["value"] < 1e-10 and cases == 5000 and wall < 5.0
    assert verdict(2, ok, f"max residual {a['value']:.3e} < 1e-10 over {cases} grid points, {wall:.2f} s < 5 s")


def test_c03_derivative_bound(verdict):
    res, wall = run_preset("c3")
    a = audit(res, "derivative-bound")
    ok = a["value"] == 0 and a["detail"]["cases"] == 10 ** 4 and wall < 10.0
    assert verdict(3, ok, f"{a['value']} violations in {a['detail']['cases']} cases, {wall:.2f} s < 10 s")


def test_c04_moment_oracles(verdict):
    res, wall = run_preset("c4")
    rows = table(res, "response_curve").rows
    h, h1, h2 = (audit(res, n) for n in ("h-within-error-bound", "h-prime-relative", "h-second-relative"))
    ok = (len(rows) == 20 and h["passed"] and h1["value"] <= 1e-6 and h2["value"] <= 1e-3 and wall < 120
          and all(abs(r["h"] - 1 / (1 - r["lam"] ** 2)) <= r["h_error"] for r in rows))
    assert verdict(4, ok, f"h within bound at {len(rows)} lambdas, h' rel {h1['value']:.2e} <= 1e-6, "
                          f"h'' rel {h2['value']:.2e} <= 1e-3, {wall:.1f} s < 120 s")


def test_c05_response_vs_central_difference(verdict):
    res, wall = run_preset("c5")
    rows = table(res, "response_curve").rows
    a = audit(res, "central-difference")
    n_obs = len({r["observable"] for r in rows})
    ok = a["value"] < 1e-4 and n_obs == 5 and len(rows) == 100 and wall < 600
    assert verdict(5, ok, f"max |h' - FD| / (1 + |h'|) = {a['value']:.2e} < 1e-4 over {n_obs} observables "
                          f"x 20 lambdas, {wall:.1f} s < 600 s")


@pytest.mark.slow
def test_c06_rho_reconstruction(verdict):
    res, wall = run_preset("c6")
    a = audit(res, "rho-integral")
    d = audit(res, "decay-bounded")
    ok = a["value"] < 1e-3 and d["passed"]
    assert verdict(6, ok, f"|int rho - (h(b) - h(a))| = {a['value']:.2e} < 1e-3 at cutoff 1e4; "
                          f"|phi_hat| xi^{d['detail']['alpha']:g} last-octave max {d['value']:.2e} <= "
                          f"first {d['bound']:.2e} ({wall:.0f} s)")


@pytest.mark.slow
def test_c07_sobolev_refinement(verdict):
    res, wall = run_preset("c7")
    a = audit(res, "refinement-ratio")
    ok = a["value"] <= 1.05 and wall < 1200
    assert verdict(7, ok, f"refinement ratio 5e3 -> 1e4 = {a['value']:.4f} <= 1.05, {wall:.0f} s < 1200 s")


@pytest.mark.slow
def test_c08_dimension_drop(verdict):
    res, wall = run_preset("c8")
    names = ("a-sup-norm", "b-holder-modulus", "c-derivative-floor", "d-window-nonnegative")
    parts = {n: audit(res, n) for n in names}
    layers = table(res, "layers").rows
    win = table(res, "window").rows
    ok = all(a["passed"] for a in parts.values()) and len(layers) == 4 and len(win) == 200 and wall < 1800
    detail = ", ".join(f"({n[0]}) {'ok' if parts[n]['passed'] else 'violated'}" for n in names)
    assert verdict(8, ok, f"{detail}; {len(win)} window samples, {wall:.0f} s < 1800 s")


def test_c09_blowup_scan(verdict):
    res, wall = run_preset("c9")
    mono = audit(res, "monotone-increase")
    ratio = audit(res, "final-over-first")
    q = mono["value"]
    ok = len(q) == 4 and mono["passed"] and ratio["value"] >= 4.0
    assert verdict(9, ok, f"quotients {', '.join(f'{v:.4f}' for v in q)}: monotone={mono['passed']}, "
                          f"final/first = {ratio['value']:.3f} (need >= 4)")


@pytest.mark.slow
def test_c10_gbm_statistics(verdict):
    res, wall = run_preset("c10")
    h = audit(res, "holder-frequency")
    m = audit(res, "mean-within-4se")
    s = audit(res, "variance-slope")
    ok = h["value"] >= 0.9 and m["passed"] and s["detail"]["relative_error"] <= 0.2 and wall < 3600
    assert verdict(10, ok, f"Hoelder frequency {h['value']:.3f} >= 0.9, max |mean|/SE {m['value']:.2f} <= 4, "
                           f"Var slope {s['value']:.4f} vs {s['bound']:.4f} "
                           f"({100 * s['detail']['relative_error']:.1f}% <= 20%), {wall:.0f} s")


@pytest.mark.slow
def test_c11_adapted_pair(verdict):
    res, wall = run_preset("c11")
    cfg = adapted_pair_build(adapted_params(0.1, 0.5), 3)
    cond = audit(res, "conditions-growth-2-4")
    eps = audit(res, "eps-star")
    ident = audit(res, "decomposition-identity")
    rows = table(res, "demo_scan").rows
    ok = (cfg.N[0] == 10 and len(cfg.N) == 3 and cond["passed"] and eps["passed"]
          and all(r["identity_residual"] <= 1e-10 for r in rows))
    assert verdict(11, ok, f"built k=3 with N_1={cfg.N[0]}, log2 N = {[round(v, 2) for v in cfg.log2_N]}; "
                           f"conditions ok={cond['passed']}, eps_* ok={eps['passed']}, "
                           f"max |S+T+R-q| = {ident['value']:.1e} over {len(rows)} rows")


def test_c12_concentration(verdict):
    res, wall = run_preset("c12")
    az = audit(res, "azuma-printed-bound")
    be = audit(res, "berry-esseen")
    orc = audit(res, "azuma-binomial-oracle")
    exact = binomial_two_sided_tail(100, 30)
    ok = az["passed"] and be["passed"] and orc["passed"]
    assert verdict(12, ok, f"Azuma freq {az['value']:.3e} vs printed bound {az['bound']:.3e} "
                           f"({'ok' if az['passed'] else 'violated'}; exact tail {exact:.3e}); "
                           f"Berry-Esseen {be['value']:.4f} <= {be['bound']:.2f}; "
                           f"oracle within 3 sigma: {orc['passed']}")


def test_c13_small_union(verdict):
    res, wall = run_preset("c13")
    a = audit(res, "small-union")
    rows = table(res, "small_union").rows
    worst = max(r["mass_upper"] / r["half_cylinder_mass"] for r in rows)
    ok = a["passed"] and len(rows) == 1000 and wall < 300
    assert verdict(13, ok, f"{a['value']}/{a['bound']} cases with mu(Q) <= mu(C)/2 "
                           f"(max ratio {worst:.3f}), {wall:.1f} s < 300 s")
