"""Acceptance suite: one test per release criterion, at fixed tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

import time

import numpy as np
import pytest

from antopt.capacity import (CapacityPlugin, capacity_value,
                             sample_capacity_problem, water_filling,
                             water_filling_allocation)
from antopt.channel import sample_geometric_channel
from antopt.geometry import (brute_force_projection_oracle,
                             conservative_capacity, min_pairwise_distance,
                             solve_separation_projection)
from antopt.harness import (RunConfig, child_seed, diagnose_connectivity,
                            run_monte_carlo, run_trial)
from antopt.mec import MecPlugin, sample_mec_problem
from antopt.penalty import finite_difference_gradient, run_penalty_ao
from antopt.rzf import RzfPlugin, sample_rzf_problem
from antopt import capacity as cap_mod
from antopt import mec as mec_mod
from antopt import rzf as rzf_mod


def report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_projection_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    failures = 0
    worst_gap = 0.0
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        pts = rng.uniform(0.0, 3.0, (m, 2))
        target, others = pts[0], pts[1:]
        z = solve_separation_projection(target, others, 0.5)
        d_exact = float(np.hypot(*(z - target)))
        zo = brute_force_projection_oracle(target, others, 0.5, 1 / 400)
        d_oracle = float(np.hypot(*(zo - target)))
        feas = float(np.min(np.hypot(others[:, 0] - z[0],
                                     others[:, 1] - z[1])))
        if d_exact > d_oracle + 1e-9 or feas < 0.5 - 1e-9:
            failures += 1
        worst_gap = max(worst_gap, d_oracle - d_exact)
    elapsed = time.perf_counter() - t0
    report("projection-oracle-equivalence",
           failures == 0 and elapsed < 30.0,
           f"failures={failures}/1000, oracle gap<= {worst_gap:.5f}, "
           f"runtime={elapsed:.1f}s (<30s)")


def test_gradient_suites():
    t0 = time.perf_counter()
    worst = 0.0

    def check(grad, fun, pos):
        nonlocal worst
        fd = finite_difference_gradient(fun, pos.copy())
        rel = np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-8)
        worst = max(worst, float(rel.max()))
        return rel.max() <= 1e-4

    ok = True
    for i in range(100):
        rng = np.random.default_rng(10_000 + i)
        cfg = RunConfig(case="capacity", panel_a=3.0)
        prob = sample_capacity_problem(cfg, rng)
        prob.tx_positions[:] = rng.uniform(-1.5, 1.5, prob.tx_positions.shape)
        prob.rx_positions[:] = rng.uniform(-1.5, 1.5, prob.rx_positions.shape)
        prob.q = water_filling(prob.channel, prob.p_max, prob.sigma2)
        rho = float(rng.uniform(1, 50))
        for which in ("rx", "tx"):
            pos = prob.rx_positions if which == "rx" else prob.tx_positions
            aux = pos + rng.normal(0, 0.2, pos.shape)

            def fun(x, pos=pos, aux=aux):
                pos[:] = x
                return cap_mod.capacity_objective(prob) \
                    + rho * float(np.sum((x - aux) ** 2))

            ok &= check(cap_mod.position_gradients(prob, which, rho, aux),
                        fun, pos)

    for i in range(100):
        rng = np.random.default_rng(20_000 + i)
        cfg = RunConfig(case="mec", panel_a=3.0)
        prob = sample_mec_problem(cfg, rng)
        prob.rx_positions[:] = rng.uniform(-1.5, 1.5, prob.rx_positions.shape)
        prob.beta = rng.integers(0, 2, len(prob.beta))
        rho = float(rng.uniform(1, 50))
        aux = prob.rx_positions + rng.normal(0, 0.2, prob.rx_positions.shape)

        def fun(x, prob=prob, aux=aux, rho=rho):
            prob.rx_positions[:] = x
            return mec_mod.total_latency(
                prob, rates=mec_mod.single_user_rates(prob)) \
                + rho * float(np.sum((x - aux) ** 2))

        ok &= check(mec_mod.position_gradients(prob, rho, aux), fun,
                    prob.rx_positions)

    for i in range(100):
        rng = np.random.default_rng(30_000 + i)
        cfg = RunConfig(case="rzf", panel_a=3.0)
        prob = sample_rzf_problem(cfg, rng)
        prob.tx_positions[:] = rng.uniform(-1.5, 1.5, prob.tx_positions.shape)
        prob.w = rzf_mod.rzf_closed_form(prob.channel, prob.alpha)
        rho = float(rng.uniform(1, 50))
        aux = prob.tx_positions + rng.normal(0, 0.2, prob.tx_positions.shape)

        def fun(x, prob=prob, aux=aux, rho=rho):
            prob.tx_positions[:] = x
            return rzf_mod.rzf_objective(prob, rho, aux)

        ok &= check(rzf_mod.position_gradients(prob, rho, aux), fun,
                    prob.tx_positions)

    elapsed = time.perf_counter() - t0
    report("gradient-suites", ok and elapsed < 120.0,
           f"3x100 instances, worst rel err={worst:.2e} (<=1e-4), "
           f"runtime={elapsed:.1f}s (<120s)")


def _batch_capacity(h, qs, sigma2):
    m = h.shape[0]
    inner = np.einsum("mk,nkl,jl->nmj", h, qs, h.conj()) / sigma2
    mats = np.eye(m) + 0.5 * (inner + np.conj(np.swapaxes(inner, 1, 2)))
    _sign, logdet = np.linalg.slogdet(mats)
    return logdet / np.log(2.0)


def test_water_filling_kkt():
    rng = np.random.default_rng(77)
    trace_ok = levels_ok = True
    beaten = 0
    for i in range(1000):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(2, 7))
        real = sample_geometric_channel(10, 1.0, rng)
        h = cap_mod.assemble_channel(rng.uniform(-1.5, 1.5, (n, 2)),
                                     rng.uniform(-1.5, 1.5, (m, 2)), real)
        p_max = float(rng.uniform(0.5, 50.0))
        q = water_filling(h, p_max, 1.0)
        trace_ok &= abs(np.trace(q).real - p_max) < 1e-9
        s = np.linalg.svd(h, compute_uv=False)
        s = s[s > s[0] * max(m, n) * np.finfo(float).eps]
        gamma, nu = water_filling_allocation(s, p_max, 1.0)
        active = gamma > 0
        levels = 1.0 / s[active] ** 2 + gamma[active]
        levels_ok &= bool(np.all(np.abs(levels - nu) < 1e-9))
        levels_ok &= bool(np.all(1.0 / s[~active] ** 2 >= nu - 1e-9))
        # random equal-trace PSD perturbations must not beat the optimum
        n_pert = 1000 if i < 10 else 100
        a = rng.normal(size=(n_pert, n, n)) + 1j * rng.normal(size=(n_pert, n, n))
        r = a @ np.conj(np.swapaxes(a, 1, 2))
        r *= (p_max / np.trace(r, axis1=1, axis2=2).real)[:, None, None]
        tau = rng.uniform(0.0, 1.0, n_pert)[:, None, None]
        qs = (1 - tau) * q[None] + tau * r
        best = capacity_value(h, q, 1.0)
        beaten += int(np.sum(_batch_capacity(h, qs, 1.0) > best + 1e-9))
    report("water-filling-kkt", trace_ok and levels_ok and beaten == 0,
           f"trace_ok={trace_ok}, levels_ok={levels_ok}, beaten={beaten}")


def _mechanics_one_case(case, trials):
    cfg = RunConfig(case=case)
    rho_exact = mono_ok = True
    feasible = 0
    for t in range(trials):
        rng = np.random.default_rng(child_seed(100 + t, t))
        if case == "capacity":
            problem = sample_capacity_problem(cfg, rng)
            plugin = CapacityPlugin(problem, cfg.d_min)
        elif case == "mec":
            problem = sample_mec_problem(cfg, rng)
            plugin = MecPlugin(problem, cfg.d_min)
        else:
            problem = sample_rzf_problem(cfg, rng)
            plugin = RzfPlugin(problem, cfg.d_min)
        res = run_penalty_ao(plugin, cfg.schedule(), cfg.stop_rule(),
                             rng=rng, collect_substeps=True)
        for k, entry in enumerate(res.trace):
            rho_exact &= entry.rho == 5.0 * 1.2 ** k
        by_outer = {}
        for outer, _label, value in res.substeps:
            by_outer.setdefault(outer, []).append(value)
        for values in by_outer.values():
            for a, b in zip(values, values[1:]):
                mono_ok &= b <= a + 1e-9
        worst = min(min_pairwise_distance(p)
                    for p in res.positions.values() if len(p) >= 2)
        feasible += worst >= cfg.d_min - 1e-6
    return rho_exact, mono_ok, feasible


def test_penalty_mechanics():
    trials = 100
    details = []
    ok = True
    for case in ("capacity", "mec", "rzf"):
        rho_exact, mono_ok, feasible = _mechanics_one_case(case, trials)
        ok &= rho_exact and mono_ok and feasible == trials
        details.append(f"{case}: rho_exact={rho_exact} monotone={mono_ok} "
                       f"feasible={feasible}/{trials}")
    report("penalty-mechanics", ok, "; ".join(details))


def test_convergence_scale():
    t0 = time.perf_counter()
    windows = {"capacity": (5, 30), "mec": (2, 10), "rzf": (10, 40)}
    paper_rho = {12: 44.58, 3: 8.64, 21: 230.03}
    for k, val in paper_rho.items():
        assert abs(5.0 * 1.2 ** k - val) < 0.01
    details = []
    ok = True
    for case, (lo, hi) in windows.items():
        cfg = RunConfig(case=case, scheme="proposed", panel_a=5.0, seed=31)
        iters = []
        for t in range(50):
            rec = run_trial(cfg, t)
            assert rec.rho_final == 5.0 * 1.2 ** (rec.iters - 1)
            iters.append(rec.iters)
        med = float(np.median(iters))
        ok &= lo <= med <= hi
        details.append(f"{case}: median={med:g} in [{lo},{hi}]")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 900.0
    report("convergence-scale", ok,
           "; ".join(details) + f"; runtime={elapsed:.0f}s (<900s)")


def _metrics(case, scheme, panel_a, trials, seed=123):
    cfg = RunConfig(case=case, scheme=scheme, panel_a=panel_a, seed=seed)
    return np.array([run_trial(cfg, t).metric for t in range(trials)])


def test_baseline_dominance():
    trials = 50
    details = []
    ok = True
    for a in (2.0, 3.0):
        prop = _metrics("capacity", "proposed", a, trials)
        for base in ("fpa", "as"):
            diff = prop - _metrics("capacity", base, a, trials)
            se = diff.std(ddof=1) / np.sqrt(trials)
            ok &= diff.mean() > 2.0 * se
            details.append(f"capacity A={a:g} vs {base}: "
                           f"z={diff.mean() / se:.1f}")
        diff = _metrics("mec", "fpa", a, trials) \
            - _metrics("mec", "proposed", a, trials)
        se = diff.std(ddof=1) / np.sqrt(trials)
        ok &= diff.mean() > 2.0 * se
        details.append(f"mec A={a:g} vs fpa: z={diff.mean() / se:.1f}")
        diff = _metrics("rzf", "proposed", a, trials) \
            - _metrics("rzf", "fpa", a, trials)
        se = diff.std(ddof=1) / np.sqrt(trials)
        ok &= diff.mean() > 2.0 * se
        details.append(f"rzf A={a:g} vs fpa: z={diff.mean() / se:.1f}")
    report("baseline-dominance", ok, "; ".join(details))


def test_fig2_reproduction():
    _rows, fraction = diagnose_connectivity(
        trials=200, panel_a=2.0, m=6, d_min=0.5, resolution=0.01,
        sweeps=3, seed=0)
    report("fig2-reproduction", 0.50 <= fraction <= 0.95,
           f"split fraction={fraction:.3f} in [0.50, 0.95]")


def _pack_1d(extent, subset, gap):
    count = 0
    while (count + 1) * subset + count * gap <= extent + 1e-12:
        count += 1
    return count


def test_conservative_count_formulas():
    d = 0.5
    ok = True
    for ka in range(1, 11):
        for kb in range(1, 11):
            a, b = ka * d, kb * d
            expected = _pack_1d(a, b, d)
            ok &= conservative_capacity(a, b, d) == expected
    for ka in range(1, 11):
        for kb in range(1, 11):
            a1, b1 = ka * d, kb * d
            for kc in (1, 3, 7, 10):
                for kd in (1, 2, 5, 10):
                    a2, b2 = kc * d, kd * d
                    expected = _pack_1d(a1, b1, d) * _pack_1d(a2, b2, d)
                    ok &= conservative_capacity((a1, a2), (b1, b2),
                                                d) == expected
    report("conservative-count-formulas", ok,
           "1D floor formula and 2D product match brute-force packing")


def test_determinism(tmp_path):
    paths = [str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]
    for path in paths:
        cfg = RunConfig(case="capacity", scheme="proposed", trials=20,
                        seed=7, out=path)
        run_monte_carlo(cfg)

    def strip_time(path):
        lines = open(path, encoding="utf-8").read().split("\n")
        header = lines[0].split(",")
        keep = [i for i, c in enumerate(header) if c != "t_ms"]
        return "\n".join(",".join(np.array(l.split(","))[keep])
                         for l in lines if l)

    identical = strip_time(paths[0]) == strip_time(paths[1])
    report("determinism", identical,
           "20-trial capacity CSVs byte-identical excluding t_ms")
