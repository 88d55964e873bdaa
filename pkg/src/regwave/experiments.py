"""Registered experiments.  Each takes a RunConfig and returns an ExperimentReport."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from regwave import edge_stats as es
from regwave.graphs import ball, sample_regular_graph
from regwave.harness import ExperimentReport, Metric, csv_table, parallel_map, spawn_seeds
from regwave.spectral import (
    eigendecompose,
    im_inverse_identity_check,
    normalized_adjacency,
    rescaled_im_green,
    rescaled_im_green_direct,
    schur_identity_check,
    ward_identity_check,
)
from regwave.trees import (
    m_d,
    m_sc,
    regular_tree_ball,
    wave_correlation,
    wave_covariance,
    x_ell,
    y_ell,
    y_ell_expansion,
)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    func: object
    description: str
    anchor: str


REGISTRY = {}


def register(name, description, anchor):
    def deco(func):
        REGISTRY[name] = ExperimentSpec(name, func, description, anchor)
        return func

    return deco


def list_experiments():
    return [(s.name, s.description, s.anchor) for s in REGISTRY.values()]


def _report(config, metrics, samples, notes=None, tables=None):
    return ExperimentReport(
        name=config.experiment,
        metrics=metrics,
        sample_count=samples,
        config_hash="",
        seed=config.seed,
        notes=notes or {},
        tables=tables or {},
    )


# --------------------------------------------------------------------------
# machine-precision identities

IDENTITY_SIZES = (32, 64, 128, 256, 512)


def _identity_fixture(args):
    d, idx, child, ell = args
    n = IDENTITY_SIZES[idx % len(IDENTITY_SIZES)]
    rng = np.random.default_rng(child)
    g = sample_regular_graph(n, d, rng)
    sd = eigendecompose(g)
    z = 2 + 0.05j
    T = ball(g, 0, ell).vertices
    H = normalized_adjacency(g)
    w = 0.5 + 1.0j
    a = rescaled_im_green(sd, 0, 1, w)
    b = rescaled_im_green_direct(g, 0, 1, w)
    lam = sd.eigenvalues
    out = {
        "ward": ward_identity_check(sd, z),
        "schur": schur_identity_check(H, T, 2 + 0.1j),
        "im-inverse": im_inverse_identity_check(H - (2 + 0.1j) * np.eye(n)),
        "poisson-dual-route": abs(a - b) / max(1.0, abs(a)),
    }
    sm, mean = 0.0, 0.0
    for s in (2, 3, n // 2, n):
        exp = es.switching_moment_expected(lam[s - 1], d)
        sm = max(sm, abs(es.switching_moment_identity(sd, g, s, s) - exp))
        mean = max(mean, abs(es.switching_mean_identity(sd, g, s)))
    for s, t in ((2, 3), (2, n // 2), (3, n)):
        sm = max(sm, abs(es.switching_moment_identity(sd, g, s, t)))
    out["switching-second-moment"] = sm
    out["switching-mean"] = mean
    return d, n, out


def _tree_identities(d, ells=range(9), zs=(2 + 0.01j, 1.5 + 0.5j, -1 + 0.2j, 3 + 1j)):
    fy = fx = 0.0
    for z in zs:
        ms = m_sc(z)
        for ell in ells:
            fy = max(fy, abs(y_ell(ms, z, ell) - ms))
            fx = max(fx, abs(x_ell(ms, z, ell, d) - m_d(z, d)))
    tb = regular_tree_ball(d, 3)
    cov = wave_covariance(d, 2 * math.sqrt(d - 1), tb)
    A = tb.local_adjacency()
    rows = cov.interior()
    resid = (A @ cov.matrix - 2 * math.sqrt(d - 1) * cov.matrix)[rows]
    return {"fixed-point-Y": fy, "fixed-point-X": fx, "wave-eigen-equation": float(np.abs(resid).max())}


@register("identity-suite", "Ward, Schur, Im-inverse, Poisson dual route, fixed points, wave eigen-equation, switching identities", "resolvent identities; tree recursions; switching moments")
def identity_suite(config):
    tol = config.tol("identity", 1e-9)
    jobs = []
    for d in (3, 4, 5):
        for idx, child in enumerate(spawn_seeds(config.seed, config.num_seeds, stream=d)):
            jobs.append((d, idx, child, config.ell))
    results = parallel_map(_identity_fixture, jobs)
    worst = {}
    rows = []
    for d, n, out in results:
        for k, v in out.items():
            worst[k] = max(worst.get(k, 0.0), v)
            rows.append((d, n, k, v))
    for d in (3, 4, 5):
        for k, v in _tree_identities(d).items():
            worst[k] = max(worst.get(k, 0.0), v)
            rows.append((d, 0, k, v))
    metrics = [Metric(k, float(v), tol, "le", samples=len(results)) for k, v in worst.items()]
    return _report(config, metrics, len(results), tables={"residuals": csv_table(("d", "n", "identity", "residual"), rows)})


# --------------------------------------------------------------------------
# tree recursion expansion


def expansion_remainders(ell, d, z=1.5 + 0.5j, steps=None):
    """|Y_ell - second-order expansion| along a ray of shrinking perturbations."""
    steps = np.geomspace(1e-2, 1e-3, 8) if steps is None else steps
    ms = m_sc(z)
    direction = np.exp(0.3j)
    rem = np.array([abs(y_ell(ms + h * direction, z, ell) - y_ell_expansion(ms + h * direction, z, ell, d)) for h in steps])
    return steps, rem


def derivative_error(ell, z=1.5 + 0.5j, h=1e-5):
    ms = m_sc(z)
    fd = (y_ell(ms + h, z, ell) - y_ell(ms - h, z, ell)) / (2 * h)
    return abs(fd - ms ** (2 * ell + 2))


@register("y-expansion", "Order of the remainder in the second-order expansion of Y_ell; derivative at the fixed point", "tree recursion expansion")
def y_expansion(config):
    slopes, derr, rows = [], [], []
    for ell in range(9):
        for z in (1.5 + 0.5j, 2.1 + 0.3j, -0.5 + 0.8j):
            h, rem = expansion_remainders(ell, config.d, z)
            slopes.append(es.loglog_slope(h, rem))
            derr.append(derivative_error(ell, z))
            rows.append((ell, repr(z), slopes[-1], derr[-1]))
    metrics = [
        Metric("remainder-slope-min", min(slopes), config.tol("slope-low", 2.7), "ge", samples=len(slopes)),
        Metric("remainder-slope-max", max(slopes), config.tol("slope-high", 3.3), "le", samples=len(slopes)),
        Metric("derivative-error", max(derr), config.tol("derivative", 1e-6), "le", samples=len(derr)),
    ]
    return _report(config, metrics, len(slopes), tables={"slopes": csv_table(("ell", "z", "slope", "derivative_error"), rows)})


# --------------------------------------------------------------------------
# exchangeability


def _small_n(config):
    return config.n if config.n <= 10 else 8


@register("exchangeability", "Isomorphism-class law of the resampled graph vs uniform, with a biased negative control (n <= 10; default 8)", "exchangeable pair")
def exchangeability(config):
    n, d = _small_n(config), config.d
    main_seed, ctrl_seed = spawn_seeds(config.seed, 2, stream=0)
    res = es.exchangeability_chisq(n, d, config.ell, config.trials, np.random.default_rng(main_seed), R=config.R)
    ctrl = es.exchangeability_chisq(
        n, d, config.ell, config.trials, np.random.default_rng(ctrl_seed), R=config.R,
        sampler=es.triangle_rejecting_sampler(n, d),
    )
    metrics = [
        Metric("p-value", res.pvalue, config.tol("p-min", 0.01), "ge", samples=config.trials),
        Metric("negative-control-p-value", ctrl.pvalue, config.tol("control-p-max", 1e-3), "le", samples=config.trials),
        # with no admissible switching the test is vacuous
        Metric("switched-fraction", res.switched_fraction, config.tol("switched-min", 0.01), "ge", samples=config.trials),
    ]
    rows = [(k, int(res.counts[k]), float(res.expected[k]), int(ctrl.counts[k])) for k in range(len(res.counts))]
    notes = {"n": n, "chi2": res.statistic, "control-chi2": ctrl.statistic}
    return _report(config, metrics, 2 * config.trials, notes, {"class_counts": csv_table(("class", "observed", "expected", "control"), rows)})


# --------------------------------------------------------------------------
# ensembles at the spectral edge


def build_ensemble(config, k=1, radius=None, stream=1):
    radius = config.r if radius is None else radius
    func = partial(es.ensemble_sample, n=config.n, d=config.d, k=k, radius=radius, method=config.spectral_method)
    return parallel_map(func, spawn_seeds(config.seed, config.ensemble_size, stream))


@register("gaussian-wave-cov", "Edge eigenvector covariance by depth vs the Gaussian wave, fourth moment, eigenvalue/eigenvector independence", "edge eigenvector universality")
def gaussian_wave_cov(config):
    ens = build_ensemble(config)
    est = es.wave_covariance_estimate(ens, 2, config.r)
    usable = [e for e in ens if not e.degenerate]
    ind = es.independence_from_arrays([e.rescaled[0] for e in usable], [e.waves[2][0, 0] ** 2 for e in usable])
    M = est.samples_used
    metrics = []
    for r, (mean, target) in enumerate(zip(est.depth_means, est.depth_reference)):
        tol = config.tol("depth-0", 0.1) if r == 0 else config.tol(f"depth-{r}", 0.05)
        metrics.append(Metric(f"depth-{r}-mean", float(mean), tol, "near", float(target), samples=M))
    metrics += [
        Metric("fourth-moment", est.fourth_moment, config.tol("fourth", 0.3), "near", 3.0, samples=M),
        Metric("abs-correlation", abs(ind.correlation), config.tol("independence", ind.threshold), "le", samples=ind.samples),
        Metric("max-abs-deviation", est.max_abs_deviation, acceptance=False, samples=M),
        Metric("excluded-center-fraction", est.excluded_fraction, acceptance=False, samples=M),
    ]
    notes = {
        "degenerate-samples": len(ens) - len(usable),
        "depth-se": est.depth_se.tolist(),
        "fourth-se": est.fourth_se,
        "correlation": ind.correlation,
    }
    depth_rows = [(r, m, s, t) for r, (m, s, t) in enumerate(zip(est.depth_means, est.depth_se, est.depth_reference))]
    sample_rows = [(i, e.rescaled[0], e.waves[2][0, 0] ** 2, int(e.degenerate)) for i, e in enumerate(ens)]
    tables = {
        "covariance_by_depth": csv_table(("depth", "mean", "se", "wave"), depth_rows),
        "samples": csv_table(("sample", "rescaled_lambda2", "N_u2_o_sq", "degenerate"), sample_rows),
    }
    return _report(config, metrics, len(ens), notes, tables)


@register("tw1-edge", "KS distance of rescaled lambda_2 against the beta=1 tridiagonal edge reference", "edge eigenvalue universality")
def tw1_edge(config):
    ens = build_ensemble(config, k=1, radius=0)
    x = np.array([e.rescaled[0] for e in ens])
    ref = es.airy1_reference_samples(config.reference_size, 1, config.embed_n, np.random.SeedSequence(config.seed, spawn_key=(2,)))[:, 0]
    ks = es.tw1_ks_test(x, ref, threshold=config.tol("ks", 0.15))
    metrics = [
        Metric("ks-distance", ks.distance, ks.threshold, "le", samples=len(x)),
        Metric("graph-mean", float(x.mean()), acceptance=False, samples=len(x)),
        Metric("reference-mean", float(ref.mean()), acceptance=False, samples=len(ref)),
    ]
    qs = np.linspace(0.01, 0.99, 99)
    qq = [(q, float(np.quantile(x, q)), float(np.quantile(ref, q))) for q in qs]
    return _report(config, metrics, len(x) + len(ref), tables={"qq": csv_table(("q", "graph", "reference"), qq)})


# --------------------------------------------------------------------------
# full-spectrum statistics


def _full_spectrum(child, n, d):
    g = sample_regular_graph(n, d, np.random.default_rng(child))
    return g, eigendecompose(g)


def _rigidity_one(child, n, d):
    _, sd = _full_spectrum(child, n, d)
    return es.rigidity_report(sd, d), es.counting_functional(sd, d)


@register("rigidity", "Max normalized deviation from classical locations over seeds; counting functional reported", "eigenvalue rigidity")
def rigidity(config):
    n, d = config.n, config.d
    out = parallel_map(partial(_rigidity_one, n=n, d=d), spawn_seeds(config.seed, config.num_seeds, stream=3))
    stat = np.array([o[0] for o in out])
    bound = n ** config.tol("rigidity-exponent", 0.15)
    frac = float(np.mean(stat <= bound))
    metrics = [
        Metric("fraction-within-bound", frac, config.tol("rigidity-fraction", 0.9), "ge", samples=len(stat)),
        Metric("median-statistic", float(np.median(stat)), acceptance=False, samples=len(stat)),
        Metric("median-counting-functional", float(np.median([o[1] for o in out])), acceptance=False, samples=len(stat)),
    ]
    rows = [(i, s, y) for i, (s, y) in enumerate(out)]
    return _report(config, metrics, len(stat), {"bound": bound}, {"seeds": csv_table(("seed", "statistic", "Y_N"), rows)})


SMOOTHING_SCALES = (0.4, 0.2, 0.1, 0.05)


def _smoothing_one(child, n, d):
    _, sd = _full_spectrum(child, n, d)
    f = es.smooth_bump(-8.0, 2.0)
    return [es.poisson_smoothing_check(sd, 0, 0, f, y) for y in SMOOTHING_SCALES]


@register("poisson-smoothing", "Poisson-smoothing discrepancy of the rescaled spectral measure vs smoothing scale", "boundary spectral measure")
def poisson_smoothing(config):
    n, d = config.n, config.d
    disc = np.array(parallel_map(partial(_smoothing_one, n=n, d=d), spawn_seeds(config.seed, config.num_seeds, stream=4)))
    mean_disc = disc.mean(axis=0)
    slope = es.loglog_slope(SMOOTHING_SCALES, mean_disc)
    per_seed = [es.loglog_slope(SMOOTHING_SCALES, row) for row in disc]
    metrics = [
        Metric("slope", slope, config.tol("slope", 0.8), "ge", samples=len(disc)),
        Metric("min-seed-slope", float(min(per_seed)), acceptance=False, samples=len(disc)),
    ]
    rows = [(y, m) for y, m in zip(SMOOTHING_SCALES, mean_disc)]
    return _report(config, metrics, len(disc), tables={"discrepancy": csv_table(("y", "mean_discrepancy"), rows)})


def _switch_moment_one(child, n, d, ell):
    g, sd = _full_spectrum(child, n, d)
    T = ball(g, 0, ell).vertices
    full = excl = mean = 0.0
    for s in (2, 3):
        exp = es.switching_moment_expected(sd.eigenvalues[s - 1], d)
        a = es.switching_moment_identity(sd, g, s, s)
        b = es.switching_moment_identity(sd, g, s, s, exclude=T)
        full = max(full, abs(a - exp), abs(es.switching_moment_identity(sd, g, s, 5 - s)))
        excl = max(excl, abs(a - b))
        mean = max(mean, abs(es.switching_mean_identity(sd, g, s)))
    return full, mean, excl * n / (d - 1) ** ell


@register("switch-moment-exact", "Exact full-graph switching moments; ball-excluded average within C (d-1)^ell / n", "switching moments")
def switch_moment_exact(config):
    n, d, ell = config.n, config.d, config.ell
    out = np.array(parallel_map(partial(_switch_moment_one, n=n, d=d, ell=ell), spawn_seeds(config.seed, config.num_seeds, stream=5)))
    metrics = [
        Metric("second-moment-residual", float(out[:, 0].max()), config.tol("exact", 1e-10), "le", samples=len(out)),
        Metric("mean-residual", float(out[:, 1].max()), config.tol("exact", 1e-10), "le", samples=len(out)),
        Metric("excluded-difference-constant", float(out[:, 2].max()), config.tol("excluded-constant", 10.0), "le", samples=len(out)),
    ]
    rows = [(i, *r) for i, r in enumerate(out)]
    return _report(config, metrics, len(out), tables={"residuals": csv_table(("seed", "second_moment", "mean", "scaled_excluded_diff"), rows)})


def _local_law_one(child, n, d, g_exp):
    _, sd = _full_spectrum(child, n, d)
    kappas = np.array([-1.0, -0.5, -0.25, 0.0, 0.25, 0.5]) * n ** (-g_exp)
    etas = n ** (-1 + g_exp) * np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    return es.local_law_scan(sd, d, kappas, etas).ravel()


@register("local-law", "Scaled Stieltjes-transform deviations N eta |m_N - m_d| near the edge", "edge local law")
def local_law(config):
    g_exp = config.tol("window-exponent", 0.1)
    vals = np.array(parallel_map(partial(_local_law_one, n=config.n, d=config.d, g_exp=g_exp), spawn_seeds(config.seed, config.num_seeds, stream=6)))
    q = float(np.quantile(vals.max(axis=1), 0.95))
    metrics = [Metric("quantile-95", q, config.tol("bound", 5.0), "le", samples=len(vals))]
    return _report(config, metrics, len(vals), tables={"deviations": csv_table(("seed", "max_scaled_deviation"), list(enumerate(vals.max(axis=1))))})


def _counting_one(child, n, d):
    _, sd = _full_spectrum(child, n, d)
    return es.counting_functional(sd, d)


@register("counting-functional", "Median of Y_N across n/2, n, 2n (tightness proxy)", "edge counting tightness")
def counting_functional(config):
    sizes = [config.n // 2, config.n, 2 * config.n]
    sizes = [s + (s * config.d) % 2 for s in sizes]
    med, rows = [], []
    for k, n in enumerate(sizes):
        ys = parallel_map(partial(_counting_one, n=n, d=config.d), spawn_seeds(config.seed, config.num_seeds, stream=7 + k))
        med.append(float(np.median(ys)))
        rows += [(n, i, y) for i, y in enumerate(ys)]
    ratio = max(med) / min(med)
    metrics = [Metric("median-ratio", ratio, config.tol("ratio", 2.0), "le", samples=len(rows))]
    return _report(config, metrics, len(rows), {"medians": med, "sizes": sizes}, {"values": csv_table(("n", "seed", "Y_N"), rows)})


def _hs_one(child, n, d, eta, gamma):
    _, sd = _full_spectrum(child, n, d)
    rep = es.hs_decomposition_check(sd, d, es.cubic_bump(2.0, gamma), eta, gamma)
    return rep.lhs, *rep.terms, rep.ratio


@register("hs-diagnostic", "Helffer-Sjostrand decomposition: linear-statistic error vs terms I-IV at the edge", "Helffer-Sjostrand bound")
def hs_diagnostic(config):
    eta, gamma = config.tol("eta", 0.01), config.tol("gamma", 0.2)
    out = np.array(parallel_map(partial(_hs_one, n=config.n, d=config.d, eta=eta, gamma=gamma), spawn_seeds(config.seed, config.num_seeds, stream=10)))
    metrics = [
        Metric("max-ratio", float(out[:, -1].max()), config.tol("ratio", 10.0), "le", samples=len(out)),
        Metric("median-lhs", float(np.median(out[:, 0])), acceptance=False, samples=len(out)),
    ]
    rows = [(i, *r) for i, r in enumerate(out)]
    return _report(config, metrics, len(out), tables={"terms": csv_table(("seed", "lhs", "I", "II", "III", "IV", "ratio"), rows)})


def _wigner_one(child, n):
    w = es.wigner_reference_mode(n, 2, np.random.default_rng(child))
    return w.rescaled[1], w.overlaps[1, 0, 0], w.overlaps[1, 0, 1]


@register("wigner-baseline", "GOE-class Wigner matrix: overlap moments and rescaled lambda_2 vs the edge reference", "Wigner comparison")
def wigner_baseline(config):
    n = min(config.n, 4096)
    out = np.array(parallel_map(partial(_wigner_one, n=n), spawn_seeds(config.seed, config.ensemble_size, stream=11)))
    ref = es.airy1_reference_samples(config.reference_size, 2, config.embed_n, np.random.SeedSequence(config.seed, spawn_key=(12,)))[:, 1]
    ks = es.ks_distance(out[:, 0], ref)
    M = len(out)
    metrics = [
        Metric("diagonal-overlap", float(out[:, 1].mean()), config.tol("diagonal", 0.1), "near", 1.0, samples=M),
        Metric("off-diagonal-overlap", float(out[:, 2].mean()), config.tol("off-diagonal", 0.05), "near", 0.0, samples=M),
        Metric("ks-distance", ks, config.tol("ks", 0.15), "le", samples=M),
    ]
    return _report(config, metrics, M)
