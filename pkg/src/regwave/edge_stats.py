"""Monte Carlo edge statistics, reference samplers and exact switching identities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import stats
from scipy.special import airy

from regwave.errors import DataError, NumericalError, ParameterError
from regwave.graphs import IsomorphismClasses, sample_regular_graph, tree_ball_size
from regwave.resampling import ball, complement_directed_edges, resample
from regwave.spectral import (
    edge_rescale,
    edge_scale,
    extreme_eigenpairs,
    stieltjes,
    top_eigenpairs,
)
from regwave.trees import (
    classical_locations,
    kesten_mckay_upper_mass,
    m_d,
    regular_tree_ball,
    rho_d,
    wave_correlation,
    wave_covariance,
)

DEGENERACY_TOL = 1e-10
TW1_MEAN = -1.2065335745820


# --------------------------------------------------------------------------
# reference samplers


def goe_tridiagonal_top(embed_n, k, rng):
    """Top ``k`` eigenvalues / sqrt(n) of the beta = 1 Hermite tridiagonal model."""
    diag = rng.normal(0.0, math.sqrt(2.0), embed_n)
    off = np.sqrt(rng.chisquare(np.arange(embed_n - 1, 0, -1)))
    top = sla.eigvalsh_tridiagonal(diag, off, select="i", select_range=(embed_n - k, embed_n - 1))
    return top[::-1] / math.sqrt(embed_n)


def airy1_reference(k, embed_n, rng):
    """Top ``k`` edge-rescaled points n^{2/3}(mu_i - 2) of the tridiagonal GOE model."""
    if embed_n < 200 or not 1 <= k <= 10:
        raise ParameterError("need embed_n >= 200 and 1 <= k <= 10")
    rng = np.random.default_rng(rng)
    return embed_n ** (2 / 3) * (goe_tridiagonal_top(embed_n, k, rng) - 2)


def airy1_reference_samples(M, k, embed_n, seed):
    """``M`` independent draws of :func:`airy1_reference`, shape ``(M, k)``."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(M)
    return np.array([airy1_reference(k, embed_n, np.random.default_rng(c)) for c in children])


def tw1_cdf(s, nodes=80, length=16.0):
    """GOE Tracy-Widom distribution function as a Fredholm determinant.

    F_1(s) = det(I - K) on L^2(s, inf) with K(x, y) = Ai((x + y)/2) / 2,
    discretized by Gauss-Legendre on [s, s + length].
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = s + (x + 1) * length / 2
    sw = np.sqrt(w * length / 2)
    K = 0.5 * airy((t[:, None] + t[None, :]) / 2)[0]
    return float(np.linalg.det(np.eye(nodes) - sw[:, None] * K * sw[None, :]))


# --------------------------------------------------------------------------
# two-sample Kolmogorov-Smirnov


def ks_distance(a, b):
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


@dataclass(frozen=True)
class KSResult:
    distance: float
    threshold: float
    n_samples: int
    n_reference: int

    @property
    def passed(self):
        return self.distance <= self.threshold


def tw1_ks_test(graph_samples, reference, threshold=0.15, min_samples=100):
    if len(graph_samples) < min_samples or len(reference) < min_samples:
        raise ParameterError(f"need at least {min_samples} samples on each side")
    return KSResult(ks_distance(graph_samples, reference), threshold, len(graph_samples), len(reference))


# --------------------------------------------------------------------------
# ensembles of graph eigenpairs


def nonbacktracking_levels(g, radius, centers=None):
    """BFS levels of every center's radius-``radius`` ball, assuming it is a tree.

    Returns ``(levels, tree_by_radius)``: ``levels[k]`` has shape
    ``(n_centers, d (d-1)^(k-1))`` and lists the endpoints of
    non-backtracking walks of length k in BFS order; ``tree_by_radius[r]``
    flags the centers whose radius-r ball really is a tree (walk endpoints
    distinct and no edge closing a cycle inside the ball).
    """
    nb = g.neighbors
    centers = np.arange(g.n) if centers is None else np.asarray(centers)
    c = len(centers)
    levels = [centers[:, None]]
    parents = np.full((c, 1), -1)
    for _ in range(radius + 1):
        ends = levels[-1]
        nxt = nb[ends]  # (c, m, d)
        if len(levels) > 1:
            # exactly one neighbor is the parent when the walk is in a tree
            first_parent = np.argmax(nxt == parents[..., None], axis=2)
            mask = np.ones(nxt.shape, dtype=bool)
            np.put_along_axis(mask, first_parent[..., None], False, axis=2)
            nxt2 = nxt[mask].reshape(c, -1)
            par = np.broadcast_to(ends[..., None], nxt.shape)[mask].reshape(c, -1)
            nxt = nxt2
        else:
            nxt = nxt.reshape(c, -1)
            par = np.repeat(ends, g.d, axis=1)
        levels.append(nxt)
        parents = par
    flags = []
    for r in range(radius + 1):
        inner = np.sort(np.concatenate(levels[: r + 1], axis=1), axis=1)
        distinct = np.all(np.diff(inner, axis=1) != 0, axis=1)
        outer = levels[r + 1]
        closes = np.array([np.isin(outer[k], inner[k]).any() for k in range(c)])
        flags.append(distinct & ~closes)
    return levels[: radius + 1], np.array(flags)


@dataclass
class EnsembleSample:
    seed: tuple
    n: int
    d: int
    lambdas: np.ndarray  # nontrivial eigenvalues lambda_2, lambda_3, ...
    rescaled: np.ndarray  # (A n)^{2/3}(lambda_s - 2) for s = 2..k+1
    radius: int
    centers: np.ndarray
    tree_flags: np.ndarray  # (radius + 1, n_centers): radius-r ball is a tree
    waves: dict = field(default_factory=dict)  # s -> (n_centers, ball size) of sqrt(n) u_s
    degenerate: bool = False


def ensemble_sample(seed, n, d, k=1, radius=2, centers=None, method="lanczos"):
    """Sample one graph and record its top ``k`` nontrivial eigenpairs at the edge.

    ``seed`` is anything accepted by ``numpy.random.default_rng``; the
    recorded ``seed`` field is its spawn key when it is a SeedSequence.
    """
    rng = np.random.default_rng(seed)
    g = sample_regular_graph(n, d, rng)
    if method == "lanczos":
        sd = extreme_eigenpairs(g, k + 1, rng=rng)
    elif method == "dense":
        sd = top_eigenpairs(g, k + 1)
    else:
        raise ParameterError(f"unknown spectral method {method!r}")
    lambdas = sd.eigenvalues[1:]
    gaps = np.abs(np.diff(sd.eigenvalues[1:]))
    levels, flags = nonbacktracking_levels(g, radius, centers)
    order = np.concatenate(levels, axis=1)
    waves = {s: math.sqrt(n) * sd.vector(s)[order] for s in range(2, k + 2)}
    key = tuple(seed.spawn_key) if isinstance(seed, np.random.SeedSequence) else (seed,)
    return EnsembleSample(
        seed=key,
        n=n,
        d=d,
        lambdas=lambdas,
        rescaled=edge_rescale(lambdas[:k], n, d),
        radius=radius,
        centers=levels[0][:, 0],
        tree_flags=flags,
        waves=waves,
        degenerate=bool(np.any(gaps[:k] < DEGENERACY_TOL)),
    )


@dataclass(frozen=True)
class WaveEstimate:
    empirical: np.ndarray
    reference: np.ndarray
    max_abs_deviation: float
    depth_means: np.ndarray  # mean of N u(o) u(v) over v at depth r
    depth_se: np.ndarray
    depth_reference: np.ndarray
    fourth_moment: float
    fourth_se: float
    samples_used: int
    excluded_fraction: float


def wave_covariance_estimate(ensemble, s=2, radius=None):
    """Average N u_s(i) u_s(j) over samples and tree-like centers.

    Every center of every sample contributes to the depth-r class when its
    radius-r ball is a tree (so depth 0 and the fourth moment use all
    centers); the full matrix uses centers with a radius-``radius`` tree
    ball.  Standard errors treat samples (graphs) as the independent units.
    """
    usable = [e for e in ensemble if not e.degenerate and s in e.waves]
    if len(usable) < 2:
        raise DataError("not enough non-degenerate samples")
    d = usable[0].d
    radius = usable[0].radius if radius is None else radius
    if any(e.d != d or e.radius < radius for e in usable):
        raise DataError("samples disagree on degree or radius")
    size = tree_ball_size(d, radius)
    total = sum(e.tree_flags.shape[1] for e in usable)
    kept = sum(int(e.tree_flags[radius].sum()) for e in usable)
    excluded = 1 - kept / total
    if excluded > 0.5:
        raise DataError(f"{excluded:.0%} of centers lack a tree ball")
    tb = regular_tree_ball(d, radius)
    depth = np.array([tb.depth[v] for v in tb.vertices])
    matrices, depths, fourths = [], [], []
    for e in usable:
        W = e.waves[s][:, :size]
        flags = e.tree_flags
        if flags[radius].any():
            Wt = W[flags[radius]]
            matrices.append(Wt.T @ Wt / len(Wt))
        prod = W[:, :1] * W
        depths.append([prod[flags[r]][:, depth == r].mean() if flags[r].any() else np.nan for r in range(radius + 1)])
        fourths.append(np.mean(W[:, 0] ** 4))
    pdp = np.array(depths)
    pf = np.array(fourths)
    m = len(pf)
    ref = wave_covariance(d, 2 * math.sqrt(d - 1), tb).matrix
    emp = np.mean(matrices, axis=0)
    counts = np.sum(~np.isnan(pdp), axis=0)
    return WaveEstimate(
        empirical=emp,
        reference=ref,
        max_abs_deviation=float(np.max(np.abs(emp - ref))),
        depth_means=np.nanmean(pdp, axis=0),
        depth_se=np.nanstd(pdp, axis=0, ddof=1) / np.sqrt(counts),
        depth_reference=np.array([wave_correlation(r, 2 * math.sqrt(d - 1), d) for r in range(radius + 1)]),
        fourth_moment=float(pf.mean()),
        fourth_se=float(pf.std(ddof=1) / math.sqrt(m)),
        samples_used=m,
        excluded_fraction=excluded,
    )


@dataclass(frozen=True)
class IndependenceResult:
    correlation: float
    threshold: float
    samples: int

    @property
    def passed(self):
        return abs(self.correlation) <= self.threshold


def independence_threshold(M):
    return 3 / math.sqrt(M) + 0.05


def independence_from_arrays(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return IndependenceResult(float(np.corrcoef(x, y)[0, 1]), independence_threshold(len(x)), len(x))


def independence_test(ensemble, s=2, center_index=0, min_samples=200):
    """Pearson correlation of (A n)^{2/3}(lambda_s - 2) with N u_s(o)^2 at one fixed center."""
    usable = [e for e in ensemble if not e.degenerate]
    if len(usable) < min_samples:
        raise ParameterError(f"need at least {min_samples} samples")
    x = [e.rescaled[s - 2] for e in usable]
    y = [e.waves[s][center_index, 0] ** 2 for e in usable]
    return independence_from_arrays(x, y)


# --------------------------------------------------------------------------
# exact switching identities


def _edge_increments(sd, g, s, edges=None):
    e = g.directed_edges() if edges is None else edges
    u = sd.vector(s)
    return u[e[:, 1]] - u[e[:, 0]] / math.sqrt(g.d - 1)


def switching_moment_identity(sd, g, s, t, exclude=None):
    """Average of N (u_s(c) - u_s(b)/sqrt(d-1))(u_t(c) - u_t(b)/sqrt(d-1)) over directed edges.

    ``exclude`` (a vertex set) restricts the average to edges avoiding it.
    """
    edges = None if exclude is None else complement_directed_edges(g, exclude)
    xs = _edge_increments(sd, g, s, edges)
    xt = _edge_increments(sd, g, t, edges)
    return float(sd.n * np.mean(xs * xt))


def switching_moment_expected(lam_s, d, same=True):
    return (d * d - 2 * (d - 1) * lam_s) / (d * (d - 1)) if same else 0.0


def switching_mean_identity(sd, g, s, exclude=None):
    edges = None if exclude is None else complement_directed_edges(g, exclude)
    return float(math.sqrt(sd.n) * np.mean(_edge_increments(sd, g, s, edges)))


# --------------------------------------------------------------------------
# rigidity, counting, local law


def rigidity_statistic(eigenvalues, n, d):
    """max over 2 <= i <= n of |lambda_i - gamma_i| n^{2/3} min(i, n-i+1)^{1/3}.

    ``eigenvalues`` is the full descending spectrum including lambda_1.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    gam = classical_locations(n, d)
    i = np.arange(2, n + 1)
    dev = np.abs(lam[1:] - gam) * n ** (2 / 3) * np.minimum(i, n - i + 1) ** (1 / 3)
    return float(dev.max())


def rigidity_report(sd, d=None):
    if not sd.is_full:
        raise ParameterError("rigidity needs the full spectrum")
    return rigidity_statistic(sd.eigenvalues, sd.n, d or sd.d)


def counting_functional_points(x, exponent=2 / 3):
    """sup over t <= 0 of (1+|t|)^{-exponent} #{x_i >= t}, exact over jump points.

    On each interval between jumps the count is constant and the weight
    grows toward 0, so the sup is attained at t = 0 or at some x_i <= 0.
    """
    x = np.sort(np.asarray(x, dtype=float))
    cands = np.concatenate([[0.0], x[x <= 0]])
    counts = len(x) - np.searchsorted(x, cands, side="left")
    return float(np.max((1 + np.abs(cands)) ** (-exponent) * counts))


def counting_functional(sd, d=None, exponent=2 / 3):
    """Y_N for the full spectrum (lambda_1 included)."""
    return counting_functional_points(edge_rescale(sd.eigenvalues, sd.n, d or sd.d), exponent)


def local_law_scan(sd, d=None, kappas=(0.0,), etas=(0.1,)):
    """Table of |m_N(z) - m_d(z)| N eta at z = 2 + kappa + i eta, shape (len(kappas), len(etas))."""
    d = d or sd.d
    out = np.empty((len(kappas), len(etas)))
    for a, k in enumerate(kappas):
        for b, eta in enumerate(etas):
            z = 2 + k + 1j * eta
            out[a, b] = abs(stieltjes(sd, z) - m_d(z, d)) * sd.n * eta
    return out


# --------------------------------------------------------------------------
# smoothing and Helffer-Sjostrand diagnostics


def smooth_bump(left, right):
    """C-infinity bump exp(-1/(1-t^2)) on (left, right), vectorized."""
    mid, half = (left + right) / 2, (right - left) / 2

    def f(x):
        t = (np.asarray(x, dtype=float) - mid) / half
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        out[inside] = np.exp(1 - 1 / (1 - t[inside] ** 2))
        return out

    f.support = (left, right)
    return f


def poisson_smoothing_check(sd, i, j, f, y, points_per_width=12):
    """|int f d(mu_N) - int u_N(x + iy) f(x) dx| for the rescaled spectral measure at (i, j).

    mu_N puts mass N u_s(i) u_s(j) at (A N)^{2/3}(lambda_s - 2); u_N is its
    Poisson integral.  The x-integral uses the trapezoid rule on a grid
    resolving the kernel width ``y`` (f vanishes to all orders at its ends).
    """
    if y <= 0:
        raise ParameterError("smoothing scale must be positive")
    left, right = f.support
    x = edge_rescale(sd.eigenvalues, sd.n, sd.d)
    w = sd.n * sd.eigenvectors[i] * sd.eigenvectors[j]
    h = y / points_per_width
    grid = np.linspace(left, right, int(math.ceil((right - left) / h)) + 1)
    fx = f(grid)
    keep = fx > 0
    grid, fx = grid[keep], fx[keep]
    step = (right - left) / (int(math.ceil((right - left) / h)))
    smoothed = np.zeros_like(grid)
    for lo in range(0, len(x), 256):
        xs, ws = x[lo : lo + 256], w[lo : lo + 256]
        smoothed += (ws[None, :] * y / ((grid[:, None] - xs[None, :]) ** 2 + y * y)).sum(axis=1)
    smoothed /= np.pi
    direct = float(np.sum(w * f(x)))
    return abs(direct - float(np.sum(smoothed * fx) * step))


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def poisson_smoothing_slope(sd, i, j, f, ys=(0.4, 0.2, 0.1, 0.05)):
    disc = np.array([poisson_smoothing_check(sd, i, j, f, y) for y in ys])
    return loglog_slope(ys, disc), disc


def cubic_bump(center, halfwidth):
    """(1 - t^2)^3 on [center - halfwidth, center + halfwidth] with its first two derivatives."""

    def parts(x):
        t = (np.asarray(x, dtype=float) - center) / halfwidth
        inside = np.abs(t) < 1
        u = np.where(inside, 1 - t * t, 0.0)
        f = u**3
        fp = np.where(inside, -6 * t * u**2, 0.0) / halfwidth
        fpp = np.where(inside, -6 * u**2 + 24 * t * t * u, 0.0) / halfwidth**2
        return f, fp, fpp

    return parts


@dataclass(frozen=True)
class HSReport:
    lhs: float
    terms: tuple
    ratio: float


def _cutoff(y, gamma):
    s = np.clip((y - gamma) / gamma, 0, 1)
    chi = 1 - (3 * s * s - 2 * s**3)
    dchi = np.where((y > gamma) & (y < 2 * gamma), -(6 * s - 6 * s * s) / gamma, 0.0)
    return chi, dchi


def _gl_panels(a, b, panels, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _geometric_gl(a, b, panels, order=16):
    """Gauss-Legendre panels with geometric grading toward ``a`` (a > 0)."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.geomspace(a, b, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _hs_terms(lam, n, d, f_parts, eta, gamma, xpanels, ypanels, order=8):
    xs, wx = _gl_panels(2 - gamma, 2 + gamma, xpanels, order)
    f, fp, fpp = f_parts(xs)

    def diff(x, y):
        z = x[:, None] + 1j * y[None, :]
        mN = np.zeros(z.shape, dtype=complex)
        for lo in range(0, len(lam), 512):
            mN += (1.0 / (lam[lo : lo + 512, None, None] - z[None])).sum(axis=0)
        return mN / n - m_d(z, d)

    # I: y in [gamma, 2 gamma] where chi' is supported
    y1, w1 = _gl_panels(gamma, 2 * gamma, ypanels, order)
    _, dchi = _cutoff(y1, gamma)
    D1 = np.abs(diff(xs, y1))
    term1 = n * np.einsum("i,j,ij->", wx, w1, (np.abs(f)[:, None] + y1[None, :] * np.abs(fp)[:, None]) * np.abs(dchi)[None, :] * D1)
    # II: y in (0, eta], graded toward 0
    y2, w2 = _geometric_gl(eta * 1e-6, eta, ypanels, order)
    chi2, _ = _cutoff(y2, gamma)
    D2 = np.abs(diff(xs, y2).imag)
    term2 = n * np.einsum("i,j,ij->", wx, w2, np.abs(fpp)[:, None] * (y2 * chi2)[None, :] * D2)
    # III: y in [eta, 2 gamma]
    y3, w3 = _geometric_gl(eta, 2 * gamma, ypanels, order)
    chi3, dchi3 = _cutoff(y3, gamma)
    D3 = np.abs(diff(xs, y3))
    term3 = n * np.einsum("i,j,ij->", wx, w3, np.abs(fp)[:, None] * np.abs(chi3 + y3 * dchi3)[None, :] * D3)
    # IV: the line y = eta
    D4 = np.abs(diff(xs, np.array([eta])))[:, 0]
    term4 = n * np.sum(wx * eta * np.abs(fp) * D4)
    return np.array([term1, term2, term3, term4])


def hs_decomposition_check(sd, d, f_parts, eta, gamma, rtol=0.05):
    """Linear-statistic error at the edge and the four Helffer-Sjostrand bound terms.

    ``f_parts(x)`` returns ``(f, f', f'')`` and must vanish outside
    [2 - gamma, 2 + gamma].  Quadrature runs at two resolutions; a relative
    disagreement above ``rtol`` raises NumericalError.
    """
    if not 0 < eta < gamma:
        raise ParameterError("need 0 < eta < gamma")
    lam = np.asarray(sd.eigenvalues, dtype=float)
    n = sd.n
    lin = float(np.sum(f_parts(lam)[0]))
    xq, wq = _gl_panels(max(2 - gamma, -2), min(2 + gamma, 2), 64)
    lhs = abs(lin - n * float(np.sum(wq * f_parts(xq)[0] * rho_d(xq, d))))
    coarse = _hs_terms(lam, n, d, f_parts, eta, gamma, 20, 10)
    fine = _hs_terms(lam, n, d, f_parts, eta, gamma, 40, 20)
    total = fine.sum()
    if total > 0 and abs(total - coarse.sum()) > rtol * total:
        raise NumericalError(f"quadrature not converged: {coarse.sum():.4g} vs {total:.4g}")
    ratio = lhs / total if total > 0 else (0.0 if lhs == 0 else math.inf)
    return HSReport(lhs=lhs, terms=tuple(float(t) for t in fine), ratio=float(ratio))


# --------------------------------------------------------------------------
# exchangeability at tiny n


@dataclass(frozen=True)
class ChiSquareResult:
    pvalue: float
    statistic: float
    counts: np.ndarray
    expected: np.ndarray
    switched_fraction: float


def exchangeability_chisq(n_small, d, ell, trials, rng, R=0, sampler=None, classes=None):
    """Chi-square of the isomorphism-class law of T_S(G) against the uniform law.

    G comes from ``sampler(rng)`` (default: the exact uniform sampler) and
    S is uniform resampling data around vertex 0.
    """
    if n_small > 10:
        raise ParameterError("exchangeability test is for n <= 10")
    rng = np.random.default_rng(rng)
    classes = classes or IsomorphismClasses(n_small, d)
    sampler = sampler or (lambda r: sample_regular_graph(n_small, d, r))
    counts = np.zeros(len(classes))
    switched = 0
    for _ in range(trials):
        g = sampler(rng)
        g2, data = resample(g, 0, ell, R, rng)
        switched += bool(data.admissible)
        counts[classes.classify(g2)] += 1
    expected = classes.probabilities * trials
    res = stats.chisquare(counts, expected)
    return ChiSquareResult(float(res.pvalue), float(res.statistic), counts, expected, switched / trials)


def triangle_rejecting_sampler(n, d, reject_prob=0.5):
    """Deliberately biased sampler: drops graphs containing a triangle with probability ``reject_prob``."""

    def sampler(rng):
        while True:
            g = sample_regular_graph(n, d, rng)
            A = g.adjacency_matrix()
            has_triangle = np.trace(A @ A @ A) > 0
            if not has_triangle or rng.random() >= reject_prob:
                return g

    return sampler


# --------------------------------------------------------------------------
# Wigner baseline


@dataclass(frozen=True)
class WignerSample:
    rescaled: np.ndarray
    overlaps: np.ndarray  # (k, |S|, |S|) of N u_s(i) u_s(j)


def wigner_reference_mode(n, k, rng, index_set=(0, 1)):
    """Real symmetric Wigner matrix with unit-variance entries, scaled by 1/sqrt(n)."""
    if n > 4096:
        raise ParameterError("n must be <= 4096")
    rng = np.random.default_rng(rng)
    X = rng.standard_normal((n, n))
    W = np.triu(X) + np.triu(X, 1).T
    vals, vecs = sla.eigh(W / math.sqrt(n), subset_by_index=[n - k, n - 1])
    vals, vecs = vals[::-1], vecs[:, ::-1]
    idx = list(index_set)
    U = vecs[idx, :]  # (|S|, k)
    overlaps = n * np.einsum("is,js->sij", U, U)
    return WignerSample(rescaled=n ** (2 / 3) * (vals - 2), overlaps=overlaps)


__all__ = [name for name in dir() if not name.startswith("_")]
