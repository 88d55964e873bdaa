"""Green's functions on trees, Kesten-McKay analytics and the Gaussian wave.

Spectral parameters ``z`` are plain Python/numpy complex numbers in the
closed upper half-plane.  Boundary values on the real axis are the limits
from above (``im >= 0`` is accepted everywhere it makes sense).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from regwave.errors import DomainError, NumericalError, ParameterError
from regwave.graphs import TreeBall, cycle_excess

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _upper(z, allow_real=True):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0) or (not allow_real and np.any(z.imag <= 0)):
        raise DomainError("spectral parameter must lie in the upper half-plane")
    # +0j keeps the principal square roots on the upper side of the cut
    return z + 0j


def _sqrt_z2_minus_4(z):
    return np.sqrt(z - 2) * np.sqrt(z + 2)


def _unwrap(z, out):
    return complex(out) if np.ndim(z) == 0 else out


def m_sc(z):
    """Stieltjes transform of the semicircle law, branch with m ~ -1/z at infinity."""
    zz = _upper(z)
    return _unwrap(z, (-zz + _sqrt_z2_minus_4(zz)) / 2)


def m_d(z, d):
    """Stieltjes transform of the Kesten-McKay law."""
    zz = _upper(z)
    return _unwrap(z, 1.0 / (-zz - d / (d - 1) * m_sc(zz)))


def m_d_closed_form(z, d):
    """Rational-in-sqrt closed form of ``m_d``; singular where d^2 = (d-1) z^2."""
    zz = _upper(z)
    out = (d - 1) * (-(d - 2) * zz + d * _sqrt_z2_minus_4(zz)) / (2 * (d * d - (d - 1) * zz * zz))
    return _unwrap(z, out)


def edge_constant(d):
    """The edge-scaling constant d(d-1)/(d-2)^2."""
    if d <= 2:
        raise DomainError("edge constant needs d >= 3")
    return d * (d - 1) / (d - 2) ** 2


def rho_d(x, d):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 2
    xs = np.where(inside, x, 0.0)
    val = np.sqrt(4 - xs * xs) / (2 * np.pi) / (1 + 1 / (d - 1) - xs * xs / d)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _upper_mass_angle(theta, d):
    """Mass of rho_d on [2 cos(theta), 2] via Gauss-Legendre in the angle variable.

    With x = 2 cos(t) the integrand is analytic on [0, pi], so a fixed
    64-point rule is accurate to machine precision.
    """
    theta = np.asarray(theta, dtype=float)
    half = theta[..., None] / 2
    t = half * (_GL_NODES + 1)
    c = np.cos(t)
    g = (2 / np.pi) * np.sin(t) ** 2 / (d / (d - 1) - 4 * c * c / d)
    return (half[..., 0]) * (g @ _GL_WEIGHTS)


def kesten_mckay_upper_mass(x, d):
    """Integral of rho_d over [x, 2]."""
    x = np.clip(np.asarray(x, dtype=float), -2, 2)
    return _upper_mass_angle(np.arccos(x / 2), d)


def classical_locations(n, d, tol=1e-12):
    """Quantiles gamma_2 > ... > gamma_n with upper mass (i - 1/2)/(n - 1).

    Returned array is indexed so that ``out[k]`` is gamma_{k+2}.
    """
    if n < 3:
        raise ParameterError("need n >= 3")
    target = (np.arange(2, n + 1) - 0.5) / (n - 1)
    lo = np.zeros_like(target)
    hi = np.full_like(target, np.pi)
    # bisection on the angle; mass is increasing in theta
    while np.max(hi - lo) > tol:
        mid = (lo + hi) / 2
        below = _upper_mass_angle(mid, d) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 2 * np.cos((lo + hi) / 2)


# --------------------------------------------------------------------------
# tree Green's functions


def tree_green_regular(r, z, d):
    """Green's function of the infinite d-regular tree at graph distance ``r``."""
    if r < 0:
        raise ParameterError("distance must be nonnegative")
    ms = m_sc(z)
    return m_d(z, d) * (-ms / math.sqrt(d - 1)) ** r


def tree_green_ary(dist, anc, z, d):
    """Green's function of the rooted (d-1)-ary tree.

    ``anc`` is the depth of the common ancestor of the two vertices.
    """
    if dist < 0 or anc < 0:
        raise ParameterError("dist and anc must be nonnegative")
    q = -m_sc(z) / math.sqrt(d - 1)
    return m_d(z, d) * (1 - q ** (2 * anc + 2)) * q**dist


def regular_tree_ball(d, radius):
    """Radius-``radius`` ball of the infinite d-regular tree, root 0, BFS labels."""
    return _abstract_tree(d, radius, root_children=d)


def ary_tree_ball(d, radius):
    """Radius-``radius`` ball of the rooted (d-1)-ary tree.

    The root's target degree is d - 1, recorded in ``target_degree``.
    """
    b = _abstract_tree(d, radius, root_children=d - 1)
    return TreeBall(
        center=b.center,
        radius=b.radius,
        vertices=b.vertices,
        local_edges=b.local_edges,
        depth=b.depth,
        is_tree=True,
        excess=0,
        d=d,
        target_degree={0: d - 1},
    )


def _abstract_tree(d, radius, root_children):
    edges = []
    depth = {0: 0}
    frontier = [0]
    nxt = 1
    for k in range(radius):
        new = []
        for v in frontier:
            for _ in range(root_children if v == 0 else d - 1):
                edges.append((v, nxt))
                depth[nxt] = k + 1
                new.append(nxt)
                nxt += 1
        frontier = new
    return TreeBall(
        center=0,
        radius=radius,
        vertices=tuple(range(nxt)),
        local_edges=tuple(edges),
        depth=depth,
        is_tree=True,
        excess=0,
        d=d,
    )


def tree_parents(ball):
    """Parent map of a tree ball rooted at its center (root maps to None)."""
    adj = {v: [] for v in ball.vertices}
    for u, v in ball.local_edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = {ball.center: None}
    stack = [ball.center]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                stack.append(y)
    return parent


def common_ancestor_depth(parent, depth, i, j):
    while depth[i] > depth[j]:
        i = parent[i]
    while depth[j] > depth[i]:
        j = parent[j]
    while i != j:
        i, j = parent[i], parent[j]
    return depth[i]


def p_weighted(local, z, delta, d, removed=(), target_degree=None):
    """Green's function of a finite local graph with boundary weight ``delta``.

    Solves ``(-z + A/sqrt(d-1) - (t - D) delta/(d-1))^{-1}`` where ``D`` is the
    local degree and ``t`` the target degree (``d`` unless overridden per
    vertex by ``target_degree`` or ``local.target_degree``).  ``local`` is a
    :class:`TreeBall` or a square adjacency matrix.  Rows of ``removed``
    vertices are deleted before inverting.  Returns ``(matrix, vertices)``.
    """
    if isinstance(local, TreeBall):
        A = local.local_adjacency()
        verts = list(local.vertices)
        targets = dict(local.target_degree)
    else:
        A = np.asarray(local, dtype=float)
        verts = list(range(A.shape[0]))
        targets = {}
    if target_degree:
        targets.update(target_degree)
    deg = A.sum(axis=1)
    t = np.array([targets.get(v, d) for v in verts], dtype=float)
    removed = set(removed)
    keep = [k for k, v in enumerate(verts) if v not in removed]
    A = A[np.ix_(keep, keep)]
    deg = deg[keep]
    t = t[keep]
    if np.any(deg > t):
        raise DomainError("local degree exceeds target degree")
    M = -z * np.eye(len(keep)) + A / math.sqrt(d - 1) - np.diag((t - deg) * delta / (d - 1))
    try:
        P = np.linalg.solve(M, np.eye(len(keep), dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular tree-extension system") from exc
    if not np.all(np.isfinite(P)):
        raise NumericalError("singular tree-extension system")
    return P, [verts[k] for k in keep]


def _fold(delta, z, times):
    g = delta
    for _ in range(times):
        g = 1.0 / (-z - g)
    return g


def y_ell(delta, z, ell):
    """Root value of the depth-``ell`` (d-1)-ary tree ball with boundary weight ``delta``.

    Independent of d: ``ell + 1`` applications of ``g -> 1/(-z - g)`` starting at ``delta``.
    """
    if ell < 0:
        raise ParameterError("ell must be nonnegative")
    return _fold(delta, z, ell + 1)


def x_ell(delta, z, ell, d):
    """Root value of the depth-``ell`` d-regular tree ball with boundary weight ``delta``."""
    if ell < 0:
        raise ParameterError("ell must be nonnegative")
    return 1.0 / (-z - d / (d - 1) * _fold(delta, z, ell))


def y_ell_expansion(delta, z, ell, d):
    """Second-order expansion of ``y_ell`` around the semicircle fixed point."""
    ms = m_sc(z)
    md = m_d(z, d)
    q = ms ** (2 * ell + 2)
    e = delta - ms
    quad = q * md * ((1 - q) / (d - 1) + (d - 2) / (d - 1) * (1 - q) / (1 - ms * ms))
    return ms + q * e + quad * e * e


# --------------------------------------------------------------------------
# Chebyshev polynomials and the Gaussian wave


def chebyshev_U(r, theta):
    """Chebyshev polynomial of the second kind by three-term recurrence.

    Conventions for negative order: U_{-1} = 0, U_{-2} = -1.
    """
    if r < -2:
        raise ParameterError("order must be >= -2")
    theta = np.asarray(theta, dtype=float)
    if r == -2:
        return -np.ones_like(theta) if theta.ndim else -1.0
    prev, cur = np.zeros_like(theta), np.ones_like(theta)
    if r == -1:
        return prev if theta.ndim else 0.0
    for _ in range(r):
        prev, cur = cur, 2 * theta * cur - prev
    return cur if theta.ndim else float(cur)


def chebyshev_U_trig(r, theta):
    """Trigonometric form sin((r+1) phi)/sin(phi), phi = arccos(theta), |theta| < 1."""
    phi = np.arccos(theta)
    return np.sin((r + 1) * phi) / np.sin(phi)


def wave_correlation(r, lam, d):
    """Covariance of the Gaussian wave at two vertices at distance ``r``."""
    theta = lam / (2 * math.sqrt(d - 1))
    return ((d - 1) / d * chebyshev_U(r, theta) - chebyshev_U(r - 2, theta) / d) / (d - 1) ** (r / 2)


def edge_wave_correlation(r, d):
    """Closed form at the spectral edge lambda = 2 sqrt(d-1)."""
    return (1 + (d - 2) * r / d) / (d - 1) ** (r / 2)


@dataclass(frozen=True)
class WaveCovariance:
    d: int
    lam: float
    ball: TreeBall
    matrix: np.ndarray

    def to_csv(self):
        lines = ["row,col,value"]
        for a, u in enumerate(self.ball.vertices):
            for b, v in enumerate(self.ball.vertices):
                lines.append(f"{u},{v},{self.matrix[a, b]!r}")
        return "\n".join(lines) + "\n"

    def interior(self):
        """Ball indices whose full neighborhood lies inside the ball."""
        return [k for k, v in enumerate(self.ball.vertices) if self.ball.depth[v] < self.ball.radius]


def wave_covariance(d, lam, ball):
    if not ball.is_tree or cycle_excess(len(ball.vertices), list(ball.local_edges)) != 0:
        raise DomainError("wave covariance is defined on tree balls only")
    if abs(lam) > d:
        raise DomainError("lambda must lie in [-d, d]")
    dist = ball.distance_matrix()
    rmax = int(dist.max()) if dist.size else 0
    table = np.array([wave_correlation(r, lam, d) for r in range(rmax + 1)])
    C = table[dist]
    C.setflags(write=False)
    return WaveCovariance(d=d, lam=float(lam), ball=ball, matrix=C)


def wave_factor(cov, tol=1e-10):
    """Symmetric square-root factor F with F F^T = cov.

    The covariance is singular by construction (interior vertices satisfy a
    linear eigen-equation), so an eigen-factor is used instead of Cholesky;
    this keeps sampled waves inside the null-space constraints exactly.
    """
    w, V = np.linalg.eigh(cov.matrix)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w.min() < -tol * scale * len(w):
        raise DomainError(f"covariance is not positive semidefinite (min eigenvalue {w.min():.3e})")
    return V * np.sqrt(np.clip(w, 0, None))


def sample_gaussian_wave(cov, rng, size=None):
    """Zero-mean Gaussian vector(s) over the ball vertices with covariance ``cov``."""
    rng = np.random.default_rng(rng)
    F = wave_factor(cov)
    k = F.shape[0]
    if size is None:
        return F @ rng.standard_normal(k)
    return rng.standard_normal((size, k)) @ F.T
