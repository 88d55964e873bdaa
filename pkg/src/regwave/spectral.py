"""Spectra, Green's functions and exact resolvent identities for H = A / sqrt(d-1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from regwave.errors import DomainError, NumericalError, ParameterError
from regwave.trees import edge_constant

DENSE_CAP = 4096


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of H sorted by decreasing eigenvalue.

    ``ranks`` holds the 1-based positions of the stored pairs in the full
    spectrum; it is ``1..n`` for a full decomposition.
    """

    n: int
    d: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ranks: np.ndarray | None = None

    def __post_init__(self):
        if self.ranks is None:
            object.__setattr__(self, "ranks", np.arange(1, len(self.eigenvalues) + 1))

    @property
    def is_full(self):
        return len(self.eigenvalues) == self.n

    def vector(self, s):
        """Eigenvector u_s for 1-based rank ``s``."""
        (k,) = np.nonzero(self.ranks == s)[0]
        return self.eigenvectors[:, k]

    def value(self, s):
        (k,) = np.nonzero(self.ranks == s)[0]
        return float(self.eigenvalues[k])

    def spectrum_csv(self):
        rows = ["index,eigenvalue"] + [f"{r},{v!r}" for r, v in zip(self.ranks, self.eigenvalues)]
        return "\n".join(rows) + "\n"

    def ball_restriction_csv(self, s, ball):
        u = self.vector(s)
        rows = ["vertex,depth,value"]
        for v in ball.vertices:
            rows.append(f"{v},{ball.depth[v]},{math.sqrt(self.n) * u[v]!r}")
        return "\n".join(rows) + "\n"


def normalized_adjacency(g, sparse=False):
    return g.adjacency_matrix(sparse=sparse) / math.sqrt(g.d - 1)


def _fix_perron(vals, vecs, n):
    # orient the Perron vector along +1; other signs are arbitrary
    k = int(np.argmax(vals))
    if vecs[:, k].sum() < 0:
        vecs[:, k] *= -1
    return vals, vecs


def eigendecompose(g, cap=DENSE_CAP):
    """Full dense eigendecomposition of H."""
    if g.n > cap:
        raise ParameterError(f"n={g.n} exceeds dense cap {cap}; use extreme_eigenpairs")
    vals, vecs = sla.eigh(normalized_adjacency(g))
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1].copy()
    vals, vecs = _fix_perron(vals, vecs, g.n)
    return SpectralDecomposition(g.n, g.d, vals, vecs)


def top_eigenpairs(g, k, cap=DENSE_CAP):
    """Dense solver restricted to the top ``k + 1`` pairs (Perron included)."""
    if g.n > cap:
        raise ParameterError(f"n={g.n} exceeds dense cap {cap}")
    vals, vecs = sla.eigh(normalized_adjacency(g), subset_by_index=[g.n - k - 1, g.n - 1])
    vals, vecs = vals[::-1].copy(), vecs[:, ::-1].copy()
    vals, vecs = _fix_perron(vals, vecs, g.n)
    return SpectralDecomposition(g.n, g.d, vals, vecs, ranks=np.arange(1, k + 2))


def lanczos_extreme(matvec, n, k, deflate, rng, max_dim=None, tol=1e-8):
    """Largest ``k`` eigenpairs of a symmetric operator on the complement of ``deflate``.

    Plain Lanczos with full reorthogonalization (twice, classical
    Gram-Schmidt) against the basis and the deflated directions.  The Krylov
    dimension grows until every wanted Ritz pair has residual below ``tol``.
    Returns ``(values, vectors, residuals)``.
    """
    D = np.asarray(deflate, dtype=float).reshape(n, -1)
    avail = n - D.shape[1]
    max_dim = min(avail, max_dim or max(20 * k, 1000))
    dim = min(avail, max(4 * k, 40))
    rng = np.random.default_rng(rng)
    q = rng.standard_normal(n)
    while True:
        Q = np.zeros((n, dim + 1))
        alpha = np.zeros(dim)
        beta = np.zeros(dim)
        v = q - D @ (D.T @ q)
        Q[:, 0] = v / np.linalg.norm(v)
        m = dim
        for j in range(dim):
            w = matvec(Q[:, j])
            alpha[j] = Q[:, j] @ w
            for _ in range(2):
                w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
                w -= D @ (D.T @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-12:
                m = j + 1
                break
            Q[:, j + 1] = w / beta[j]
        theta, S = sla.eigh_tridiagonal(alpha[:m], beta[: m - 1])
        order = np.argsort(theta)[::-1][:k]
        theta, S = theta[order], S[:, order]
        X = Q[:, :m] @ S
        res = np.array([np.linalg.norm(matvec(X[:, i]) - theta[i] * X[:, i]) for i in range(len(theta))])
        if len(theta) == k and np.all(res < tol):
            return theta, X, res
        if dim >= max_dim or m < dim:
            if len(theta) == k and m < dim and np.all(res < 1e3 * tol):
                return theta, X, res
            raise NumericalError(
                f"Lanczos did not converge: dim={dim}, max residual {res.max() if len(res) else np.inf:.2e}"
            )
        dim = min(max_dim, 2 * dim)


def extreme_eigenpairs(g, k, side="top", rng=0, tol=1e-8):
    """Top (or bottom) ``k`` nontrivial eigenpairs via Lanczos.

    The Perron pair (d/sqrt(d-1), 1/sqrt(n)) is deflated analytically and,
    for ``side="top"``, prepended to the result.
    """
    if k < 1 or k >= g.n - 1:
        raise ParameterError("need 1 <= k < n - 1")
    H = normalized_adjacency(g, sparse=True)
    one = np.full(g.n, 1 / math.sqrt(g.n))
    sign = 1.0 if side == "top" else -1.0
    if side not in ("top", "bottom"):
        raise ParameterError("side must be 'top' or 'bottom'")
    vals, vecs, _ = lanczos_extreme(lambda x: sign * (H @ x), g.n, k, one, rng, tol=tol)
    vals = sign * vals
    if side == "top":
        vals = np.concatenate([[g.d / math.sqrt(g.d - 1)], vals])
        vecs = np.column_stack([one, vecs])
        ranks = np.arange(1, k + 2)
    else:
        ranks = np.arange(g.n, g.n - k, -1)
    return SpectralDecomposition(g.n, g.d, vals, vecs, ranks=ranks)


# --------------------------------------------------------------------------
# Green's functions


def _check_z(z):
    if complex(z).imag <= 0:
        raise DomainError("need Im z > 0")


def green_matrix(sd, z):
    _check_z(z)
    U = sd.eigenvectors
    return (U / (sd.eigenvalues - z)) @ U.T


def stieltjes(sd, z):
    _check_z(z)
    if not sd.is_full:
        raise ParameterError("m_N needs the full spectrum")
    return complex(np.mean(1.0 / (sd.eigenvalues - z)))


def removed_diagonal(G, g, min_abs=1e-12):
    """G^{(j)}_{ii} for every directed edge (i, j), via the rank-one Schur reduction."""
    e = g.directed_edges()
    i, j = e[:, 0], e[:, 1]
    Gjj = G[j, j]
    if np.min(np.abs(Gjj)) < min_abs:
        raise NumericalError("diagonal Green's entry too small for Schur reduction")
    return G[i, i] - G[i, j] * G[j, i] / Gjj


def stieltjes_and_Q(sd, g, z):
    """Return ``(m_N(z), Q(z))``."""
    G = green_matrix(sd, z)
    m = complex(np.trace(G) / sd.n)
    Q = complex(np.mean(removed_diagonal(G, g)))
    return m, Q


def ward_identity_check(sd, z):
    G = green_matrix(sd, z)
    lhs = np.sum(np.abs(G) ** 2, axis=1)
    rhs = G.diagonal().imag / complex(z).imag
    return float(np.max(np.abs(lhs - rhs)))


def schur_identity_check(H, T, z):
    """Largest residual over the three block Schur identities and the one-vertex formula.

    ``H`` is the dense normalized adjacency (or a SpectralDecomposition, from
    which H is rebuilt).  Every quantity is recomputed by direct inversion.
    """
    _check_z(z)
    if isinstance(H, SpectralDecomposition):
        H = (H.eigenvectors * H.eigenvalues) @ H.eigenvectors.T
    n = H.shape[0]
    T = sorted(set(int(t) for t in T))
    Tc = [x for x in range(n) if x not in set(T)]
    I = np.eye(n)
    G = np.linalg.inv(H - z * I)
    res = []
    if T:
        A = H[np.ix_(T, T)] - z * np.eye(len(T))
        B = H[np.ix_(Tc, T)]
        GT = np.linalg.inv(H[np.ix_(Tc, Tc)] - z * np.eye(len(Tc)))
        G_TT = G[np.ix_(T, T)]
        G_TTc = G[np.ix_(T, Tc)]
        G_TcT = G[np.ix_(Tc, T)]
        res.append(np.max(np.abs(G_TT - np.linalg.inv(A - B.T @ GT @ B))))
        res.append(np.max(np.abs(G_TTc - (-G_TT @ B.T @ GT))))
        third_a = GT + G_TcT @ np.linalg.inv(G_TT) @ G_TTc
        third_b = GT - GT @ B @ G_TTc
        G_TcTc = G[np.ix_(Tc, Tc)]
        res.append(np.max(np.abs(G_TcTc - third_a)))
        res.append(np.max(np.abs(G_TcTc - third_b)))
    else:
        res.append(np.max(np.abs(G - np.linalg.inv(H - z * I))))
    # one removed vertex, both forms
    k = T[0] if T else 0
    rest = [x for x in range(n) if x != k]
    Gk = np.linalg.inv(H[np.ix_(rest, rest)] - z * np.eye(n - 1))
    Gr = G[np.ix_(rest, rest)]
    form1 = Gr - np.outer(G[rest, k], G[k, rest]) / G[k, k]
    form2 = Gr + np.outer(Gk @ H[rest, k], G[k, rest])
    res.append(np.max(np.abs(Gk - form1)))
    res.append(np.max(np.abs(Gk - form2)))
    return float(max(res))


def im_inverse_identity_check(M):
    """Entrywise residual of Im[M^-1] = -M^-1 Im[M] conj(M^-1)."""
    M = np.asarray(M, dtype=complex)
    try:
        Mi = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular matrix") from exc
    if not np.all(np.isfinite(Mi)) or np.linalg.cond(M) > 1e14:
        raise NumericalError("singular matrix")
    rhs = -Mi @ M.imag @ Mi.conj()
    return float(np.max(np.abs(Mi.imag - rhs)))


# --------------------------------------------------------------------------
# edge scaling


def edge_scale(n, d):
    return (edge_constant(d) * n) ** (2 / 3)


def edge_rescale(lam, n, d):
    """(A n)^{2/3} (lambda - 2)."""
    return edge_scale(n, d) * (np.asarray(lam) - 2)


def edge_point(w, n, d):
    """Spectral parameter 2 + w / (A n)^{2/3} for edge-window coordinate ``w``."""
    return 2 + complex(w) / edge_scale(n, d)


def rescaled_im_green(sd, i, j, w):
    """Poisson-kernel sum for n^{1/3} A^{-2/3} Im G_ij(2 + w/(A n)^{2/3})."""
    w = complex(w)
    if w.imag <= 0:
        raise DomainError("need Im w > 0")
    x = edge_rescale(sd.eigenvalues, sd.n, sd.d)
    weights = sd.n * sd.eigenvectors[i] * sd.eigenvectors[j]
    return float(np.sum(weights * w.imag / ((x - w.real) ** 2 + w.imag**2)))


def rescaled_im_green_direct(g, i, j, w):
    """Same quantity by a sparse shifted solve of (H - z) x = e_j."""
    w = complex(w)
    if w.imag <= 0:
        raise DomainError("need Im w > 0")
    z = edge_point(w, g.n, g.d)
    H = normalized_adjacency(g, sparse=True).astype(complex)
    e = np.zeros(g.n, dtype=complex)
    e[j] = 1
    col = spla.spsolve((H - z * sp.identity(g.n, format="csr")).tocsc(), e)
    return float(g.n ** (1 / 3) / edge_constant(g.d) ** (2 / 3) * col[i].imag)


def green_column(g, j, z):
    """Column G(z) e_j by sparse direct factorization."""
    _check_z(z)
    H = normalized_adjacency(g, sparse=True).astype(complex)
    e = np.zeros(g.n, dtype=complex)
    e[j] = 1
    return spla.spsolve((H - z * sp.identity(g.n, format="csr")).tocsc(), e)
