"""Assembly of the quadratic-form matrices and the SPD solve primitive.

The location block of the smooth reformulation is the quadratic

    x' P x - 2 (W u + c)' x + 2 s_bar' u + const,

where P is the Kronecker lift of the base matrix
``P_tilde = Q'Q + A'A`` (sensor-sensor Laplacian plus anchor degrees), W maps
edge auxiliaries to per-sensor pulls, and c stacks each sensor's summed anchor
neighbor positions.  Everything is stored in base (per-coordinate) form: the
Kronecker structure means a solve with P decomposes into ``dim`` independent
solves with P_tilde, so iterates are kept as (N, dim) arrays throughout.

Sign note: the anchor-force vector is fixed so that the stationarity system
``P x = W u + c`` matches the per-sensor optimality condition exactly; the
quadratic form is validated against the edge-sum objective numerically, and
the constant ``sum of squared anchor positions over E2`` is kept so the two
evaluations agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConnectivityError, FactorizationError
from .network import Network, connected

__all__ = ["ProblemMatrices", "SpdFactor", "build_matrices", "spd_solve"]

# Below this size a dense Cholesky factor is cheaper and doubles as a strict
# positive-definiteness check; above it SuperLU operates in symmetric mode.
_DENSE_CUTOFF = 600


class SpdFactor:
    """Reusable solve handle for a sparse SPD matrix.

    Dense Cholesky below a size cutoff, SuperLU in symmetric mode with
    diagonal pivoting above it.  Construction fails with FactorizationError
    when the matrix is numerically not positive definite.
    """

    def __init__(self, mat: sp.spmatrix, dense_cutoff: int = _DENSE_CUTOFF):
        mat = sp.csc_matrix(mat)
        self.shape = mat.shape
        n = mat.shape[0]
        self.is_dense = n <= dense_cutoff
        if self.is_dense:
            try:
                self._cho = scipy.linalg.cho_factor(mat.toarray())
            except np.linalg.LinAlgError as exc:
                raise FactorizationError(
                    f"dense Cholesky failed: {exc}") from exc
            self._lu = None
        else:
            try:
                self._lu = spla.splu(mat, diag_pivot_thresh=0.0,
                                     permc_spec="MMD_AT_PLUS_A",
                                     options=dict(SymmetricMode=True))
            except RuntimeError as exc:
                raise FactorizationError(f"sparse factorization failed: {exc}") from exc
            diag = self._lu.U.diagonal()
            if not np.all(diag > 0):
                raise FactorizationError(
                    "non-positive pivot: matrix is not positive definite")
            self._cho = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``mat @ z = rhs`` for rhs of shape (N,) or (N, k)."""
        if self.is_dense:
            return scipy.linalg.cho_solve(self._cho, rhs)
        return self._lu.solve(np.asarray(rhs, dtype=np.float64))


@dataclass(frozen=True)
class ProblemMatrices:
    """Assembled matrices of one instance plus a completed SPD factorization.

    Fields are stored in base form; ``kron_system()`` / ``kron_pull()``
    return the Kronecker-lifted sparse operators acting on flat
    (N*dim,)-vectors when the lifted view is needed.
    """

    net: Network
    system_matrix: sp.csr_matrix       # base P (N x N), SPD under Assumption 1
    incidence_t: sp.csr_matrix         # signed node-edge incidence, (N x M)
    dist: np.ndarray                   # (M,) measured distances, edge order
    anchor_force: np.ndarray           # (N, dim), row i = sum of anchor nbr positions
    anchor_pull: np.ndarray            # (M, dim), row l = d_l * a_j on E2 rows, else 0
    anchor_sq: float                   # sum over E2 of ||a_j||^2 (objective constant)
    factor: SpdFactor = field(repr=False)

    @property
    def num_sensors(self) -> int:
        return self.system_matrix.shape[0]

    def pull(self, u: np.ndarray) -> np.ndarray:
        """W u in base form: per-sensor sum of oriented d_ij * u_ij, (N, dim)."""
        return self.incidence_t @ (self.dist[:, None] * u)

    def pull_t(self, x: np.ndarray) -> np.ndarray:
        """W' x in base form: d_l * (x_i - x_j) on E1 rows, d_l * x_i on E2."""
        return self.dist[:, None] * (self.incidence_t.T @ x)

    def kron_system(self) -> sp.csr_matrix:
        """Kronecker lift of the system matrix, (N*dim) x (N*dim)."""
        return sp.kron(self.system_matrix, sp.eye(self.net.dim), format="csr")

    def kron_pull(self) -> sp.csr_matrix:
        """Kronecker lift of W, (N*dim) x (M*dim)."""
        w_base = self.incidence_t @ sp.diags(self.dist)
        return sp.kron(w_base, sp.eye(self.net.dim), format="csr")

    def s_vector(self) -> np.ndarray:
        """The u-linear anchor vector in its incidence-sign form, (M, dim).

        Row l equals ``-d_l * a_j`` on sensor-anchor rows (the anchor side of
        the edge difference carries a minus sign); the quadratic form uses
        its negation ``anchor_pull``.
        """
        return -self.anchor_pull


def build_matrices(net: Network, factor: SpdFactor | None = None) -> ProblemMatrices:
    """Assemble the quadratic-form matrices for a network.

    Parameters
    ----------
    net : Network
        A valid (connected, anchored) instance.
    factor : SpdFactor, optional
        Reuse an existing factorization of the same topology's system matrix;
        the matrix does not depend on the measured distances, so realizations
        sharing a topology share the factor.

    Raises
    ------
    ConnectivityError
        If the union graph is disconnected.
    FactorizationError
        If the system matrix is numerically not positive definite, signalling
        a violated assumption or a degenerate instance.
    """
    if not connected(net):
        raise ConnectivityError("cannot assemble matrices: graph disconnected")

    N = net.num_sensors
    e1, e2 = net.edges_e1, net.edges_e2
    M = net.num_edges

    # Signed incidence: +1 at the first endpoint, -1 at the second (E1 only).
    rows = np.concatenate([e1[:, 0], e1[:, 1], e2[:, 0]])
    cols = np.concatenate([np.arange(len(e1)), np.arange(len(e1)),
                           len(e1) + np.arange(len(e2))])
    vals = np.concatenate([np.ones(len(e1)), -np.ones(len(e1)),
                           np.ones(len(e2))])
    incidence_t = sp.csr_matrix((vals, (rows, cols)), shape=(N, M))

    # Base system matrix: E1 Laplacian plus anchor-degree diagonal.
    deg = np.bincount(np.concatenate([e1.ravel(), e2[:, 0]]), minlength=N)
    prow = np.concatenate([np.arange(N), e1[:, 0], e1[:, 1]])
    pcol = np.concatenate([np.arange(N), e1[:, 1], e1[:, 0]])
    pval = np.concatenate([deg.astype(np.float64),
                           -np.ones(len(e1)), -np.ones(len(e1))])
    system = sp.csr_matrix((pval, (prow, pcol)), shape=(N, N))

    anchor_force = np.zeros((N, net.dim))
    anchor_pull = np.zeros((M, net.dim))
    anchor_sq = 0.0
    if len(e2):
        a_pos = net.anchors[e2[:, 1] - N]
        np.add.at(anchor_force, e2[:, 0], a_pos)
        anchor_pull[len(e1):] = net.dist[len(e1):, None] * a_pos
        anchor_sq = float(np.sum(a_pos ** 2))

    if factor is None:
        factor = SpdFactor(system)
    elif factor.shape != (N, N):
        raise ValueError("reused factor has incompatible shape")

    return ProblemMatrices(net=net, system_matrix=system,
                           incidence_t=incidence_t, dist=net.dist.copy(),
                           anchor_force=anchor_force, anchor_pull=anchor_pull,
                           anchor_sq=anchor_sq, factor=factor)


def spd_solve(mats: ProblemMatrices, rhs: np.ndarray) -> np.ndarray:
    """Solve ``P z = rhs`` with the prebuilt factorization.

    ``rhs`` may be flat of length N*dim (concatenated per-sensor blocks) or
    shaped (N, dim); the result matches the input shape.  One step of
    iterative refinement keeps the residual within 1e-10 * (1 + ||rhs||).
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    flat = rhs.ndim == 1
    n = mats.net.dim
    b = rhs.reshape(-1, n) if flat else rhs
    z = mats.factor.solve(b)
    resid = b - mats.system_matrix @ z
    rnorm = np.linalg.norm(resid)
    if rnorm > 1e-12 * (1.0 + np.linalg.norm(b)):
        z = z + mats.factor.solve(resid)
    return z.reshape(-1) if flat else z
