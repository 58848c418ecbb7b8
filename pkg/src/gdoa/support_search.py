"""Greedy maximization of the support evidence score by single-bit flips.

The score of a binary activation vector s with active set S is

    ln_z(s) = |S| * ln(rho/(1-rho))
              - sum_l [ ln det(A_l) + |S| * ln(tau) - H_{S,l}^H A_l^{-1} H_{S,l} ]

with ``A_l = [J_l]_S + I/tau``.  The greedy search flips one bit at a time,
always the one with the largest score gain, and keeps the per-snapshot
posterior mean/covariance pair consistent with the current support through
bordered-block (activation) and Schur-complement (deactivation) updates, so
no full matrix inversion happens on the hot path.

The workspace stores the covariances for all L snapshots as one stacked
(L, k, k) array; candidate gains for a whole sweep are evaluated in a single
batched pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REFRESH_EVERY = 50  # accepted flips between direct-solve rebuilds
FLIP_BUDGET_FACTOR = 10


class NumericalError(RuntimeError):
    """A quantity that must be positive (Schur complement, variance, det) was not."""


@dataclass(frozen=True)
class SupportState:
    """Binary activation vector and its sorted active index set."""

    s: np.ndarray
    active_set: tuple[int, ...]

    @classmethod
    def from_indices(cls, n: int, indices) -> "SupportState":
        idx = tuple(sorted(int(i) for i in indices))
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate support indices")
        if idx and not (0 <= idx[0] and idx[-1] < n):
            raise ValueError(f"support indices {idx} out of range for n={n}")
        s = np.zeros(n, dtype=bool)
        s[list(idx)] = True
        return cls(s=s, active_set=idx)

    @property
    def size(self) -> int:
        return len(self.active_set)


@dataclass
class SearchWorkspace:
    """Cached quadratic-form data for one greedy search.

    ``order`` lists the active indices in activation order; ``C`` and ``x``
    are indexed accordingly.  Invariants (restored by ``_refresh`` every
    ``REFRESH_EVERY`` flips): C_l = ([J_l]_order + I/tau)^{-1} and
    x[:, l] = C_l @ H[order, l].
    """

    J: np.ndarray            # (L, N, N) Hermitian, diagonal = sum_m 1/nu[m, l]
    H: np.ndarray            # (N, L)
    rho: float
    tau: float
    order: list[int] = field(default_factory=list)
    C: np.ndarray = None     # (L, k, k)
    x: np.ndarray = None     # (k, L)
    ln_z: float = 0.0
    flips: int = 0

    @property
    def L(self) -> int:
        return self.J.shape[0]

    @property
    def N(self) -> int:
        return self.J.shape[1]

    @property
    def tr_inv(self) -> np.ndarray:
        # Diagonal of J_l is constant; any entry carries tr(Sigma_l^{-1}).
        return self.J[:, 0, 0].real

    def log_odds(self) -> float:
        return math.log(self.rho) - math.log1p(-self.rho)


def compute_jh(moments: np.ndarray, variances: np.ndarray, Y: np.ndarray):
    """Quadratic-form matrices J (L, N, N) and linear terms H (N, L).

    ``[J_l]_{ij} = a_i^H Sigma_l^{-1} a_j`` off the diagonal with the diagonal
    pinned to ``tr(Sigma_l^{-1})`` (unit-modulus array elements), and
    ``H[:, l] = A^H Sigma_l^{-1} y_l``.
    """
    A = np.asarray(moments, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    nu = np.asarray(variances, dtype=float)
    if nu.shape != Y.shape or A.shape[0] != Y.shape[0]:
        raise ValueError(f"shape mismatch: moments {A.shape}, variances {nu.shape}, Y {Y.shape}")
    if np.any(nu <= 0):
        raise ValueError("noise variances must be strictly positive")
    W = 1.0 / nu
    Ah = A.conj().T
    J = (Ah[None, :, :] * W.T[:, None, :]) @ A
    tr = W.sum(axis=0)
    L, N = Y.shape[1], A.shape[1]
    idx = np.arange(N)
    J[:, idx, idx] = tr[:, None]
    H = Ah @ (W * Y)
    return J, H


def make_workspace(J: np.ndarray, H: np.ndarray, rho: float, tau: float, support=()) -> SearchWorkspace:
    """Build a workspace warm-started at the given support (direct solves)."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    if not tau > 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    ws = SearchWorkspace(J=np.asarray(J), H=np.asarray(H), rho=float(rho), tau=float(tau),
                         order=[int(i) for i in support])
    _refresh(ws)
    ws.ln_z = _score(ws.J, ws.H, ws.rho, ws.tau, ws.order)
    return ws


def _score(J, H, rho, tau, indices) -> float:
    """Evidence score of an arbitrary support, from scratch."""
    idx = list(indices)
    k = len(idx)
    log_odds = math.log(rho) - math.log1p(-rho)
    if k == 0:
        return 0.0
    A = J[:, idx][:, :, idx] + np.eye(k) / tau
    try:
        chol = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"support system not positive definite: {exc}") from exc
    lndet = 2.0 * np.log(np.einsum("lkk->lk", chol).real).sum()
    Hs = H[idx, :]
    z = np.linalg.solve(chol, Hs.T[:, :, None])[..., 0]  # (L, k)
    quad = float((np.abs(z) ** 2).sum())
    L = J.shape[0]
    return k * log_odds - lndet - L * k * math.log(tau) + quad


def ln_z(s, workspace: SearchWorkspace) -> float:
    """Score of the binary vector ``s`` under the workspace's J, H, rho, tau."""
    s = np.asarray(s, dtype=bool)
    if s.shape != (workspace.N,):
        raise ValueError(f"s must have shape ({workspace.N},), got {s.shape}")
    return _score(workspace.J, workspace.H, workspace.rho, workspace.tau, np.flatnonzero(s))


def delta_activate(k: int, ws: SearchWorkspace):
    """Score gain for activating inactive index k, plus the flip scratch.

    Returns ``(delta, plan)`` where plan holds, per snapshot, the bordered
    corner ``v``, the new weight ``u`` and the cross vector ``t = C_l J_{S,k}``
    consumed by :func:`apply_flip`.
    """
    if k in ws.order:
        raise ValueError(f"index {k} is already active")
    jk = ws.J[:, ws.order, k]                       # (L, s)
    t = (ws.C @ jk[:, :, None])[..., 0]             # (L, s)
    quad = np.einsum("ls,ls->l", np.conj(jk), t).real
    denom = ws.tr_inv + 1.0 / ws.tau - quad
    if np.any(denom <= 0):
        raise NumericalError(f"nonpositive Schur complement while activating {k}")
    v = 1.0 / denom
    cross = np.einsum("ls,sl->l", np.conj(jk), ws.x)
    u = v * (ws.H[k, :] - cross)
    delta = float((np.log(v / ws.tau) + np.abs(u) ** 2 * denom).sum()) + ws.log_odds()
    return delta, {"k": k, "v": v, "u": u, "t": t}


def delta_deactivate(k: int, ws: SearchWorkspace) -> float:
    """Score gain for deactivating active index k (read off cached posteriors)."""
    if k not in ws.order:
        raise ValueError(f"index {k} is not active")
    p = ws.order.index(k)
    cpp = ws.C[:, p, p].real
    if np.any(cpp <= 0):
        raise NumericalError(f"nonpositive posterior variance while deactivating {k}")
    delta = -float((np.log(cpp / ws.tau) + np.abs(ws.x[p, :]) ** 2 / cpp).sum()) - ws.log_odds()
    return delta


def apply_flip(k: int, ws: SearchWorkspace, delta: float, plan=None) -> SearchWorkspace:
    """Flip index k in place, updating posteriors by block formulas.

    Activation needs the ``plan`` returned by :func:`delta_activate`;
    deactivation reads everything from the cache.
    """
    L = ws.L
    if k not in ws.order:
        if plan is None or plan.get("k") != k:
            raise ValueError("activation requires the matching plan from delta_activate")
        v, u, t = plan["v"], plan["u"], plan["t"]
        s = len(ws.order)
        C_new = np.empty((L, s + 1, s + 1), dtype=np.complex128)
        C_new[:, :s, :s] = ws.C + v[:, None, None] * (t[:, :, None] * np.conj(t)[:, None, :])
        C_new[:, :s, s] = -v[:, None] * t
        C_new[:, s, :s] = -v[:, None] * np.conj(t)
        C_new[:, s, s] = v
        ws.C = C_new
        ws.x = np.vstack([ws.x - (t * u[:, None]).T, u[None, :]])
        ws.order.append(k)
    else:
        p = ws.order.index(k)
        cpp = ws.C[:, p, p].real
        if np.any(cpp <= 0):
            raise NumericalError(f"nonpositive posterior variance while deactivating {k}")
        col = np.delete(ws.C[:, :, p], p, axis=1)   # (L, s-1)
        C_red = np.delete(np.delete(ws.C, p, axis=1), p, axis=2)
        ws.C = C_red - (col[:, :, None] * np.conj(col)[:, None, :]) / cpp[:, None, None]
        xp = ws.x[p, :]
        ws.x = np.delete(ws.x, p, axis=0) - (col * (xp / cpp)[:, None]).T
        del ws.order[p]
    ws.ln_z += delta
    ws.flips += 1
    if ws.flips % REFRESH_EVERY == 0:
        _refresh(ws)
    return ws


def _refresh(ws: SearchWorkspace) -> None:
    """Rebuild posteriors by direct solve to stop round-off drift."""
    k = len(ws.order)
    if k == 0:
        ws.C = np.zeros((ws.L, 0, 0), dtype=np.complex128)
        ws.x = np.zeros((0, ws.L), dtype=np.complex128)
        return
    A = ws.J[:, ws.order][:, :, ws.order] + np.eye(k) / ws.tau
    try:
        C = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"posterior system not invertible: {exc}") from exc
    ws.C = 0.5 * (C + np.conj(np.swapaxes(C, 1, 2)))
    ws.x = np.einsum("lij,jl->il", ws.C, ws.H[ws.order, :])


def _sweep_deltas(ws: SearchWorkspace) -> np.ndarray:
    """Score gains of all N single-bit flips against the current support."""
    N = ws.N
    deltas = np.empty(N)
    active = ws.order
    inactive = [i for i in range(N) if i not in active]
    log_odds = ws.log_odds()

    if inactive:
        Jsel = ws.J[:, active][:, :, inactive]                # (L, s, m)
        T = ws.C @ Jsel                                       # (L, s, m)
        quad = np.einsum("lsm,lsm->lm", np.conj(Jsel), T).real
        denom = (ws.tr_inv + 1.0 / ws.tau)[:, None] - quad
        if np.any(denom <= 0):
            raise NumericalError("nonpositive Schur complement in candidate sweep")
        v = 1.0 / denom
        cross = np.einsum("lsm,sl->lm", np.conj(Jsel), ws.x)
        u = v * (ws.H[inactive, :].T - cross)
        deltas[inactive] = (np.log(v / ws.tau) + np.abs(u) ** 2 * denom).sum(axis=0) + log_odds

    if active:
        cpp = np.einsum("lkk->lk", ws.C).real
        if np.any(cpp <= 0):
            raise NumericalError("nonpositive posterior variance in candidate sweep")
        deltas[active] = -(np.log(cpp / ws.tau) + np.abs(ws.x.T) ** 2 / cpp).sum(axis=0) - log_odds

    return deltas


def greedy_search(ws: SearchWorkspace) -> tuple[SupportState, SearchWorkspace]:
    """Ascend ln_z by best single flips until no flip improves it.

    Ties break to the smallest index, so the search is deterministic.
    """
    budget = FLIP_BUDGET_FACTOR * ws.N
    for _ in range(budget):
        deltas = _sweep_deltas(ws)
        k_star = int(np.argmax(deltas))
        if not deltas[k_star] > 0:
            return SupportState.from_indices(ws.N, ws.order), ws
        if k_star in ws.order:
            delta = delta_deactivate(k_star, ws)
            apply_flip(k_star, ws, delta)
        else:
            delta, plan = delta_activate(k_star, ws)
            apply_flip(k_star, ws, delta, plan)
    raise NumericalError(f"support search did not terminate within {budget} flips")


def extract_sorted(ws: SearchWorkspace) -> tuple[tuple[int, ...], np.ndarray, np.ndarray]:
    """Posterior means/covariances reordered to ascending support indices.

    Returns ``(indices, x, C)`` with x of shape (k, L) and C of shape (L, k, k).
    """
    perm = np.argsort(ws.order)
    indices = tuple(ws.order[p] for p in perm)
    x = ws.x[perm, :]
    C = ws.C[:, perm][:, :, perm]
    return indices, x, C
