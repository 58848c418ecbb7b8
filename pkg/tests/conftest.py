"""Shared builders for randomized estimator-state instances."""

import numpy as np
import pytest

from gdoa.circular import VonMises, moment_vector
from gdoa.model import steering_matrix
from gdoa.support_search import compute_jh, make_workspace


def random_variances(rng, M, L, spread_db=12.0):
    """Positive per-cell variance grid with a few-dB spread."""
    db = rng.uniform(0.0, spread_db, size=(M, L))
    return 10.0 ** (db / 10.0) * 0.5


def random_moments(rng, M, N, kappa_range=(5.0, 5e3)):
    """Expected steering vectors of N components with random beliefs."""
    mus = rng.uniform(-np.pi, np.pi, size=N)
    kappas = 10.0 ** rng.uniform(np.log10(kappa_range[0]), np.log10(kappa_range[1]), size=N)
    return np.column_stack([moment_vector(VonMises(mu, k), M) for mu, k in zip(mus, kappas)])


def random_instance(rng, M=8, N=8, L=3, k_true=2, snr_db=10.0, rho=0.2, tau=None):
    """Snapshot data with planted components plus a matching (J, H) pair."""
    omegas = rng.uniform(-np.pi, np.pi, size=k_true)
    X = (rng.normal(1.0, 0.2, size=(k_true, L)) * np.exp(1j * rng.uniform(-np.pi, np.pi, size=(k_true, L))))
    Z = steering_matrix(omegas, M) @ X if k_true else np.zeros((M, L), dtype=complex)
    signal_power = np.sum(np.abs(Z) ** 2) / (M * L) if k_true else 1.0
    nu = random_variances(rng, M, L) * signal_power * 10.0 ** (-snr_db / 10.0)
    noise = np.sqrt(nu / 2.0) * (rng.standard_normal((M, L)) + 1j * rng.standard_normal((M, L)))
    Y = Z + noise
    moments = random_moments(rng, M, N)
    if k_true:
        moments[:, :k_true] = np.column_stack(
            [moment_vector(VonMises(w, 10.0 ** rng.uniform(3, 5)), M) for w in omegas]
        )
    J, H = compute_jh(moments, nu, Y)
    tau = float(np.mean(np.abs(X) ** 2)) if (tau is None and k_true) else (tau or 1.0)
    return {"Y": Y, "nu": nu, "moments": moments, "J": J, "H": H, "rho": rho, "tau": tau}


def workspace_of(inst, support=()):
    return make_workspace(inst["J"], inst["H"], inst["rho"], inst["tau"], support=support)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
