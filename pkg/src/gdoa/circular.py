"""Circular statistics: Bessel ratios, von Mises moments, posterior fitting.

The frequency belief for one component is a von Mises density on the circle.
Its trigonometric moments ``E[exp(1j*m*omega)] = exp(1j*m*mu) * I_m(kappa)/I_0(kappa)``
give the expected steering vector used everywhere downstream.

``approximate_posterior`` fits a von Mises to the unnormalized log-density

    f(omega) = Re{ eta^H a(omega) } + prior term,

a cosine series with complex coefficients ``eta`` (one per antenna).  The mode
is located by an FFT grid scan followed by Newton refinement, and the
concentration is the negative curvature at the mode (Laplace matching).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ive

GRID_OVERSAMPLE = 16
NEWTON_STEPS = 10
GRAD_TOL = 1e-10


def wrap_angle(x):
    """Wrap to [-pi, pi)."""
    return (x + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class VonMises:
    """Mean direction mu in [-pi, pi) and concentration kappa >= 0.

    ``kappa == 0`` is the uniform circular distribution and doubles as the
    degenerate "no evidence" marker.
    """

    mu: float
    kappa: float

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        object.__setattr__(self, "mu", float(wrap_angle(self.mu)))
        object.__setattr__(self, "kappa", float(self.kappa))


ASYMPTOTIC_KAPPA = 1e7


def _bessel_ratio_asymptotic(order: np.ndarray, kappa: float) -> np.ndarray:
    # Ratio of the large-argument expansions of I_m and I_0 (three terms each);
    # relative error O((m^2/kappa)^4), < 1e-12 for m <= 64 at the switch point.
    mu = 4.0 * order.astype(float) ** 2
    z8 = 8.0 * kappa
    num = (1.0
           - (mu - 1.0) / z8
           + (mu - 1.0) * (mu - 9.0) / (2.0 * z8**2)
           - (mu - 1.0) * (mu - 9.0) * (mu - 25.0) / (6.0 * z8**3))
    den = 1.0 + 1.0 / z8 + 9.0 / (2.0 * z8**2) + 225.0 / (6.0 * z8**3)
    return np.clip(num / den, 0.0, 1.0)


def bessel_ratio(kappa: float, m) -> float | np.ndarray:
    """Ratio I_m(kappa) / I_0(kappa) of modified Bessel functions of the first kind.

    Exponentially scaled Bessel functions cover concentrations up to 1e7;
    beyond that (where scipy's scaled evaluation eventually returns NaN) the
    ratio of large-argument asymptotic expansions takes over, so the result
    stays accurate for arbitrarily large (even infinite) concentrations.
    """
    if not kappa >= 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    order = np.asarray(m)
    if np.any(order < 0):
        raise ValueError("harmonic order must be >= 0")
    if kappa > ASYMPTOTIC_KAPPA:
        out = _bessel_ratio_asymptotic(np.atleast_1d(order), kappa)
        out = out[0] if np.ndim(m) == 0 else out.reshape(order.shape)
    else:
        out = ive(order, kappa) / ive(0, kappa)
    return float(out) if np.isscalar(m) else out


def moment_vector(vm: VonMises, M: int) -> np.ndarray:
    """Expected steering vector under a von Mises belief: length-M complex vector.

    Entry m is ``exp(1j*m*mu) * I_m(kappa)/I_0(kappa)``; entry 0 is exactly 1.
    """
    if M < 1:
        raise ValueError(f"length must be >= 1, got {M}")
    orders = np.arange(M)
    return np.exp(1j * vm.mu * orders) * bessel_ratio(vm.kappa, orders)


def _next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


_GRID_CACHE: dict[int, np.ndarray] = {}


def _grid_angles(G: int) -> np.ndarray:
    angles = _GRID_CACHE.get(G)
    if angles is None:
        angles = 2.0 * np.pi * np.arange(G) / G
        _GRID_CACHE[G] = angles
    return angles


def _series_eval(eta_conj: np.ndarray, orders: np.ndarray, omega: float, prior: VonMises | None):
    """Value, first and second derivative of the cosine-series log-density at omega."""
    t = eta_conj * np.exp(1j * orders * omega)
    f = t.real.sum()
    fp = -(orders * t.imag).sum()
    fpp = -(orders * orders * t.real).sum()
    if prior is not None:
        d = omega - prior.mu
        f += prior.kappa * np.cos(d)
        fp += -prior.kappa * np.sin(d)
        fpp += -prior.kappa * np.cos(d)
    return f, fp, fpp


def log_density(eta: np.ndarray, omega, prior: VonMises | None = None):
    """Unnormalized log-density Re{eta^H a(omega)} (+ von Mises prior term)."""
    eta = np.asarray(eta, dtype=np.complex128)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    orders = np.arange(len(eta))
    vals = (np.conj(eta)[None, :] * np.exp(1j * np.outer(w, orders))).real.sum(axis=1)
    if prior is not None:
        vals = vals + prior.kappa * np.cos(w - prior.mu)
    return float(vals[0]) if np.isscalar(omega) or np.ndim(omega) == 0 else vals


def approximate_posterior(eta: np.ndarray, prior: VonMises | None = None) -> VonMises:
    """Fit a von Mises to ``q(omega) ∝ p(omega) * exp(Re{eta^H a(omega)})``.

    The mode is found by scanning a zero-padded FFT grid of size
    ``next_pow2(16*M)`` and polishing with Newton steps on the analytic
    derivatives; the concentration is ``max(0, -f''(mu))``.  With no harmonic
    content and a uniform prior the result is the degenerate ``VonMises(0, 0)``.
    """
    eta = np.asarray(eta, dtype=np.complex128).ravel()
    M = len(eta)
    if M < 2:
        raise ValueError(f"eta must have length >= 2, got {M}")
    if not np.all(np.isfinite(eta)):
        raise ValueError("eta contains non-finite entries")

    orders = np.arange(M)
    eta_conj = np.conj(eta)
    scale = float((orders * np.abs(eta)).sum())
    if prior is not None:
        scale += prior.kappa
    if scale == 0.0:
        return VonMises(0.0, 0.0)

    G = _next_pow2(GRID_OVERSAMPLE * M)
    grid = (np.fft.ifft(eta_conj, n=G) * G).real
    omegas = _grid_angles(G)
    if prior is not None:
        grid = grid + prior.kappa * np.cos(omegas - prior.mu)
    omega = omegas[int(np.argmax(grid))]

    max_step = 2.0 * np.pi / G
    tol = GRAD_TOL * max(1.0, scale)
    f, fp, fpp = _series_eval(eta_conj, orders, omega, prior)
    for _ in range(NEWTON_STEPS):
        if abs(fp) <= tol or fpp >= 0.0:
            break
        step = fp / fpp
        step = np.clip(step, -max_step, max_step)
        candidate = omega - step
        fc, fpc, fppc = _series_eval(eta_conj, orders, candidate, prior)
        halvings = 0
        while fc < f and halvings < 5:  # keep ascent if Newton overshoots
            step *= 0.5
            candidate = omega - step
            fc, fpc, fppc = _series_eval(eta_conj, orders, candidate, prior)
            halvings += 1
        if fc < f:
            break
        omega, f, fp, fpp = candidate, fc, fpc, fppc

    kappa = max(0.0, -fpp)
    return VonMises(wrap_angle(omega), kappa)
