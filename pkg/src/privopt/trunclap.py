"""Truncated Laplace noise.

The distribution has density proportional to ``exp(-|eta| / scale)`` on
``[-half_width, half_width]`` and zero elsewhere. With ``scale = Delta / eps``
and ``half_width`` given by :func:`shift_width`, adding it to a shifted
constraint vector is (eps, delta)-differentially private while never pushing a
constraint above its true value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon}")
        if not (0 < self.delta <= 1):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")


def shift_width(delta_sens: float, privacy: PrivacyParams, m: int) -> float:
    """Half-width ``s = (Delta/eps) * ln(m (e^eps - 1) / delta + 1)``.

    Evaluated with ``expm1``/``log1p`` so that small ``eps`` keeps full
    relative accuracy; large ``eps`` is handled in log form.
    """
    if not delta_sens > 0:
        raise ValueError(f"sensitivity must be positive, got {delta_sens}")
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    return delta_sens / privacy.epsilon * log_growth(privacy.epsilon, m / privacy.delta)


def log_growth(eps: float, k: float) -> float:
    """``ln(k (e^eps - 1) + 1)`` without overflow."""
    if eps < 30.0:
        return math.log1p(k * math.expm1(eps))
    # ln(e^eps (k (1 - e^-eps) + e^-eps))
    return eps + math.log(k * -math.expm1(-eps) + math.exp(-eps))


@dataclass(frozen=True)
class TruncLaplace:
    """Laplace(0, scale) conditioned on ``[-half_width, half_width]``."""

    scale: float
    half_width: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @classmethod
    def for_mechanism(cls, delta_sens: float, privacy: PrivacyParams, m: int) -> "TruncLaplace":
        return cls(delta_sens / privacy.epsilon, shift_width(delta_sens, privacy, m))

    @property
    def _mass(self) -> float:
        # 1 - exp(-s/scale), the untruncated Laplace mass of one half of the support
        # times two, i.e. Z / (2 * scale).
        return -math.expm1(-self.half_width / self.scale)

    @property
    def normalizer(self) -> float:
        return 2.0 * self.scale * self._mass

    def pdf(self, eta):
        eta = np.asarray(eta, dtype=float)
        inside = np.abs(eta) <= self.half_width
        out = np.where(inside, np.exp(-np.abs(eta) / self.scale) / self.normalizer, 0.0)
        return out if out.ndim else float(out)

    def logpdf(self, eta):
        eta = np.asarray(eta, dtype=float)
        inside = np.abs(eta) <= self.half_width
        with np.errstate(divide="ignore"):
            out = np.where(inside, -np.abs(eta) / self.scale - math.log(self.normalizer), -np.inf)
        return out if out.ndim else float(out)

    def cdf(self, eta):
        eta = np.asarray(eta, dtype=float)
        s, lam, q = self.half_width, self.scale, self._mass
        a = np.clip(np.abs(eta), 0.0, s)
        # mass of [-s, -a] for a in [0, s]
        lower_tail = (np.exp(-a / lam) - math.exp(-s / lam)) / (2.0 * q)
        out = np.where(eta <= 0, lower_tail, 1.0 - lower_tail)
        out = np.where(eta <= -s, 0.0, np.where(eta >= s, 1.0, out))
        return out if out.ndim else float(out)

    def ppf(self, u):
        """Inverse CDF on ``[0, 1]``; the result always lies in the support."""
        u = np.asarray(u, dtype=float)
        lam, s, q = self.scale, self.half_width, self._mass
        d = np.abs(2.0 * u - 1.0)
        # |eta| = -lam * log1p(-q * d)
        mag = -lam * np.log1p(-q * d)
        out = np.clip(np.where(u < 0.5, -mag, mag), -s, s)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        return self.ppf(rng.random(size))


def pdf(d: TruncLaplace, eta):
    return d.pdf(eta)


def cdf(d: TruncLaplace, eta):
    return d.cdf(eta)


def inverse_cdf(d: TruncLaplace, u):
    return d.ppf(u)


def sample(d: TruncLaplace, rng: np.random.Generator, size=None):
    return d.sample(rng, size)


def tail_mass_beyond(d: TruncLaplace, delta_sens: float) -> float:
    """Mass of ``{eta < -s + Delta} union {eta > s - Delta}``.

    This is the probability that a release under ``b`` lands outside the
    support of the release under a neighbour at l1-distance ``Delta``.
    """
    s, lam = d.half_width, d.scale
    if delta_sens < 0:
        raise ValueError("sensitivity must be nonnegative")
    if delta_sens > 2 * s:
        raise ValueError(f"sensitivity {delta_sens} exceeds the support width {2 * s}")
    if delta_sens >= s:
        # the two tail events cover the whole support
        return 1.0
    # 2 * (exp((Delta - s)/lam) - exp(-s/lam)) / (2 (1 - exp(-s/lam)))
    return math.exp(-s / lam) * math.expm1(delta_sens / lam) / d._mass
