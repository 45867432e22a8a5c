"""Parametric likelihood heads: Student-t location-scale and Gaussian.

Float-side functions (projections, log-pdfs, sampling) evaluate trained
distributions; the *_nll_graph builders express the same formulas in nncore
tensors so training losses are differentiable end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import nncore as nn

LOG_2PI = math.log(2.0 * math.pi)

# Lanczos approximation, g=7, 9 coefficients; |abs error| < 1e-10 on (0, 1e4].
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class LikelihoodError(ValueError):
    """Invalid distribution parameters or mismatched lengths."""


@dataclass(frozen=True)
class StudentTParams:
    """Location-scale Student-t: location mu, scale sigma > 0, dof nu > 0."""

    mu: float
    sigma: float
    nu: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise LikelihoodError(f"sigma must be > 0, got {self.sigma}")
        if not self.nu > 0.0:
            raise LikelihoodError(f"nu must be > 0, got {self.nu}")


@dataclass(frozen=True)
class GaussianParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise LikelihoodError(f"sigma must be > 0, got {self.sigma}")


def log_gamma(x):
    """Lanczos log-gamma for positive reals (scalar or array), no scipy."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise LikelihoodError("log_gamma requires positive arguments")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x < 0.5
    # Reflection for the (0, 0.5) strip keeps the series well conditioned.
    if np.any(small):
        xs = x[small]
        out[small] = np.log(np.pi / np.sin(np.pi * xs)) - _lanczos(1.0 - xs)
    out[~small] = _lanczos(x[~small])
    return float(out[0]) if scalar else out


def _lanczos(z: np.ndarray) -> np.ndarray:
    t = z + _LANCZOS_G - 0.5
    series = np.full_like(z, _LANCZOS_COEFFS[0])
    for k, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series += c / (z + k - 1.0)
    return 0.5 * LOG_2PI + (z - 0.5) * np.log(t) - t + np.log(series)


def softplus(x):
    return np.logaddexp(0.0, np.asarray(x, dtype=np.float64))


def project_studentt(raw, nu_floor: float = 0.0) -> StudentTParams:
    """Map a raw network triple to valid Student-t parameters.

    mu passes through; sigma and nu go through softplus. Training heads pass
    nu_floor=2.0 so the distribution always has finite variance.
    """
    r0, r1, r2 = (float(v) for v in raw)
    return StudentTParams(mu=r0, sigma=float(softplus(r1)), nu=nu_floor + float(softplus(r2)))


def project_gaussian(raw) -> GaussianParams:
    r0, r1 = (float(v) for v in raw)
    return GaussianParams(mu=r0, sigma=float(softplus(r1)))


def studentt_logpdf(y, p: StudentTParams):
    """Log density of the location-scale Student-t at y (scalar or array)."""
    y = np.asarray(y, dtype=np.float64)
    z2 = ((y - p.mu) / p.sigma) ** 2
    half_nup1 = 0.5 * (p.nu + 1.0)
    out = (
        log_gamma(half_nup1)
        - log_gamma(0.5 * p.nu)
        - math.log(p.sigma)
        - 0.5 * math.log(p.nu * math.pi)
        - half_nup1 * np.log1p(z2 / p.nu)
    )
    return float(out) if out.ndim == 0 else out


def gaussian_logpdf(y, p: GaussianParams):
    y = np.asarray(y, dtype=np.float64)
    out = -0.5 * LOG_2PI - math.log(p.sigma) - (y - p.mu) ** 2 / (2.0 * p.sigma**2)
    return float(out) if out.ndim == 0 else out


def sample(dist, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw n values; deterministic per rng state, location-scale equivariant."""
    if n < 1:
        raise LikelihoodError(f"n must be >= 1, got {n}")
    if isinstance(dist, GaussianParams):
        return dist.mu + dist.sigma * rng.standard_normal(n)
    if isinstance(dist, StudentTParams):
        z = rng.standard_normal(n)
        v = rng.chisquare(dist.nu, n)
        return dist.mu + dist.sigma * (z / np.sqrt(v / dist.nu))
    raise LikelihoodError(f"unsupported distribution {type(dist).__name__}")


def nll_loss(targets, params) -> float:
    """Negative sum of per-timestep log-likelihoods (what training minimizes)."""
    targets = np.asarray(targets, dtype=np.float64)
    if len(targets) != len(params):
        raise LikelihoodError(
            f"{len(targets)} targets vs {len(params)} parameter sets"
        )
    total = 0.0
    for y, p in zip(targets, params):
        if isinstance(p, StudentTParams):
            total += studentt_logpdf(float(y), p)
        elif isinstance(p, GaussianParams):
            total += gaussian_logpdf(float(y), p)
        else:
            raise LikelihoodError(f"unsupported distribution {type(p).__name__}")
    return -total


# ---------------------------------------------------------------------------
# graph-side builders (training losses)
# ---------------------------------------------------------------------------

def log_gamma_graph(z: nn.Tensor) -> nn.Tensor:
    """Lanczos log-gamma as a tensor composite; requires all entries > 0.

    Built from div/log/add/mul primitives so the gradient (digamma) comes
    from the chain rule instead of a hand-written derivative.
    """
    if np.any(z.data <= 0.0):
        raise LikelihoodError("log_gamma_graph requires positive arguments")
    t = nn.add_const(z, _LANCZOS_G - 0.5)
    series = nn.constant(np.full(z.shape, _LANCZOS_COEFFS[0]))
    for k, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series = nn.add(series, nn.div(nn.constant(np.full(z.shape, c)),
                                       nn.add_const(z, float(k - 1))))
    lead = nn.mul(nn.add_const(z, -0.5), nn.log(t))
    return nn.add_const(nn.add(nn.sub(lead, t), nn.log(series)), 0.5 * LOG_2PI)


def studentt_nll_graph(raw_mu: nn.Tensor, raw_sigma: nn.Tensor, raw_nu: nn.Tensor,
                       targets: np.ndarray, nu_floor: float = 2.0) -> nn.Tensor:
    """Differentiable Student-t NLL over one prediction range.

    Inputs are (H, 1) raw head outputs; targets is a length-H array in the
    same (scaled) units as raw_mu.
    """
    y = nn.constant(np.asarray(targets, dtype=np.float64).reshape(-1, 1))
    if raw_mu.shape != y.shape:
        raise LikelihoodError(f"raw_mu shape {raw_mu.shape} vs targets {y.shape}")
    sigma = nn.softplus(raw_sigma)
    nu = nn.add_const(nn.softplus(raw_nu), nu_floor)
    half_nup1 = nn.scale(nn.add_const(nu, 1.0), 0.5)
    z = nn.div(nn.sub(y, raw_mu), sigma)
    inner = nn.add_const(nn.div(nn.square(z), nu), 1.0)
    logpdf = nn.sub(
        nn.sub(log_gamma_graph(half_nup1), log_gamma_graph(nn.scale(nu, 0.5))),
        nn.add(
            nn.add(nn.log(sigma), nn.add_const(nn.scale(nn.log(nu), 0.5), 0.5 * math.log(math.pi))),
            nn.mul(half_nup1, nn.log(inner)),
        ),
    )
    return nn.scale(nn.sum_all(logpdf), -1.0)


def gaussian_nll_graph(raw_mu: nn.Tensor, raw_sigma: nn.Tensor,
                       targets: np.ndarray) -> nn.Tensor:
    """Differentiable Gaussian NLL over one prediction range."""
    y = nn.constant(np.asarray(targets, dtype=np.float64).reshape(-1, 1))
    if raw_mu.shape != y.shape:
        raise LikelihoodError(f"raw_mu shape {raw_mu.shape} vs targets {y.shape}")
    sigma = nn.softplus(raw_sigma)
    quad = nn.div(nn.square(nn.sub(y, raw_mu)), nn.scale(nn.square(sigma), 2.0))
    logpdf = nn.add_const(nn.scale(nn.add(nn.log(sigma), quad), -1.0), -0.5 * LOG_2PI)
    return nn.scale(nn.sum_all(logpdf), -1.0)
