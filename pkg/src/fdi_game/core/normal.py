"""Standard normal kernels used by every closed form of the game."""
import math

from scipy import special

from fdi_game.core.errors import DomainError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def phi_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def phi_cdf(x: float) -> float:
    """
    Standard normal CDF, Phi(x) = erfc(-x / sqrt(2)) / 2.

    Raises DomainError for non-finite input instead of returning 0 or 1.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"phi_cdf requires a finite argument, got {x}")
    return float(special.ndtr(x))


def log_phi_cdf(x: float) -> float:
    """log Phi(x), accurate deep in the lower tail where Phi(x) underflows."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"log_phi_cdf requires a finite argument, got {x}")
    return float(special.log_ndtr(x))


def phi_inv(p: float) -> float:
    """
    Standard normal quantile, refined by one Newton step against phi_cdf.

    Out-of-domain probabilities are errors, never clamped.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"phi_inv requires 0 < p < 1, got {p}")
    # 1 - p is exact for p >= 1/2, so the upper half reuses the lower tail
    if p > 0.5:
        return -_lower_quantile(1.0 - p)
    return _lower_quantile(p)


def _lower_quantile(p: float) -> float:
    x = float(special.ndtri(p))
    density = phi_pdf(x)
    if density > 0.0:
        x -= (float(special.ndtr(x)) - p) / density
    return x
