"""Angular cross sections, their coefficient integrals and angle sampling.

Two kernel families are supported:

* ``power-law``: beta(theta) = |theta|**(-1-nu) on [-pi, pi] \\ {0}, 0 < nu < 2.
  The dynamics keep jumps with |theta| >= eps and replace the rest by a drift
  and a diffusion with coefficient ``b_eps``.
* ``uniform-grazing``: beta_eps(theta) = 3 / (2 eps**3) on |theta| < eps.  This
  kernel is finite, so every collision is simulated; ``eps`` sets its width
  and it satisfies int theta**2 beta_eps = 1 and int theta**4 beta_eps = 3 eps**2 / 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .quadrature import adaptive_gl, integrate_power_singular

POWER_LAW = "power-law"
UNIFORM_GRAZING = "uniform-grazing"
KINDS = (POWER_LAW, UNIFORM_GRAZING)

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class CrossSection:
    kind: str
    nu: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown cross-section kind {self.kind!r}")
        if self.kind == POWER_LAW:
            if self.nu is None or not 0.0 < self.nu < 2.0:
                raise DomainError(f"power-law exponent nu must lie in (0, 2), got {self.nu!r}")
        elif self.nu is not None:
            raise DomainError("uniform-grazing kernel takes no exponent")

    @classmethod
    def power_law(cls, nu: float) -> "CrossSection":
        return cls(POWER_LAW, float(nu))

    @classmethod
    def uniform_grazing(cls) -> "CrossSection":
        return cls(UNIFORM_GRAZING)

    @property
    def is_power_law(self) -> bool:
        return self.kind == POWER_LAW

    def density(self, theta, eps: float | None = None):
        """beta(theta); the grazing family needs its width ``eps``."""
        theta = np.abs(np.asarray(theta, dtype=float))
        if self.is_power_law:
            with np.errstate(divide="ignore"):
                out = np.where((theta > 0) & (theta <= math.pi), theta ** (-1.0 - self.nu), 0.0)
            return out
        _check_eps(self, eps)
        return np.where(theta < eps, 1.5 / eps**3, 0.0)

    def check_eps(self, eps: float) -> float:
        return _check_eps(self, eps)


@dataclass(frozen=True)
class CollisionCoefficients:
    """Scalars derived from a kernel and a truncation level ``eps``.

    lambda_eps  jump rate per particle, int_{|theta|>=eps} beta
    b_eps       drift coefficient, int_{|theta|<eps} (1 - cos theta) beta
    d_eps       int_{|theta|>=eps} sin(theta)**2 beta
    c_eps       2 b_eps + d_eps
    gamma_eps   int_{|theta|<eps} (1 - cos theta)**2 beta
    m4_decay_c  int (1 - cos**4 - sin**4) beta over the whole kernel
    """

    lambda_eps: float
    b_eps: float
    d_eps: float
    c_eps: float
    gamma_eps: float
    m4_decay_c: float


def _check_eps(cs, eps):
    if eps is None:
        raise DomainError("eps is required")
    eps = float(eps)
    if not (0.0 < eps <= math.pi) or math.isnan(eps):
        raise DomainError(f"eps must lie in (0, pi], got {eps!r}")
    return eps


# Cancellation-free forms of the trigonometric weights.
def one_minus_cos(theta):
    return 2.0 * np.sin(0.5 * theta) ** 2


def one_minus_cos_sq(theta):
    return 4.0 * np.sin(0.5 * theta) ** 4


def sin_sq(theta):
    return np.sin(theta) ** 2


def quartic_defect(theta):
    """1 - cos**4 - sin**4, written as 2 sin**2 cos**2."""
    s = np.sin(theta)
    c = np.cos(theta)
    return 2.0 * (s * c) ** 2


def integrate_kernel(
    cs: CrossSection,
    integrand: Callable,
    lo: float,
    hi: float,
    tol: float = QUAD_TOL,
    eps: float | None = None,
) -> float:
    """int_lo^hi integrand(theta) beta(theta) dtheta over a positive range.

    ``integrand`` is evaluated on numpy arrays.  For the grazing kernel the
    range is clipped to the support (0, eps).
    """
    if not 0.0 <= lo < hi <= math.pi:
        raise DomainError(f"need 0 <= lo < hi <= pi, got ({lo!r}, {hi!r})")
    if cs.is_power_law:
        power = -1.0 - cs.nu

        def f(x):
            return np.asarray(integrand(x), dtype=float) * x**power

        return integrate_power_singular(f, lo, hi, tol)

    eps = _check_eps(cs, eps)
    hi = min(hi, eps)
    if hi <= lo:
        return 0.0
    height = 1.5 / eps**3

    def g(x):
        return np.asarray(integrand(x), dtype=float) * height

    rough = adaptive_gl(g, lo, hi, math.inf)
    return adaptive_gl(g, lo, hi, tol * abs(rough) + 1e-300)


def power_law_rate(nu: float, eps: float) -> float:
    """Closed form of int_{eps<=|theta|<=pi} |theta|**(-1-nu)."""
    return 2.0 * (eps**-nu - math.pi**-nu) / nu


def compute_coefficients(cs: CrossSection, eps: float, tol: float = QUAD_TOL) -> CollisionCoefficients:
    eps = _check_eps(cs, eps)
    if cs.is_power_law:
        lam = power_law_rate(cs.nu, eps) if eps < math.pi else 0.0
        b = 2.0 * integrate_kernel(cs, one_minus_cos, 0.0, eps, tol)
        gamma = 2.0 * integrate_kernel(cs, one_minus_cos_sq, 0.0, eps, tol)
        d = 2.0 * integrate_kernel(cs, sin_sq, eps, math.pi, tol) if eps < math.pi else 0.0
        m4c = 2.0 * integrate_kernel(cs, quartic_defect, 0.0, math.pi, tol)
    else:
        # Finite kernel: all collisions are jumps, no small-angle remainder.
        lam = 3.0 / eps**2
        b = 0.0
        gamma = 0.0
        d = 2.0 * integrate_kernel(cs, sin_sq, 0.0, eps, tol, eps=eps)
        m4c = 2.0 * integrate_kernel(cs, quartic_defect, 0.0, eps, tol, eps=eps)
    return CollisionCoefficients(
        lambda_eps=lam,
        b_eps=b,
        d_eps=d,
        c_eps=2.0 * b + d,
        gamma_eps=gamma,
        m4_decay_c=m4c,
    )


def truncated_cdf(cs: CrossSection, eps: float, x):
    """CDF of |Theta| under the jump-angle law used by ``sample_theta``."""
    eps = _check_eps(cs, eps)
    x = np.asarray(x, dtype=float)
    if cs.is_power_law:
        nu = cs.nu
        a = eps**-nu
        return np.clip((a - x**-nu) / (a - math.pi**-nu), 0.0, 1.0)
    return np.clip(x / eps, 0.0, 1.0)


def sample_theta(cs: CrossSection, eps: float, u: float, sign: int) -> float:
    """Jump angle from a uniform ``u`` in [0, 1] and a sign in {-1, +1}.

    Power law: exact inverse CDF of beta restricted to eps <= |theta| <= pi.
    Grazing: |theta| uniform on [0, eps).
    """
    if cs.is_power_law:
        if not eps < math.pi:
            raise DomainError("no jumps to sample when eps >= pi")
        nu = cs.nu
        a = eps**-nu
        mag = (a - u * (a - math.pi**-nu)) ** (-1.0 / nu)
    else:
        mag = eps * u
    return mag if sign >= 0 else -mag
