"""Ignition reaction profiles and hypothesis parameter records.

The canonical profile F0 is the pointwise minimum of the Lipschitz ramp
M*(u - theta0)+ and the near-1 cap alpha1*(1-u)**m1, extended by zero outside
(theta0, 1].  It vanishes on [0, theta0] and at u = 1, is positive in between,
never exceeds slope M, and is non-increasing on the band where the cap is
active.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from ignifront.errors import ConfigurationError, ConstructionError

PROFILE_TABLE_SIZE = 4097


@dataclass(frozen=True)
class IgnitionProfile:
    """Tabulated ignition nonlinearity F0 with its defining parameters.

    theta0      ignition threshold, F0 = 0 on [0, theta0]
    lipschitz   Lipschitz bound M of F0 (per unit u)
    m1          decay exponent of the cap near u = 1
    alpha1      coefficient of the cap alpha1*(1-u)**m1
    theta1_eff  width of the band [1-theta1_eff, 1) on which F0 equals the cap
    u_grid      uniform tabulation grid on [0, 1]
    samples     F0 on u_grid
    """

    theta0: float
    lipschitz: float
    m1: float
    alpha1: float
    theta1_eff: float
    u_grid: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)

    def __call__(self, u, out=None):
        """Evaluate F0 pointwise (analytic form, not the tabulation).

        Values outside [0, 1] map to 0.
        """
        u = np.asarray(u, dtype=np.float64)
        ramp = np.clip(u - self.theta0, 0.0, None)
        if self.lipschitz != 1.0:
            ramp *= self.lipschitz
        w = 1.0 - np.minimum(u, 1.0)
        if self.m1 == 2.0:
            cap = w * w
        elif self.m1 == 1.0:
            cap = w
        else:
            cap = w ** self.m1
        cap = cap * self.alpha1
        val = np.minimum(ramp, cap, out=out)
        # zero outside the reactive range, including u > 1 and u < 0
        val *= (u > self.theta0) & (u <= 1.0)
        return val

    def reaction_scale(self) -> float:
        """Maximum of F0, used to normalize truncation tolerances."""
        return float(self.samples.max())

    def rescaled(self, lam: float) -> "IgnitionProfile":
        """Profile lam^2 * F0, whose front speed is lam times the original."""
        return make_profile(self.theta0, lam * lam * self.lipschitz,
                            self.m1, lam * lam * self.alpha1)

    def with_reduced_cap(self, factor: float) -> "IgnitionProfile":
        """Profile with alpha1 scaled down by ``factor`` (same shape family)."""
        return make_profile(self.theta0, self.lipschitz, self.m1,
                            factor * self.alpha1)

    def params(self) -> dict:
        return {
            "theta0": self.theta0,
            "lipschitz_bound": self.lipschitz,
            "m1": self.m1,
            "alpha1": self.alpha1,
        }


def make_profile(theta0: float, lipschitz: float, m1: float,
                 alpha1: float) -> IgnitionProfile:
    """Build the canonical ignition profile min(M*(u-theta0)+, alpha1*(1-u)**m1).

    Raises ConfigurationError for parameters outside their domain and
    ConstructionError when the cap branch would violate the Lipschitz bound
    (its steepest active slope must stay within M).
    """
    if not (0.0 < theta0 < 0.5):
        raise ConfigurationError(f"theta0 must lie in (0, 1/2), got {theta0}")
    if lipschitz < 1.0:
        raise ConfigurationError(f"Lipschitz bound must be >= 1, got {lipschitz}")
    if m1 < 1.0:
        raise ConfigurationError(f"m1 must be >= 1, got {m1}")
    if alpha1 <= 0.0:
        raise ConfigurationError(f"alpha1 must be positive, got {alpha1}")

    # crossing point of ramp and cap: M*(u-theta0) = alpha1*(1-u)**m1
    u_c = _ramp_cap_crossing(theta0, lipschitz, m1, alpha1)
    # |d cap/du| on [u_c, 1] is alpha1*m1*(1-u)**(m1-1), largest at u_c
    cap_slope = alpha1 * m1 * (1.0 - u_c) ** (m1 - 1.0)
    if cap_slope > lipschitz * (1.0 + 1e-12):
        raise ConstructionError(
            "cap branch violates the Lipschitz bound: |F0'| reaches "
            f"{cap_slope:.6g} > M = {lipschitz:.6g} at the ramp/cap junction; "
            "reduce alpha1 or m1 (invariant: tabulation slope <= M)")

    u_grid = np.linspace(0.0, 1.0, PROFILE_TABLE_SIZE)
    ramp = lipschitz * np.clip(u_grid - theta0, 0.0, None)
    cap = alpha1 * (1.0 - u_grid) ** m1
    samples = np.minimum(ramp, cap)
    samples[u_grid <= theta0] = 0.0
    samples[-1] = 0.0

    return IgnitionProfile(
        theta0=float(theta0),
        lipschitz=float(lipschitz),
        m1=float(m1),
        alpha1=float(alpha1),
        theta1_eff=float(1.0 - u_c),
        u_grid=u_grid,
        samples=samples,
    )


def _ramp_cap_crossing(theta0, M, m1, alpha1):
    """Unique u in (theta0, 1) where the ramp meets the cap (bisection)."""
    lo, hi = theta0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if M * (mid - theta0) < alpha1 * (1.0 - mid) ** m1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def default_theta_star(theta1: float) -> float:
    """Operational closeness-to-1 threshold; defaults to theta1/4.

    The admissible range is (0, min(theta1, 1/2)/2].
    """
    return theta1 / 4.0


@dataclass(frozen=True)
class HypothesisParams:
    """Quantitative hypothesis constants attached to a reaction family.

    theta1/m1/alpha1/lipschitz describe the profile bounds; (m2, alpha2)
    control transition-width growth; (m3, alpha3) the uniform monotone gap
    near u = 1; (m4, m4p, alpha4, n4) the finite-range approximation rates;
    (a2, alpha2p) the raised-baseline variant.  theta_star is the operational
    arrival threshold.  Derived exponents follow the standard formulas.
    """

    theta1: float
    m1: float
    alpha1: float
    lipschitz: float
    m2: float = 0.5
    alpha2: float = 0.0
    m3: float = 2.0
    alpha3: float = 0.5
    m4: float = 3.0
    m4p: float = 1.0
    alpha4: float = 1.0
    n4: float = 4.0
    a2: float = 0.0
    alpha2p: float = 0.0
    theta_star: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.theta_star is None:
            object.__setattr__(self, "theta_star", default_theta_star(self.theta1))
        if not (0.0 < self.theta_star <= min(self.theta1, 0.5) / 2.0):
            raise ConfigurationError(
                f"theta_star = {self.theta_star} outside (0, min(theta1, 1/2)/2] "
                f"for theta1 = {self.theta1}")
        if not (0.0 < self.beta1 < 1.0):
            raise ConfigurationError(
                f"beta1 = {self.beta1} must lie in (0, 1); check m1, m2, alpha2")

    @classmethod
    def for_profile(cls, profile: IgnitionProfile, **overrides) -> "HypothesisParams":
        base = dict(theta1=profile.theta0, m1=profile.m1,
                    alpha1=profile.alpha1, lipschitz=profile.lipschitz)
        base.update(overrides)
        return cls(**base)

    @property
    def beta1(self) -> float:
        """max{(m1-1)/m1, (m2+alpha2)/(m2+1)}, the fluctuation exponent."""
        return max((self.m1 - 1.0) / self.m1,
                   (self.m2 + self.alpha2) / (self.m2 + 1.0))

    def beta3(self, dim: int) -> float:
        """max{beta1, m3/(m3+2 m4), (2d+2)/(2d+2+m4')}."""
        return max(self.beta1,
                   self.m3 / (self.m3 + 2.0 * self.m4),
                   (2.0 * dim + 2.0) / (2.0 * dim + 2.0 + self.m4p))

    def c1(self, dim: int) -> float:
        """Upper spreading speed 2*sqrt(M*d)."""
        return 2.0 * math.sqrt(self.lipschitz * dim)

    def kappa1(self, dim: int) -> float:
        """Spreading offset 1 + sqrt(d/M)*ln(2d/(1-2*theta1))."""
        return 1.0 + math.sqrt(dim / self.lipschitz) * math.log(
            2.0 * dim / (1.0 - 2.0 * self.theta1))

    def d2(self, dim: int) -> float:
        """Perturbation insulation radius per unit time, 2*sqrt(M*d)*ln(4d/theta*)."""
        return 2.0 * math.sqrt(self.lipschitz * dim) * math.log(
            4.0 * dim / self.theta_star)

    def defect_fit_exponent(self) -> float:
        """gamma = (1-beta1)/2, the mean arrival-slope defect decay rate."""
        return 0.5 * (1.0 - self.beta1)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "theta1", "m1", "alpha1", "lipschitz", "m2", "alpha2", "m3",
            "alpha3", "m4", "m4p", "alpha4", "n4", "a2", "alpha2p",
            "theta_star")}
        d["beta1"] = self.beta1
        return d
