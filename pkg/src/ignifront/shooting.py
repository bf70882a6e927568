"""Traveling-front speed of a homogeneous ignition profile by shooting.

The front (U, c) solves U'' + c U' + F0(U) = 0 with U(-inf) = 1 and
U(+inf) = 0.  Below the ignition threshold the orbit is exact
(U' = -c U), so the shot starts on it at U = theta0 and integrates toward
the hot side in the reversed coordinate, where the connection problem
becomes w'' = c w' - F0(w), w(0) = theta0, w'(0) = c*theta0.  A subcritical
c overshoots w = 1; a supercritical c stalls (w' hits zero below 1); the
sign of the terminal overshoot drives the bisection.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from ignifront.errors import NumericError
from ignifront.profiles import IgnitionProfile

_OVERSHOOT = +1
_UNDERSHOOT = -1
_CRITICAL = 0


def _classify(profile: IgnitionProfile, c: float, tau_max: float) -> int:
    theta0 = profile.theta0

    def rhs(t, y):
        return (y[1], c * y[1] - float(profile(y[0])))

    def ev_over(t, y):
        return y[0] - 1.0 - 1e-12

    def ev_stall(t, y):
        return y[1]

    ev_over.terminal = True
    ev_over.direction = 1
    ev_stall.terminal = True
    ev_stall.direction = -1
    sol = solve_ivp(rhs, (0.0, tau_max), [theta0, c * theta0],
                    rtol=1e-11, atol=1e-13, max_step=1.0,
                    events=[ev_over, ev_stall])
    if sol.t_events[0].size:
        return _OVERSHOOT
    if sol.t_events[1].size and sol.y[0, -1] < 1.0 - 1e-9:
        return _UNDERSHOOT
    return _CRITICAL


def compute_c0(profile: IgnitionProfile, tol: float = 1e-9,
               tau_max: float = 600.0) -> float:
    """Unique ignition front speed of F0; always below 2*sqrt(M)."""
    c_lo = 1e-4
    c_hi = 2.0 * math.sqrt(profile.lipschitz)
    if _classify(profile, c_hi, tau_max) == _UNDERSHOOT:
        raise NumericError(
            "no overshoot at c = 2*sqrt(M); profile is not a valid ignition "
            "nonlinearity for the shooting bracket")
    if _classify(profile, c_lo, tau_max) == _OVERSHOOT:
        raise NumericError(
            "overshoot already at c ~ 0; shooting bracket not found in "
            "(0, 2*sqrt(M))")
    while c_hi - c_lo > tol * c_hi:
        mid = 0.5 * (c_lo + c_hi)
        if _classify(profile, mid, tau_max) >= _CRITICAL:
            c_hi = mid
        else:
            c_lo = mid
    return 0.5 * (c_lo + c_hi)


def front_profile(profile: IgnitionProfile, c: float = None,
                  s_max: float = 80.0, n: int = 4001):
    """Approximate front shape U(s) for diagnostics (s = x - c t, U(0)=theta0).

    Integrates the same reversed orbit at the (supplied or computed) critical
    speed and pastes the exact exponential tail below theta0.
    """
    if c is None:
        c = compute_c0(profile)
    theta0 = profile.theta0

    def rhs(t, y):
        return (y[1], c * y[1] - float(profile(y[0])))

    sol = solve_ivp(rhs, (0.0, s_max), [theta0, c * theta0],
                    rtol=1e-10, atol=1e-12, max_step=0.5,
                    dense_output=True)
    s_hot = np.linspace(0.0, min(s_max, sol.t[-1]), n)
    hot = np.minimum(sol.sol(s_hot)[0], 1.0)
    s_cold = np.linspace(0.0, 40.0 / max(c, 1e-3), n)[1:]
    cold = theta0 * np.exp(-c * s_cold)
    s = np.concatenate([-s_hot[::-1], s_cold])
    u = np.concatenate([hot[::-1], cold])
    return s, u
