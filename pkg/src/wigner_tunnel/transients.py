"""Finite-time corrections for the delta barrier.

The off-shell transition element of the delta spike is known in closed
form, which makes the finite-time correction J_t(k, k0) to the momentum
propagator explicit: a three-term bracket of scaled Faddeeva functions
that decays like t^(-3/2). Branch conventions are the crux here and are
pinned by two requirements: the off-shell element must reduce to a(kappa)
on shell, and J must actually decay (which forces sqrt(-it) onto the
e^{3 i pi/4} ray, where the Faddeeva asymptotics hold).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchPointError
from .specfun import big_w, faddeeva_w

__all__ = [
    "TransientResult",
    "delta_offshell_T",
    "delta_transient_J",
    "discontinuity_check_delta",
    "sqrt_minus_i_t",
]

_ISQRT_PI = 1.0 / math.sqrt(math.pi)

# Degenerate-direction threshold: below this |k^2 - k0^2| the bracket is
# evaluated through its derivative form instead of the raw difference.
DEGENERATE_EPS = 1e-6


def physical_sqrt_minus(eps):
    """sqrt(-eps) on the physical sheet: -i sqrt(eps) on the upper lip.

    The principal square root of -eps implements this everywhere off the
    cut (positive real part); exactly on the positive real axis the
    upper-lip limit is taken.
    """
    eps = complex(eps)
    if eps == 0:
        raise BranchPointError("branch point at eps = 0")
    if eps.imag == 0.0 and eps.real > 0.0:
        return -1j * math.sqrt(eps.real)
    return cmath.sqrt(-eps)


def sqrt_minus_i_t(t):
    """The sqrt(-it) branch that keeps the transient decaying.

    e^{3 i pi/4} sqrt(t): negative real part, so the Faddeeva argument
    lies where W -> i/sqrt(pi); the principal root would instead pick up
    a non-decaying Stokes term 2 z e^{-z^2}.
    """
    if t <= 0:
        raise ValueError("transient evaluation requires t > 0")
    return 1j * cmath.sqrt(1j * t)


def delta_offshell_T(v0, eps):
    """Off-shell transition element v0 / (2 pi (1 + v0 / (2 sqrt(-eps)))).

    Independent of the external momenta. On shell (eps = kappa^2 + i0) the
    denominator equals a(kappa), so the S-matrix element 1/a is recovered.
    """
    if v0 <= 0:
        raise ValueError("v0 must be positive")
    return v0 / (2.0 * math.pi * (1.0 + v0 / (2.0 * physical_sqrt_minus(eps))))


@dataclass(frozen=True)
class TransientResult:
    """Finite-time correction J and its large-time leading term."""
    J: complex
    leading_term: complex
    t: float
    k: float
    k0: float

    @property
    def ratio(self):
        return self.J / self.leading_term


def _bracket(v0, k, k0, t, recombined=False):
    """The three-term Faddeeva bracket of the transient.

    ``recombined`` evaluates the algebraically equivalent single-fraction
    grouping, a guard against transcription slips in the printed form.
    At k^2 -> k0^2 the difference quotient degenerates and is replaced by
    the exact derivative of W(sqrt(i t eps))/(eps + v0^2/4) at the
    midpoint energy.
    """
    dk = k * k + 0.25 * v0 * v0
    dk0 = k0 * k0 + 0.25 * v0 * v0
    z_v = 0.5 * v0 * sqrt_minus_i_t(t)
    w_v = big_w(z_v)
    de = k * k - k0 * k0

    if abs(de) < DEGENERATE_EPS:
        eps = 0.5 * (k * k + k0 * k0)
        d_mid = eps + 0.25 * v0 * v0
        z = cmath.sqrt(1j * t * eps)
        w_z = faddeeva_w(z)
        big = z * w_z
        # d/deps [W(z)/D]: W'(z) = (1 - 2 z^2) w(z) + 2 i z / sqrt(pi),
        # dz/deps = i t / (2 z)
        wprime = (1.0 - 2.0 * z * z) * w_z + 2j * z * _ISQRT_PI
        deriv = wprime * (1j * t / (2.0 * z)) / d_mid - big / (d_mid * d_mid)
        return w_v / (dk * dk0) + deriv

    z_k = cmath.sqrt(1j * t * k * k)
    z_k0 = cmath.sqrt(1j * t * k0 * k0)
    w_k = big_w(z_k)
    w_k0 = big_w(z_k0)
    if recombined:
        num = w_v * de + w_k * dk0 - w_k0 * dk
        return num / (dk * dk0 * de)
    return w_v / (dk * dk0) + (w_k / dk - w_k0 / dk0) / de


def delta_transient_J(v0, k, k0, t, recombined=False):
    """Finite-time off-shell correction J_t(k, k0) for the delta barrier.

    Returns the full Faddeeva-bracket value together with the t^(-3/2)
    leading term e^{i pi/4} e^{i(k^2+k0^2)t/2} / (2 pi^{3/2} t^{3/2} k^2 k0^2);
    their ratio tends to 1, which is the ultimate check of the branch
    conventions.
    """
    if v0 <= 0:
        raise ValueError("v0 must be positive")
    if t <= 0:
        raise ValueError("t must be positive")
    if k == 0 or k0 == 0:
        raise ZeroDivisionError("J undefined at zero momentum")
    sq = sqrt_minus_i_t(t)
    phase = cmath.exp(0.5j * t * (k * k + k0 * k0))
    J = (v0 * v0 / (4.0 * math.pi * sq)) * phase * _bracket(v0, k, k0, t, recombined)
    leading = (cmath.exp(0.25j * math.pi) * phase
               / (2.0 * math.pi ** 1.5 * t ** 1.5 * k * k * k0 * k0))
    return TransientResult(J, leading, float(t), float(k), float(k0))


def discontinuity_check_delta(v0, k, k0, kappa):
    """(lhs, rhs) of the cut-discontinuity identity at eps = kappa^2.

    lhs = Im of the off-shell element on the upper lip; rhs is the
    unitarity sum over the two on-shell directions,
    rhs = -(pi / 2 kappa) sum_nu tau conj(tau). The sign is fixed by the
    optical theorem for this resolvent convention (forward absorption
    lowers Im tau below zero); D itself stays non-negative. For the delta
    barrier the elements are momentum-independent, so k and k0 enter only
    through the shared closed form.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    tau = delta_offshell_T(v0, kappa * kappa)
    lhs = tau.imag
    d_sum = 2.0 * abs(tau) ** 2
    rhs = -(math.pi / (2.0 * kappa)) * d_sum
    return lhs, rhs
