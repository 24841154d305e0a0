"""Unitary uncertainty relation, continuum dispersions and the N-scaling of GUP terms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .algebra import PhaseSpaceParams, as_params
from .states import MusSpec, StateVector, expectations, gaussian_state, mus_state

EPS = np.finfo(float).eps
MIN_RESULTANT = 1e-6


class NoCircularMean(ValueError):
    """A distribution is too close to uniform for an unwrapped variance."""


class InsufficientPositiveExcess(RuntimeError):
    """Fewer than four sweep points have a positive product excess."""


@dataclass(frozen=True)
class UncertaintyReport:
    n: int
    disp_u: float
    disp_v: float
    cross_sq: float
    saturation_gap: float
    dq2: float | None = None
    dp2: float | None = None
    product: float | None = None
    excess: float | None = None
    predicted_excess: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "disp_u": self.disp_u,
            "disp_v": self.disp_v,
            "cross_sq": self.cross_sq,
            "gap": self.saturation_gap,
            "dq2": self.dq2,
            "dp2": self.dp2,
            "product": self.product,
            "excess": self.excess,
            "predicted_excess": self.predicted_excess,
        }


def unitary_uncertainty(state: StateVector) -> UncertaintyReport:
    """Both sides of ``<dV^H dV><dU^H dU> >= |<dV^H dU>|^2``; equality for a MUS."""
    ex = expectations(state)
    cross_sq = abs(ex.cross) ** 2
    return UncertaintyReport(
        n=state.n,
        disp_u=ex.disp_u,
        disp_v=ex.disp_v,
        cross_sq=float(cross_sq),
        saturation_gap=float(ex.disp_u * ex.disp_v - cross_sq),
    )


def circular_moments(probs: np.ndarray) -> tuple[float, float]:
    """Mean index and variance of a distribution on Z_N, unwrapped about its circular mean.

    Each index is represented by the copy within N/2 of the circular mean.
    """
    probs = np.asarray(probs, dtype=float)
    n = probs.shape[0]
    z = probs @ np.exp(2j * np.pi * np.arange(n) / n)
    if abs(z) < MIN_RESULTANT:
        raise NoCircularMean(f"resultant length {abs(z):.2e} is below {MIN_RESULTANT:g}")
    centre = (np.angle(z) * n / (2 * np.pi)) % n
    d = (np.arange(n) - centre + n / 2) % n - n / 2
    shift = float(probs @ d)
    var = float(probs @ (d - shift) ** 2)
    return float((centre + shift) % n), var


def continuum_dispersions(state: StateVector) -> tuple[float, float]:
    """(dQ^2, dP^2) in physical units, with ``Q_j = beta hbar j`` and ``P_k = alpha hbar k``."""
    p = state.params
    _, var_j = circular_moments(state.probs)
    _, var_k = circular_moments(state.momentum_probs)
    return p.q_spacing**2 * var_j, p.p_spacing**2 * var_k


def predicted_excess(params: PhaseSpaceParams, dq2: float, dp2: float) -> float:
    """Leading discreteness corrections to dQ^2 dP^2 above hbar^2/4."""
    n, hbar, lp = params.n, params.hbar, params.planck_length
    return (hbar**2 / 4) * (
        n**-0.5 * (lp**2 * math.pi / (2 * hbar**2)) * dp2 + n**-1.5 * (math.pi / (2 * lp**2)) * dq2
    )


def gup_excess(state: StateVector) -> UncertaintyReport:
    base = unitary_uncertainty(state)
    dq2, dp2 = continuum_dispersions(state)
    product = dq2 * dp2
    hbar = state.params.hbar
    return UncertaintyReport(
        n=base.n,
        disp_u=base.disp_u,
        disp_v=base.disp_v,
        cross_sq=base.cross_sq,
        saturation_gap=base.saturation_gap,
        dq2=dq2,
        dp2=dp2,
        product=product,
        excess=product - hbar**2 / 4,
        predicted_excess=predicted_excess(state.params, dq2, dp2),
    )


# --------------------------------------------------------------------------
# Probe states for sweeps over N

Probe = Callable[[int], StateVector]


def gaussian_probe(dq2: float = 0.5) -> Probe:
    """Wrapped Gaussian centred mid-circle with fixed physical dQ^2 (hbar = 1)."""

    def make(n: int) -> StateVector:
        return gaussian_state(PhaseSpaceParams(n), n / 2, math.sqrt(dq2), 0.0)

    make.label = f"gaussian(dq2={dq2:g})"
    return make


def symmetric_mus(n: int, s: float) -> StateVector:
    """MUS with ``lambda = -i s`` (s > 1) on the principal branch of mu."""
    p = PhaseSpaceParams(n)
    lam = -1j * s
    with np.errstate(under="ignore"):
        mu = lam * np.exp(np.log1p(lam ** (-n)) / n)
    return mus_state(MusSpec.from_pair(p, mu, lam))


def mus_probe(dp2: float = 0.5) -> Probe:
    """Minimum-uncertainty probe with fixed physical dP^2 (hbar = 1).

    ``lambda = -i s``; ``|lambda|^2`` is the ratio of the two unitary
    dispersions, so ``s`` sets the aspect of the packet and is solved so the
    momentum dispersion equals ``dp2`` at each N.
    """

    def make(n: int) -> StateVector:
        def gap(s):
            return continuum_dispersions(symmetric_mus(n, s))[1] - dp2

        lo, hi = max(1.5, 0.1 * math.sqrt(n)), 10 * math.sqrt(n)
        while gap(lo) > 0 and lo > 1.0 + 1e-3:
            lo = 1.0 + (lo - 1.0) / 2
        while gap(hi) < 0 and hi < 1e4 * math.sqrt(n):
            hi *= 2
        s = brentq(gap, lo, hi, xtol=1e-13, rtol=1e-13)
        return symmetric_mus(n, s)

    make.label = f"mus(dp2={dp2:g})"
    return make


# --------------------------------------------------------------------------
# Scaling fit


@dataclass(frozen=True)
class ScalingFit:
    n_values: list
    excesses: list
    exponent: float
    amplitude: float
    r_squared: float
    reports: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "excesses": list(self.excesses),
            "exponent": self.exponent,
            "amplitude": self.amplitude,
            "r_squared": self.r_squared,
        }


def fit_power_law(n_values: Sequence[int], excesses: Sequence[float], reports=()) -> ScalingFit:
    """Least squares of ``log excess = log A + p log N`` over the positive points."""
    n = np.asarray(n_values, dtype=float)
    ex = np.asarray(excesses, dtype=float)
    if n.size < 4:
        raise ValueError("a scaling fit needs at least 4 points")
    if np.any(np.diff(n) <= 0):
        raise ValueError("n_values must be strictly increasing")
    keep = ex > 10 * EPS
    if np.count_nonzero(keep) < 4:
        raise InsufficientPositiveExcess(
            f"only {int(np.count_nonzero(keep))} of {n.size} points have excess > 10 eps"
        )
    x, y = np.log(n[keep]), np.log(ex[keep])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - fitted) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(
        [int(v) for v in n_values],
        [float(v) for v in ex],
        float(slope),
        float(math.exp(intercept)),
        r2,
        list(reports),
    )


def gup_scaling_sweep(n_values: Sequence[int], probe: Probe | None = None) -> ScalingFit:
    """Excess ``dQ^2 dP^2 - hbar^2/4`` across N and its power-law fit.

    The default probe is ``mus_probe(0.5)``: a minimum-uncertainty packet with
    fixed physical momentum width.
    """
    n_values = [int(v) for v in n_values]
    if len(n_values) < 4:
        raise ValueError("a scaling sweep needs at least 4 values of N")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be strictly increasing")
    probe = probe or mus_probe(0.5)
    reports = [gup_excess(probe(n)) for n in n_values]
    return fit_power_law(n_values, [r.excess for r in reports], reports)
