"""Continuous-time evolution under the torus hopping Hamiltonian, and revivals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .algebra import PhaseSpaceParams, as_params, t_operator
from .linalg import EigenSystem, eigh
from .states import StateVector

EXACT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TorusHamiltonian:
    """``H = 2 - T - T^H`` for hop ``k``; the spectrum is computed once, on demand."""

    params: PhaseSpaceParams
    k: int
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.params.n

    @cached_property
    def spectrum(self) -> EigenSystem:
        return eigh(self.matrix)

    def energy(self, psi) -> float:
        c = psi.c if isinstance(psi, StateVector) else np.asarray(psi)
        return float(np.vdot(c, self.matrix @ c).real)


def build_hamiltonian(params, k: int) -> TorusHamiltonian:
    p = as_params(params)
    t = t_operator(p, k)
    h = -t - t.conj().T
    h[np.diag_indices(p.n)] = 2.0
    h.setflags(write=False)
    return TorusHamiltonian(p, int(k), h)


# --------------------------------------------------------------------------
# Evolution


def _spread(probs: np.ndarray) -> np.ndarray:
    """Circular standard deviation of site probabilities, in sites (rows)."""
    n = probs.shape[-1]
    z = probs @ np.exp(2j * np.pi * np.arange(n) / n)
    r = np.clip(np.abs(z), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return n / (2 * np.pi) * np.sqrt(-2.0 * np.log(r))


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: np.ndarray
    survival: np.ndarray
    site_probs: np.ndarray
    widths: np.ndarray
    amplitudes: np.ndarray = field(repr=False)

    def state(self, i: int) -> np.ndarray:
        return self.amplitudes[i]


def _propagate(h: TorusHamiltonian, c0: np.ndarray, times: np.ndarray) -> np.ndarray:
    spec = h.spectrum
    vecs = spec.eigenvectors
    coeff = vecs.conj().T @ c0
    phases = np.exp(-1j * np.outer(times, spec.eigenvalues))
    return (phases * coeff) @ vecs.T


def evolve(h: TorusHamiltonian, psi0: StateVector, times) -> EvolutionTrace:
    """``psi(t) = exp(-i H t) psi0`` at each requested time, via the eigenbasis."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if psi0.n != h.n:
        raise ValueError(f"state dimension {psi0.n} does not match Hamiltonian {h.n}")
    if not np.all(np.isfinite(times)):
        raise ValueError("times must be finite")
    amps = _propagate(h, psi0.c, times)
    amps[times == 0.0] = psi0.c
    survival = amps @ psi0.c.conj()
    survival[times == 0.0] = 1.0
    probs = np.abs(amps) ** 2
    for arr in (times, amps, survival, probs):
        arr.setflags(write=False)
    widths = _spread(probs)
    widths.setflags(write=False)
    return EvolutionTrace(times, survival, probs, widths, amps)


# --------------------------------------------------------------------------
# Revivals


@dataclass(frozen=True)
class RevivalReport:
    method: str
    period: float | None
    kind: str
    residual: float
    translated_offset: int | None = None

    def __post_init__(self):
        if self.kind == "exact" and not self.residual <= EXACT_TOL:
            raise ValueError("an exact revival needs residual <= 1e-9")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "period": self.period,
            "kind": self.kind,
            "residual": self.residual,
            "translated_offset": self.translated_offset,
        }


def _level_weights(h: TorusHamiltonian, psi0: StateVector):
    spec = h.spectrum
    w = np.abs(spec.eigenvectors.conj().T @ psi0.c) ** 2
    return spec.eigenvalues, w


def survival_grid_period(
    h: TorusHamiltonian,
    psi0: StateVector,
    t_max: float = 8 * math.pi,
    steps: int = 4096,
    tol: float = 1e-6,
) -> RevivalReport:
    """First return of ``|A(t)|`` to one on a time grid, refined locally.

    ``A(t) = sum_n p_n exp(-i E_n t)`` with ``p_n`` the weight of ``psi0`` on
    level ``n``. Every interior local minimum of ``1 - |A|`` on the grid is
    polished to 1e-10 in ``t`` (root of ``d|A|^2/dt``, or a bounded
    minimisation when the derivative does not change sign); the earliest one
    within ``tol`` is reported.
    """
    if steps < 100:
        raise ValueError("steps must be at least 100")
    e, w = _level_weights(h, psi0)
    keep = w > 1e-15
    e, w = e[keep], w[keep]
    if np.ptp(e) <= 1e-12 * max(1.0, np.max(np.abs(e))):
        # a single populated level never changes
        return RevivalReport("grid", None, "exact", 0.0)
    e = e - e[0]

    def amp(t):
        return np.sum(w * np.exp(-1j * e * t))

    def loss(t):
        return 1.0 - abs(amp(t))

    def slope(t):
        a = amp(t)
        da = np.sum(-1j * e * w * np.exp(-1j * e * t))
        return 2.0 * (a.conjugate() * da).real

    grid = np.linspace(0.0, t_max, steps + 1)
    vals = 1.0 - np.abs(np.exp(-1j * np.outer(grid, e)) @ w)
    best_candidate = None
    for i in range(1, steps + 1):
        right = vals[i + 1] if i < steps else math.inf
        if not (vals[i] <= vals[i - 1] and vals[i] <= right):
            continue
        lo, hi = grid[i - 1], grid[min(i + 1, steps)]
        if vals[i] - min(loss(lo), loss(hi)) > 0:
            continue
        try:
            t_star = brentq(slope, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        except ValueError:
            opt = minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-11})
            t_star = float(opt.x)
        f = loss(t_star)
        if f <= tol:
            kind = "exact" if f <= EXACT_TOL else "approximate"
            return RevivalReport("grid", float(t_star), kind, float(max(f, 0.0)))
        if best_candidate is None or f < best_candidate[1]:
            best_candidate = (t_star, f)
    residual = float(best_candidate[1]) if best_candidate else float(np.min(vals[1:]))
    return RevivalReport("grid", None, "none", residual)


def _convergent(x: float, tol: float, max_den: int) -> Fraction | None:
    """Smallest-denominator continued-fraction convergent within ``tol`` of ``x``."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    y = x
    for _ in range(64):
        a = math.floor(y)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_den:
            return None
        if abs(x - h1 / k1) <= tol:
            return Fraction(h1, k1)
        frac = y - a
        if frac <= 0:
            return Fraction(h1, k1)
        y = 1.0 / frac
    return None


def spectral_period(h: TorusHamiltonian, tol: float | None = None) -> RevivalReport:
    """State-independent period from commensurability of the energy gaps.

    Gaps ``E_i - E_0`` are expressed as rational multiples of the first gap;
    their common quantum ``g`` gives period ``2 pi / g``. ``tol`` is the
    absolute gap tolerance, 1e-9 times the largest gap by default.
    """
    e = np.asarray(h.spectrum.eigenvalues)
    scale = max(float(np.max(np.abs(e))), 1.0)
    levels = [e[0]]
    for x in e[1:]:
        if x - levels[-1] > 1e-10 * scale:
            levels.append(x)
    if len(levels) == 1:
        return RevivalReport("spectral", None, "exact", 0.0)
    gaps = np.array(levels[1:]) - levels[0]
    top = float(gaps[-1])
    if tol is None:
        tol = 1e-9 * top
    base = float(gaps[0])
    rel = tol / base
    # a convergent with denominator q matches any real to about 1/q^2, so
    # allowing q near rel^(-1/2) would accept every spectrum
    max_den = int(min(1e6, 0.1 / math.sqrt(rel)))
    fracs = []
    for g in gaps:
        fr = _convergent(float(g / base), rel, max(max_den, 1))
        if fr is None:
            return RevivalReport("spectral", None, "none", float(np.inf))
        fracs.append(fr)
    q = 1
    for fr in fracs:
        q = q * fr.denominator // math.gcd(q, fr.denominator)
    ints = [fr.numerator * (q // fr.denominator) for fr in fracs]
    g_int = 0
    for m in ints:
        g_int = math.gcd(g_int, m)
    quantum = base * g_int / q
    counts = np.array([m // g_int for m in ints], dtype=float)
    # refit the quantum on all gaps, then measure the misfit
    quantum = float(counts @ gaps / (counts @ counts))
    residual = float(np.max(np.abs(gaps - counts * quantum)) / top)
    if residual * top > tol:
        return RevivalReport("spectral", None, "none", residual)
    return RevivalReport("spectral", 2 * math.pi / quantum, "exact", residual)


def translated_revival(h: TorusHamiltonian, psi0: StateVector, t: float) -> tuple[int, float]:
    """Best cyclic translate of ``psi0`` matching ``psi(t)``.

    Returns ``(s, fidelity)`` maximising ``|<roll(psi0, s) | psi(t)>|``, where
    ``roll`` moves amplitude from site ``j`` to ``j + s``.
    """
    psi_t = _propagate(h, psi0.c, np.array([float(t)]))[0] if t != 0 else psi0.c
    n = psi0.n
    overlaps = np.array([abs(np.vdot(np.roll(psi0.c, s), psi_t)) for s in range(n)])
    s = int(np.argmax(np.round(overlaps, 12)))
    return s, float(overlaps[s])


# --------------------------------------------------------------------------
# Small N/k closed forms


def closed_form_coefficient(ratio: int, t: float) -> float:
    """Printed coefficient of ``|u_j>`` in ``exp(-i H t)|u_j>`` for N/k = 2, 4, 6."""
    c = math.cos(t)
    if ratio == 2:
        return c
    if ratio == 4:
        return c * c
    if ratio == 6:
        return (2 * c * c + 2 * c - 1) / 3
    raise ValueError(f"closed form is available for N/k in (2, 4, 6), not {ratio}")


@dataclass(frozen=True)
class ClosedFormFit:
    ratio: int
    k: int
    scale: float
    residual: float
    unit_residual: float
    period: float | None

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "k": self.k,
            "scale": self.scale,
            "residual": self.residual,
            "unit_residual": self.unit_residual,
            "period": self.period,
        }


def return_probability(h: TorusHamiltonian, j: int, times) -> np.ndarray:
    """``|<u_j| exp(-i H t) |u_j>|^2`` on a time array."""
    spec = h.spectrum
    w = np.abs(spec.eigenvectors[j]) ** 2
    amp = np.exp(-1j * np.outer(np.asarray(times, float), spec.eigenvalues)) @ w
    return np.abs(amp) ** 2


def fit_closed_form(ratio: int, k: int = 1, scales=None, samples: int = 400) -> ClosedFormFit:
    """Compare the printed coefficient with the computed return probability.

    Finds the factor ``s`` for which ``|coef(s t)|^2`` best matches the numbers
    (max deviation over one window of ``t``), scanning ``scales`` and polishing
    the best grid point. ``unit_residual`` is the mismatch at ``s = 1``.
    """
    h = build_hamiltonian(ratio * k, k)
    ts = np.linspace(0.0, 2 * math.pi, samples)
    # return amplitude is site independent for this Hamiltonian; check site 0
    target = return_probability(h, 0, ts)
    coef = np.vectorize(lambda x: closed_form_coefficient(ratio, x))

    def misfit(s):
        return float(np.max(np.abs(coef(s * ts) ** 2 - target)))

    if scales is None:
        scales = np.linspace(0.25, 4.0, 61)
    grid = np.array([misfit(s) for s in scales])
    i = int(np.argmin(grid))
    lo, hi = scales[max(i - 1, 0)], scales[min(i + 1, len(scales) - 1)]
    opt = minimize_scalar(misfit, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    s, r = (float(opt.x), float(opt.fun)) if opt.fun < grid[i] else (float(scales[i]), float(grid[i]))
    return ClosedFormFit(ratio, k, s, r, misfit(1.0), spectral_period(h).period)
