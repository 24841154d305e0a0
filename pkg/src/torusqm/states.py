"""States on the torus: minimum-uncertainty packets, Gaussians and expectations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import PhaseSpaceParams, as_params
from .linalg import dft

DELTA_FLOOR = 1e-14


class DegenerateRecurrence(ValueError):
    """The coefficient recurrence has more than one vanishing step."""


class NoConvergence(RuntimeError):
    """Target expectations were not reached; carries the best spec found."""

    def __init__(self, message: str, spec: "MusSpec", residual: float):
        super().__init__(message)
        self.spec = spec
        self.residual = residual


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised position amplitudes ``c_j``; ``d`` are the momentum amplitudes."""

    params: PhaseSpaceParams
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=complex, copy=True)
        if c.shape != (self.params.n,):
            raise ValueError(f"expected {self.params.n} amplitudes, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(c)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalised (norm {norm!r})")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_amplitudes(cls, params, amplitudes) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(a)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("cannot normalise a zero or non-finite vector")
        return cls(as_params(params), a / norm)

    @property
    def n(self) -> int:
        return self.params.n

    @cached_property
    def d(self) -> np.ndarray:
        d = dft(self.c, "forward")
        d.setflags(write=False)
        return d

    @property
    def probs(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    @property
    def momentum_probs(self) -> np.ndarray:
        return np.abs(self.d) ** 2

    def to_dict(self) -> dict:
        return {"n": self.n, "c": [[float(z.real), float(z.imag)] for z in self.c]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict, params: PhaseSpaceParams | None = None) -> "StateVector":
        params = params or PhaseSpaceParams(int(data["n"]))
        c = np.array([complex(re, im) for re, im in data["c"]])
        return cls.from_amplitudes(params, c)

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        return cls.from_dict(json.loads(text))


def basis_state(params, j: int) -> StateVector:
    p = as_params(params)
    c = np.zeros(p.n, dtype=complex)
    c[int(j) % p.n] = 1.0
    return StateVector(p, c)


def uniform_state(params) -> StateVector:
    p = as_params(params)
    return StateVector(p, np.full(p.n, 1.0 / math.sqrt(p.n), dtype=complex))


def random_state(params, rng: np.random.Generator) -> StateVector:
    p = as_params(params)
    return StateVector.from_amplitudes(p, rng.normal(size=p.n) + 1j * rng.normal(size=p.n))


# --------------------------------------------------------------------------
# Minimum-uncertainty states


def _principal_arg_order(z: np.ndarray) -> np.ndarray:
    ang = np.angle(z)
    ang = np.where(ang <= -math.pi, math.pi, ang)
    return np.lexsort((np.arange(z.size), np.abs(z), ang))


def _nth_roots(n: int, log_value: complex) -> np.ndarray:
    """All w with w^n = exp(log_value), sorted by argument in (-pi, pi]."""
    base = log_value / n
    roots = np.exp(base + 2j * np.pi * np.arange(n) / n)
    return roots[_principal_arg_order(roots)]


def _log_one_plus(n: int, x: complex, sign: float) -> complex | None:
    """log(x^n + sign), without overflowing for |x| > 1; None if it is log 0."""
    if abs(x) > 1.0:
        with np.errstate(under="ignore", over="ignore"):
            inv = x ** (-n) if n * math.log(abs(x)) < 700 else 0.0
        return n * np.log(x) + np.log1p(sign * inv)
    z = x**n + sign
    if abs(z) < 1e-12:
        return None
    return complex(np.log(z))


def lambda_roots(params, mu: complex) -> np.ndarray:
    """The N solutions of lambda^N = mu^N - 1, ascending in argument.

    When mu^N = 1 (to 1e-12) every root is 0: the V-eigenstate family.
    """
    p = as_params(params)
    mu = complex(mu)
    log_value = _log_one_plus(p.n, mu, -1.0)
    if log_value is None:
        return np.zeros(p.n, dtype=complex)
    return _nth_roots(p.n, log_value)


def mu_roots(params, lam: complex) -> np.ndarray:
    """The N solutions of mu^N = 1 + lambda^N, ascending in argument."""
    p = as_params(params)
    lam = complex(lam)
    log_value = _log_one_plus(p.n, lam, 1.0)
    if log_value is None:
        return np.zeros(p.n, dtype=complex)
    return _nth_roots(p.n, log_value)


def constraint_residual(n: int, mu: complex, lam: complex) -> float:
    """|mu^N - lambda^N - 1| relative to max(1, |mu|^N)."""
    if abs(mu) > 1.0:
        with np.errstate(under="ignore", over="ignore"):
            inv = mu ** (-n) if n * math.log(abs(mu)) < 700 else 0.0
        return float(abs(1.0 - (lam / mu) ** n - inv))
    return float(abs(mu**n - lam**n - 1.0))


@dataclass(frozen=True)
class MusSpec:
    """(mu, lambda) pair selecting a minimum-uncertainty state.

    ``lam`` is the ``root_index``-th entry of ``lambda_roots(params, mu)``.
    """

    params: PhaseSpaceParams
    mu: complex
    lam: complex
    root_index: int

    def __post_init__(self):
        n = self.params.n
        if not 0 <= self.root_index < n:
            raise ValueError(f"root_index must lie in [0, {n - 1}]")
        if constraint_residual(n, self.mu, self.lam) > 1e-9:
            raise ValueError("mu^N - lambda^N = 1 is violated")
        expected = lambda_roots(self.params, self.mu)[self.root_index]
        if abs(expected - self.lam) > 1e-9 * max(1.0, abs(self.lam)):
            raise ValueError(f"lambda is not root {self.root_index} of mu^N - 1")

    @classmethod
    def from_mu(cls, params, mu: complex, root_index: int = 0) -> "MusSpec":
        p = as_params(params)
        if not 0 <= root_index < p.n:
            raise ValueError(f"root_index must lie in [0, {p.n - 1}]")
        roots = lambda_roots(p, mu)
        return cls(p, complex(mu), complex(roots[root_index]), int(root_index))

    @classmethod
    def from_pair(cls, params, mu: complex, lam: complex) -> "MusSpec":
        """Spec for an explicit (mu, lambda), snapping to the nearest admissible root."""
        p = as_params(params)
        roots = lambda_roots(p, mu)
        i = int(np.argmin(np.abs(roots - complex(lam))))
        return cls(p, complex(mu), complex(roots[i]), i)

    def deltas(self) -> np.ndarray:
        j = np.arange(self.params.n)
        return self.mu - self.lam * np.exp(2j * np.pi * j / self.params.n)

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "mu": [self.mu.real, self.mu.imag],
            "lambda": [self.lam.real, self.lam.imag],
            "root_index": self.root_index,
        }


def _mus_amplitudes(n: int, mu: complex, lam: complex) -> np.ndarray:
    j = np.arange(n)
    deltas = mu - lam * np.exp(2j * np.pi * j / n)
    mags = np.abs(deltas)
    order = np.argsort(mags, kind="stable")
    if n > 1 and mags[order[1]] < DELTA_FLOOR:
        raise DegenerateRecurrence(
            f"steps {int(order[0])} and {int(order[1])} of the recurrence both vanish"
        )
    # Start the chain just after the smallest step so that step is never used;
    # its value is fixed by the closure condition and is the one most exposed
    # to cancellation. Log form keeps the products finite for large N.
    start = (int(order[0]) + 1) % n
    chain = (start + np.arange(n - 1)) % n
    with np.errstate(divide="ignore"):
        logs = np.log(deltas[chain])
    logc = np.empty(n, dtype=complex)
    logc[start] = 0.0
    logc[(start + 1 + np.arange(n - 1)) % n] = np.cumsum(logs)
    logc -= np.max(logc.real)
    c = np.exp(logc)
    c /= np.linalg.norm(c)
    peak = int(np.argmax(np.round(np.abs(c), 12)))
    return c * (abs(c[peak]) / c[peak])


def mus_state(spec: MusSpec) -> StateVector:
    """Eigenvector of V + lambda U with eigenvalue mu, normalised.

    Amplitudes follow ``c_{j+1} = (mu - lambda exp(2 pi i j / N)) c_j``; the
    largest amplitude is made real positive.
    """
    return StateVector(spec.params, _mus_amplitudes(spec.params.n, spec.mu, spec.lam))


# --------------------------------------------------------------------------
# Expectations


@dataclass(frozen=True)
class ExpectationSet:
    exp_u: complex
    exp_v: complex
    disp_u: float
    disp_v: float
    cross: complex

    def to_dict(self) -> dict:
        return {
            "exp_u": [self.exp_u.real, self.exp_u.imag],
            "exp_v": [self.exp_v.real, self.exp_v.imag],
            "disp_u": self.disp_u,
            "disp_v": self.disp_v,
            "cross": [self.cross.real, self.cross.imag],
        }


def _expectations(c: np.ndarray, d: np.ndarray | None = None):
    n = c.shape[0]
    phases = np.exp(2j * np.pi * np.arange(n) / n)
    if d is None:
        d = dft(c, "forward")
    exp_u = complex(np.sum(np.abs(c) ** 2 * phases))
    exp_v = complex(np.sum(np.abs(d) ** 2 * phases))
    return exp_u, exp_v, phases


def expectations(state: StateVector) -> ExpectationSet:
    """<U>, <V>, the dispersions <dU^H dU>, <dV^H dV> and the cross term <dV^H dU>.

    <V> is evaluated in the momentum basis, where V is diagonal; the
    dispersions and cross term come from the shifted vectors dU psi, dV psi.
    """
    c = state.c
    exp_u, exp_v, phases = _expectations(c, state.d)
    du = phases * c - exp_u * c
    dv = np.roll(c, -1) - exp_v * c
    disp_u = float(np.vdot(du, du).real)
    disp_v = float(np.vdot(dv, dv).real)
    cross = complex(np.vdot(dv, du))
    return ExpectationSet(exp_u, exp_v, disp_u, disp_v, cross)


# --------------------------------------------------------------------------
# Fitting (mu, lambda) to target expectations


def _nearest(values: np.ndarray, target: complex) -> int:
    return int(np.argmin(np.abs(values - target)))


def _target_residual(n, mu, lam, tu, tv):
    try:
        c = _mus_amplitudes(n, mu, lam)
    except DegenerateRecurrence:
        return None
    eu, ev, _ = _expectations(c)
    return np.array([(eu - tu).real, (eu - tu).imag, (ev - tv).real, (ev - tv).imag])


def _partner(n, free, value, previous):
    """The conjugate parameter on the branch nearest ``previous``."""
    roots = mu_roots(n, value) if free == "lam" else lambda_roots(n, value)
    return roots[_nearest(roots, previous)]


def _levenberg_marquardt(n, lam0, mu0, tu, tv, tol, max_iter):
    """Damped Gauss-Newton on one of (lambda, mu); the other follows its branch.

    The free variable is the one of smaller modulus: the partner then moves
    by a factor (small/large)^(N-1) less, which keeps the map well conditioned
    on both sides of |mu| = |lambda|.
    """
    free = "lam" if abs(lam0) <= abs(mu0) else "mu"
    x, y = (lam0, mu0) if free == "lam" else (mu0, lam0)

    def evaluate(xv, yv):
        lam, mu = (xv, yv) if free == "lam" else (yv, xv)
        return _target_residual(n, mu, lam, tu, tv)

    res = evaluate(x, y)
    if res is None:
        return None
    cost = float(res @ res)
    damping = 1e-3
    for _ in range(max_iter):
        if np.sum(np.hypot(res[0::2], res[1::2])) <= 0.1 * tol:
            break
        h = 1e-7 * max(1.0, abs(x))
        jac = np.empty((4, 2))
        for col, step in enumerate((h, 1j * h)):
            rt = evaluate(x + step, _partner(n, free, x + step, y))
            if rt is None:
                break
            jac[:, col] = (rt - res) / h
        else:
            jtj = jac.T @ jac
            grad = jac.T @ res
            improved = False
            step = 0.0
            for _ in range(12):
                delta = np.linalg.solve(jtj + damping * np.diag(np.diag(jtj) + 1e-12), -grad)
                step = complex(delta[0], delta[1])
                y_new = _partner(n, free, x + step, y)
                r_new = evaluate(x + step, y_new)
                if r_new is not None and float(r_new @ r_new) < cost:
                    x, y, res, cost = x + step, y_new, r_new, float(r_new @ r_new)
                    damping = max(damping / 3, 1e-12)
                    improved = True
                    break
                damping *= 4
            if improved and abs(step) > 1e-15 * max(1.0, abs(x)):
                continue
        break
    lam, mu = (x, y) if free == "lam" else (y, x)
    return lam, mu, cost


def solve_mus_for_targets(
    params,
    target_u: complex,
    target_v: complex,
    tol: float = 1e-6,
    max_iter: int = 200,
    strict: bool = True,
    n_phases: int = 32,
    n_starts: int = 12,
) -> MusSpec:
    """Find (mu, lambda) whose state has the requested <U> and <V>.

    Multi-start damped least squares over lambda. Starts come from a scan of
    ``n_phases`` phases of lambda times every branch of ``mu^N = 1 + lambda^N``;
    the ``n_starts`` best are polished. The
    continuous family of minimum-uncertainty states has two real parameters,
    so arbitrary targets are generally out of reach; the best spec is then
    attached to ``NoConvergence``, or returned when ``strict`` is false.
    """
    p = as_params(params)
    n = p.n
    tu, tv = complex(target_u), complex(target_v)
    if abs(tu) >= 1 or abs(tv) > 1:
        raise ValueError("targets must satisfy |<U>| < 1 and |<V>| <= 1")
    # |lambda|^2 = disp_v / disp_u for a minimum-uncertainty state; the phase
    # of lambda is not fixed by the targets, so scan it on a coarse grid
    # across all N branches and polish the most promising starts.
    mag = math.sqrt(max(1.0 - abs(tv) ** 2, 0.0) / (1.0 - abs(tu) ** 2))
    phases = [0.0] if mag == 0 else 2 * math.pi * np.arange(n_phases) / n_phases - math.pi
    seeds = []
    for phi in phases:
        lam0 = complex(mag * math.cos(phi), mag * math.sin(phi))
        for branch, mu0 in enumerate(mu_roots(n, lam0)):
            res = _target_residual(n, mu0, lam0, tu, tv)
            if res is not None:
                seeds.append((float(np.sum(np.hypot(res[0::2], res[1::2]))), branch, lam0, mu0))
    seeds.sort(key=lambda item: (item[0], item[1]))

    best = None
    for _, branch, lam0, mu0 in seeds[:n_starts]:
        out = _levenberg_marquardt(n, lam0, mu0, tu, tv, tol, max_iter)
        if out is None:
            continue
        lam, mu, _ = out
        res = _target_residual(n, mu, lam, tu, tv)
        score = float(np.sum(np.hypot(res[0::2], res[1::2])))
        if best is None or score < best[0]:
            best = (score, lam, mu)
        if score <= 0.1 * tol:
            break
    if best is None:
        raise NoConvergence("no start produced a valid state", None, math.inf)

    score, lam, mu = best
    spec = MusSpec.from_pair(p, mu, lam)
    res = _target_residual(n, spec.mu, spec.lam, tu, tv)
    score = float(np.sum(np.hypot(res[0::2], res[1::2])))
    if score > tol and strict:
        raise NoConvergence(
            f"closest state misses the targets by {score:.3e} (> {tol:.1e})", spec, score
        )
    return spec


# --------------------------------------------------------------------------
# Wrapped Gaussians


def gaussian_state(params, center_j: float, sigma_q: float, momentum_k: float = 0.0) -> StateVector:
    """Continuum Gaussian sampled on the lattice and summed over torus images.

    ``sigma_q`` is the position width in physical units (``|c_j|^2`` has
    variance ``sigma_q^2`` in the continuum). ``center_j`` is in sites and
    ``momentum_k`` in momentum-lattice units, so the mean momentum is
    ``momentum_k * alpha * hbar``.
    """
    p = as_params(params)
    if sigma_q <= 0:
        raise ValueError("sigma_q must be positive")
    n = p.n
    dq = p.q_spacing
    period = dq * n
    q = dq * np.arange(n)
    q_mean = dq * center_j
    p_mean = momentum_k * p.p_spacing
    # images beyond |w| = W contribute below exp(-37) ~ 1e-16 relative
    wraps = 1 + int(math.ceil(2.0 * sigma_q * math.sqrt(37.0) / period))
    c = np.zeros(n, dtype=complex)
    for w in range(-wraps, wraps + 1):
        x = q + w * period
        c += np.exp(-((x - q_mean) ** 2) / (4.0 * sigma_q**2) + 1j * p_mean * x / p.hbar)
    return StateVector.from_amplitudes(p, c)
