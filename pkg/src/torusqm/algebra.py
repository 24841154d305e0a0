"""Clock, shift and Schwinger operators on the N-site phase-space torus.

Position eigenstates ``|u_j>`` are the standard basis vectors ``e_j``. The
clock ``U`` is diagonal with entries ``exp(2 pi i j / N)``, the shift ``V``
lowers the site label (``V e_j = e_{j-1}``), and they satisfy
``V U = exp(2 pi i / N) U V``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import matmul

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseSpaceParams:
    """Dimension and unit conventions of the lattice.

    ``alpha`` and ``beta`` scale position and momentum inside ``U = exp(i alpha Q)``
    and ``V = exp(i beta P)``. Left unset they take the Planck-length choice
    ``alpha = sqrt(2 pi / (N^{3/2} l_p^2))``, ``beta = sqrt(2 pi l_p^2 / (N^{1/2} hbar^2))``.
    Supplying one of them fixes the other through ``alpha beta = 2 pi / (hbar N)``.
    """

    n: int
    hbar: float = 1.0
    planck_length: float = 1.0
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if self.hbar <= 0 or self.planck_length <= 0:
            raise ValueError("hbar and planck_length must be positive")
        n, hbar, lp = int(self.n), float(self.hbar), float(self.planck_length)
        product = TWO_PI / (hbar * n)
        alpha, beta = self.alpha, self.beta
        if alpha is None and beta is None:
            alpha = math.sqrt(TWO_PI / (n**1.5 * lp**2))
            beta = math.sqrt(TWO_PI * lp**2 / (n**0.5 * hbar**2))
        elif alpha is None:
            alpha = product / beta
        elif beta is None:
            beta = product / alpha
        if alpha <= 0 or beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if abs(alpha * beta - product) > 1e-12 * product:
            raise ValueError("alpha * beta must equal 2 pi / (hbar N)")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "beta", float(beta))

    @property
    def radius(self) -> float:
        """Compactification radius R with N l_p = 2 pi R."""
        return self.n * self.planck_length / TWO_PI

    @property
    def q_spacing(self) -> float:
        """Position eigenvalue spacing, Q_j = j * beta * hbar."""
        return self.beta * self.hbar

    @property
    def p_spacing(self) -> float:
        """Momentum eigenvalue spacing, P_k = k * alpha * hbar."""
        return self.alpha * self.hbar


def as_params(params) -> PhaseSpaceParams:
    if isinstance(params, PhaseSpaceParams):
        return params
    return PhaseSpaceParams(int(params))


@dataclass(frozen=True)
class SchwingerIndex:
    """Index triple (m, n, j) reduced to representatives in {0, ..., N-1}."""

    dim: int
    m: int
    n: int
    j: int = 0

    def __post_init__(self):
        for name in ("m", "n", "j"):
            object.__setattr__(self, name, int(getattr(self, name)) % self.dim)


def _phase(numerator: int, n: int) -> complex:
    """exp(i pi numerator / n), with the exponent reduced exactly mod 2n."""
    r = numerator % (2 * n)
    return complex(np.exp(1j * math.pi * r / n))


def clock(params) -> np.ndarray:
    p = as_params(params)
    j = np.arange(p.n)
    return np.diag(np.exp(2j * np.pi * j / p.n))


def shift(params) -> np.ndarray:
    p = as_params(params)
    n = p.n
    v = np.zeros((n, n), dtype=complex)
    j = np.arange(n)
    v[(j - 1) % n, j] = 1.0
    return v


def clock_power(params, m: int) -> np.ndarray:
    """U^m, evaluated entrywise so that large powers carry no rounding drift."""
    p = as_params(params)
    j = np.arange(p.n)
    return np.diag(np.exp(2j * np.pi * ((m * j) % p.n) / p.n))


def shift_power(params, n_: int) -> np.ndarray:
    p = as_params(params)
    n = p.n
    v = np.zeros((n, n), dtype=complex)
    j = np.arange(n)
    v[(j - n_) % n, j] = 1.0
    return v


def representative_sign(dim: int, m: int, n: int) -> int:
    """Sign relating S_{m,n} built from raw integers to its canonical form.

    With m = m' + a N and n = n' + b N (m', n' canonical) the scalar phase
    exp(i pi m n / N) differs from exp(i pi m' n' / N) by (-1)^(m' b + a n' + a b N).
    """
    a, mr = divmod(m, dim)
    b, nr = divmod(n, dim)
    return -1 if (mr * b + a * nr + a * b * dim) % 2 else 1


def schwinger(params, m: int, n: int, canonical: bool = True) -> np.ndarray:
    """S_mn = exp(i pi m n / N) U^m V^n.

    With ``canonical=True`` the indices are first reduced to {0, ..., N-1};
    otherwise the scalar phase uses the integers as given.
    """
    p = as_params(params)
    dim = p.n
    m, n = int(m), int(n)
    if canonical:
        m, n = m % dim, n % dim
    return _phase(m * n, dim) * matmul(clock_power(p, m), shift_power(p, n))


def t_operator(params, k: int) -> np.ndarray:
    """Hopping operator with the site-dependent phase folded into each column.

    Column j holds ``exp(4 pi i j k / N)`` in row ``j + k mod N``: the action
    of ``exp(-i alpha_1(j; (k, -k))) S_{k,-k}`` on ``|u_j>`` with
    ``alpha_1(j; (m, n)) = (pi / N)(2 j - m) n``.
    """
    p = as_params(params)
    dim = p.n
    k = int(k)
    if not 1 <= k <= dim - 1:
        raise ValueError(f"k must satisfy 1 <= k <= N-1, got k={k}, N={dim}")
    j = np.arange(dim)
    t = np.zeros((dim, dim), dtype=complex)
    t[(j + k) % dim, j] = np.exp(2j * np.pi * ((2 * j * k) % dim) / dim)
    return t


def schwinger_decompose(params, o) -> dict[tuple[int, int], complex]:
    """Coefficients O_mn = tr(S_mn^H O) / N, so that O = sum O_mn S_mn."""
    p = as_params(params)
    dim = p.n
    o = np.asarray(o, dtype=complex)
    if o.shape != (dim, dim):
        raise ValueError(f"operator shape {o.shape} does not match N={dim}")
    j = np.arange(dim)
    m = np.arange(dim)[:, None]
    coeffs = {}
    for n in range(dim):
        band = o[(j - n) % dim, j]
        # conj of the S_mn action phase exp(i pi (2j - n) m / N)
        kernel = np.exp(-1j * np.pi * (((2 * j[None, :] - n) * m) % (2 * dim)) / dim)
        values = kernel @ band / dim
        for mm in range(dim):
            coeffs[(mm, n)] = complex(values[mm])
    return coeffs


def schwinger_reconstruct(params, coeffs: dict[tuple[int, int], complex]) -> np.ndarray:
    p = as_params(params)
    out = np.zeros((p.n, p.n), dtype=complex)
    for (m, n), c in coeffs.items():
        if c != 0:
            out += c * schwinger(p, m, n)
    return out


# --------------------------------------------------------------------------
# Identity checks


@dataclass
class IdentityResult:
    name: str
    residual: float
    passed: bool
    note: str = ""


@dataclass
class IdentityReport:
    n: int
    tol: float
    identities: list[IdentityResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.identities)

    def get(self, name: str) -> IdentityResult:
        for r in self.identities:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "identities": [
                {"name": r.name, "residual": r.residual, "pass": r.passed, "note": r.note}
                for r in self.identities
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _monomial(mat: np.ndarray):
    """Split a monomial matrix into (row index per column, entry per column)."""
    rows = np.argmax(np.abs(mat), axis=0)
    cols = np.arange(mat.shape[1])
    vals = mat[rows, cols]
    rest = mat.copy()
    rest[rows, cols] = 0.0
    return rows, vals, float(np.max(np.abs(rest))) if rest.size else 0.0


def similarity_phase(dim: int, m: int, n: int, r: int, s: int) -> complex:
    """Derived phase of S_mn S_rs S_mn^{-1} relative to S_rs: exp(2 pi i (n r - m s) / N)."""
    return complex(np.exp(2j * np.pi * ((n * r - m * s) % dim) / dim))


def check_identities(params, tol: float = 1e-12, samples: int = 200, seed: int = 0) -> IdentityReport:
    """Evaluate the operator identities of the Schwinger basis as matrix residuals.

    Every residual is a max-norm. Index arithmetic is mod N; where reducing an
    index changes the scalar phase by a sign the expected sign is computed from
    ``representative_sign`` and the number of such cases goes in the note.
    Associativity is checked on ``samples`` random triples.
    """
    p = as_params(params)
    dim = p.n
    if dim > 64:
        raise ValueError("check_identities is limited to N <= 64")
    report = IdentityReport(n=dim, tol=tol)

    def add(name, residual, note=""):
        residual = float(residual)
        report.identities.append(IdentityResult(name, residual, residual <= tol, note))

    u = clock(p)
    v = shift(p)
    omega = np.exp(2j * np.pi / dim)
    eye = np.eye(dim)

    add(
        "commutation",
        np.max(np.abs(matmul(v, u) - omega * matmul(u, v))),
        f"V U = exp(2 pi i/N) U V; factor {omega.real:.12g}{omega.imag:+.12g}i",
    )
    add(
        "order",
        max(
            np.max(np.abs(np.linalg.matrix_power(u, dim) - eye)),
            np.max(np.abs(np.linalg.matrix_power(v, dim) - eye)),
        ),
        "U^N = V^N = 1",
    )

    # Dense S_mn for every canonical (m, n), plus their monomial form.
    mats = {}
    rows = np.zeros((dim, dim, dim), dtype=int)
    vals = np.zeros((dim, dim, dim), dtype=complex)
    offmono = 0.0
    for m in range(dim):
        for n in range(dim):
            s_mn = schwinger(p, m, n)
            mats[(m, n)] = s_mn
            rws, vls, rest = _monomial(s_mn)
            rows[m, n] = rws
            vals[m, n] = vls
            offmono = max(offmono, rest)

    # action: S_mn |u_j> = exp(i pi (2j - n) m / N) |u_{j-n}>
    j = np.arange(dim)
    act = 0.0
    for m in range(dim):
        for n in range(dim):
            expected = np.exp(1j * np.pi * (((2 * j - n) * m) % (2 * dim)) / dim)
            if np.any(rows[m, n] != (j - n) % dim):
                act = max(act, 1.0)
            act = max(act, float(np.max(np.abs(vals[m, n] - expected))))
    add("action", max(act, offmono), "S_mn|u_j> = exp(i pi (2j-n) m/N)|u_(j-n)>")

    add("identity", np.max(np.abs(mats[(0, 0)] - eye)), "S_00 = 1")

    # product: S_rs S_mn = exp(i pi (m s - n r)/N) S_(m+r)(n+s), by composing
    # the monomial forms: (S_rs S_mn) e_j = vals[m,n][j] vals[r,s][j-n] e_(j-n-s)
    idx = np.arange(dim)
    r_g, m_g = np.meshgrid(idx, idx, indexing="ij")  # [r, m]
    prod = 0.0
    flips = 0
    for n in range(dim):
        for s_ in range(dim):
            left = vals[None, :, n, :] * vals[:, s_, (j - n) % dim][:, None, :]  # [r, m, j]
            a, _ = np.divmod(m_g + r_g, dim)
            b, nr = divmod(n + s_, dim)
            mr = (m_g + r_g) % dim
            sign = np.where((mr * b + a * nr + a * b * dim) % 2, -1.0, 1.0)
            flips += int(np.count_nonzero(sign < 0))
            phase = np.exp(1j * np.pi * ((m_g * s_ - n * r_g) % (2 * dim)) / dim)
            expected = (sign * phase)[:, :, None] * vals[mr, nr, :]
            prod = max(prod, float(np.max(np.abs(left - expected))))
    add(
        "product",
        prod,
        f"indices mod N; {flips} of {dim**4} index tuples carry sign -1 from representative choice",
    )

    inv = 0.0
    inv_flips = 0
    for (m, n), s_mn in mats.items():
        dag = s_mn.conj().T
        inv = max(inv, float(np.max(np.abs(matmul(dag, s_mn) - eye))))
        sign = representative_sign(dim, -m, -n)
        if sign < 0:
            inv_flips += 1
        inv = max(inv, float(np.max(np.abs(dag - sign * mats[((-m) % dim, (-n) % dim)]))))
    add("inverse", inv, f"S_mn^H = S_mn^-1 = S_(-m)(-n); {inv_flips} sign flips")

    # similarity, again on monomial forms:
    # S_mn S_rs S_mn^H e_j = conj(v_mn[j+n]) v_rs[j+n] v_mn[j+n-s] e_(j-s)
    sim = 0.0
    for n in range(dim):
        for s_ in range(dim):
            vm_a = vals[:, n, (j + n) % dim]  # [m, j]
            vm_b = vals[:, n, (j + n - s_) % dim]
            vr_a = vals[:, s_, (j + n) % dim]  # [r, j]
            vr_0 = vals[:, s_, :]
            lhs = (vm_a.conj() * vm_b)[:, None, :] * vr_a[None, :, :]  # [m, r, j]
            phase = np.exp(2j * np.pi * ((n * r_g.T - m_g.T * s_) % dim) / dim)  # [m, r]
            rhs = phase[:, :, None] * vr_0[None, :, :]
            sim = max(sim, float(np.max(np.abs(lhs - rhs))))
    add(
        "similarity",
        sim,
        "derived: S_mn S_rs S_mn^-1 = exp(2 pi i (n r - m s)/N) S_rs "
        "(the site-dependent printed phase is not an operator identity)",
    )

    rng = np.random.default_rng(seed)
    keys = list(mats)
    assoc = 0.0
    for _ in range(samples):
        a, b, c = (mats[keys[i]] for i in rng.integers(0, len(keys), size=3))
        assoc = max(assoc, float(np.max(np.abs(matmul(matmul(a, b), c) - matmul(a, matmul(b, c))))))
    add("associativity", assoc, f"{samples} sampled triples")
    return report
