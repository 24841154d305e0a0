"""Acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the pytest summary
(``pytest tests/test_acceptance.py -q`` shows them at the end).
"""

import math

import numpy as np
import pytest
from scipy.optimize import curve_fit

from torusqm.algebra import PhaseSpaceParams, check_identities
from torusqm.cli import main as cli_main
from torusqm.dynamics import (
    build_hamiltonian,
    fit_closed_form,
    return_probability,
    spectral_period,
    survival_grid_period,
    translated_revival,
)
from torusqm.linalg import dft
from torusqm.states import (
    DegenerateRecurrence,
    MusSpec,
    basis_state,
    lambda_roots,
    mus_state,
    random_state,
    solve_mus_for_targets,
)
from torusqm.uncertainty import (
    InsufficientPositiveExcess,
    gaussian_probe,
    gup_excess,
    gup_scaling_sweep,
    unitary_uncertainty,
)

PI = math.pi
REF_LAMBDA = -1.497 + 0.094j
SWEEP = [64, 128, 256, 512, 1024]


def reference_mus():
    roots = lambda_roots(100, 1.5)
    return mus_state(MusSpec.from_mu(100, 1.5, int(np.argmin(np.abs(roots - REF_LAMBDA)))))


def test_01_algebra_suite(acceptance):
    worst, failed = 0.0, []
    for n in range(2, 33):
        rep = check_identities(n, tol=1e-12)
        worst = max(worst, max(r.residual for r in rep.identities))
        if not rep.all_passed:
            failed.append(n)
    ok = acceptance.record("1 algebra suite N=2..32", not failed, f"max residual {worst:.2e}")
    assert ok, failed


def test_02_mus_saturation(acceptance):
    rng = np.random.default_rng(2024)
    worst, counts = 0.0, {}
    for n in (4, 8, 16, 100):
        counts[n] = 0
        while counts[n] < 12:
            mu = complex(*rng.normal(size=2)) * 1.4
            try:
                s = mus_state(MusSpec.from_mu(n, mu, int(rng.integers(n))))
            except DegenerateRecurrence:
                continue
            worst = max(worst, abs(unitary_uncertainty(s).saturation_gap))
            counts[n] += 1
    ok = acceptance.record("2 MUS saturation", worst <= 1e-10, f"max |gap| {worst:.2e} over {sum(counts.values())} specs")
    assert ok


def test_03_reference_root(acceptance):
    dist = float(np.min(np.abs(lambda_roots(100, 1.5) - REF_LAMBDA)))
    ok = acceptance.record("3 reference lambda root", dist <= 2e-2, f"distance {dist:.2e}")
    assert ok


def test_04_revival_periods(acceptance):
    half = mus_state(solve_mus_for_targets(8, 0.5, 0.5, strict=False))
    cases = [(8, 2, PI, half, True), (8, 4, PI / 2, half, True), (100, 25, PI, reference_mus(), False)]
    notes, ok = [], True
    for n, k, period, psi, both in cases:
        h = build_hamiltonian(n, k)
        grid = survival_grid_period(h, psi)
        ok &= grid.period is not None and abs(grid.period - period) <= 1e-6
        if both:
            spec = spectral_period(h)
            ok &= spec.period is not None and abs(spec.period - period) <= 1e-6
        resid = 1 - abs(np.sum(np.abs(h.spectrum.eigenvectors.conj().T @ psi.c) ** 2
                               * np.exp(-1j * h.spectrum.eigenvalues * period)))
        ok &= resid <= 1e-6
        off, fid = translated_revival(h, psi, period / 2)
        ok &= off == n // 2 and fid >= 0.99
        notes.append(f"N={n},k={k}: T={grid.period:.9f} offset={off} fid={fid:.4f}")
    assert acceptance.record("4 revival periods", ok, "; ".join(notes))


def test_05_oracle_equivalence(acceptance):
    rng = np.random.default_rng(5)
    checked, bad = 0, []
    for n in range(2, 17):
        for k in range(1, n):
            h = build_hamiltonian(n, k)
            spec = spectral_period(h)
            if spec.kind != "exact" or spec.period is None:
                continue
            for _ in range(5):
                rep = survival_grid_period(h, random_state(n, rng), t_max=1.05 * spec.period)
                checked += 1
                if rep.period is None:
                    bad.append((n, k, None))
                    continue
                m = round(spec.period / rep.period)
                if m < 1 or abs(spec.period / m - rep.period) > 1e-8:
                    bad.append((n, k, rep.period))
    ok = acceptance.record("5 grid vs spectral oracle", not bad, f"{checked} state checks, {len(bad)} mismatches")
    assert ok, bad[:5]


def test_06_basis_duality(acceptance):
    worst = 0.0
    for n in range(2, 65):
        for j in range(n):
            d = dft(basis_state(n, j).c)
            worst = max(worst, float(np.max(np.abs(np.abs(d) ** 2 - 1 / n))))
    ok = acceptance.record("6 basis-state DFT flatness", worst <= 1e-14, f"max deviation {worst:.1e}")
    assert ok


def _gaussian_fit_deviation(probs):
    n = probs.shape[0]
    p = np.roll(probs, n // 2 - int(np.argmax(probs)))
    j = np.arange(n, dtype=float)

    def model(x, a, m, s):
        return a * np.exp(-((x - m) ** 2) / (2 * s * s))

    popt, _ = curve_fit(model, j, p, p0=[p.max(), n / 2, max(1.0, n / 16)], maxfev=20000)
    return float(np.max(np.abs(model(j, *popt) - p)))


def test_07_mus_continuum_limit(acceptance):
    # targets for a balanced packet (dQ^2 = dP^2 = 1/2): <U> = exp(-alpha^2/4), <V> = exp(-beta^2/4)
    devs = []
    for n in (16, 32, 64, 128):
        p = PhaseSpaceParams(n)
        spec = solve_mus_for_targets(p, math.exp(-p.alpha**2 / 4), math.exp(-p.beta**2 / 4), strict=False)
        devs.append(_gaussian_fit_deviation(mus_state(spec).probs))
    ok = all(b < a for a, b in zip(devs, devs[1:]))
    acceptance.record("7 MUS approaches Gaussian", ok, "max dev " + ", ".join(f"{d:.4f}" for d in devs))
    assert ok


def test_08_gup_leading_limit(acceptance):
    r = gup_excess(gaussian_probe(0.5)(1024))
    ok = acceptance.record("8 dQ^2 dP^2 -> 1/4 at N=1024", abs(r.product - 0.25) <= 5e-3, f"product {r.product:.12f}")
    assert ok


def test_09_gup_scaling(acceptance):
    fit = gup_scaling_sweep(SWEEP)
    ok = abs(fit.exponent + 0.5) <= 0.15
    acceptance.record("9 GUP excess exponent (MUS probe)", ok, f"exponent {fit.exponent:.4f}, r^2 {fit.r_squared:.4f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="wrapped Gaussian excess is not positive across the sweep; see notes")
def test_09b_gup_scaling_gaussian_probe(acceptance):
    try:
        fit = gup_scaling_sweep(SWEEP, gaussian_probe(0.5))
        ok = abs(fit.exponent + 0.5) <= 0.15
        detail = f"exponent {fit.exponent:.4f}"
    except InsufficientPositiveExcess as err:
        ok, detail = False, str(err)
    acceptance.record("9b GUP exponent with a wrapped-Gaussian probe (expected fail)", ok, detail)
    assert ok


def test_10_small_ratio_closed_forms(acceptance):
    periods = {2: PI / 2, 4: PI, 6: 2 * PI}
    ok, notes = True, []
    t = np.linspace(0, 3, 61)
    for ratio, period in periods.items():
        for k in (1, 2, 3):
            h = build_hamiltonian(ratio * k, k)
            for j in range(ratio * k):
                ok &= abs(return_probability(h, j, [period])[0] - 1) <= 1e-12
                ok &= np.max(np.abs(return_probability(h, j, t + period) - return_probability(h, j, t))) <= 1e-12
        fit = fit_closed_form(ratio)
        notes.append(f"N/k={ratio}: scale {fit.scale:.6f} residual {fit.residual:.1e} (s=1: {fit.unit_residual:.1e})")
    acceptance.record("10 small N/k periodicity + closed-form fit", ok, "; ".join(notes))
    assert ok


def test_11_cli_determinism(acceptance, tmp_path, capsys):
    runs = [
        ["algebra-check", "--n", "6"],
        ["mus", "--n", "100", "--mu", "1.5,0", "--root", "98", "--svg"],
        ["evolve", "--n", "8", "--k", "2", "--basis", "1", "--times", "0..pi:5", "--svg"],
        ["revival", "--n", "12", "--k", "2", "--seed", "3"],
        ["gup", "--n-list", "64,128,256,512"],
    ]
    for i, argv in enumerate(runs):
        for side in ("a", "b"):
            cli_main(argv + ["--output-dir", str(tmp_path / side / str(i))])
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    ok = acceptance.record("11 CLI byte-identical reruns", same and len(files) > 10, f"{len(files)} files compared")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
