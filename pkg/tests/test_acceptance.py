"""End-to-end acceptance checks.

Each test exercises one headline guarantee of the package at its stated
tolerance and prints a single PASS line with the measured figures (visible
under ``pytest -v -rA`` or on failure).  Every test also asserts its own
wall-clock budget.
"""
import math
import time

import numpy as np
import pytest
from scipy.special import zeta

from weylgas import algebra as alg
from weylgas import berezin as bz
from weylgas import equilibrium as eq
from weylgas import gibbsmc as mc
from weylgas import quantize as qz
from weylgas import spectrum as sp
from weylgas import states as st
from weylgas import testfn as tf


def _report(num, detail):
    print(f"[PASS] criterion {num:02d}: {detail}")


def _rand_element(rng, dim, hbar, max_terms=3):
    out = alg.WeylElement.zero(dim, hbar)
    for _ in range(rng.integers(1, max_terms + 1)):
        label = tuple(complex(a, b) for a, b in
                      rng.uniform(-1, 1, size=(dim, 2)))
        coeff = complex(*rng.uniform(-1, 1, size=2))
        out = out + alg.weyl(label, hbar).scale(coeff)
    return out


def test_criterion_01_algebra_laws():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    tol = 1e-12
    checks = 0
    for _ in range(250):
        a, b, c = (_rand_element(rng, 2, 0.3) for _ in range(3))
        assert alg.elements_close((a * b) * c, a * (b * c), tol)
        checks += 1
    for _ in range(250):
        a, b = (_rand_element(rng, 2, 0.3) for _ in range(2))
        assert alg.elements_close(alg.adjoint(a * b),
                                  alg.adjoint(b) * alg.adjoint(a), tol)
        checks += 1
    for _ in range(250):
        a, b, c = (_rand_element(rng, 2, 0.0) for _ in range(3))
        cyc = alg.poisson_bracket(a, alg.poisson_bracket(b, c)) \
            + alg.poisson_bracket(b, alg.poisson_bracket(c, a)) \
            + alg.poisson_bracket(c, alg.poisson_bracket(a, b))
        assert alg.elements_close(cyc, alg.WeylElement.zero(2, 0.0), tol)
        checks += 1
    for _ in range(250):
        a, b, c = (_rand_element(rng, 2, 0.0) for _ in range(3))
        lhs = alg.poisson_bracket(a, b * c)
        rhs = alg.poisson_bracket(a, b) * c + b * alg.poisson_bracket(a, c)
        assert alg.elements_close(lhs, rhs, tol)
        checks += 1
    elapsed = time.perf_counter() - t0
    assert checks == 1000
    assert elapsed < 5.0
    _report(1, f"{checks} randomized law checks at {tol:g} in {elapsed:.2f}s")


def test_criterion_02_strict_quantization_residuals():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    hs = np.logspace(math.log10(1e-4), math.log10(1e-1), 20)
    worst_dirac = (0.0, 0.0)
    for _ in range(50):
        f = tuple(complex(a, b) for a, b in rng.uniform(-1, 1, size=(2, 2)))
        g = tuple(complex(a, b) for a, b in rng.uniform(-1, 1, size=(2, 2)))
        vn = np.array([qz.vonneumann_residual(f, g, h) for h in hs])
        dr = np.array([qz.dirac_residual(f, g, h) for h in hs])
        assert np.all(np.diff(vn) >= 0)
        assert np.all(np.diff(dr) >= 0)
        for res in (vn, dr):
            if res[-1] > 1e-14:  # slope is meaningful only off the floor
                slope = np.polyfit(np.log(hs), np.log(np.maximum(res, 1e-300)),
                                   1)[0]
                assert 0.8 <= slope <= 2.2
        if dr[-1] > worst_dirac[0]:
            worst_dirac = (dr[-1], f)
    # frozen anchors at h = 0.1 for f = (1,), g = (i,)
    assert qz.vonneumann_residual((1.0,), (1j,), 0.1) == pytest.approx(
        4.7556517e-2, rel=0.02)
    assert qz.dirac_residual((1.0,), (1j,), 0.1) == pytest.approx(
        3.9629605e-4, rel=0.02)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(2, f"50 pairs x 20 h-values, slopes in [0.8, 2.2], "
               f"anchors within 2% in {elapsed:.2f}s")


def test_criterion_03_nonsurjectivity_witness():
    t0 = time.perf_counter()
    data = qz.nonsurjectivity_witness((1.0,), 50, 1.0)
    target = math.sqrt(math.pi ** 4 / 90.0)
    assert data["target_l2"][49] == pytest.approx(target, abs=1e-3)
    assert data["preimage_l2"][9] > 1e8
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report(3, f"target norm {data['target_l2'][49]:.6f} -> sqrt(zeta(4)), "
               f"preimage norm {data['preimage_l2'][9]:.3e} > 1e8 "
               f"in {elapsed:.2f}s")


def test_criterion_04_critical_density():
    t0 = time.perf_counter()
    worst = 0.0
    for beta in (0.5, 1.0, 2.0):
        for h in (0.5, 1.0, 2.0):
            got = st.critical_density(beta, h, 3)
            series = float(zeta(1.5, 1)) / (2 * math.pi * beta * h) ** 1.5
            rel = abs(got - series) / series
            worst = max(worst, rel)
            assert rel <= 1e-8
    base = st.critical_density(1.0, 1.0, 3)
    for h in (0.01, 0.1, 10.0):
        assert st.critical_density(1.0, h, 3) == pytest.approx(
            base * h ** -1.5, rel=1e-10)
    elapsed = time.perf_counter() - t0
    assert elapsed < 2.0
    _report(4, f"9 (beta, h) grid points vs zeta series, worst rel "
               f"{worst:.2e} <= 1e-8; h-scaling to 1e-10 in {elapsed:.2f}s")


def test_criterion_05_density_solver_round_trip():
    t0 = time.perf_counter()
    worst = 0.0
    for rho in (0.01, 0.1, 1.0):
        for L in (1.0, 2.0, 4.0):
            box = sp.BoxSpectrum(L=L, nu=3, cutoff=32)
            mu = eq.solve_mu_quantum(rho, box, beta=1.0, h=1.0)
            spec = st.StateSpec(kind="QuantumBoxGibbs", beta=1.0, h=1.0,
                                mu=mu, box=box)
            rel = abs(st.quantum_density(spec) - rho) / rho
            worst = max(worst, rel)
            assert rel <= 1e-10
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(5, f"9 (rho, L) round trips, worst rel {worst:.2e} <= 1e-10 "
               f"in {elapsed:.2f}s")


def test_criterion_06_semiclassical_limits():
    t0 = time.perf_counter()
    hs = [0.1, 0.05, 0.025, 0.0125]
    slopes = {}

    box = sp.BoxSpectrum(L=1.0, nu=3, cutoff=24)
    fam_a = lambda h: st.StateSpec(kind="QuantumBoxGibbs", beta=1.0, h=h,
                                   mu=0.0, box=box)
    cls_a = st.StateSpec(kind="ClassicalBoxGibbs", beta=1.0, mu=0.0, box=box)
    pts = eq.semiclassical_scan(fam_a, cls_a, {(1, 1, 1): 0.5 + 0.2j}, hs)
    errs = np.array([e for _, e in pts])
    assert np.all(np.diff(errs) < 0)
    slopes["box"] = np.polyfit(np.log(hs), np.log(errs), 1)[0]

    f = tf.gaussian(0.1, (0, 0, 0), 1.0)
    fam_b = lambda h: st.StateSpec(kind="QuantumInfVol", beta=1.0, h=h,
                                   mu=-1.0, nu=3)
    cls_b = st.StateSpec(kind="ClassicalInfVol", beta=1.0, mu=-1.0, nu=3)
    pts = eq.semiclassical_scan(fam_b, cls_b, f, hs)
    errs = np.array([e for _, e in pts])
    assert np.all(np.diff(errs) < 0)
    slopes["infvol"] = np.polyfit(np.log(hs), np.log(errs), 1)[0]

    fam_c = lambda h: st.StateSpec(
        kind="QuantumCondensate", beta=1.0, h=h,
        rho_bar=st.critical_density(1.0, h, 3) + 0.1 / h, nu=3)
    cls_c = st.StateSpec(kind="ClassicalCondensate", beta=1.0, alpha=0.1, nu=3)
    pts = eq.semiclassical_scan(fam_c, cls_c, f, hs)
    errs = np.array([e for _, e in pts])
    assert np.all(np.diff(errs) < 0)
    slopes["condensate"] = np.polyfit(np.log(hs), np.log(errs), 1)[0]

    for name, slope in slopes.items():
        assert slope >= 0.8, f"{name} slope {slope}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(6, "h -> 0 error slopes "
            + ", ".join(f"{k} {v:.3f}" for k, v in slopes.items())
            + f" (all >= 0.8) in {elapsed:.2f}s")


def test_criterion_07_thermodynamic_limit():
    t0 = time.perf_counter()
    f = tf.gaussian(0.1, (0, 0, 0), 1.0)
    Ls = [5.0, 10.0, 20.0, 40.0]
    finals, finals_first = {}, {}
    for alpha in (0.0, 0.1, 1.0):
        out = eq.thermodynamic_scan(alpha, 1.0, f, Ls)
        errs = np.array([e for _, _, e in out])
        assert np.all(np.diff(errs) < 0), f"alpha={alpha}: {errs}"
        finals[alpha] = out[-1][1]
        finals_first[alpha] = out[0][1]
    target = st.weyl_expectation(
        st.StateSpec(kind="ClassicalCondensate", beta=1.0, alpha=0.1, nu=3), f)
    assert target == pytest.approx(0.3316857104472106, rel=1e-10)
    assert abs(finals[0.1] - target) < abs(finals_first[0.1] - target)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(7, f"alpha in (0, 0.1, 1): errors strictly decreasing over "
               f"L = 5..40; alpha=0.1 limit -> {target:.6f} in {elapsed:.1f}s")


def test_criterion_08_weak_kms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    worst = 0.0
    count = 0

    def rand_modes(nmax=3, terms=2):
        out = {}
        for _ in range(terms):
            n = tuple(int(v) for v in rng.integers(1, nmax + 1, size=3))
            out[n] = complex(*rng.uniform(-0.5, 0.5, size=2))
        return out

    box = sp.BoxSpectrum(L=1.0, nu=3, cutoff=10)
    e0 = sp.ground_energy(1.0, 3)
    for _ in range(70):
        mu = float(rng.uniform(-2.0, e0 - 0.1))
        beta = float(rng.uniform(0.5, 2.0))
        spec = st.StateSpec(kind="ClassicalBoxGibbs", beta=beta, mu=mu, box=box)
        deriv = eq.WeakDerivationSpec(kind="HMinusMu", mu=mu)
        r = eq.kms_residual(spec, deriv, rand_modes(), rand_modes())
        worst = max(worst, r)
        count += 1

    def rand_fn():
        return tf.gaussian(complex(*rng.uniform(-0.3, 0.3, size=2)),
                           rng.uniform(-0.5, 0.5, size=3),
                           float(rng.uniform(0.7, 1.3)),
                           rng.uniform(-0.8, 0.8, size=3))

    for _ in range(15):
        mu = float(rng.uniform(-1.5, -0.1))
        spec = st.StateSpec(kind="ClassicalInfVol", beta=1.0, mu=mu, nu=3)
        deriv = eq.WeakDerivationSpec(kind="HMinusMu", mu=mu)
        r = eq.kms_residual(spec, deriv, rand_fn(), rand_fn())
        worst = max(worst, r)
        count += 1

    for _ in range(15):
        alpha = float(rng.uniform(0.0, 2.0))
        spec = st.StateSpec(kind="ClassicalCondensate", beta=1.0,
                            alpha=alpha, nu=3)
        r = eq.kms_residual(spec, eq.WeakDerivationSpec(kind="H"),
                            rand_fn(), rand_fn())
        worst = max(worst, r)
        count += 1

    assert count == 100
    assert worst <= 1e-12

    # the KMS defect cannot see the condensate weight
    f, g = rand_fn(), rand_fn()
    res = [eq.kms_residual(
        st.StateSpec(kind="ClassicalCondensate", beta=1.0, alpha=a, nu=3),
        eq.WeakDerivationSpec(kind="H"), f, g) for a in (0.0, 0.5, 2.0)]
    assert res[0] == res[1] == res[2]

    spec = st.StateSpec(kind="ClassicalBoxGibbs", beta=1.5, mu=-0.2, box=box)
    deriv = eq.WeakDerivationSpec(kind="HMinusMu", mu=-0.2)
    fm, gm = {(1, 1, 1): 0.4 + 0.1j}, {(1, 1, 1): 0.2 - 0.3j, (1, 2, 1): 0.1}
    r1 = eq.kms_residual(spec, deriv, fm, gm, mode="fd", dt=1e-3)
    r2 = eq.kms_residual(spec, deriv, fm, gm, mode="fd", dt=5e-4)
    ratio = r1 / r2
    assert ratio == pytest.approx(4.0, abs=0.5)

    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(8, f"100 analytic residuals, worst {worst:.2e} <= 1e-12; "
               f"alpha-independent; FD Richardson ratio {ratio:.3f} "
               f"in {elapsed:.1f}s")


def test_criterion_09_monte_carlo_gibbs():
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    mode_sets = [(1.0,), (1.0, 2.0), (0.5, 1.5, 3.0), (2.0, 2.0),
                 (0.7, 1.1, 1.9, 4.0)]
    count = 100000
    checked = 0
    worst_z = 0.0
    for i, eig in enumerate(mode_sets):
        spec = mc.GaussianMeasureSpec(eigenvalues=eig, beta=1.0)
        for j in range(4):
            phi = [complex(*rng.uniform(-0.8, 0.8, size=2)) for _ in eig]
            est, se = mc.characteristic_mc(spec, phi, count,
                                           seed=1000 + 10 * i + j)
            z = abs(est - mc.closed_form_theta(spec, phi)) / se
            worst_z = max(worst_z, z)
            assert z < 4.0
            checked += 1
    assert checked == 20

    kms_worst = 0.0
    for j in range(20):
        spec = mc.GaussianMeasureSpec(
            eigenvalues=mode_sets[j % len(mode_sets)], beta=1.0)
        n = len(spec.eigenvalues)
        p1 = [complex(*rng.uniform(-0.6, 0.6, size=2)) for _ in range(n)]
        p2 = [complex(*rng.uniform(-0.6, 0.6, size=2)) for _ in range(n)]
        resid, se = mc.cylindrical_kms_mc(spec, p1, p2, count, seed=2000 + j)
        z = abs(resid) / se
        kms_worst = max(kms_worst, z)
        assert z < 4.0

    spec = mc.GaussianMeasureSpec(eigenvalues=(1.0, 2.0), beta=1.0)
    assert np.array_equal(mc.sample(spec, 5000, seed=77),
                          mc.sample(spec, 5000, seed=77))

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(9, f"20 characteristic checks (worst {worst_z:.2f} sigma) and "
               f"20 KMS moments (worst {kms_worst:.2f} sigma) at 1e5 "
               f"samples; fixed seed bit-identical in {elapsed:.1f}s")


def test_criterion_10_berezin_quadrature():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1010)
    worst = 0.0
    for i in range(10):
        h = (0.5, 1.0, 2.0)[i % 3]
        phi = bz.coherent_state([rng.uniform(-1, 1)], [rng.uniform(-1, 1)], h)
        psi = bz.WavePacket(amp=complex(*rng.uniform(-1, 1, size=2)),
                            centers=(rng.uniform(-0.5, 0.5),),
                            sigmas=(rng.uniform(0.8, 1.4),),
                            waves=(rng.uniform(-1, 1),))
        lam, mu = rng.uniform(-2, 2), rng.uniform(-2, 2)
        got = bz.berezin_matrix_element([lam], [mu], phi, psi, h)
        want = math.exp(-h * (lam * lam + mu * mu) / 4.0) \
            * bz.schrodinger_matrix_element([lam], [mu], phi, psi, h)
        rel = abs(got - want) / abs(want)
        worst = max(worst, rel)
        assert rel <= 1e-6

    packet = bz.WavePacket(amp=0.6, centers=(0.4,), sigmas=(1.2,),
                           waves=(-0.3,))
    quad_val, closed = bz.overcompleteness_check(packet, 0.8)
    over = abs(quad_val - closed) / max(1.0, abs(closed))
    assert over <= 1e-8

    sym = bz.TrigPolySymbol([1.0, 0.4, 0.2 - 0.1j],
                            [(0, 0), (1, 0), (0, 1)])
    low = math.inf
    for _ in range(5):
        v = bz.coherent_state([rng.uniform(-1, 1)], [rng.uniform(-1, 1)], 1.0)
        low = min(low, bz.berezin_positivity(sym, v, 1.0))
    assert low >= -1e-8

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(10, f"10 quadrature cases worst rel {worst:.2e} <= 1e-6; "
                f"overcompleteness defect {over:.2e} <= 1e-8; positivity "
                f"min {low:.3e} >= -1e-8 in {elapsed:.1f}s")


def test_criterion_11_trace_stability():
    t0 = time.perf_counter()
    v60, ok60 = sp.trace_h_power(2.0, sp.BoxSpectrum(L=1.0, nu=3, cutoff=60))
    v120, ok120 = sp.trace_h_power(2.0, sp.BoxSpectrum(L=1.0, nu=3, cutoff=120))
    assert ok60 and ok120
    change = abs(v120 - v60) / abs(v60)
    assert change < 1e-6

    d60, okd = sp.trace_h_power(1.0, sp.BoxSpectrum(L=1.0, nu=3, cutoff=60))
    d120, okd2 = sp.trace_h_power(1.0, sp.BoxSpectrum(L=1.0, nu=3, cutoff=120))
    assert not okd and not okd2
    assert d120 > d60 * 1.5

    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(11, f"s=2 doubling change {change:.2e} < 1e-6; s=1 partials "
                f"{d60:.2f} -> {d120:.2f} diverge in {elapsed:.1f}s")
