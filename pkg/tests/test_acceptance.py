"""Acceptance suite.

Every test here implements one acceptance criterion at its stated tolerance
and prints one PASS line on success (run with ``pytest -s`` to see them).
The random generators are seeded, so the suite is reproducible.
"""

import time

import numpy as np
import pytest

import hckit as hk
from hckit.config import DEFAULT_SEARCH
from hckit.quadmap import LineImageKind
from hckit.slemma import Outcome
from hckit.witness import Branch
from gen import (interior_point, random_cone, random_form, random_map,
                 random_parabola, rank_deficient_map, slater_instance,
                 witness_instance)

DIMS = (1, 2, 3, 6)
TRIALS_PER_DIM = 1000


@pytest.fixture(scope="module")
def witness_runs():
    """Criteria 1 and 2 share these runs: 1000 instances per dimension."""
    certs = []
    elapsed = 0.0
    for n in DIMS:
        rng = np.random.default_rng(1000 + n)
        for _ in range(TRIALS_PER_DIM):
            fmap, cone, pu, pv, alpha = witness_instance(rng, n)
            w = alpha * pu.value + (1 - alpha) * pv.value
            start = time.perf_counter()
            cert = hk.witness_convex_combination(fmap, cone, pu, pv, alpha)
            ok = hk.verify_certificate(fmap, cone, w, cert, 1e-6)
            elapsed += time.perf_counter() - start
            certs.append((n, cert, ok))
    return certs, elapsed


def test_criterion_1_witness_soundness(witness_runs):
    certs, elapsed = witness_runs
    assert len(certs) == len(DIMS) * TRIALS_PER_DIM
    bad = [(n, c.branch) for n, c, ok in certs if not ok]
    assert bad == [], f"verification failures: {bad[:5]}"
    assert elapsed < 60.0, f"witness+verify took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 1 witness soundness: PASS "
          f"({len(certs)} trials across n={DIMS}, 100% verified, "
          f"{elapsed:.1f}s < 60s)")


def test_criterion_2_branch_coverage(witness_runs):
    certs, _ = witness_runs
    counts = {b: 0 for b in Branch}
    for _, cert, _ in certs:
        counts[cert.branch] += 1
    for branch, count in counts.items():
        assert count >= 10, f"branch {branch.value} hit only {count} times"
    pretty = {b.value: c for b, c in counts.items()}
    print(f"ACCEPTANCE 2 branch coverage: PASS ({pretty})")


def test_criterion_3_chord_interior_negative():
    rng = np.random.default_rng(33)
    worst = -np.inf
    for _ in range(1000):
        conic, point_at = random_parabola(rng)
        t1 = rng.uniform(-4.0, 4.0)
        t2 = rng.uniform(-4.0, 4.0)
        while abs(t1 - t2) < 1e-3:
            t2 = rng.uniform(-4.0, 4.0)
        mix = rng.uniform(0.01, 0.99)
        value = hk.chord_interior_sign(conic, point_at(t1), point_at(t2), mix)
        z = point_at(t1) + mix * (point_at(t2) - point_at(t1))
        scale = conic.coefficient_scale() * (1.0 + np.max(np.abs(z))) ** 2
        assert value < 1e-7 * scale
        worst = max(worst, value / scale)
    print(f"ACCEPTANCE 3 chord interior sign: PASS "
          f"(1000 chords, worst relative value {worst:.3e} < 1e-7)")


def test_criterion_4_backward_ray_hit():
    rng = np.random.default_rng(44)
    worst = 0.0
    for _ in range(1000):
        conic, point_at = random_parabola(rng)
        cone = random_cone(rng)
        z = interior_point(conic, point_at, rng)
        hit = hk.first_negative_ray_hit(conic, z, cone)
        scale = conic.coefficient_scale() * (1.0 + np.max(np.abs(hit.point))) ** 2
        resid = abs(conic.evaluate(hit.point))
        assert resid <= 1e-8 * scale
        worst = max(worst, resid / scale)
    print(f"ACCEPTANCE 4 backward ray hit: PASS "
          f"(1000 instances, worst relative residual {worst:.3e} <= 1e-8)")


def test_criterion_5_line_image_soundness():
    rng = np.random.default_rng(55)
    kinds = {k: 0 for k in LineImageKind}
    done = 0
    while done < 1000:
        n = int(rng.integers(1, 7))
        flat = rng.uniform() < 0.15
        fmap = rank_deficient_map(rng, n) if flat else random_map(rng, n)
        xb = rng.uniform(-3, 3, n)
        yb = rng.uniform(-3, 3, n)
        if np.max(np.abs(yb - xb)) < 1e-6:
            continue
        img = hk.classify_line_image(fmap, xb, yb)
        kinds[img.kind] += 1
        d = yb - xb
        if img.kind is LineImageKind.PARABOLA:
            lam = hk.eigh(img.conic.A).eigenvalues
            assert lam[0] >= -1e-9 * (1.0 + abs(lam[1]))
            assert lam[1] > 1e-9 * (1.0 + abs(lam[1]))
            for t in rng.uniform(-3, 3, 100):
                pt = hk.eval_map(fmap, xb + t * d)
                scale = (img.conic.coefficient_scale()
                         * (1.0 + np.max(np.abs(pt))) ** 2)
                assert abs(img.conic.evaluate(pt)) <= 1e-7 * scale
        elif img.kind is LineImageKind.RAY:
            dn = img.ray_direction / np.linalg.norm(img.ray_direction)
            for t in rng.uniform(-3, 3, 25):
                pt = hk.eval_map(fmap, xb + t * d)
                assert (pt - img.apex) @ dn >= -1e-7 * (1.0 + np.max(np.abs(pt)))
        t0 = rng.uniform(-2, 2)
        target = hk.eval_map(fmap, xb + t0 * d)
        x = hk.preimage_on_line(img, xb, yb, target)
        scale = img.coeffs.scale()
        assert np.max(np.abs(hk.eval_map(fmap, x) - target)) <= 1e-6 * scale
        done += 1
    pretty = {k.value: v for k, v in kinds.items()}
    print(f"ACCEPTANCE 5 line image soundness: PASS (1000 lines, kinds {pretty})")


def test_criterion_6_slemma_cross_validation():
    rng = np.random.default_rng(66)
    margin = 2.0 * DEFAULT_SEARCH.slack
    undecided = 0
    outcomes = {o: 0 for o in Outcome}
    for _ in range(300):
        n = int(rng.integers(1, 4))
        f, g, x_star = slater_instance(rng, n)
        verdict = hk.decide(f, g, x_star)
        outcomes[verdict.outcome] += 1
        if verdict.outcome is Outcome.MULTIPLIER_FOUND:
            oracle = hk.brute_force_oracle(f, g, 10.0, 0.01, f_margin=margin)
            assert not oracle.found, (
                f"multiplier contradicted by grid point {oracle.point}")
        elif verdict.outcome is Outcome.COUNTEREXAMPLE_FOUND:
            assert f(verdict.x_witness) < -DEFAULT_SEARCH.strict_margin
            assert g(verdict.x_witness) <= DEFAULT_SEARCH.feas_tol
        else:
            undecided += 1
    assert undecided <= 15, f"undecided rate {undecided / 3:.1f}% > 5%"
    pretty = {o.value: c for o, c in outcomes.items()}
    print(f"ACCEPTANCE 6 alternative cross-validation: PASS "
          f"(300 instances, {pretty}, undecided {undecided / 3:.1f}% <= 5%)")


def test_criterion_7_manifold_reduction():
    rng = np.random.default_rng(77)
    for instance in range(200):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n))
        h = rng.uniform(-2, 2, (m, n))
        d = h @ rng.uniform(-2, 2, n)
        manifold = hk.manifold_from_linear_system(h, d)
        assert manifold.dim >= 1
        grow = rng.uniform(-1.5, 1.5, (n, n))
        f = hk.QuadraticForm(grow.T @ grow + 0.1 * np.eye(n),
                             rng.uniform(-2, 2, n), rng.uniform(-2, 2))
        g = random_form(rng, n)
        fmap = hk.restrict_to_manifold(hk.QuadraticMap(f, g), manifold)
        z0 = rng.uniform(-2, 2, manifold.dim)
        g_low = hk.QuadraticForm(fmap.g.matrix, fmap.g.linear,
                                 fmap.g.constant - fmap.g(z0) - 0.5)
        fmap = hk.QuadraticMap(fmap.f, g_low)
        bound = hk.dual_lower_bound(fmap.f, fmap.g)
        assert np.isfinite(bound)
        rho = bound - 1.0
        shifted = hk.QuadraticMap(fmap.f.shifted(-rho), fmap.g)
        report = hk.convexity_probe(shifted, hk.positive_quadrant(),
                                    trials=500, rng_seed=7000 + instance,
                                    box_radius=5.0)
        assert report.consistent, (
            f"instance {instance}: {report.failures[0].diagnostic}")
    print("ACCEPTANCE 7 manifold reduction: PASS "
          "(200 restricted shifted maps x 500 trials, zero failures)")


def test_criterion_8_hand_worked_regressions():
    # fixed witness: F = (x^2, x), w = (1, 0) certified by x* = 0, e* = (1, 0)
    fmap = hk.QuadraticMap(hk.QuadraticForm([[1.0]], [0.0], 0.0),
                           hk.QuadraticForm([[0.0]], [1.0], 0.0))
    cone = hk.positive_quadrant()
    pu = hk.cone_point(fmap, cone, [1.0], [0.0, 0.0])
    pv = hk.cone_point(fmap, cone, [-1.0], [0.0, 0.0])
    cert = hk.witness_convex_combination(fmap, cone, pu, pv, 0.5)
    assert cert.branch is Branch.PARABOLA_RAY_HIT
    np.testing.assert_allclose(cert.x_star, [0.0], atol=1e-9)
    np.testing.assert_allclose(cert.e_star, [1.0, 0.0], atol=1e-9)

    # fixed multiplier: f = -2x + 2, g = x^2 - 1 combine to (x - 1)^2 at 1
    f = hk.QuadraticForm([[0.0]], [-2.0], 2.0)
    g = hk.QuadraticForm([[1.0]], [0.0], -1.0)
    verdict = hk.decide(f, g, [0.0])
    assert verdict.outcome is Outcome.MULTIPLIER_FOUND
    assert abs(verdict.lam - 1.0) <= 1e-9
    print("ACCEPTANCE 8 hand-worked regressions: PASS "
          f"(witness x*=0, e*=(1,0); multiplier lambda={verdict.lam:.12f})")
