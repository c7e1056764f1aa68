import numpy as np
import pytest

from crlab.cylinder import CylinderGrid, TimeGrid
from crlab.equilibria import (default_seeds, find_equilibria, floquet, integrate_period,
                              make_equilibrium)
from crlab.errors import DivergenceError
from crlab.solver import constant_in_s, cr_residual
from crlab.vectorfield import CustomPolynomial, Harmonic, LinearRotation, Pendulum, Zero

ROT1 = np.array([[np.cos(1), -np.sin(1)], [np.sin(1), np.cos(1)]])


def test_integrate_zero_field():
    u, m = integrate_period(Zero(), [0.3, -0.7])
    assert np.array_equal(u, [0.3, -0.7]) and np.array_equal(m, np.eye(2))


def test_integrate_full_rotation():
    u, m = integrate_period(Harmonic(2 * np.pi), [1.0, 0.0], 512)
    assert np.allclose(u, [1, 0], atol=1e-8, rtol=0)
    assert np.allclose(m, np.eye(2), atol=1e-6, rtol=0)


def test_integrate_unit_rotation():
    u, m = integrate_period(LinearRotation(1.0), [1.0, 0.0], 512)
    assert np.allclose(u, [np.cos(1), np.sin(1)], atol=1e-9, rtol=0)
    assert np.allclose(m, ROT1, atol=1e-9, rtol=0)


def test_integrate_rejects_few_steps():
    with pytest.raises(ValueError):
        integrate_period(Zero(), [0, 0], 16)


def test_escape_radius():
    blowup = CustomPolynomial(((2, 0, 0, 1.0),), ())
    with pytest.raises(DivergenceError):
        integrate_period(blowup, [5.0, 0.0], 64, escape_radius=100.0)


@pytest.mark.parametrize("spec, u0", [(LinearRotation(1.0), [1.0, 0.5]), (Harmonic(2.0), [0.2, -1.0])])
def test_rk4_fourth_order(spec, u0):
    # closed-form flow exp(a J t) u0
    a = spec.rate if isinstance(spec, LinearRotation) else spec.a
    c, s = np.cos(a), np.sin(a)
    exact = np.array([[c, -s], [s, c]]) @ np.array(u0)
    errs = [np.linalg.norm(integrate_period(spec, u0, n)[0] - exact) for n in (32, 64)]
    assert 12 <= errs[0] / errs[1] <= 20


def test_floquet_examples():
    assert np.allclose(floquet(np.eye(2)), [1, 1])
    assert np.allclose(sorted(floquet(ROT1), key=lambda z: z.imag), [np.exp(-1j), np.exp(1j)])
    assert np.allclose(sorted(floquet(np.diag([2.0, 0.5])).real), [0.5, 2.0])


def test_floquet_matches_eigvals():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = rng.normal(size=(2, 2))
        assert np.allclose(sorted(floquet(m), key=lambda z: (z.real, z.imag)),
                           sorted(np.linalg.eigvals(m).astype(complex), key=lambda z: (z.real, z.imag)))


def test_rotation_single_equilibrium():
    ring = [[np.cos(a), np.sin(a)] for a in np.linspace(0, 2 * np.pi, 6, endpoint=False)]
    eqs = find_equilibria(LinearRotation(1.0), ring)
    assert len(eqs) == 1
    assert np.max(np.abs(eqs[0].loop.values)) <= 1e-10


def test_full_rotation_is_degenerate_everywhere():
    eqs = find_equilibria(Harmonic(2 * np.pi), [[1.0, 0.0], [0.2, 0.3], [-1.0, 1.0]])
    assert len(eqs) == 0
    assert [s["status"] for s in eqs.seed_status] == ["degenerate-seed"] * 3


def test_pendulum_two_equilibria(pendulum_equilibria):
    eqs = pendulum_equilibria
    assert len(eqs) == 2
    assert np.allclose([e.u0 for e in eqs], [[0, 0], [0.5, 0]], atol=1e-12)
    for e in eqs:
        assert e.residual <= 1e-10
        assert e.liouville_defect() <= 1e-6
        assert np.ptp(e.loop.values, axis=0).max() <= 1e-12  # constant loop


def test_pendulum_multipliers(pendulum_equilibria):
    # at p = 0 the linearisation is J diag(1, 1): a rotation by one radian
    m0 = sorted(pendulum_equilibria[0].floquet, key=lambda z: z.imag)
    assert np.allclose(m0, [np.exp(-1j), np.exp(1j)], atol=1e-9)
    # at p = 1/2 it is J diag(-1, 1): real multipliers e^{+1}, e^{-1}
    m1 = sorted(pendulum_equilibria[1].floquet.real)
    assert np.allclose(m1, [np.exp(-1), np.exp(1)], atol=1e-9)


def test_equilibria_are_cr_solutions():
    spec = CustomPolynomial(((0, 1, 0, -1.0), (1, 0, 0, -0.3), (0, 0, 1, 0.2)),
                            ((1, 0, 0, 1.0), (0, 1, 0, -0.3)))
    tol = 1e-10
    eqs = find_equilibria(spec, [[0.0, 0.0]], tol=tol, time=TimeGrid(32))
    assert len(eqs) == 1
    e = eqs[0]
    assert np.ptp(e.loop.values, axis=0).max() > 1e-3  # genuinely t-dependent
    g = CylinderGrid(0.0, 1.0, 5, e.loop.time)
    assert np.abs(cr_residual(spec, constant_in_s(g, e.loop)).values).max() <= 10 * tol
    assert e.liouville_defect() <= 1e-6


def test_deduplication():
    eqs = find_equilibria(Pendulum(), [[0.01, 0.0], [-0.01, 0.01], [0.49, 0.0]])
    assert len(eqs) == 2
    assert sum(s["status"] == "converged" for s in eqs.seed_status) == 3


def test_default_seeds_lattice():
    s = default_seeds()
    assert s.shape == (64, 2) and s.min() == -2 and s.max() == 2


def test_make_equilibrium_samples_orbit():
    e = make_equilibrium(LinearRotation(2 * np.pi), [1.0, 0.0], TimeGrid(16))
    t = TimeGrid(16).nodes
    assert np.allclose(e.loop.values, np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)], -1), atol=1e-8)
    assert e.to_dict()["u0"] == pytest.approx([1.0, 0.0])


def test_invalid_tol():
    with pytest.raises(ValueError):
        find_equilibria(Zero(), [[0, 0]], tol=0.0)
