import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import polarized_special, profile_zoo, random_points
from vacuumlab.chart import ChartFunction
from vacuumlab.diagnostics import residual_system1
from vacuumlab.fieldcore import SI, GridSpec, fd_oracle, laplacian, point4
from vacuumlab.solutions import (
    constant_background,
    mollifier,
    photon_wave,
    polarized_profile,
    rotated,
    scaled,
    stationary_pair_solution,
    superpose,
    translated,
    uk_solution,
    zero_profile,
    zero_solution,
)
from vacuumlab.chart import lift, uk_function


class TestProfiles:
    def test_mollifier_center_and_half_radius(self):
        f = mollifier().field
        assert f(point4()) == pytest.approx(1.0)
        assert f(point4(0.5, 0, 0)) == pytest.approx(math.exp(1 - 4 / 3), rel=1e-15)

    def test_mollifier_support(self, rng):
        prof = mollifier((0.3, 0.0, -0.2), 0.7, 3.0)
        assert prof.verify_support(rng, 512)
        p = point4(0.3 + 0.7, 0, -0.2)
        assert prof.field(p) == 0 and np.all(prof.field.gradient(p) == 0)

    def test_mollifier_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            mollifier(radius=0.0)

    def test_polarized_zero_amplitudes(self, rng):
        f = polarized_profile(0.0, 0.0, 3.0, 0.6, 1.0).field
        p = random_points(rng, 50)
        assert np.all(f.value(p) == 0) and np.all(f.hessian(p) == 0)

    def test_polarized_inner_plateau(self, rng):
        A, Bamp, w = 1.3, -0.4, 2.5
        f = polarized_profile(A, Bamp, w, 0.6, 1.0).field
        d = rng.normal(size=(100, 3))
        d *= (0.59 * rng.uniform(size=(100, 1)) ** (1 / 3)) / np.linalg.norm(d, axis=1, keepdims=True)
        p = np.concatenate([d, np.zeros((100, 1))], axis=1)
        x, y, z = d.T
        np.testing.assert_array_equal(f.value(p), A * y * np.sin(w * x) + Bamp * z * np.cos(w * x))

    def test_polarized_support(self, rng):
        assert polarized_special().verify_support(rng, 512)
        assert polarized_special().field(point4(1.2, 0.3, 0.1)) == 0

    def test_polarized_validation(self):
        with pytest.raises(ValueError):
            polarized_profile(1, 1, 3, 1.0, 0.5)
        with pytest.raises(ValueError):
            polarized_profile(1, 1, 0.0, 0.5, 1.0)


class TestPhotonWave:
    def test_zero_profile(self, rng):
        sol = photon_wave(zero_profile())
        p = random_points(rng, 20)
        assert np.all(sol.E(p) == 0) and np.all(sol.B(p) == 0)

    @pytest.mark.parametrize("prof", profile_zoo(), ids=lambda p: p.label)
    def test_transverse(self, prof, rng):
        sol = photon_wave(prof)
        p = random_points(rng, 200, 1.2, (-0.2, 0.2))
        assert np.all(sol.E(p)[:, 0] == 0) and np.all(sol.B(p)[:, 0] == 0)

    @pytest.mark.parametrize("prof", profile_zoo(), ids=lambda p: p.label)
    def test_travels_at_light_speed(self, prof, rng):
        c = 2.0
        from vacuumlab.fieldcore import PhysicalConstants

        k = PhysicalConstants(c=c, eps0=0.5, mu0=1.0 / (0.5 * c * c))
        sol = photon_wave(prof, k)
        p = random_points(rng, 200, 1.0, (-0.5, 0.5))
        delta = 0.37
        q = p.copy()
        q[:, 0] += c * delta
        q[:, 3] += delta
        np.testing.assert_allclose(sol.E(q), sol.E(p), atol=1e-12)
        np.testing.assert_allclose(sol.B(q), sol.B(p), atol=1e-12)

    def test_component_formula(self, rng):
        prof = polarized_special()
        sol = photon_wave(prof, SI)
        p = random_points(rng, 50, 1.0, (0, 2e-9))
        q = p.copy()
        q[:, 0] -= SI.c * p[:, 3]
        q[:, 3] = 0
        g = prof.field.gradient(q)
        np.testing.assert_allclose(sol.E(p), SI.c * np.stack([0 * g[:, 0], g[:, 1], g[:, 2]], axis=1))
        np.testing.assert_allclose(sol.B(p), np.stack([0 * g[:, 0], -g[:, 2], g[:, 1]], axis=1))

    def test_direction_rotates_travel(self, rng):
        sol = photon_wave(polarized_special(), direction="y")
        p = random_points(rng, 50, 1.0)
        q = p.copy()
        q[:, 1] += 0.3
        q[:, 3] += 0.3
        np.testing.assert_allclose(sol.E(q), sol.E(p), atol=1e-12)
        assert np.all(np.abs(sol.E(p)[:, 1]) < 1e-15)

    def test_div_b_zero(self, rng):
        for prof in profile_zoo():
            sol = photon_wave(prof)
            p = random_points(rng, 200, 1.0, (-0.3, 0.3))
            assert np.max(np.abs(np.trace(sol.B.jacobian(p), axis1=1, axis2=2))) <= 1e-12


class TestUk:
    def test_k0_is_point_charge(self, rng):
        sol = uk_solution(0.0)
        d = rng.normal(size=(100, 3))
        r = rng.uniform(0.2, 3.0, size=100)
        d *= (r / np.linalg.norm(d, axis=1))[:, None]
        p = np.concatenate([d, np.zeros((100, 1))], axis=1)
        assert np.all(sol.B(p) == 0)
        expected = -d / r[:, None] ** 3
        np.testing.assert_allclose(sol.E(p), expected, rtol=1e-10)

    def test_k1_laplacian_at_unit(self):
        u = lift(uk_function(1.0))
        assert u(point4(1, 0, 0)) == pytest.approx(1.0)
        assert fd_oracle(u, point4(1, 0, 0), 1e-4).laplacian == pytest.approx(4.0, abs=1e-6)
        assert laplacian(u, point4(1, 0, 0)) == pytest.approx(4.0, abs=1e-12)

    @pytest.mark.parametrize("k", [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    def test_stationary(self, k, rng):
        sol = uk_solution(k)
        p = random_points(rng, 50, 1.0) + np.array([1.2, 0, 0, 0])
        assert np.all(sol.E.time_derivative(p) == 0) and np.all(sol.B.time_derivative(p) == 0)

    def test_singular_set_covers_axis_for_nonzero_k(self):
        assert uk_solution(1.0).singular.contains(point4(0, 0, 5.0))
        assert not uk_solution(0.0).singular.contains(point4(0, 0, 5.0))
        assert uk_solution(0.0).singular.contains(point4(0, 0, 1e-4))

    def test_b_formula(self, rng):
        k = 1.5
        sol = uk_solution(k)
        p = random_points(rng, 50, 1.0) + np.array([1.5, 0, 0, 0])
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        s = x * x + y * y
        u = uk_function(k)(s, z)
        expected = (2 * k / s)[:, None] * np.stack([y * u, -x * u, 0 * u], axis=1)
        np.testing.assert_allclose(sol.B(p), expected, rtol=1e-13)

    @pytest.mark.parametrize("k", [-1.0, 0.5, 2.0])
    def test_jacobians_match_fd(self, k):
        sol = uk_solution(k)
        p = np.array([0.7, -0.4, 0.3, 0.0])
        for vf in (sol.E, sol.B):
            fd = fd_oracle(vf, p, 1e-5)
            np.testing.assert_allclose(fd.jacobian, vf.jacobian(p), atol=1e-6 * np.max(np.abs(vf.jacobian(p))))


class TestStationaryPair:
    def test_constant_psi(self, rng):
        psi = ChartFunction.of_s(lambda s: 0 * s + 2.0, lambda s: 0 * s, lambda s: 0 * s)
        sol = stationary_pair_solution(psi)
        p = random_points(rng, 20)
        assert np.all(sol.E(p) == 0) and np.all(sol.B(p) == 0)

    def test_psi_equals_s(self, rng):
        psi = ChartFunction.of_s(lambda s: s, lambda s: 1 + 0 * s, lambda s: 0 * s)
        from vacuumlab.fieldcore import PhysicalConstants

        k = PhysicalConstants(c=3.0, eps0=1.0, mu0=1 / 9)
        sol = stationary_pair_solution(psi, k)
        p = random_points(rng, 20)
        x, y = p[:, 0], p[:, 1]
        np.testing.assert_allclose(sol.E(p), np.stack([2 * x, 2 * y, 0 * x], axis=1))
        np.testing.assert_allclose(sol.B(p), np.stack([-2 * y, 2 * x, 0 * x], axis=1) / 3.0)

    def test_system1_residual(self, rng):
        psi = ChartFunction.of_s(
            lambda s: np.sin(s) * np.exp(-s), lambda s: np.exp(-s) * (np.cos(s) - np.sin(s)),
            lambda s: -2 * np.exp(-s) * np.cos(s),
        )
        sol = stationary_pair_solution(psi)
        rep = residual_system1(sol, random_points(rng, 100, 1.5))
        for key in rep.keys():
            assert np.max(rep.magnitude(key)) <= 1e-11, key

    def test_rejects_z_dependence(self):
        with pytest.raises(ValueError):
            stationary_pair_solution(uk_function(1.0))


class TestBackgroundAndSuperposition:
    def test_components(self):
        sol = constant_background(0.0, 1.0, 0.0)
        np.testing.assert_array_equal(sol.E(point4(1, 2, 3)), [0, 1, 0])
        np.testing.assert_array_equal(sol.B(point4(1, 2, 3)), [0, 0, 1])
        sol = constant_background(1.0, 0.0, 0.0)
        np.testing.assert_array_equal(sol.E(point4()), [0, 0, 0])
        np.testing.assert_array_equal(sol.B(point4()), [1, 0, 0])
        rep = residual_system1(sol, point4(0.2, 0.3, 0.4))
        assert all(np.all(rep.magnitude(k) == 0) for k in rep.keys())

    def test_zero_background(self, rng):
        sol = constant_background(0, 0, 0)
        p = random_points(rng, 5)
        assert np.all(sol.E(p) == 0) and np.all(sol.B(p) == 0)

    def test_zero_is_identity(self, rng):
        s = photon_wave(polarized_special())
        p = random_points(rng, 50)
        sp = superpose(s, zero_solution())
        np.testing.assert_array_equal(sp.E(p), s.E(p))
        np.testing.assert_array_equal(sp.B.jacobian(p), s.B.jacobian(p))

    def test_wave_plus_background_is_solution(self, rng):
        sol = superpose(photon_wave(polarized_special()), constant_background(0.3, -0.7, 1.1))
        rep = residual_system1(sol, random_points(rng, 300, 1.1, (-0.2, 0.2)))
        for key in rep.keys():
            assert np.max(rep.normalized[key]) <= 1e-11, key

    def test_crossing_waves_interact(self):
        sol = superpose(photon_wave(polarized_special()), photon_wave(polarized_special(), direction="y"))
        p = GridSpec.cube(0.9, 17).nodes().reshape(-1, 4)
        rep = residual_system1(sol, p)
        assert np.max(rep.magnitude("force")) > 1e-3

    def test_constants_mismatch(self):
        with pytest.raises(ValueError):
            superpose(zero_solution(), zero_solution(SI))

    @given(st.integers(0, 2**32 - 1))
    def test_commutative_associative(self, seed):
        rng = np.random.default_rng(seed)
        a = photon_wave(polarized_special())
        b = photon_wave(mollifier((0.1, 0, 0), 0.9), direction="z")
        c = constant_background(*rng.normal(size=3))
        p = random_points(rng, 20, 1.0, (-0.1, 0.1))
        for attr in ("value", "jacobian", "time_derivative"):
            ab = getattr(superpose(a, b).E, attr)(p)
            ba = getattr(superpose(b, a).E, attr)(p)
            assert np.max(np.abs(ab - ba)) <= 1e-14
            l = getattr(superpose(superpose(a, b), c).B, attr)(p)
            r = getattr(superpose(a, superpose(b, c)).B, attr)(p)
            assert np.max(np.abs(l - r)) <= 1e-14

    def test_scaled_and_translated(self, rng):
        s = photon_wave(polarized_special())
        p = random_points(rng, 20)
        np.testing.assert_allclose(scaled(s, 2.0).E(p), 2 * s.E(p))
        shift = np.array([0.1, -0.2, 0.3])
        q = p.copy()
        q[:, :3] += shift
        np.testing.assert_allclose(translated(s, shift).B(q), s.B(p))

    @given(st.integers(0, 2**32 - 1))
    def test_rotated_wave_is_a_solution(self, seed):
        rng = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        rot = q * np.sign(np.diag(r))
        if np.linalg.det(rot) < 0:
            rot[:, 0] *= -1
        base = photon_wave(polarized_special())
        sol = rotated(base, rot)
        p = random_points(rng, 64, 1.2, (-0.2, 0.2))
        back = p.copy()
        back[:, :3] = p[:, :3] @ rot
        np.testing.assert_allclose(sol.E(p), base.E(back) @ rot.T, atol=1e-13)
        np.testing.assert_allclose(sol.B(p), base.B(back) @ rot.T, atol=1e-13)
        rep = residual_system1(sol, p)
        for key in ("faraday", "div_b"):
            assert np.max(rep.normalized[key]) <= 1e-10, key
        # rho and j are themselves cancellations after rotation; bound against the terms they cancel
        term = np.max(np.abs(sol.E.jacobian(p))) + np.max(np.abs(sol.B.jacobian(p)))
        field = np.max(np.abs(sol.E(p))) + np.max(np.abs(sol.B(p)))
        assert np.max(rep.magnitude("force")) <= 1e-13 * term * field
        assert np.max(np.abs(rep.power)) <= 1e-13 * term * field

    def test_rotation_must_be_proper(self):
        with pytest.raises(ValueError):
            rotated(zero_solution(), np.diag([1.0, 1.0, -1.0]))
