import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import qfibounds as q
from qfibounds.sld import (
    TimeKernelSpec,
    energy_kernel,
    kernel_g,
    kernel_g_integral,
    lyapunov_residual,
    optimal_estimator,
    sld_matrix,
    sld_time_domain,
)

from conftest import random_instance, rel_close


class TestEnergyKernel:
    def test_zero_limit(self):
        assert energy_kernel(np.array([0.0]), 2.0)[0] == -2.0

    def test_odd_in_omega_times_sign(self):
        # f is even: f(-w) = f(w)
        w = np.array([0.3, 1.7, 5.0])
        assert np.allclose(energy_kernel(w, 1.5), energy_kernel(-w, 1.5))

    @given(omega=st.floats(1e-6, 0.5), beta=st.floats(0.1, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_taylor_continuity(self, omega, beta):
        # |f(w) + beta| <= beta^3 w^2 / 12 near w = 0
        f = float(energy_kernel(np.array([omega]), beta)[0])
        assert abs(f + beta) <= beta**3 * omega**2 / 12 + 1e-12

    def test_large_omega_decay(self):
        f = float(energy_kernel(np.array([100.0]), 1.0)[0])
        assert rel_close(f, -2.0 / 100.0, rel=1e-6)


class TestSldMatrix:
    def test_defining_traces(self, tfim3):
        _, O, ens = tfim3
        res = sld_matrix(ens, O)
        assert abs(res.trace_rho_L) < 1e-9
        assert rel_close(res.trace_rho_L2, q.qfi_spectral(ens, O), rel=1e-8)

    def test_hermitian_output(self, tfim3):
        _, O, ens = tfim3
        L = sld_matrix(ens, O).L
        assert np.max(np.abs(L - L.conj().T)) < 1e-12

    def test_single_qubit_closed_form(self, single_qubit_beta1):
        # H = sigma^z, O = sigma^x, beta = 1: L = -tanh(1) sigma^x in the
        # computational basis (f(+-2) (O - <O>) with <O> = 0)
        O, ens = single_qubit_beta1
        L = sld_matrix(ens, O).L
        assert rel_close(float(L[0, 1].real), -math.tanh(1.0))
        assert abs(L[0, 0]) < 1e-14

    @given(seed=st.integers(0, 3000), beta=st.sampled_from([0.2, 1.0, 5.0]))
    @settings(max_examples=30, deadline=None)
    def test_traces_random(self, seed, beta):
        _, O, ens = random_instance(4, beta, seed)
        res = sld_matrix(ens, O)
        assert abs(res.trace_rho_L) < 1e-9
        f = q.qfi_spectral(ens, O)
        assert abs(res.trace_rho_L2 - f) <= 1e-8 * max(1.0, abs(f))

    def test_degenerate_cluster_uses_minus_beta(self):
        H = np.zeros((2, 2), dtype=complex)
        O = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        ens = q.prepared_gibbs(H, O, 2.0)
        L = sld_matrix(ens, O).L
        # rho is maximally mixed, <O> = 0, so L = -beta * O
        assert np.max(np.abs(L + 2.0 * O)) < 1e-12

    def test_beta_zero_rejected(self):
        H, O = q.build_tfim(q.ModelSpec(2, 0.5))
        ens = q.prepared_gibbs(H, O, 0.0)
        with pytest.raises(ValueError):
            sld_matrix(ens, O)


class TestLyapunovResidual:
    def test_small_residual(self, tfim3):
        model, O, ens = tfim3
        L = sld_matrix(ens, O).L
        assert lyapunov_residual(ens, L, model, 1e-4) < 1e-6

    def test_quadratic_in_delta(self, tfim3):
        model, O, ens = tfim3
        L = sld_matrix(ens, O).L
        r_coarse = lyapunov_residual(ens, L, model, 2e-4)
        r_fine = lyapunov_residual(ens, L, model, 1e-4)
        # central difference: halving delta shrinks the residual ~4x
        assert r_fine < r_coarse / 2.5

    def test_delta_validation(self, tfim3):
        model, O, ens = tfim3
        L = sld_matrix(ens, O).L
        with pytest.raises(ValueError):
            lyapunov_residual(ens, L, model, 1e-2)


class TestTimeKernel:
    def test_kernel_g_negative_and_even(self):
        assert kernel_g(0.5, 1.0) < 0
        assert kernel_g(-0.5, 1.0) == kernel_g(0.5, 1.0)

    def test_kernel_g_singular_at_zero(self):
        with pytest.raises(ValueError):
            kernel_g(0.0, 1.0)

    @given(beta=st.floats(0.2, 5.0))
    @settings(max_examples=20, deadline=None)
    def test_integral_is_minus_beta(self, beta):
        val = kernel_g_integral(beta)
        assert abs(val + beta) <= 1e-6 * beta

    def test_integral_converges_with_horizon(self):
        beta = 1.0
        errs = [
            abs(kernel_g_integral(beta, horizon=h * beta) + beta)
            for h in (2.0, 5.0, 10.0)
        ]
        assert errs[0] > errs[1] > errs[2]

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            TimeKernelSpec(beta=1.0, horizon=12.0, panels=4)
        with pytest.raises(ValueError):
            TimeKernelSpec(beta=-1.0, horizon=12.0, panels=64)
        with pytest.raises(ValueError):
            TimeKernelSpec(beta=1.0, horizon=0.0, panels=64)


class TestSldTimeDomain:
    def test_reconstruction_accuracy(self, tfim3):
        _, O, ens = tfim3
        exact = sld_matrix(ens, O).L
        spec = TimeKernelSpec(ens.beta, 12 * ens.beta, 2048)
        L = sld_time_domain(ens, O, spec)
        l_norm = float(np.max(np.abs(exact)))
        assert float(np.max(np.abs(L - exact))) < 1e-5 * l_norm

    def test_horizon_decay_rate(self, tfim3):
        # truncation error decays like the kernel tail e^{-(pi/beta) t};
        # points below 1e-9 sit on the quadrature floor and are excluded
        _, O, ens = tfim3
        beta = ens.beta
        exact = sld_matrix(ens, O).L
        horizons = np.linspace(2 * beta, 10 * beta, 9)
        devs = np.array(
            [
                float(
                    np.max(
                        np.abs(
                            sld_time_domain(
                                ens, O, TimeKernelSpec(beta, float(h), 1024)
                            )
                            - exact
                        )
                    )
                )
                for h in horizons
            ]
        )
        mask = devs > 1e-9
        assert mask.sum() >= 4
        slope = np.polyfit(horizons[mask], np.log(devs[mask]), 1)[0]
        target = -math.pi / beta
        assert abs(slope - target) <= 0.25 * abs(target)

    def test_beta_mismatch_rejected(self, tfim3):
        _, O, ens = tfim3
        with pytest.raises(ValueError):
            sld_time_domain(ens, O, TimeKernelSpec(ens.beta * 2, 12.0, 256))


class TestOptimalEstimator:
    def test_locally_unbiased_and_efficient(self, tfim3):
        _, O, ens = tfim3
        theta = 0.05
        est = optimal_estimator(ens, O, theta)
        rho = ens.density_matrix()
        mean = float(np.trace(rho @ est).real)
        assert rel_close(mean, theta, rel=1e-9, abs_=1e-12)
        second = float(np.trace(rho @ est @ est).real)
        var = second - mean**2
        assert rel_close(var, 1.0 / q.qfi_spectral(ens, O), rel=1e-8)

    def test_vanishing_qfi_rejected(self):
        H, O = q.build_tfim(q.ModelSpec(2, 0.5))
        # beta tiny but positive: QFI ~ beta^2 -> below threshold
        ens = q.prepared_gibbs(H, O, 1e-8)
        with pytest.raises(ValueError):
            optimal_estimator(ens, O, 0.0)
