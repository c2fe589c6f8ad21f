import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from dodiff import make_box_weight, make_constant_weight
from dodiff.errors import DomainError, PreconditionError
from dodiff.kernel import mittag_leffler
from dodiff.oracle import (
    GridField,
    OracleConfig,
    compare,
    effective_history_weights,
    l1_weights,
    solve_oracle,
)
from dodiff.spectral import constant_coefficients


class TestL1Weights:
    def test_near_first_order_limit(self):
        # at alpha -> 1 the scheme degenerates to backward differencing:
        # b_0 * dt -> 1
        b = l1_weights(0.999, 4, 0.01)
        assert b[0] * 0.01 == pytest.approx(1.0, rel=1e-2)

    def test_direct_formula_value(self):
        b = l1_weights(0.5, 3, 0.1)
        assert b[0] == pytest.approx(0.1 ** -0.5 / gamma_fn(1.5), rel=1e-12)
        assert b[0] == pytest.approx(3.5682, abs=2e-4)

    def test_positive_decreasing(self):
        for alpha in (0.2, 0.5, 0.8):
            b = l1_weights(alpha, 50, 0.02)
            assert np.all(b > 0.0)
            assert np.all(np.diff(b) < 0.0)

    def test_endpoint_orders_rejected(self):
        for alpha in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(DomainError):
                l1_weights(alpha, 4, 0.1)

    def test_effective_weights_constant_density(self, const_weight):
        # for mu = 1 the effective weights are the order-average of the
        # per-order ones; spot check against a dense trapezoid average
        B = effective_history_weights(const_weight, 4, 0.05)
        al = np.linspace(1e-6, 1 - 1e-6, 20001)
        for j in range(4):
            per = ((j + 1.0) ** (1.0 - al) - j ** (1.0 - al)) \
                * 0.05 ** (-al) / gamma_fn(2.0 - al)
            assert B[j] == pytest.approx(np.trapezoid(per, al), rel=1e-5)


class TestSolveOracle:
    def test_zero_problem(self, const_weight):
        cfg = OracleConfig(dt=0.01, steps=20, grid_points=41)
        field = solve_oracle(constant_coefficients(), const_weight,
                             lambda x: np.zeros_like(x), None, cfg)
        assert np.all(field.values == 0.0)

    def test_near_classical_heat(self):
        w = make_box_weight(0.95, 0.05)
        cfg = OracleConfig(dt=2e-3, steps=500, grid_points=201)
        field = solve_oracle(constant_coefficients(), w,
                             lambda x: np.sin(x), None, cfg)
        x, u1 = field.sample(1.0)
        ref = np.exp(-1.0) * np.sin(x)
        err = np.sqrt(np.trapezoid((u1 - ref) ** 2, x) / np.trapezoid(ref ** 2, x))
        assert err <= 0.05

    def test_constant_order_box(self, box_half):
        cfg = OracleConfig(dt=1e-3, steps=1000, grid_points=201)
        field = solve_oracle(constant_coefficients(), box_half,
                             lambda x: np.sin(x), None, cfg)
        x, u1 = field.sample(1.0)
        ref = mittag_leffler(0.5, 1.0, -1.0) * np.sin(x)
        err = np.sqrt(np.trapezoid((u1 - ref) ** 2, x) / np.trapezoid(ref ** 2, x))
        assert err <= 0.03

    def test_positivity_preserved(self, const_weight):
        cfg = OracleConfig(dt=0.01, steps=60, grid_points=101)
        field = solve_oracle(constant_coefficients(), const_weight,
                             lambda x: np.sin(x) ** 2, None, cfg)
        assert field.values.min() >= -1e-10

    def test_source_driven(self, const_weight):
        cfg = OracleConfig(dt=0.01, steps=50, grid_points=101)
        field = solve_oracle(constant_coefficients(), const_weight,
                             lambda x: np.zeros_like(x),
                             lambda t, x: np.sin(x), cfg)
        assert field.values[-1].max() > 0.0

    def test_self_convergence_first_order(self, const_weight):
        # halving dt shrinks the self-difference by a first-order-ish factor
        u0 = lambda x: np.sin(x)
        vals = {}
        for steps in (125, 250, 500):
            cfg = OracleConfig(dt=1.0 / steps, steps=steps, grid_points=101)
            f = solve_oracle(constant_coefficients(), const_weight, u0, None, cfg)
            vals[steps] = f.values[-1]
        e_coarse = np.max(np.abs(vals[125] - vals[250]))
        e_fine = np.max(np.abs(vals[250] - vals[500]))
        assert 1.5 <= e_coarse / e_fine <= 2.5

    def test_alpha_node_refinement(self, const_weight):
        u0 = lambda x: np.sin(x)
        outs = []
        for nodes in (32, 64):
            cfg = OracleConfig(dt=5e-3, steps=100, grid_points=101,
                               alpha_nodes=nodes)
            f = solve_oracle(constant_coefficients(), const_weight, u0, None, cfg)
            outs.append(f.values[-1])
        rel = np.max(np.abs(outs[0] - outs[1])) / np.max(np.abs(outs[1]))
        assert rel <= 1e-6

    def test_config_guards(self):
        with pytest.raises(PreconditionError):
            OracleConfig(dt=-0.1, steps=10, grid_points=11)
        with pytest.raises(PreconditionError):
            OracleConfig(dt=0.1, steps=10, grid_points=2)


class TestCompare:
    @staticmethod
    def make_field(nx, amp=1.0, shift=0.0):
        x = np.linspace(0.0, np.pi, nx)
        times = np.array([0.0, 1.0])
        vals = np.stack([amp * np.sin(x) + shift, amp * np.sin(x) + shift])
        return GridField(times=times, grid=x, values=vals)

    def test_identical(self):
        f = self.make_field(101)
        assert np.all(compare(f, f, [1.0]) == 0.0)

    def test_tiny_shift(self):
        a = self.make_field(101)
        b = self.make_field(101, amp=1.0 + 1e-9)
        err = compare(a, b, [1.0])[0]
        assert err == pytest.approx(1e-9, rel=1e-3)

    def test_cross_grid_interpolation(self):
        a = self.make_field(101)
        b = self.make_field(301)
        assert compare(a, b, [1.0])[0] <= 1e-3

    def test_disjoint_grids(self):
        a = self.make_field(101)
        x = np.linspace(0.0, 1.0, 51)
        b = GridField(times=np.array([1.0]), grid=x,
                      values=np.sin(x)[None, :])
        with pytest.raises(DomainError):
            compare(a, b, [1.0])

    def test_missing_time(self):
        a = self.make_field(101)
        with pytest.raises(DomainError):
            compare(a, a, [0.37])
