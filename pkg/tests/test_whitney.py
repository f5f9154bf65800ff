"""Tests for Gaussian convolutions, TP lifts and approximation."""

import math

import numpy as np
import pytest

from totpos import (
    ApproxMode,
    ConvolutionPlan,
    KernelGrid,
    MinorIndex,
    NotTotallyPositiveError,
    RationalMatrix,
    Status,
    Verdict,
    Witness,
    approximate,
    cauchy_binet_det,
    check,
    convolve_step,
    fc_nodes,
    gauss,
    gauss_matrix,
    gaussian_product_identity,
    lift_iterations,
    lift_kernel,
    numeric_rank,
    scaling_constant,
    tp_lift,
)

NODES = (0.0, 1.0, 2.0)


@pytest.fixture
def ones_grid():
    """The rank-one kernel K = 1 on a 3x3 grid."""
    return KernelGrid(NODES, NODES, np.ones((3, 3)))


@pytest.fixture
def plan():
    """Convolution on the grid nodes with kappa = 1."""
    return ConvolutionPlan(1.0, NODES, NODES)


class TestGaussian:
    """Tests for the Gaussian kernel and its matrices."""

    def test_gauss_at_diagonal(self):
        """Test G(x, x) = 1."""
        assert gauss(1, 3, 3) == 1.0

    def test_gauss_kappa(self):
        """Test kappa must be positive."""
        with pytest.raises(ValueError, match="kappa"):
            gauss(0, 1, 2)

    def test_gauss_matrix_tp(self):
        """Test the Gaussian matrix on increasing nodes is TP."""
        m = RationalMatrix.from_numpy(gauss_matrix(1.0, NODES, NODES))
        assert check(m, strict=True).status is Status.TP

    def test_product_identity(self):
        """Test a Gaussian chain equals its multivariate form."""
        identity = gaussian_product_identity(0.7, [0.1, -0.4, 0.9, 0.3])
        assert identity.relative_error < 1e-12
        assert np.linalg.det(identity.V) == pytest.approx(1.4**3)
        np.testing.assert_array_equal(identity.mu, [0.1, 0.1, 0.1])

    def test_product_identity_needs_two_points(self):
        """Test a single point raises."""
        with pytest.raises(ValueError, match="two points"):
            gaussian_product_identity(1.0, [0.0])


class TestRank:
    """Tests for numeric_rank and lift_iterations."""

    def test_rank(self):
        """Test ranks of simple blocks."""
        assert numeric_rank(np.ones((3, 3))) == 1
        assert numeric_rank(np.zeros((2, 2))) == 0
        assert numeric_rank(np.eye(3)) == 3

    def test_iterations(self):
        """Test m = max(0, p - r) + 1."""
        assert lift_iterations(1, 3) == 3
        assert lift_iterations(5, 3) == 1


class TestConvolutionPlan:
    """Tests for ConvolutionPlan validation."""

    def test_nodes_increasing(self):
        """Test node vectors must increase."""
        with pytest.raises(ValueError, match="increasing"):
            ConvolutionPlan(1.0, (1.0, 0.0), (0.0,))

    def test_require_order(self, plan):
        """Test too few nodes for the order raises."""
        with pytest.raises(ValueError, match="needs at least 4"):
            plan.require_order(4)

    def test_perturbation_weight(self, plan):
        """Test the point-mass weight is exp(-kappa)."""
        assert plan.perturbation_weight == pytest.approx(math.exp(-1))


class TestConvolution:
    """Tests for convolve_step and the Cauchy-Binet expansion."""

    def test_ones_kernel(self):
        """Test T(1)(x, y) factorizes into two Gaussian sums."""
        grid = KernelGrid((0, 1), (0, 1), np.ones((2, 2)))
        plan = ConvolutionPlan(1, (0, 1), (0, 1))
        expected = (1 + math.exp(-1)) ** 2
        assert convolve_step(grid, plan, 0, 0) == pytest.approx(expected)

    def test_node_off_grid(self, ones_grid):
        """Test plan nodes must lie on the kernel grid."""
        plan = ConvolutionPlan(1.0, (0.5,), (0.0,))
        with pytest.raises(ValueError, match="not on the x grid"):
            convolve_step(ones_grid, plan, 0, 0)

    def test_cauchy_binet_matches_direct(self, plan):
        """Test the node-minor expansion equals the direct determinant."""
        values = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0], [2.0, 0.0, 1.0]])
        grid = KernelGrid(NODES, NODES, values)
        xs, ys = (0.5, 1.5), (0.2, 1.1)
        direct = np.array(
            [[convolve_step(grid, plan, x, y) for y in ys] for x in xs]
        )
        expanded = cauchy_binet_det(grid, plan, xs, ys)
        assert expanded == pytest.approx(float(np.linalg.det(direct)), rel=1e-9)


class TestLift:
    """Tests for lift_kernel and tp_lift."""

    def test_rank_one_kernel(self, ones_grid, plan):
        """Test a rank-one kernel needs two rounds for TP_2."""
        result = lift_kernel(ones_grid, 2, plan)
        assert result.rank == 1
        assert result.iterations == 2
        assert result.verdict.status is Status.TP

    def test_zero_kernel(self, plan):
        """Test the zero kernel lifts to a positive TP_2 kernel."""
        zero = KernelGrid(NODES, NODES, np.zeros((3, 3)))
        result = lift_kernel(zero, 2, plan)
        assert result.iterations == 3
        assert result.verdict.status is Status.TP
        assert (tp_lift(zero, 2, plan).values > 0).all()

    @pytest.mark.parametrize(
        ("nodes", "kappa", "p"),
        [
            (np.linspace(-1.0, 1.0, 5), 1.0, 3),
            (np.linspace(-1.0, 1.0, 5), 1.0, 2),
            (np.arange(-2.0, 3.0), 1.0, 2),
            (np.linspace(-1.5, 1.5, 4), 4.0, 2),
            (np.linspace(-1.5, 1.5, 4), 4.0, 3),
            (np.linspace(0.0, 1.0, 3), 2.0, 3),
        ],
    )
    def test_step_kernel(self, nodes, kappa, p):
        """Test the step kernel 1{x >= 0, y >= 0} lifts to a certified TP_p."""
        step = np.outer(nodes >= 0, nodes >= 0).astype(float)
        grid = KernelGrid(tuple(nodes), tuple(nodes), step)
        result = lift_kernel(grid, p, ConvolutionPlan(kappa, nodes, nodes))
        assert result.rank == 1
        assert result.iterations == p
        assert result.verdict.status is Status.TP
        assert result.verdict.order == p

    @pytest.mark.parametrize(
        ("nodes", "kappa", "p"),
        [
            (np.linspace(-1.0, 1.0, 5), 1.0, 3),
            (np.arange(-2.0, 3.0), 1.0, 2),
            (np.linspace(-1.5, 1.5, 4), 4.0, 3),
        ],
    )
    def test_settled_in_fixed_point(self, nodes, kappa, p):
        """Test float-unresolvable lifts are settled at a positive bit width."""
        step = np.outer(nodes >= 0, nodes >= 0).astype(float)
        grid = KernelGrid(tuple(nodes), tuple(nodes), step)
        result = lift_kernel(grid, p, ConvolutionPlan(kappa, nodes, nodes))
        assert result.precision_bits > 64
        assert result.to_dict()["precision_bits"] == result.precision_bits

    def test_tp_lift_raises_uncertified(self, ones_grid, plan, monkeypatch):
        """Test tp_lift refuses to return a lift whose certificate failed."""
        witness = Witness(MinorIndex((0, 1), (0, 1)), -1e-30)
        failed = Verdict(Status.FAIL, 2, 0.0, witness)
        monkeypatch.setattr(
            "totpos._whitney._certify_lift", lambda *args, **kwargs: (failed, 512)
        )
        with pytest.raises(NotTotallyPositiveError, match="512 fixed-point bits"):
            tp_lift(ones_grid, 2, plan)

    def test_rejects_non_tn(self):
        """Test a kernel with a negative minor is refused with its witness."""
        grid = KernelGrid((0, 1), (0, 1), np.array([[0.0, 1.0], [1.0, 0.0]]))
        plan = ConvolutionPlan(1.0, (0, 1), (0, 1))
        with pytest.raises(NotTotallyPositiveError) as info:
            lift_kernel(grid, 2, plan)
        assert info.value.verdict.witness.value == pytest.approx(-1.0)

    def test_to_dict(self, ones_grid, plan):
        """Test the JSON form of a lift."""
        doc = lift_kernel(ones_grid, 2, plan).to_dict()
        assert doc["rank"] == 1
        assert doc["verdict"]["status"] == "TP"
        assert len(doc["values"]) == 3


class TestApproximate:
    """Tests for the discretized approximation schemes."""

    def test_fc_nodes(self):
        """Test the node grid of resolution 1."""
        np.testing.assert_array_equal(fc_nodes(1), [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_scaling_constant(self):
        """Test both scaling constants at m = n = 1."""
        assert scaling_constant("fc", 1, 1) == pytest.approx(0.5 / math.sqrt(math.pi))
        assert scaling_constant(ApproxMode.CC, 1, 1) == pytest.approx(0.25 / math.pi)

    def test_report(self):
        """Test a fc report at resolution 2."""

        def kernel(x, y):
            return math.exp(-((x - y) ** 2))

        report = approximate(kernel, 1, 2, [(1, 0.5), (2, 1.0)], "fc", d=2)
        assert report.mode is ApproxMode.FC
        assert report.iterations == lift_iterations(report.rank, 1)
        assert len(report.points) == 2
        assert math.isfinite(report.max_error)
        assert report.to_csv().splitlines()[0] == "x,y,n,scaled,target,abs_error"

    def test_constant_kernel_certified(self):
        """Test K = 1 on {1, 2} x R is certified TP_2 at resolution 4."""
        points = [(1, -1), (1, 1), (2, -1), (2, 1)]
        report = approximate(lambda j, x: 1.0, 2, 4, points, "fc", d=2)
        assert report.rank == 1
        assert report.iterations == 2
        assert report.verdict.status is Status.TP
        assert report.precision_bits > 0
        assert report.to_dict()["precision_bits"] == report.precision_bits

    def test_fc_convergence(self):
        """Test the fc error for K = 1 shrinks at every step from n = 5 to 8."""
        points = [(1, -1), (1, 0), (1, 1), (2, -1), (2, 0.5), (2, 1)]
        errors = [
            approximate(lambda j, x: 1.0, 1, n, points, "fc", d=2).max_error
            for n in range(5, 9)
        ]
        assert all(a > b for a, b in zip(errors, errors[1:], strict=False))
        assert errors[-1] < 0.05

    def test_resolution_below_order(self):
        """Test n must be at least p."""
        with pytest.raises(ValueError, match="at least the order"):
            approximate(lambda x, y: 1.0, 3, 2, [(0, 0)], "cc")

    def test_resolution_cap(self):
        """Test n is capped by max_resolution."""
        with pytest.raises(ValueError, match="max_resolution"):
            approximate(lambda x, y: 1.0, 1, 11, [(0, 0)], "cc")

    def test_fc_needs_d(self):
        """Test fc mode needs the finite factor size."""
        with pytest.raises(ValueError, match="fc mode"):
            approximate(lambda x, y: 1.0, 1, 1, [(1, 0)], "fc")

    def test_unbounded_kernel(self):
        """Test non-finite kernel values raise."""
        with pytest.raises(ValueError, match="bounded"):
            approximate(lambda x, y: math.inf, 1, 1, [(0, 0)], "cc")
