import numpy as np
import pytest

from phcpg.basis import (SegmentPoly, antiderivative_from_left,
                         derivative_segment, eval_segment,
                         orthonormal_legendre_values)
from phcpg.quadrature import gauss_legendre_unit, map_nodes


def test_basis_values_low_degrees():
    assert orthonormal_legendre_values(0, [0.3])[0, 0] == pytest.approx(1.0)
    assert orthonormal_legendre_values(1, [0.5])[1, 0] == pytest.approx(0.0, abs=1e-15)
    assert orthonormal_legendre_values(2, [1.0])[2, 0] == pytest.approx(np.sqrt(5.0))
    assert orthonormal_legendre_values(1, [0.0])[1, 0] == pytest.approx(-np.sqrt(3.0))


@pytest.mark.parametrize("k", range(0, 13))
def test_gram_matrix_is_identity(k):
    # Exact quadrature for degree 2k products.
    rule = gauss_legendre_unit(k + 1)
    vals = orthonormal_legendre_values(k, rule.nodes)
    gram = (vals * rule.weights) @ vals.T
    assert np.max(np.abs(gram - np.eye(k + 1))) <= 1e-12


def test_rejects_points_outside_unit_interval():
    with pytest.raises(ValueError, match="within"):
        orthonormal_legendre_values(2, [-0.1, 0.5])
    with pytest.raises(ValueError, match="within"):
        orthonormal_legendre_values(2, [0.5, 1.2])
    with pytest.raises(ValueError, match="degree"):
        orthonormal_legendre_values(-1, [0.5])


def test_interval_orthonormality_on_generic_interval():
    a, b = 1.5, 4.0
    k = 5
    rule = gauss_legendre_unit(k + 1)
    times = map_nodes(rule, a, b)
    segs = [SegmentPoly(a, b, np.eye(k + 1)[j:j + 1, :]) for j in range(k + 1)]
    vals = np.vstack([eval_segment(s, times) for s in segs])
    gram = (b - a) * (vals * rule.weights) @ vals.T
    assert np.max(np.abs(gram - np.eye(k + 1))) <= 1e-13


def test_eval_constant_segment():
    seg = SegmentPoly(0.0, 4.0, [[3.0]])
    # Single coefficient c evaluates to c / sqrt(width).
    assert eval_segment(seg, 1.7)[0] == pytest.approx(3.0 / 2.0)


def test_constant_vector_round_trip():
    # Projecting a constant vector and evaluating reproduces it everywhere.
    ones = np.ones(4)
    seg = SegmentPoly(2.0, 3.5, np.sqrt(1.5) * np.column_stack([ones, np.zeros(4)]))
    for t in (2.0, 2.8, 3.5):
        assert eval_segment(seg, t) == pytest.approx(ones, abs=1e-14)


def test_linear_segment_from_analytic_expansion():
    # t = 1/2 + Lhat_1(t) / (2 sqrt 3) on [0, 1].
    seg = SegmentPoly(0.0, 1.0, [[0.5, 1.0 / (2.0 * np.sqrt(3.0))]])
    assert eval_segment(seg, 0.25)[0] == pytest.approx(0.25, abs=1e-15)
    values = eval_segment(seg, np.array([0.0, 0.5, 1.0]))
    assert values[0] == pytest.approx([0.0, 0.5, 1.0], abs=1e-15)


def test_eval_rejects_time_outside_interval():
    seg = SegmentPoly(0.0, 1.0, [[1.0, 0.0]])
    with pytest.raises(ValueError, match="outside"):
        eval_segment(seg, 1.001)
    # A few rounding units beyond the endpoint are absorbed.
    eval_segment(seg, 1.0 + 1e-16)


def _project_exact(fn, a, b, degree):
    """Exact-quadrature expansion of a smooth function, used as an oracle."""
    rule = gauss_legendre_unit(degree + 6)
    times = map_nodes(rule, a, b)
    basis = orthonormal_legendre_values(degree, rule.nodes) / np.sqrt(b - a)
    samples = np.atleast_2d(fn(times))
    coeffs = (b - a) * (samples * rule.weights) @ basis.T
    return SegmentPoly(a, b, coeffs)


def test_derivative_of_constant_and_linear():
    const = SegmentPoly(0.0, 2.0, [[5.0]])
    dconst = derivative_segment(const)
    assert dconst.degree == 0
    assert eval_segment(dconst, 1.0)[0] == pytest.approx(0.0, abs=0.0)

    linear = _project_exact(lambda t: t, 0.0, 1.0, 1)
    dlin = derivative_segment(linear)
    assert eval_segment(dlin, 0.3)[0] == pytest.approx(1.0, abs=1e-14)


def test_derivative_of_square_on_stretched_interval():
    seg = _project_exact(lambda t: t ** 2, 0.0, 2.0, 2)
    deriv = derivative_segment(seg)
    for t in np.linspace(0.0, 2.0, 5):
        assert abs(eval_segment(deriv, t)[0] - 2.0 * t) <= 1e-13


def test_antiderivative_examples():
    zero = SegmentPoly(0.0, 1.0, np.zeros((3, 1)))
    v = np.array([1.0, -2.0, 0.5])
    anti = antiderivative_from_left(zero, v)
    assert anti.degree == 1
    for t in (0.0, 0.4, 1.0):
        assert eval_segment(anti, t) == pytest.approx(v, abs=1e-15)

    const_one = SegmentPoly(0.0, 1.0, [[1.0]])
    ramp = antiderivative_from_left(const_one, np.zeros(1))
    assert eval_segment(ramp, 0.7)[0] == pytest.approx(0.7, abs=1e-15)

    quad = _project_exact(lambda t: 3.0 * t ** 2, 0.0, 1.0, 2)
    cubic = antiderivative_from_left(quad, np.ones(1))
    for t in (0.0, 0.5, 1.0):
        assert eval_segment(cubic, t)[0] == pytest.approx(1.0 + t ** 3, abs=1e-14)


@pytest.mark.parametrize("k", [1, 2, 4, 8])
def test_derivative_inverts_antiderivative(k):
    rng = np.random.default_rng(7 * k)
    d = SegmentPoly(0.5, 2.25, rng.standard_normal((3, k)))
    z_left = rng.standard_normal(3)
    recovered = derivative_segment(antiderivative_from_left(d, z_left))
    assert np.max(np.abs(recovered.coeffs - d.coeffs)) <= 1e-13


@pytest.mark.parametrize("k", [1, 3, 6])
def test_antiderivative_left_value_is_exact(k):
    rng = np.random.default_rng(k)
    d = SegmentPoly(-1.0, 3.0, rng.standard_normal((4, k)))
    z_left = rng.standard_normal(4)
    anti = antiderivative_from_left(d, z_left)
    scale = 1.0 + np.max(np.abs(z_left))
    assert np.max(np.abs(eval_segment(anti, -1.0) - z_left)) <= 1e-14 * scale


@pytest.mark.parametrize("k", [1, 3, 7])
def test_interpolate_then_reproject_is_identity(k):
    # Sampling a degree-k segment at a (k+1)-node Gauss rule and projecting
    # back onto degree k recovers the stored coefficients.
    rng = np.random.default_rng(31 * k)
    seg = SegmentPoly(0.2, 1.9, rng.standard_normal((2, k + 1)))
    rule = gauss_legendre_unit(k + 1)
    times = map_nodes(rule, seg.t_start, seg.t_end)
    samples = eval_segment(seg, times)
    basis = orthonormal_legendre_values(k, rule.nodes) / np.sqrt(seg.width)
    coeffs = seg.width * (samples * rule.weights) @ basis.T
    assert np.max(np.abs(coeffs - seg.coeffs)) <= 1e-12


def test_segment_validation():
    with pytest.raises(ValueError, match="degenerate"):
        SegmentPoly(1.0, 1.0, [[1.0]])
    with pytest.raises(ValueError, match="z_left"):
        antiderivative_from_left(SegmentPoly(0, 1, np.zeros((2, 1))), np.zeros(3))
    seg = SegmentPoly(0.0, 1.0, [[1.0]])
    with pytest.raises(ValueError):
        seg.coeffs[0, 0] = 2.0  # immutable
