import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volsample import (
    InstanceSpec,
    gen_gaussian,
    gen_kernel_snapshot,
    gen_prescribed_spectrum,
    generate,
    numerical_rank,
    schmidt_decompose,
    tail_width,
)
from volsample.errors import InvalidGrid, ParseError, ShapeMismatch, SpectrumTooLong
from volsample.generators import trapezoid_weights


def test_identity_factors_give_diagonal():
    spec = InstanceSpec("prescribed_spectrum", 2, 2, params={"spectrum": [2, 1], "factors": "identity"})
    f = gen_prescribed_spectrum(spec)
    np.testing.assert_array_equal(f.values, np.diag([2.0, 1.0]))
    np.testing.assert_array_equal(f.weights, [1.0, 1.0])


def test_empty_spectrum_is_zero():
    f = gen_prescribed_spectrum(InstanceSpec("prescribed_spectrum", 3, 4, params={"spectrum": []}))
    assert not f.values.any()
    assert schmidt_decompose(f).rank == 0


def test_spectrum_too_long():
    with pytest.raises(SpectrumTooLong):
        gen_prescribed_spectrum(InstanceSpec("prescribed_spectrum", 2, 5, params={"spectrum": [3, 2, 1]}))
    with pytest.raises(ParseError):
        gen_prescribed_spectrum(InstanceSpec("prescribed_spectrum", 3, 3, params={"spectrum": [1, 2]}))


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**63),
    m=st.integers(1, 8),
    n=st.integers(1, 8),
    weights=st.sampled_from(["uniform", "random"]),
    data=st.data(),
)
def test_prescribed_spectrum_round_trip(seed, m, n, weights, data):
    r = data.draw(st.integers(0, min(m, n)))
    sigma = sorted(data.draw(st.lists(st.floats(0.01, 100.0), min_size=r, max_size=r)), reverse=True)
    spec = InstanceSpec("prescribed_spectrum", m, n, seed, {"spectrum": sigma, "weights": weights})
    d = schmidt_decompose(gen_prescribed_spectrum(spec))
    assert d.rank == r
    np.testing.assert_allclose(d.sigma, sigma, rtol=1e-10)
    for k in range(r + 2):
        assert tail_width(d, k) == pytest.approx(np.sqrt(np.sum(np.square(sigma[k:]))), rel=1e-10, abs=1e-12)


def test_inverse_kernel_entries():
    f = gen_kernel_snapshot(InstanceSpec("kernel_snapshot", 3, 4, params={"kernel": "inverse", "c": 1.0}))
    assert f.values[0, 0] == 1.0
    x, y = np.linspace(0, 1, 3), np.linspace(0, 1, 4)
    np.testing.assert_allclose(f.values, 1.0 / (x[:, None] + y[None, :] + 1.0))
    np.testing.assert_allclose(f.weights, trapezoid_weights(y))
    assert f.weights.sum() == pytest.approx(1.0)


def test_gaussian_kernel_diagonal_is_one():
    spec = InstanceSpec("kernel_snapshot", 5, 5, params={"kernel": "gaussian", "length": 0.3})
    np.testing.assert_allclose(np.diag(gen_kernel_snapshot(spec).values), 1.0)


def test_inverse_kernel_spectrum_decays():
    d = schmidt_decompose(gen_kernel_snapshot(InstanceSpec("kernel_snapshot", 16, 16, params={"kernel": "inverse"})))
    assert d.sigma[5] / d.sigma[0] < 1e-6


@pytest.mark.parametrize(
    "params, n",
    [
        ({"y_range": [1.0, 0.0]}, 4),
        ({"x_range": [0.0]}, 4),
        ({"kernel": "inverse", "c": 0.0}, 4),
        ({"kernel": "gaussian", "length": -1.0}, 4),
        ({"kernel": "inverse", "x_range": [-3.0, -2.0]}, 4),
        ({}, 1),
    ],
)
def test_invalid_grids(params, n):
    with pytest.raises(InvalidGrid):
        gen_kernel_snapshot(InstanceSpec("kernel_snapshot", 3, n, params=params))


def test_gaussian_is_deterministic():
    spec = InstanceSpec("gaussian", 4, 5, seed=77)
    assert gen_gaussian(spec).values.tobytes() == gen_gaussian(spec).values.tobytes()
    assert gen_gaussian(InstanceSpec("gaussian", 4, 5, seed=78)).values.tobytes() != gen_gaussian(spec).values.tobytes()
    single = gen_gaussian(InstanceSpec("gaussian", 1, 1, seed=5))
    assert single.values.shape == (1, 1) and np.isfinite(single.values[0, 0])
    np.testing.assert_array_equal(single.weights, [1.0])


def test_gaussian_full_rank():
    assert numerical_rank(schmidt_decompose(gen_gaussian(InstanceSpec("gaussian", 6, 10, seed=3)))) == 6


@pytest.mark.parametrize(
    "spec",
    [
        InstanceSpec("gaussian", 3, 4, 9),
        InstanceSpec("prescribed_spectrum", 4, 6, 2, {"spectrum": [3.0, 1.0], "weights": "random"}),
        InstanceSpec("kernel_snapshot", 5, 6, 0, {"kernel": "gaussian", "length": 0.5}),
    ],
)
def test_spec_json_round_trip_and_determinism(spec):
    again = InstanceSpec.from_json(spec.to_json())
    assert again == spec
    np.testing.assert_array_equal(generate(again).values, generate(spec).values)
    np.testing.assert_array_equal(generate(again).weights, generate(spec).weights)


def test_spec_validation():
    with pytest.raises(ParseError):
        InstanceSpec("lattice", 2, 2)
    with pytest.raises(ShapeMismatch):
        InstanceSpec("gaussian", 0, 2)
    with pytest.raises(ParseError):
        InstanceSpec.from_json('{"kind": "gaussian"}')
    with pytest.raises(ParseError):
        InstanceSpec.from_json("not json")
    with pytest.raises(ShapeMismatch):
        gen_prescribed_spectrum(InstanceSpec("prescribed_spectrum", 2, 2, params={"spectrum": [1], "weights": [1.0]}))
