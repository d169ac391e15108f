from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volsample import (
    SamplerConfig,
    VolumeSampler,
    enumerate_distribution,
    mcmc_trace,
    new_discretized_function,
    sample_kdpp,
    sample_mcmc,
    schmidt_decompose,
)
from volsample.errors import CombinatorialBlowup, NoNonzeroStart, RankDeficient
from volsample.samplers import acceptance_probability, draw_generator, mcmc_start

from conftest import random_instance
from oracles import subset_probabilities


def test_enumerate_diag21(diag21):
    dist = enumerate_distribution(diag21, 1)
    assert dist.subsets == ((0,), (1,))
    np.testing.assert_allclose(dist.probabilities, [0.8, 0.2], rtol=1e-15)
    assert dist.probability([1]) == pytest.approx(0.2)


def test_enumerate_full_set():
    f = random_instance(3, m=5, n=4)
    dist = enumerate_distribution(f, 4)
    assert dist.subsets == ((0, 1, 2, 3),)
    assert dist.probabilities.tolist() == [1.0]


def test_enumerate_collinear_pair_gets_zero():
    f = new_discretized_function([[1.0, 2.0, 0.0], [1.0, 2.0, 1.0]])
    dist = enumerate_distribution(f, 2)
    assert dist.probability((0, 1)) == 0.0
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)


def test_enumerate_errors(diag21):
    with pytest.raises(RankDeficient):
        enumerate_distribution(diag21, 3)
    with pytest.raises(RankDeficient):
        enumerate_distribution(new_discretized_function(np.outer([1.0, 2.0], [1.0, 1.0, 1.0])), 2)
    with pytest.raises(CombinatorialBlowup):
        enumerate_distribution(random_instance(0, m=3, n=8), 3, max_subsets=50)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), data=st.data())
def test_enumerate_matches_oracle_and_kernel_path(seed, data):
    f = random_instance(seed)
    k = data.draw(st.integers(1, min(3, f.m, f.n)))
    dist = enumerate_distribution(f, k)
    subsets, ref = subset_probabilities(f.values, f.weights, k)
    assert list(dist.subsets) == subsets
    np.testing.assert_allclose(dist.probabilities, ref, rtol=1e-9, atol=1e-14)
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    via_kernel = enumerate_distribution(f, k, scaled_kernel=True)
    np.testing.assert_allclose(via_kernel.probabilities, dist.probabilities, rtol=1e-10, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(1e-3, 1e3), data=st.data())
def test_enumerate_scaling_and_permutation(seed, c, data):
    f = random_instance(seed)
    k = data.draw(st.integers(1, min(3, f.m, f.n)))
    p = enumerate_distribution(f, k)
    scaled = enumerate_distribution(new_discretized_function(c * f.values, f.weights), k)
    np.testing.assert_allclose(scaled.probabilities, p.probabilities, rtol=1e-10, atol=1e-15)

    perm = np.array(data.draw(st.permutations(range(f.n))))
    g = new_discretized_function(f.values[:, perm], f.weights[perm])
    q = enumerate_distribution(g, k)
    for s, prob in zip(q.subsets, q.probabilities):
        assert prob == pytest.approx(p.probability(perm[list(s)]), rel=1e-9, abs=1e-14)


def test_draw_generator_substreams_differ():
    a = draw_generator(7, 0).random(4)
    assert np.array_equal(a, draw_generator(7, 0).random(4))
    assert not np.array_equal(a, draw_generator(7, 1).random(4))
    assert not np.array_equal(a, draw_generator(8, 0).random(4))


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(seed=-1)
    with pytest.raises(ValueError):
        SamplerConfig(seed=2**64)
    with pytest.raises(ValueError):
        SamplerConfig(method="gibbs")
    assert SamplerConfig().steps_for(6, 3) == 900
    with pytest.raises(ValueError):
        SamplerConfig(method="mcmc", mcmc_steps=5).steps_for(6, 3)


def test_kdpp_marginal_diag21(diag21):
    d = schmidt_decompose(diag21)
    config = SamplerConfig(seed=2024)
    draws = [sample_kdpp(d, diag21, 1, config, i) for i in range(100_000)]
    assert sum(s == (0,) for s in draws) / len(draws) == pytest.approx(0.8, abs=0.01)


def test_kdpp_full_rank_returns_everything():
    f = random_instance(5, m=6, n=4)
    d = schmidt_decompose(f)
    assert all(sample_kdpp(d, f, 4, SamplerConfig(seed=1), i) == (0, 1, 2, 3) for i in range(20))


def test_kdpp_rank_deficient(diag21):
    with pytest.raises(RankDeficient):
        sample_kdpp(schmidt_decompose(diag21), diag21, 3, SamplerConfig())


def _tv(draws, dist):
    counts = Counter(draws)
    emp = np.array([counts[s] for s in dist.subsets]) / len(draws)
    return 0.5 * np.abs(emp - dist.probabilities).sum()


@pytest.mark.parametrize("method", ["kdpp", "mcmc", "enumerate"])
def test_sampler_total_variation(method):
    f = random_instance(21, m=4, n=5)
    dist = enumerate_distribution(f, 2)
    draws = VolumeSampler(f, 2, SamplerConfig(seed=99, method=method)).draw_many(10_000)
    assert _tv(draws, dist) < 0.02


@pytest.mark.parametrize("method", ["kdpp", "mcmc", "enumerate"])
def test_sampler_reproducible(method):
    f = random_instance(8, m=5, n=6)
    config = SamplerConfig(seed=123, method=method)
    a = VolumeSampler(f, 3, config).draw_many(50)
    b = VolumeSampler(f, 3, config).draw_many(50)
    assert a == b
    # a draw depends only on its own index
    assert VolumeSampler(f, 3, config).draw_many([7, 3]) == [a[7], a[3]]
    other = VolumeSampler(f, 3, SamplerConfig(seed=124, method=method)).draw_many(50)
    assert other != a


def test_sample_functions_agree_with_sampler():
    f = random_instance(8, m=5, n=6)
    d = schmidt_decompose(f)
    kdpp = SamplerConfig(seed=5, method="kdpp")
    mcmc = SamplerConfig(seed=5, method="mcmc")
    assert VolumeSampler(f, 2, kdpp).draw(4) == sample_kdpp(d, f, 2, kdpp, 4)
    assert VolumeSampler(f, 2, mcmc).draw(4) == sample_mcmc(f, 2, mcmc, 4)


def test_mcmc_acceptance_examples(diag21):
    assert acceptance_probability(diag21, [1], [0]) == 1.0
    assert acceptance_probability(diag21, [0], [1]) == pytest.approx(0.25)
    assert acceptance_probability(diag21, [0], [0]) == 1.0


def test_mcmc_acceptance_uses_weights():
    f = new_discretized_function(np.diag([2.0, 1.0]), [1.0, 8.0])
    assert acceptance_probability(f, [1], [0]) == pytest.approx(0.5)


def test_mcmc_long_run_frequency(diag21):
    trace = mcmc_trace(diag21, 1, SamplerConfig(seed=31, method="mcmc", mcmc_steps=125_000))
    assert len(trace) == 100_000
    assert np.mean(trace[:, 0] == 0) == pytest.approx(0.8, abs=0.01)


def test_mcmc_start_and_errors(diag21):
    assert mcmc_start(diag21, 1) == (0,)
    rank1 = new_discretized_function(np.outer([1.0, 2.0], [1.0, 1.0, 1.0]))
    with pytest.raises(NoNonzeroStart):
        mcmc_start(rank1, 2)
    with pytest.raises(RankDeficient):
        sample_mcmc(rank1, 2, SamplerConfig(method="mcmc"))


def test_mcmc_without_proposals_stays_put():
    f = random_instance(2, m=4, n=3)
    assert sample_mcmc(f, 3, SamplerConfig(method="mcmc")) == (0, 1, 2)
