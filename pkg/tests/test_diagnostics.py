import numpy as np
import pytest

from bayesdecide.diagnostics import effective_sample_size, is_degenerate, split_rhat
from bayesdecide.errors import ValidationError


class TestSplitRhat:
    def test_constant_chains_return_one_with_flag(self):
        chains = np.full((2, 100), 3.7)
        assert split_rhat(chains) == 1.0
        assert is_degenerate(chains)

    def test_iid_normal_chains_near_one(self):
        rng = np.random.Generator(np.random.PCG64(12))
        chains = rng.standard_normal((2, 10_000))
        value = split_rhat(chains)
        assert 0.99 <= value <= 1.01
        assert not is_degenerate(chains)

    def test_separated_chains_blow_up(self):
        rng = np.random.Generator(np.random.PCG64(13))
        chain_a = rng.normal(0.0, 1.0, size=5_000)
        chain_b = rng.normal(10.0, 1.0, size=5_000)
        assert split_rhat(np.stack([chain_a, chain_b])) > 1.2

    def test_detects_within_chain_drift(self):
        # a trend inside each chain is what the split construction catches
        trend = np.linspace(0, 10, 5_000)
        rng = np.random.Generator(np.random.PCG64(14))
        chains = np.stack([trend + rng.normal(0, 0.1, 5_000) for _ in range(2)])
        assert split_rhat(chains) > 1.2

    def test_requires_two_chains(self):
        with pytest.raises(ValidationError):
            split_rhat(np.zeros((1, 100)))

    def test_requires_four_draws(self):
        with pytest.raises(ValidationError):
            split_rhat(np.zeros((2, 3)))

    def test_param_index_selects_column(self):
        rng = np.random.Generator(np.random.PCG64(15))
        cube = rng.standard_normal((2, 1_000, 3))
        cube[:, :, 2] = 1.0  # constant parameter
        assert split_rhat(cube, param_index=2) == 1.0
        assert 0.95 < split_rhat(cube, param_index=0) < 1.05


class TestEffectiveSampleSize:
    def test_iid_chains_close_to_total(self):
        rng = np.random.Generator(np.random.PCG64(21))
        chains = rng.standard_normal((2, 5_000))
        total = chains.size
        ess = effective_sample_size(chains)
        assert abs(ess - total) / total < 0.10

    def test_ar1_chain_matches_analytic_rate(self):
        # AR(1) with coefficient phi has ESS = N * (1 - phi) / (1 + phi)
        phi = 0.9
        rng = np.random.Generator(np.random.PCG64(22))
        n = 40_000
        chains = np.empty((2, n))
        for c in range(2):
            x = np.empty(n)
            x[0] = rng.standard_normal()
            innovations = rng.standard_normal(n) * np.sqrt(1 - phi**2)
            for t in range(1, n):
                x[t] = phi * x[t - 1] + innovations[t]
            chains[c] = x
        expected = chains.size * (1 - phi) / (1 + phi)
        ess = effective_sample_size(chains)
        assert abs(ess - expected) / expected < 0.25

    def test_constant_chains_report_total_with_flag(self):
        chains = np.full((3, 50), -1.25)
        assert effective_sample_size(chains) == 150.0
        assert is_degenerate(chains)

    def test_clamped_above(self):
        rng = np.random.Generator(np.random.PCG64(23))
        chains = rng.standard_normal((2, 2_000))
        assert effective_sample_size(chains) <= 1.05 * chains.size

    def test_positive(self):
        rng = np.random.Generator(np.random.PCG64(24))
        # heavily autocorrelated random walk still yields a positive ESS
        chains = np.cumsum(rng.standard_normal((2, 2_000)), axis=1)
        assert effective_sample_size(chains) > 0
