import numpy as np
import pytest

from klever.engine import RunConfig, EnsembleResult
from klever.metrics import (cv_reduction, first_passage_prob, histogram,
                            improvement, terminal_stats)


def fake_ensemble(terminal_k, min_k=None):
    tk = np.asarray(terminal_k, dtype=float)
    mk = tk if min_k is None else np.asarray(min_k, dtype=float)
    n = tk.size
    grid = np.array([0.0, 10.0])
    z = np.zeros(2)
    return EnsembleResult(
        scenario="fake", config=RunConfig(n_paths=n, master_seed=0),
        grid=grid, terminal_k=tk, terminal_h=tk, terminal_s=tk, terminal_r=tk,
        min_k=mk, mean_k_series=z, p05_series=z, p95_series=z, crisis_curve=z)


class TestTerminalStats:
    def test_constant_sample(self):
        st = terminal_stats(fake_ensemble([50.0] * 4))
        assert st.mean == 50.0
        assert st.sd == 0.0
        assert st.cv == 0.0
        assert st.sharpe is None
        assert st.crisis_prob == 0.0

    def test_strict_crisis_count(self):
        st = terminal_stats(fake_ensemble([30.0, 50.0]), k_star=40.0)
        assert st.mean == 40.0
        assert st.crisis_prob == 0.5
        # the threshold itself is not a crisis (strict <)
        st2 = terminal_stats(fake_ensemble([40.0, 50.0]), k_star=40.0)
        assert st2.crisis_prob == 0.0

    def test_sharpe_cv_reciprocal(self):
        rng = np.random.default_rng(1)
        st = terminal_stats(fake_ensemble(rng.normal(60, 6, 1000)))
        assert st.sharpe * st.cv == pytest.approx(1.0, abs=1e-12)

    def test_sample_sd_uses_n_minus_1(self):
        st = terminal_stats(fake_ensemble([1.0, 3.0]))
        assert st.sd == pytest.approx(np.sqrt(2.0))

    def test_too_few_paths(self):
        with pytest.raises(ValueError):
            terminal_stats(fake_ensemble([50.0]))


class TestImprovement:
    def test_headline_full_vs_baseline(self):
        assert improvement(87.39, 53.35) == pytest.approx(63.8, abs=0.1)

    def test_headline_dev_vs_baseline(self):
        assert improvement(68.19, 53.35) == pytest.approx(27.8, abs=0.1)

    def test_identity(self):
        assert improvement(42.0, 42.0) == 0.0

    def test_zero_baseline_rejected(self):
        with pytest.raises(ValueError):
            improvement(1.0, 0.0)

    def test_sign_convention_guard(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a, b = rng.uniform(1, 100, 2)
            i1 = improvement(b, a)
            i2 = improvement(a, b)
            prod = (1 + i1 / 100) * (1 + i2 / 100)
            assert prod >= 1.0 - 1e-12
        assert (1 + improvement(5.0, 5.0) / 100) ** 2 == pytest.approx(1.0)


class TestCvReduction:
    def test_headline_value(self):
        assert cv_reduction(7.7, 10.3) == pytest.approx(25.2, abs=0.3)

    def test_equal(self):
        assert cv_reduction(4.2, 4.2) == 0.0

    def test_half(self):
        assert cv_reduction(5.0, 10.0) == 50.0

    def test_nonpositive_baseline_rejected(self):
        with pytest.raises(ValueError):
            cv_reduction(1.0, 0.0)


class TestHistogram:
    def test_even_split(self):
        counts, edges = histogram(np.array([1.0, 2.0, 3.0, 4.0]), 2)
        assert counts.tolist() == [2, 2]
        assert edges[0] == 1.0 and edges[-1] == 4.0

    def test_degenerate_range(self):
        counts, _ = histogram(np.array([5.0] * 7), 3)
        assert counts.sum() == 7
        assert (counts > 0).sum() == 1

    def test_counts_sum(self):
        rng = np.random.default_rng(3)
        vals = rng.normal(50, 5, 977)
        counts, edges = histogram(vals, 40)
        assert counts.sum() == 977
        assert len(edges) == 41

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            histogram(np.array([]), 4)
        with pytest.raises(ValueError):
            histogram(np.array([1.0]), 0)


class TestFirstPassage:
    def test_dip_and_recover(self):
        res = fake_ensemble([60.0], min_k=[35.0])
        assert first_passage_prob(res, 40.0) == 1.0
        assert (res.terminal_k < 40.0).mean() == 0.0

    def test_dominates_terminal_crisis(self):
        rng = np.random.default_rng(4)
        tk = rng.uniform(30, 70, 500)
        mk = tk - rng.uniform(0, 10, 500)
        res = fake_ensemble(tk, min_k=mk)
        st = terminal_stats(res)
        assert first_passage_prob(res) >= st.crisis_prob

    def test_crisis_shard_invariance(self):
        rng = np.random.default_rng(5)
        tk = rng.uniform(30, 70, 600)
        full = terminal_stats(fake_ensemble(tk)).crisis_prob
        parts = [terminal_stats(fake_ensemble(s)).crisis_prob * len(s)
                 for s in np.array_split(tk, 7)]
        assert sum(parts) / 600 == pytest.approx(full, abs=1e-12)
        perm = rng.permutation(tk)
        assert terminal_stats(fake_ensemble(perm)).crisis_prob == full
