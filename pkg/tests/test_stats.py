import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dermalab import errors, features, ingest, stats


def gauss_legendre_chi2_upper(x, df, panels=2000):
    """Independent quadrature of the chi-square density over [0, x].

    Integrates in u = sqrt(t), where the integrand 2 u^{df-1} e^{-u^2/2} is
    smooth even for df = 1 (the density itself is singular at 0 there).
    """
    from numpy.polynomial.legendre import leggauss
    from math import gamma, sqrt

    nodes, weights = leggauss(10)
    edges = np.linspace(0.0, sqrt(x), panels + 1)
    total = 0.0
    norm = 1.0 / (2 ** (df / 2) * gamma(df / 2))
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        u = mid + half * nodes
        total += half * np.sum(weights * 2.0 * norm * u ** (df - 1)
                               * np.exp(-u * u / 2.0))
    return 1.0 - total


class TestChi2:
    def test_zero_statistic(self):
        assert stats.chi2_upper_tail(0.0, 1) == 1.0
        assert stats.chi2_upper_tail(0.0, 5) == 1.0

    def test_df2_closed_form(self):
        for x in (0.5, 1.0, 3.6, 7.2, 20.0, 50.0):
            assert stats.chi2_upper_tail(x, 2) == pytest.approx(np.exp(-x / 2),
                                                                abs=1e-12)

    def test_df1_reference_point(self):
        assert stats.chi2_upper_tail(3.841, 1) == pytest.approx(0.0500, abs=5e-4)

    def test_against_quadrature(self):
        for x, df in [(3.841, 1), (7.2, 2), (11.07, 5), (2.5, 3)]:
            assert stats.chi2_upper_tail(x, df) == pytest.approx(
                gauss_legendre_chi2_upper(x, df), abs=1e-9)

    def test_strictly_decreasing(self):
        xs = np.linspace(0.0, 30.0, 100)
        ps = [stats.chi2_upper_tail(float(x), 3) for x in xs]
        assert all(b < a for a, b in zip(ps, ps[1:]))

    def test_negative_rejected(self):
        with pytest.raises(errors.NegativeStatistic):
            stats.chi2_upper_tail(-1.0, 2)

    def test_bad_df_rejected(self):
        with pytest.raises(ValueError):
            stats.chi2_upper_tail(1.0, 0)


class TestKruskal:
    def test_identical_groups(self):
        res = stats.kruskal_wallis([[1, 2, 3], [1, 2, 3]])
        assert res.H == pytest.approx(0.0, abs=1e-12)
        assert res.p > 0.99

    def test_textbook_example(self):
        res = stats.kruskal_wallis([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        assert res.H == pytest.approx(7.2, abs=1e-12)
        assert res.df == 2
        assert res.p == pytest.approx(0.02732, abs=1e-4)

    def test_tie_correction_hand_example(self):
        # ranks 1.5 1.5 / 3.5 3.5; raw H = 2.4, correction 0.8 -> 3.0
        res = stats.kruskal_wallis([[1, 1], [2, 2]])
        assert res.H == pytest.approx(3.0, abs=1e-12)

    def test_empty_group(self):
        with pytest.raises(errors.EmptyGroup):
            stats.kruskal_wallis([[1, 2], []])

    def test_too_few_groups(self):
        with pytest.raises(errors.TooFewGroups):
            stats.kruskal_wallis([[1, 2, 3]])

    def test_matches_scipy(self):
        import scipy.stats as ss

        rng = np.random.default_rng(0)
        groups = [rng.normal(size=9).tolist() for _ in range(3)]
        groups[1][2] = groups[0][4]  # inject a tie
        ours = stats.kruskal_wallis(groups)
        ref = ss.kruskal(*groups)
        assert ours.H == pytest.approx(ref.statistic, rel=1e-12)
        assert ours.p == pytest.approx(ref.pvalue, rel=1e-9)

    @given(st.lists(st.integers(-10_000, 10_000), min_size=3, max_size=15,
                    unique=True),
           st.lists(st.integers(-10_000, 10_000), min_size=3, max_size=15,
                    unique=True))
    @settings(max_examples=40, deadline=None)
    def test_monotone_transform_invariance(self, g1, g2):
        # integer-spaced inputs keep a strictly monotone float transform
        # injective, so the rank pattern (ties included) is preserved exactly
        res_raw = stats.kruskal_wallis([g1, g2])
        transform = lambda v: [np.expm1(x / 5000.0) for x in v]
        res_tr = stats.kruskal_wallis([transform(g1), transform(g2)])
        assert res_tr.H == pytest.approx(res_raw.H, abs=1e-12)


class TestSpearman:
    def test_strictly_increasing(self):
        assert stats.spearman_rho([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0

    def test_hand_example_exact(self):
        assert stats.spearman_rho([1, 2, 3], [3, 1, 2]) == -0.5

    def test_reversal_antisymmetry(self):
        x = [1.0, 2.0, 5.0, 9.0, 11.0]
        y = [3.0, 7.0, 1.0, 10.0, 4.0]
        assert stats.spearman_rho(x, y) == pytest.approx(
            -stats.spearman_rho(x, y[::-1]), abs=1e-12)

    def test_in_unit_interval(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.normal(size=12)
            y = rng.normal(size=12)
            assert -1.0 <= stats.spearman_rho(x, y) <= 1.0

    def test_ties_match_scipy(self):
        import scipy.stats as ss

        x = [1, 2, 2, 3, 5, 5, 5, 8]
        y = [4, 4, 1, 2, 9, 7, 7, 7]
        assert stats.spearman_rho(x, y) == pytest.approx(
            ss.spearmanr(x, y).statistic, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(errors.LengthMismatch):
            stats.spearman_rho([1, 2, 3], [1, 2])

    def test_degenerate(self):
        with pytest.raises(errors.DegenerateInput):
            stats.spearman_rho([1, 1, 1], [1, 2, 3])


class TestPermutationUniformity:
    def test_kruskal_p_uniform_under_null(self):
        import scipy.stats as ss

        rng = np.random.default_rng(7)
        pooled = rng.normal(size=48)
        ps = []
        for _ in range(1000):
            perm = rng.permutation(48)
            groups = [pooled[perm[:16]], pooled[perm[16:32]], pooled[perm[32:]]]
            ps.append(stats.kruskal_wallis(groups).p)
        ks = ss.kstest(ps, "uniform")
        assert ks.pvalue > 0.01


def _row(window_id, label, tvsymp):
    return features.WindowFeatureRow(
        window_id=window_id, label=label, tvsymp=tvsymp, edasymp=0.5,
        edasymp_n=0.5, nsscr=3.0, env={c: 0.0 for c in ingest.ENV_CHANNELS},
    )


class TestEventSummary:
    def test_single_row_flagged(self):
        summary = stats.event_summary([_row("a", "baseline", 1.0)])
        mean, std, n = summary.table[("baseline", "tvsymp")]
        assert (mean, std, n) == (1.0, 0.0, 1)
        assert ("baseline", "tvsymp") in summary.singletons

    def test_mean_and_sample_std(self):
        rows = [_row(f"w{k}", "task", v) for k, v in enumerate([1.0, 2.0, 3.0])]
        summary = stats.event_summary(rows)
        mean, std, n = summary.table[("task", "tvsymp")]
        assert mean == pytest.approx(2.0)
        assert std == pytest.approx(1.0)  # n-1 denominator
        assert n == 3

    def test_formatting(self):
        rows = [_row(f"w{k}", "task", v) for k, v in enumerate([1.0, 2.0, 3.0])]
        summary = stats.event_summary(rows)
        assert summary.format_cell("task", "tvsymp") == "2.0000 ± 1.0000"

    def test_label_order_is_first_seen(self):
        rows = [_row("a", "task", 1.0), _row("b", "baseline", 1.0),
                _row("c", "task", 2.0)]
        summary = stats.event_summary(rows)
        assert summary.labels == ("task", "baseline")
