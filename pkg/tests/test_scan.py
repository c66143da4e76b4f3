import math

import numpy as np
import pytest
from sklearn.base import clone

from triscan.data import JointCorrelation, correlation_matrix
from triscan.graphs import prior_weights
from triscan.scan import (
    STRATEGIES,
    RegulationScanner,
    full_scan,
    mediation_scan,
    rank_edges,
    scan_pair,
)
from triscan.scoring import posterior_upper_bound
from triscan.simulate import GrnSpec, make_grn_dataset

BOUND_1000 = posterior_upper_bound(1000, 4.0, prior_weights("dmag-bk"))


def grn_correlation(seed=31, n=60, m=6, l=4):
    dataset, _, _ = make_grn_dataset(GrnSpec(n_traits=m, n_markers=l, seed=seed), n)
    return correlation_matrix(dataset)


def chain_matrix(r_lt1=0.6, r_t1t2=0.5, n=1000):
    # one marker feeding trait 1 feeding trait 2, correlations exactly
    # consistent with the chain
    r_lt2 = r_lt1 * r_t1t2
    matrix = np.array(
        [[1.0, r_lt1, r_lt2], [r_lt1, 1.0, r_t1t2], [r_lt2, r_t1t2, 1.0]]
    )
    return JointCorrelation(matrix, n, 1, 2)


class TestFullScan:
    def test_batch_matches_scalar_reference(self):
        corr = grn_correlation()
        for strategy in STRATEGIES:
            result = full_scan(corr, strategy=strategy)
            for i in range(corr.n_traits):
                for j in range(corr.n_traits):
                    if i == j:
                        continue
                    p, k, _ = scan_pair(corr, "dmag-bk", 4.0, i, j, strategy)
                    assert abs(result.prob[i, j] - p) <= 1e-12, (strategy, i, j)
                    assert result.best_marker[i, j] == k

    def test_chain_exact_cell_reaches_the_bound(self):
        result = full_scan(chain_matrix())
        assert result.prob[0, 1] == pytest.approx(BOUND_1000, abs=1e-10)
        assert result.best_marker[0, 1] == 0
        # the reverse orientation gets much less support
        assert result.prob[1, 0] < result.prob[0, 1]

    def test_diagonal_is_nan_with_marker_minus_one(self):
        result = full_scan(grn_correlation())
        assert np.all(np.isnan(np.diag(result.prob)))
        assert np.all(np.diag(result.best_marker) == -1)

    def test_no_cell_exceeds_the_bound(self):
        corr = grn_correlation(seed=5, n=100, m=8, l=6)
        result = full_scan(corr)
        bound = posterior_upper_bound(100, 4.0, prior_weights("dmag-bk"))
        assert np.nanmax(result.prob) <= bound + 1e-12

    def test_uncorrelated_data_scores_low(self):
        rng = np.random.default_rng(0)
        matrix = np.eye(7)
        corr = JointCorrelation(matrix, 100, 3, 4)
        result = full_scan(corr)
        assert np.nanmax(result.prob) < 0.05

    def test_tied_markers_resolve_to_lowest_index(self):
        corr = grn_correlation(seed=8, m=5, l=3)
        matrix = corr.matrix.copy()
        # make marker 1 a copy of marker 0
        matrix[1, :] = matrix[0, :]
        matrix[:, 1] = matrix[:, 0]
        matrix[0, 1] = matrix[1, 0] = 1.0
        matrix[1, 1] = 1.0
        dup = JointCorrelation(matrix, corr.n, corr.n_markers, corr.n_traits)
        result = full_scan(dup)
        off = ~np.eye(5, dtype=bool)
        assert not np.any(result.best_marker[off] == 1)

    def test_max_strategy_dominates_loclink_cellwise(self):
        corr = grn_correlation(seed=12, n=150, m=7, l=5)
        p_max = full_scan(corr, strategy="max").prob
        p_loc = full_scan(corr, strategy="loclink").prob
        off = ~np.eye(7, dtype=bool)
        assert np.all(p_max[off] >= p_loc[off] - 1e-12)

    def test_loclink_uses_one_marker_per_regulator(self):
        corr = grn_correlation(seed=13)
        result = full_scan(corr, strategy="loclink")
        for i in range(corr.n_traits):
            k_star = int(np.argmax(np.abs(corr.marker_trait[:, i])))
            row = result.best_marker[i]
            assert set(row[row >= 0]) <= {k_star}

    def test_thread_count_does_not_change_results(self):
        corr = grn_correlation(seed=14, m=9, l=5)
        base = full_scan(corr, threads=1)
        for threads in (2, 4, 0):
            other = full_scan(corr, threads=threads)
            assert np.array_equal(base.prob, other.prob, equal_nan=True)
            assert np.array_equal(base.best_marker, other.best_marker)

    def test_degenerate_triplets_are_skipped_and_counted(self):
        # a marker perfectly correlated with trait 1 makes every one of
        # its triplets through that trait non positive definite
        matrix = np.array([[1.0, 1.0, 0.3], [1.0, 1.0, 0.3], [0.3, 0.3, 1.0]])
        corr = JointCorrelation(matrix, 50, 1, 2)
        result = full_scan(corr)
        assert result.meta["skipped_triplets"] == 2
        assert result.prob[0, 1] == 0.0 and result.prob[1, 0] == 0.0
        assert result.best_marker[0, 1] == -1

    def test_meta_contents(self):
        corr = grn_correlation(seed=15)
        meta = full_scan(corr, prior="dag-bk", nu=6.0, strategy="loclink").meta
        assert meta["n"] == corr.n
        assert meta["nu"] == 6.0
        assert meta["prior"] == "dag-bk"
        assert meta["strategy"] == "loclink"
        assert meta["n_markers"] == corr.n_markers
        assert meta["n_traits"] == corr.n_traits

    def test_explicit_prior_vector_accepted(self):
        corr = grn_correlation(seed=16)
        named = full_scan(corr, prior="dmag-bk")
        explicit = full_scan(corr, prior=prior_weights("dmag-bk"))
        assert np.array_equal(named.prob, explicit.prob, equal_nan=True)
        assert explicit.meta["prior"] == "custom"

    def test_validation(self):
        corr = grn_correlation()
        with pytest.raises(ValueError):
            full_scan(corr, strategy="best")
        single_trait = JointCorrelation(np.eye(2), 10, 1, 1)
        with pytest.raises(ValueError):
            full_scan(single_trait)


class TestRankEdges:
    def test_reference_sort(self):
        corr = grn_correlation(seed=17)
        result = full_scan(corr)
        ranked = rank_edges(result)
        m = corr.n_traits
        assert len(ranked) == m * (m - 1)
        expected = sorted(
            (
                (i, j, float(result.prob[i, j]), int(result.best_marker[i, j]))
                for i in range(m)
                for j in range(m)
                if i != j
            ),
            key=lambda r: (-r[2], r[0], r[1]),
        )
        assert ranked == expected

    def test_top_k(self):
        result = full_scan(grn_correlation(seed=18))
        assert rank_edges(result, top_k=3) == rank_edges(result)[:3]


class TestMediation:
    def mediated_setup(self, n=2000):
        # marker -> T1 -> T2 -> T3, every correlation chain-consistent
        r = np.eye(4)
        r[0, 1] = 0.5
        r[1, 2] = 0.8
        r[2, 3] = 0.7
        r[1, 3] = 0.8 * 0.7
        r[0, 2] = 0.5 * 0.8
        r[0, 3] = 0.5 * 0.8 * 0.7
        matrix = np.maximum(r, r.T)
        corr = JointCorrelation(matrix, n, 1, 3)
        return corr, full_scan(corr)

    def test_chain_mediator_found(self):
        corr, result = self.mediated_setup()
        report = mediation_scan(result, corr, "dmag-bk", 4.0, (0, 2), 0.5)
        assert report.edge == (0, 2)
        assert len(report.findings) == 1
        finding = report.findings[0]
        assert finding.mediator == 1
        assert finding.status == "mediated"
        assert finding.posterior > 0.8

    def test_direct_component_stays_undetermined(self):
        # two markers make all three edges look confident, but the trait
        # triplet itself is far from a chain (strong direct T1 -> T3)
        matrix = np.eye(5)
        pairs = {
            (0, 2): 0.5, (0, 3): 0.4, (0, 4): 0.45,       # M1 chains via T1
            (1, 2): 0.0, (1, 3): 0.6, (1, 4): 0.42,       # M2 chains via T2
            (2, 3): 0.8, (2, 4): 0.9, (3, 4): 0.7,
        }
        for (a, b), v in pairs.items():
            matrix[a, b] = matrix[b, a] = v
        corr = JointCorrelation(matrix, 2000, 2, 3)
        result = full_scan(corr)
        assert result.prob[0, 2] > 0.6 and result.prob[0, 1] > 0.6 and result.prob[1, 2] > 0.6
        report = mediation_scan(result, corr, "dmag-bk", 4.0, (0, 2), 0.6)
        assert len(report.findings) == 1
        assert report.findings[0].mediator == 1
        assert report.findings[0].status == "undetermined"
        assert report.findings[0].posterior < 0.1

    def test_edge_below_threshold_rejected(self):
        corr, result = self.mediated_setup()
        with pytest.raises(ValueError):
            mediation_scan(result, corr, "dmag-bk", 4.0, (2, 0), 0.99)

    def test_degenerate_trait_triplet_reports_nan(self):
        matrix = np.eye(4)
        matrix[1, 2] = matrix[2, 1] = 1.0  # T1 and T2 perfectly correlated
        matrix[1, 3] = matrix[3, 1] = 0.4
        matrix[2, 3] = matrix[3, 2] = 0.4
        matrix[0, 1] = matrix[1, 0] = 0.3
        matrix[0, 2] = matrix[2, 0] = 0.3
        corr = JointCorrelation(matrix, 100, 1, 3)
        result = full_scan(corr)
        report = mediation_scan(result, corr, "dmag-bk", 4.0, (0, 2), 0.0)
        statuses = {f.mediator: f for f in report.findings}
        assert statuses[1].status == "undetermined"
        assert math.isnan(statuses[1].posterior)


class TestRegulationScanner:
    def test_get_set_params_round_trip(self):
        est = RegulationScanner(prior="dag-bk", nu=5.0, strategy="loclink", threads=2)
        params = est.get_params()
        assert params == {"prior": "dag-bk", "nu": 5.0, "strategy": "loclink", "threads": 2}
        est.set_params(nu=4.0)
        assert est.nu == 4.0
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()

    def test_fit_exposes_scan_attributes(self):
        dataset, _, _ = make_grn_dataset(GrnSpec(n_traits=6, n_markers=4, seed=19), 80)
        est = RegulationScanner()
        assert est.fit(dataset.markers, dataset.traits) is est
        direct = full_scan(correlation_matrix(dataset))
        assert np.array_equal(est.probabilities_, direct.prob, equal_nan=True)
        assert np.array_equal(est.best_markers_, direct.best_marker)
        assert est.n_samples_ == 80
        assert est.upper_bound_ == posterior_upper_bound(80, 4.0, prior_weights("dmag-bk"))
        assert np.nanmax(est.probabilities_) <= est.upper_bound_ + 1e-12

    def test_top_edges_requires_fit(self):
        with pytest.raises(RuntimeError):
            RegulationScanner().top_edges()

    def test_top_edges_matches_rank_edges(self):
        dataset, _, _ = make_grn_dataset(GrnSpec(n_traits=5, n_markers=3, seed=20), 70)
        est = RegulationScanner().fit(dataset.markers, dataset.traits)
        assert est.top_edges(4) == rank_edges(est.result_, 4)
