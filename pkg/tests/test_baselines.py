import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embnum.baselines import (
    LogisticModel,
    dsl_logit,
    dsl_score,
    dsl_train,
    ks_statistic,
    load_dsl_model,
    make_training_pairs,
    mw_statistic,
    numeric_jaccard,
    pair_features,
    save_dsl_model,
    semantictyper_score,
    welch_t,
)
from embnum.dataset import Dataset, NumericAttribute
from embnum.errors import (
    DegenerateVariance,
    EmptyInput,
    SingleClassTraining,
    TooFewValues,
)
from oracles import jaccard_oracle, ks_oracle, mw_oracle, welch_oracle

samples = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
    min_size=1, max_size=30,
)
# duplicate-heavy samples exercise the tie handling
gridded = st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=30)


class TestKolmogorovSmirnov:
    def test_identical_samples(self):
        assert ks_statistic([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_disjoint_samples(self):
        assert ks_statistic([0.0, 1.0], [10.0, 11.0]) == 1.0

    def test_half_overlap(self):
        assert ks_statistic([1.0, 2.0], [1.0, 3.0]) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            ks_statistic([], [1.0])

    @given(samples, samples)
    @settings(max_examples=100, deadline=None)
    def test_matches_oracle(self, a, b):
        assert ks_statistic(a, b) == pytest.approx(ks_oracle(a, b), abs=1e-12)

    @given(gridded, gridded)
    @settings(max_examples=100, deadline=None)
    def test_matches_oracle_with_heavy_ties(self, a, b):
        assert ks_statistic(a, b) == pytest.approx(ks_oracle(a, b), abs=1e-12)

    @given(samples, samples)
    @settings(max_examples=60, deadline=None)
    def test_symmetric_bounded_and_self_zero(self, a, b):
        d = ks_statistic(a, b)
        assert 0.0 <= d <= 1.0
        assert d == ks_statistic(b, a)
        assert ks_statistic(a, a) == 0.0


class TestMannWhitney:
    def test_balanced(self):
        assert mw_statistic([1.0, 2.0], [1.0, 2.0]) == 0.5

    def test_all_below(self):
        assert mw_statistic([0.0, 1.0], [5.0, 6.0]) == 1.0

    def test_all_above(self):
        assert mw_statistic([5.0, 6.0], [0.0, 1.0]) == 0.0

    def test_ties_count_half(self):
        # a=1 vs b={1,2}: tie contributes 0.5, the win contributes 1
        assert mw_statistic([1.0], [1.0, 2.0]) == 0.75

    @given(samples, samples)
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, a, b):
        assert mw_statistic(a, b) == mw_oracle(a, b)

    @given(gridded, gridded)
    @settings(max_examples=100, deadline=None)
    def test_antisymmetry_is_exact_even_with_ties(self, a, b):
        assert mw_statistic(a, b) + mw_statistic(b, a) == 1.0

    @given(samples)
    @settings(max_examples=50, deadline=None)
    def test_self_comparison_is_half(self, a):
        assert mw_statistic(a, a) == 0.5


class TestWelch:
    def test_equal_means(self):
        assert welch_t([1.0, 2.0, 3.0], [3.0, 2.0, 1.0]) == 0.0

    def test_hand_case(self):
        # means 2 and 3, both variances 2 with n=2: t = -1/sqrt(2)
        assert welch_t([1.0, 3.0], [2.0, 4.0]) == pytest.approx(-1.0 / np.sqrt(2))

    def test_too_few_values(self):
        with pytest.raises(TooFewValues):
            welch_t([1.0], [2.0, 3.0])

    def test_degenerate_variance(self):
        with pytest.raises(DegenerateVariance):
            welch_t([2.0, 2.0], [3.0, 3.0])

    def test_one_sided_zero_variance_is_fine(self):
        assert np.isfinite(welch_t([2.0, 2.0], [3.0, 5.0]))

    @given(
        st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=30),
        st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=30),
    )
    @settings(max_examples=100, deadline=None)
    def test_matches_fsum_oracle(self, a, b):
        va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
        if va == 0.0 and vb == 0.0:
            with pytest.raises(DegenerateVariance):
                welch_t(a, b)
            return
        got = welch_t(a, b)
        want = welch_oracle(a, b)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    @given(
        st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=20),
        st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=20),
    )
    @settings(max_examples=50, deadline=None)
    def test_antisymmetric(self, a, b):
        if np.var(a, ddof=1) == 0.0 and np.var(b, ddof=1) == 0.0:
            return
        assert welch_t(a, b) == pytest.approx(-welch_t(b, a), rel=1e-12, abs=0)


class TestNumericJaccard:
    def test_partial_overlap(self):
        assert numeric_jaccard([1.0, 5.0], [3.0, 7.0]) == pytest.approx(1.0 / 3.0)

    def test_identical_ranges(self):
        assert numeric_jaccard([1.0, 5.0], [5.0, 1.0]) == 1.0

    def test_disjoint_ranges(self):
        assert numeric_jaccard([0.0, 1.0], [2.0, 3.0]) == 0.0

    def test_single_point_rules(self):
        assert numeric_jaccard([2.0], [2.0, 2.0]) == 1.0
        assert numeric_jaccard([2.0], [3.0]) == 0.0

    def test_point_inside_interval_scores_zero_overlap_width(self):
        assert numeric_jaccard([2.0], [1.0, 3.0]) == 0.0

    @given(samples, samples)
    @settings(max_examples=100, deadline=None)
    def test_matches_interval_oracle(self, a, b):
        assert numeric_jaccard(a, b) == pytest.approx(jaccard_oracle(a, b), abs=1e-12)

    @given(samples, samples)
    @settings(max_examples=60, deadline=None)
    def test_symmetric_bounded_self_one(self, a, b):
        j = numeric_jaccard(a, b)
        assert 0.0 <= j <= 1.0
        assert j == numeric_jaccard(b, a)
        assert numeric_jaccard(a, a) == 1.0


class TestPairFeatures:
    @given(samples, samples)
    @settings(max_examples=60, deadline=None)
    def test_unit_cube_and_similarity_orientation(self, a, b):
        f = pair_features(a, b)
        assert f.shape == (3,)
        assert np.all(f >= 0.0) and np.all(f <= 1.0)
        assert np.array_equal(pair_features(a, a), [1.0, 1.0, 1.0])

    def test_semantictyper_is_one_minus_ks(self):
        a, b = [1.0, 2.0], [1.0, 3.0]
        assert semantictyper_score(a, b) == 1.0 - ks_statistic(a, b)
        assert semantictyper_score(a, a) == 1.0


def separable_pairs():
    rng = np.random.default_rng(0)
    pairs = []
    for _ in range(20):
        base = rng.normal(0.0, 1.0, size=10)
        pairs.append(((base, base + rng.normal(0, 0.01, size=10)), True))
        pairs.append(((base, base + 50.0), False))
    return pairs


class TestDslTraining:
    def test_learns_separable_pairs(self):
        model = dsl_train(separable_pairs())
        for (a, b), same in separable_pairs():
            assert (dsl_score(model, a, b) > 0.5) == same

    def test_zero_iterations_is_indifferent(self):
        model = dsl_train(separable_pairs(), iters=0)
        assert model.weights.tolist() == [0.0, 0.0, 0.0]
        assert model.bias == 0.0
        assert dsl_score(model, [1.0], [99.0]) == 0.5

    def test_deterministic(self):
        m1 = dsl_train(separable_pairs())
        m2 = dsl_train(separable_pairs())
        assert m1.weights.tolist() == m2.weights.tolist()
        assert m1.bias == m2.bias

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassTraining):
            dsl_train([])
        only_same = [(([1.0, 2.0], [1.0, 2.0]), True)]
        with pytest.raises(SingleClassTraining):
            dsl_train(only_same)

    def test_identical_attributes_score_above_half(self):
        model = dsl_train(separable_pairs())
        x = [3.0, 4.0, 5.0]
        assert dsl_score(model, x, x) > 0.5

    def test_logit_orders_like_probability(self):
        model = dsl_train(separable_pairs())
        near = dsl_logit(model, [1.0, 2.0], [1.0, 2.1])
        far = dsl_logit(model, [1.0, 2.0], [80.0, 90.0])
        assert near > far
        assert dsl_score(model, [1.0, 2.0], [1.0, 2.1]) > dsl_score(
            model, [1.0, 2.0], [80.0, 90.0]
        )


class TestDslSerialization:
    def test_round_trip_exact(self, tmp_path):
        model = dsl_train(separable_pairs())
        p = tmp_path / "dsl.json"
        save_dsl_model(model, p)
        loaded = load_dsl_model(p)
        assert loaded.weights.tolist() == model.weights.tolist()
        assert loaded.bias == model.bias

    def test_document_is_four_numbers(self, tmp_path):
        import json

        model = LogisticModel(weights=np.array([0.5, -1.5, 2.0]), bias=0.25)
        p = tmp_path / "dsl.json"
        save_dsl_model(model, p)
        doc = json.loads(p.read_text())
        assert doc == [0.5, -1.5, 2.0, 0.25]


class TestTrainingPairs:
    def test_counts_and_flags(self):
        attrs = [
            NumericAttribute(values=[1.0], label="x", source="s0"),
            NumericAttribute(values=[2.0], label="x", source="s1"),
            NumericAttribute(values=[3.0], label="y", source="s0"),
            NumericAttribute(values=[4.0], label="y", source="s1"),
        ]
        ds = Dataset.from_attributes(attrs)
        pairs = make_training_pairs(ds)
        assert len(pairs) == 6  # C(4, 2)
        assert sum(1 for _, same in pairs if same) == 2
