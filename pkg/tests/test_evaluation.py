import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterzsl.clustering import KMeansConfig
from clusterzsl.dataset import ZeroShotSplit
from clusterzsl.errors import (
    EmptyCurve,
    InvalidSpec,
    KTooLarge,
    LengthMismatch,
    NoTargetClassSamples,
    NoTrainClassSamples,
)
from clusterzsl.evaluation import (
    ConfusionMatrix,
    SweepCurve,
    build_report,
    confusion,
    curve_to_tsv,
    derive_seed,
    extended_sweep,
    find_intersection,
    k_range,
    least_squares_slope,
    recall_target,
    recall_train,
    splitmix64,
    sweep_k,
)
from clusterzsl.zsl import ClassPrediction, PredictedClass, predict_arrays, train_model

TRAIN = ClassPrediction(PredictedClass.TRAIN, 0, 0.0)
TARGET = ClassPrediction(PredictedClass.TARGET, 0, 0.0)


class TestConfusion:
    def test_tally(self):
        cm = confusion([TRAIN, TARGET, TARGET], [True, True, False])
        assert cm == ConfusionMatrix(t_train=1, f_target=1, f_train=0, t_target=1)

    def test_all_correct(self):
        cm = confusion([TRAIN, TARGET], [True, False])
        assert cm.f_target == cm.f_train == 0

    def test_empty(self):
        assert confusion([], []) == ConfusionMatrix(0, 0, 0, 0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion([TRAIN], [])

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=50), st.randoms())
    def test_permutation_invariant(self, pairs, rnd):
        shuffled = list(pairs)
        rnd.shuffle(shuffled)
        a = ConfusionMatrix.from_arrays([p for p, _ in pairs], [t for _, t in pairs])
        b = ConfusionMatrix.from_arrays([p for p, _ in shuffled], [t for _, t in shuffled])
        assert a == b
        assert a.t_train + a.f_target == sum(t for _, t in pairs)


class TestRecall:
    def test_examples(self):
        assert recall_train(ConfusionMatrix(3, 1, 0, 0)) == 0.75
        assert recall_train(ConfusionMatrix(5, 0, 2, 2)) == 1.0
        assert recall_target(ConfusionMatrix(0, 0, 1, 1)) == 0.5
        assert recall_target(ConfusionMatrix(0, 0, 0, 4)) == 1.0

    def test_zero_denominators(self):
        with pytest.raises(NoTrainClassSamples):
            recall_train(ConfusionMatrix(0, 0, 1, 1))
        with pytest.raises(NoTargetClassSamples):
            recall_target(ConfusionMatrix(1, 1, 0, 0))

    @settings(max_examples=100)
    @given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
    def test_complements(self, a, b, c, d):
        cm = ConfusionMatrix(a, b, c, d)
        if a + b:
            assert recall_train(cm) == float(Fraction(a, a + b))
            assert recall_train(cm) + b / (a + b) == pytest.approx(1.0, abs=1e-15)
        if c + d:
            assert recall_target(cm) == float(Fraction(d, c + d))
            assert recall_target(cm) + c / (c + d) == pytest.approx(1.0, abs=1e-15)


def _curve(ks, rt, rg):
    return SweepCurve(tuple(ks), tuple(rt), tuple(rg))


class TestIntersection:
    def test_tie_goes_to_smaller_k(self):
        hit = find_intersection(_curve([1, 2, 3], [1.0, 0.8, 0.6], [0.0, 0.5, 0.9]))
        assert hit.found and hit.k == 2
        assert (hit.recall_train_at_k, hit.recall_target_at_k) == (0.8, 0.5)

    def test_no_crossing(self):
        assert not find_intersection(_curve([1, 2], [0.9, 0.8], [0.1, 0.2])).found

    def test_first_entry_already_crossed(self):
        assert find_intersection(_curve([5, 10], [0.4, 0.3], [0.6, 0.7])).k == 5

    def test_exact_meeting_point(self):
        assert find_intersection(_curve([1, 2, 3], [0.9, 0.7, 0.5], [0.1, 0.7, 0.9])).k == 2

    def test_empty(self):
        with pytest.raises(EmptyCurve):
            find_intersection(_curve([], [], []))

    @settings(max_examples=100)
    @given(st.integers(2, 60), st.floats(0.05, 0.95), st.floats(0.001, 0.05), st.floats(0.001, 0.05))
    def test_monotone_curves(self, n, start_gap, down, up):
        ks = list(range(1, n + 1))
        rt = [1.0 - down * i for i in range(n)]
        rg = [1.0 - start_gap - down + up * i for i in range(n)]
        diff = [a - b for a, b in zip(rt, rg)]
        hit = find_intersection(_curve(ks, rt, rg))
        crossing = next((i for i, d in enumerate(diff) if d <= 0), None)
        if crossing is None:
            assert not hit.found
            return
        candidates = [crossing] if crossing == 0 else [crossing - 1, crossing]
        best = min(candidates, key=lambda i: (abs(diff[i]), i))
        assert hit.k == ks[best]


def test_splitmix_reference_values():
    # first outputs of the reference SplitMix64 generator seeded with 0
    state, outs = 0, []
    for _ in range(3):
        outs.append(splitmix64(state))
        state = (state + 0x9E3779B97F4A7C15) & (2**64 - 1)
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert derive_seed(42, 7) == derive_seed(42, 7)
    assert len({derive_seed(42, k) for k in range(1, 500)}) == 499


def _toy_split():
    return ZeroShotSplit(
        train_features=[[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]],
        test_features=[[0.0, 1.5], [10.0, 1.0], [5.0, 1.0], [0.0, 7.0]],
        test_truth=[True, True, False, False],
        train_label="A",
        target_label="B",
        seed=3,
    )


class TestSweep:
    def test_single_k_matches_direct_model(self):
        split = _toy_split()
        curve = sweep_k(split, [1])
        model = train_model(split.train_features, KMeansConfig(k=1, seed=derive_seed(3, 1)))
        np.testing.assert_array_equal(model.centroids, [[5.0, 1.0]])
        is_train, _, _ = predict_arrays(model, split.test_features)
        # radius sqrt(26) covers the first three test points, not (0, 7)
        assert is_train.tolist() == [True, True, True, False]
        assert curve.recall_train == (1.0,)
        assert curve.recall_target == (0.5,)

    def test_deterministic_and_order_free(self):
        rng = np.random.default_rng(0)
        split = ZeroShotSplit(rng.normal(size=(60, 2)), rng.normal(size=(40, 2)) * 2,
                              [True] * 20 + [False] * 20, "a", "b", 9)
        ks = [1, 3, 5, 8, 13]
        a = sweep_k(split, ks)
        assert a == sweep_k(split, ks)
        assert a == sweep_k(split, ks, workers=3)
        single = {k: sweep_k(split, [k]) for k in ks}
        for i, k in enumerate(ks):
            assert single[k].recall_train[0] == a.recall_train[i]

    def test_k_too_large_names_k(self):
        with pytest.raises(KTooLarge, match="K=5"):
            sweep_k(_toy_split(), [1, 5])

    def test_k_values_must_ascend(self):
        with pytest.raises(InvalidSpec):
            sweep_k(_toy_split(), [2, 1])

    def test_extended_grid(self):
        assert k_range(250, 850, 50) == list(range(250, 851, 50))
        assert k_range(7, 7, 1) == [7]
        assert k_range(3, 10, 50) == [3]
        with pytest.raises(InvalidSpec):
            k_range(5, 4)
        assert extended_sweep(_toy_split(), 1, 2, 4).k_values == (1, 3)


def test_slope():
    assert least_squares_slope([1, 2, 3], [1, 3, 5]) == pytest.approx(2.0)
    assert least_squares_slope([1], [4]) == 0.0


def test_exports():
    curve = SweepCurve((1, 2), (1.0, 0.123456789), (0.0, 2 / 3), "toy", "A", "B", 3)
    assert curve_to_tsv(curve) == "k\trecall_train\trecall_target\n1\t1.000000\t0.000000\n2\t0.123457\t0.666667\n"
    report = build_report(curve, find_intersection(curve), {"k_min": 1})
    assert json.loads(json.dumps(report))["curve"]["recall_target"][1] == 2 / 3
    assert report["intersection"]["found"] is True and report["intersection"]["k"] == 2
    assert set(report) == {"dataset", "train_label", "target_label", "seed", "config", "curve", "intersection"}
