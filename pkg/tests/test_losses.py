import numpy as np
import pytest

from drauc import (AuxParams, LabeledScore, auc_mann_whitney, closed_form_aux,
                   pairwise_sq_risk, saddle_value, surrogate_loss,
                   surrogate_loss_grads)


def random_scored_dataset(rng, n_max=20):
    n = int(rng.integers(2, n_max + 1))
    fs = rng.uniform(0, 1, size=n)
    ys = rng.integers(0, 2, size=n)
    ys[0], ys[1] = 1, 0
    return fs, ys


class TestSurrogateLoss:
    def test_zero_everything(self):
        aux = AuxParams(0, 0, 0)
        assert surrogate_loss(aux, 0.3, 0.0, 0) == 0.0

    def test_hand_evaluated_positive_example(self):
        # (1-p)(f-a)^2 - 2(1+alpha)(1-p) f - p(1-p) alpha^2
        # = 0.5*0.01 - 1*0.4 - 0.0625 = -0.4575
        aux = AuxParams(a=0.7, b=0.0, alpha=-0.5)
        assert surrogate_loss(aux, 0.5, 0.8, 1) == pytest.approx(-0.4575, abs=1e-15)

    def test_symbolic_negative_branch(self):
        # b = 0, alpha = 0, p = 0.5, y = 0 collapses to 0.5 f^2 + f
        aux = AuxParams(0, 0, 0)
        for f in np.linspace(0, 1, 21):
            assert surrogate_loss(aux, 0.5, f, 0) == pytest.approx(0.5 * f * f + f,
                                                                   abs=1e-15)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            AuxParams(1.2, 0, 0)
        with pytest.raises(ValueError):
            AuxParams(0, 0, -1.5)
        with pytest.raises(ValueError):
            surrogate_loss(AuxParams(0, 0, 0), 1.0, 0.5, 1)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(1)
        aux = AuxParams(0.3, 0.6, -0.2)
        fs = rng.uniform(0, 1, size=8)
        ys = rng.integers(0, 2, size=8)
        vec = surrogate_loss(aux, 0.25, fs, ys)
        for i in range(8):
            assert vec[i] == surrogate_loss(aux, 0.25, fs[i], int(ys[i]))


class TestSurrogateGrads:
    def test_alpha_grad_hand_value(self):
        # 2*(-(1-p) f) - 2 p (1-p) alpha = -0.8 + 0.25 = -0.55
        aux = AuxParams(0.7, 0.0, -0.5)
        _, _, _, d_alpha = surrogate_loss_grads(aux, 0.5, 0.8, 1)
        assert d_alpha == pytest.approx(-0.55, abs=1e-15)

    def test_stationary_in_a_at_class_mean(self):
        aux = AuxParams(0.8, 0.0, 0.0)
        _, d_a, _, _ = surrogate_loss_grads(aux, 0.5, 0.8, 1)
        assert d_a == 0.0

    def test_b_grad_zero_for_positive(self):
        aux = AuxParams(0.2, 0.9, 0.4)
        _, _, d_b, _ = surrogate_loss_grads(aux, 0.3, 0.6, 1)
        assert d_b == 0.0

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        h = 1e-6
        for _ in range(300):
            a, b = rng.uniform(0.05, 0.95, size=2)
            alpha = rng.uniform(-0.95, 0.95)
            p = rng.uniform(0.1, 0.9)
            f = rng.uniform(0, 1)
            y = int(rng.integers(2))
            d_f, d_a, d_b, d_alpha = surrogate_loss_grads(
                AuxParams(a, b, alpha), p, f, y)
            fd = [
                (surrogate_loss(AuxParams(a, b, alpha), p, f + h, y)
                 - surrogate_loss(AuxParams(a, b, alpha), p, f - h, y)) / (2 * h),
                (surrogate_loss(AuxParams(a + h, b, alpha), p, f, y)
                 - surrogate_loss(AuxParams(a - h, b, alpha), p, f, y)) / (2 * h),
                (surrogate_loss(AuxParams(a, b + h, alpha), p, f, y)
                 - surrogate_loss(AuxParams(a, b - h, alpha), p, f, y)) / (2 * h),
                (surrogate_loss(AuxParams(a, b, alpha + h), p, f, y)
                 - surrogate_loss(AuxParams(a, b, alpha - h), p, f, y)) / (2 * h),
            ]
            for got, want in zip((d_f, d_a, d_b, d_alpha), fd):
                assert got == pytest.approx(want, abs=1e-8)


class TestClosedForm:
    def test_sample_means(self):
        aux = closed_form_aux([0.8, 0.6], [0.3, 0.1])
        assert (aux.a, aux.b) == (0.7, 0.2)
        assert aux.alpha == pytest.approx(-0.5, abs=1e-15)

    def test_coincident_classes(self):
        aux = closed_form_aux([0.4], [0.4])
        assert (aux.a, aux.b, aux.alpha) == (0.4, 0.4, 0.0)

    def test_extreme_scores_land_on_boundary(self):
        aux = closed_form_aux([1.0], [0.0])
        assert (aux.a, aux.b, aux.alpha) == (1.0, 0.0, -1.0)

    def test_empty_class_rejected(self):
        with pytest.raises(ValueError):
            closed_form_aux([], [0.1])


class TestPairwiseRisk:
    def test_enumerated_pairs(self):
        # (0.25 + 0.09 + 0.49 + 0.25) / 4
        assert pairwise_sq_risk([0.8, 0.6], [0.3, 0.1]) == pytest.approx(0.27, abs=1e-15)

    def test_perfect_margin(self):
        assert pairwise_sq_risk([1.0], [0.0]) == 0.0

    def test_zero_margin(self):
        assert pairwise_sq_risk([0.4], [0.4]) == 1.0

    def test_against_explicit_double_loop(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pos = rng.uniform(0, 1, size=int(rng.integers(1, 6)))
            neg = rng.uniform(0, 1, size=int(rng.integers(1, 6)))
            brute = np.mean([(1 - (p - q)) ** 2 for p in pos for q in neg])
            assert pairwise_sq_risk(pos, neg) == pytest.approx(brute, abs=1e-12)


class TestSaddleValue:
    def test_frozen_example(self):
        scores = [(0.8, 1), (0.6, 1), (0.3, 0), (0.1, 0)]
        assert saddle_value(scores) == pytest.approx(-0.1825, abs=1e-12)

    def test_constant_scores(self):
        scores = [(0.5, 1), (0.5, 0), (0.5, 1)]
        assert saddle_value(scores) == pytest.approx(0.0, abs=1e-15)

    def test_perfect_separation(self):
        assert saddle_value([(1.0, 1), (0.0, 0)]) == pytest.approx(-0.25, abs=1e-15)

    def test_accepts_labeled_score_instances(self):
        scores = [LabeledScore(0.8, 1), LabeledScore(0.1, 0)]
        assert saddle_value(scores) == saddle_value([(0.8, 1), (0.1, 0)])

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            saddle_value([(0.4, 1), (0.6, 1)])

    def test_identity_with_pairwise_risk(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            fs, ys = random_scored_dataset(rng)
            p = ys.mean()
            lhs = saddle_value(list(zip(fs, ys)))
            rhs = p * (1 - p) * (pairwise_sq_risk(fs[ys == 1], fs[ys == 0]) - 1.0)
            assert abs(lhs - rhs) <= 1e-10

    def test_alpha_stationary_at_closed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            fs, ys = random_scored_dataset(rng)
            aux = closed_form_aux(fs[ys == 1], fs[ys == 0])
            grads = surrogate_loss_grads(aux, ys.mean(), fs, ys)[3]
            assert abs(np.mean(grads)) <= 1e-10


def brute_auc(pos, neg, tie_policy):
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q and tie_policy == "half":
                total += 0.5
    return total / (len(pos) * len(neg))


class TestMannWhitney:
    def test_enumerated(self):
        assert auc_mann_whitney([0.9, 0.4], [0.5, 0.1]) == 0.75
        assert auc_mann_whitney([0.9, 0.4], [0.5, 0.1], "strict") == 0.75

    def test_single_tie(self):
        assert auc_mann_whitney([0.5], [0.5], "half") == 0.5
        assert auc_mann_whitney([0.5], [0.5], "strict") == 0.0

    def test_perfect_separation(self):
        assert auc_mann_whitney([0.9], [0.1]) == 1.0

    def test_against_pair_enumeration(self):
        rng = np.random.default_rng(6)
        levels = np.linspace(0, 1, 7)
        for _ in range(100):
            pos = rng.choice(levels, size=int(rng.integers(1, 6)))
            neg = rng.choice(levels, size=int(rng.integers(1, 6)))
            for policy in ("half", "strict"):
                assert auc_mann_whitney(pos, neg, policy) == pytest.approx(
                    brute_auc(pos, neg, policy), abs=1e-12)

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            pos = rng.uniform(0, 1, size=4)
            neg = rng.uniform(0, 1, size=5)
            before = auc_mann_whitney(pos, neg)
            after = auc_mann_whitney(np.expm1(2 * pos), np.expm1(2 * neg))
            assert before == after

    def test_complement_identity(self):
        rng = np.random.default_rng(8)
        levels = np.linspace(0, 1, 5)
        for _ in range(50):
            pos = rng.choice(levels, size=3)
            neg = rng.choice(levels, size=4)
            total = auc_mann_whitney(pos, neg) + auc_mann_whitney(neg, pos)
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_bad_tie_policy(self):
        with pytest.raises(ValueError):
            auc_mann_whitney([0.5], [0.4], "maybe")
