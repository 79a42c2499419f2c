import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flairbase.equalize import AnomalyMap
from flairbase.errors import DegenerateLabels, DimMismatch, NoPositives
from flairbase.metrics import (
    ScoredScan,
    ScoredVoxelSet,
    average_precision,
    best_dice,
    dice,
    grid_thresholds,
    pick_best,
    pool_dataset,
    pr_curve,
    rank_auroc,
    roc_auc,
    scan_counts,
    sweep,
    trapezoid_auroc,
)
from oracles import auprc_bruteforce, auroc_pairwise, best_dice_oracle, dice_direct


def test_dice_cases():
    z = np.zeros((2, 2, 2), bool)
    o = np.ones((2, 2, 2), bool)
    assert dice(z, z) == 1.0
    assert dice(o, z) == 0.0
    assert dice(o, o) == 1.0
    half = z.copy()
    half[0] = True
    assert dice(half, o) == pytest.approx(2 * 4 / 12)
    with pytest.raises(DimMismatch):
        dice(z, np.zeros((2, 2, 3), bool))


def test_dice_matches_direct(rng):
    for _ in range(20):
        a, b = rng.random((2, 5, 5, 5)) < 0.3
        assert dice(a, b) == dice_direct(a, b)


def amap(scores, mask):
    return AnomalyMap(np.asarray(scores, float), np.asarray(mask, bool))


def test_pool_dataset_scopes():
    s = np.arange(8.0).reshape(2, 2, 2)
    m = s >= 4
    gt = s == 7
    all_ = pool_dataset([amap(s, m)] * 2, [gt] * 2)
    brain = pool_dataset([amap(s, m)] * 2, [gt] * 2, "brain_only")
    assert (len(all_), all_.positives, all_.negatives) == (16, 2, 14)
    assert (len(brain), brain.positives, brain.negatives) == (8, 2, 6)
    with pytest.raises(ValueError):
        pool_dataset([amap(s, m)], [gt], "everything")
    with pytest.raises(DimMismatch):
        pool_dataset([amap(s, m)], [gt, gt])


def test_merge_is_associative_for_metrics(rng):
    parts = [ScoredVoxelSet.from_arrays(rng.random(50).round(1), rng.random(50) < 0.3) for _ in range(3)]
    a, b, c = parts
    left, right = (a + b) + c, a + (b + c)
    swapped = c + a + b
    vals = [(roc_auc(p)[1], pr_curve(p)[1]) for p in (left, right, swapped)]
    assert vals[0] == vals[1]
    assert vals[0] == pytest.approx(vals[2], abs=1e-15)


def test_degenerate_labels():
    with pytest.raises(DegenerateLabels):
        sweep(ScoredVoxelSet.from_arrays([0.1, 0.2], [False, False]))
    with pytest.raises(DegenerateLabels):
        sweep(ScoredVoxelSet.from_arrays([0.1, 0.2], [True, True]))


def test_perfect_and_reversed():
    pool = ScoredVoxelSet.from_arrays([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert roc_auc(pool)[1] == 1.0 and pr_curve(pool)[1] == 1.0
    rev = ScoredVoxelSet.from_arrays([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1])
    assert roc_auc(rev)[1] == 0.0


def test_constant_scores_give_chance():
    labels = np.r_[np.ones(10), np.zeros(90)].astype(bool)
    pool = ScoredVoxelSet.from_arrays(np.full(100, 0.5), labels)
    assert roc_auc(pool)[1] == 0.5
    assert pr_curve(pool)[1] == pytest.approx(0.10)


def test_curve_points():
    pool = ScoredVoxelSet.from_arrays([0.9, 0.9, 0.5, 0.1], [1, 0, 1, 0])
    c = sweep(pool)
    assert c.threshold.tolist() == [0.9, 0.5, 0.1]
    p = c[0]
    assert (p.precision, p.recall, p.fpr) == (0.5, 0.5, 0.5)
    last = c[-1]
    assert (last.recall, last.fpr) == (1.0, 1.0)
    assert len(c.points()) == 3


def test_decimate_keeps_ends(rng):
    pool = ScoredVoxelSet.from_arrays(rng.random(500), rng.random(500) < 0.2)
    c = sweep(pool)
    d = c.decimate(10)
    assert len(d) <= 10
    assert d.threshold[0] == c.threshold[0] and d.threshold[-1] == c.threshold[-1]
    assert c.decimate(0) is c


@st.composite
def pools(draw):
    n = draw(st.integers(2, 60))
    levels = draw(st.integers(1, 6))
    scores = draw(st.lists(st.integers(0, levels), min_size=n, max_size=n))
    labels = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    labels[0], labels[1] = True, False
    return np.array(scores, float) / levels, np.array(labels)


@settings(max_examples=150, deadline=None)
@given(pools())
def test_auroc_against_pairwise(pool):
    scores, labels = pool
    c = sweep(ScoredVoxelSet.from_arrays(scores, labels))
    ref = auroc_pairwise(scores, labels)
    assert abs(rank_auroc(c) - ref) <= 1e-12
    assert abs(trapezoid_auroc(c) - ref) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(pools())
def test_auprc_against_bruteforce(pool):
    scores, labels = pool
    ap = average_precision(sweep(ScoredVoxelSet.from_arrays(scores, labels)))
    assert abs(ap - auprc_bruteforce(scores, labels)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(pools(), st.sampled_from([np.exp, np.cbrt, lambda x: 3 * x - 7]))
def test_curve_metrics_invariant_to_increasing_maps(pool, f):
    scores, labels = pool
    a = ScoredVoxelSet.from_arrays(scores, labels)
    b = ScoredVoxelSet.from_arrays(f(scores), labels)
    assert roc_auc(a)[1] == roc_auc(b)[1]
    assert pr_curve(a)[1] == pr_curve(b)[1]


def test_grid_thresholds():
    g = grid_thresholds(100)
    assert g.size == 100 and g[0] == 1 / 101 and g[-1] == 100 / 101
    with pytest.raises(ValueError):
        grid_thresholds(0)


def test_pick_best_prefers_lowest_threshold():
    assert pick_best([0.5, 0.2, 0.8], [0.7, 0.7, 0.3]) == (0.7, 0.2)


def test_scan_counts_strict_threshold():
    s = np.array([0.2, 0.5, 0.5, 0.9]).reshape(4, 1, 1)
    gt = np.array([0, 1, 0, 1], bool).reshape(4, 1, 1)
    pred, tp = scan_counts(ScoredScan(s, gt), [0.0, 0.2, 0.5, 0.9])
    assert pred.tolist() == [4, 3, 1, 0]
    assert tp.tolist() == [2, 2, 1, 0]


def random_scans(rng, n_scans=3, shape=(8, 7, 6)):
    out = []
    for _ in range(n_scans):
        scores = rng.integers(0, 20, shape) / 20.0
        gt = rng.random(shape) < 0.15
        gt.flat[0] = True
        out.append((scores, gt))
    return out


@pytest.mark.parametrize("postfilter", [None, (6, 3), (26, 5)])
def test_best_dice_matches_oracle(postfilter, rng):
    for _ in range(4):
        pairs = random_scans(rng)
        res = best_dice([ScoredScan(s, g) for s, g in pairs], 30, postfilter, exhaustive=True)
        grid = list(grid_thresholds(30))
        ref, ref_t, ref_d = best_dice_oracle(pairs, grid, postfilter)
        assert res.dsc_ceiling == ref and res.best_threshold == ref_t
        assert np.array_equal(res.dice, ref_d)
        cand = sorted({-np.inf} | set(np.concatenate([s.ravel() for s, _ in pairs]).tolist()))
        ex, ex_t, _ = best_dice_oracle(pairs, cand, postfilter)
        assert res.exhaustive_ceiling == ex and res.exhaustive_threshold == ex_t
        assert res.exhaustive_ceiling >= res.dsc_ceiling


def test_best_dice_with_scope(rng):
    scores = rng.random((6, 6, 6))
    gt = rng.random((6, 6, 6)) < 0.2
    scope = rng.random((6, 6, 6)) < 0.7
    res = best_dice([ScoredScan(scores, gt, scope)], 20)
    masked = np.where(scope, scores, -1.0)
    ref, _, _ = best_dice_oracle([(masked, gt & scope)], list(grid_thresholds(20)))
    assert res.dsc_ceiling == ref


def test_best_dice_no_positives():
    with pytest.raises(NoPositives):
        best_dice([ScoredScan(np.ones((2, 2, 2)), np.zeros((2, 2, 2), bool))])


def test_best_dice_perfect_separation():
    scores = np.zeros((10, 10, 10))
    gt = np.zeros((10, 10, 10), bool)
    gt[2:6, 2:6, 2:6] = True
    scores[gt] = 1.0
    res = best_dice([ScoredScan(scores, gt)], postfilter=(26, 20))
    assert res.dsc_ceiling == 1.0 and res.best_threshold == 1 / 101
