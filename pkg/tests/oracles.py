"""Slow, obviously-correct reference implementations used only by the tests."""
import itertools

import numpy as np


def neighbours(connectivity):
    out = []
    for d in itertools.product((-1, 0, 1), repeat=3):
        k = sum(v != 0 for v in d)
        if k == 0:
            continue
        if connectivity == 6 and k > 1:
            continue
        if connectivity == 18 and k > 2:
            continue
        out.append(d)
    return out


def flood_fill(mask, connectivity):
    """Stack-based flood fill; returns a label array (arbitrary numbering)."""
    mask = np.asarray(mask, dtype=bool)
    labels = np.zeros(mask.shape, dtype=np.int64)
    offs = neighbours(connectivity)
    nxt = 0
    for start in zip(*np.nonzero(mask)):
        if labels[start]:
            continue
        nxt += 1
        labels[start] = nxt
        stack = [start]
        while stack:
            p = stack.pop()
            for d in offs:
                q = (p[0] + d[0], p[1] + d[1], p[2] + d[2])
                if all(0 <= q[i] < mask.shape[i] for i in range(3)) and mask[q] and not labels[q]:
                    labels[q] = nxt
                    stack.append(q)
    return labels


def partition(labels):
    """Set of frozensets of voxel coordinates, one per component."""
    groups = {}
    for idx in zip(*np.nonzero(labels)):
        groups.setdefault(int(labels[idx]), set()).add(idx)
    return {frozenset(g) for g in groups.values()}


def filter_by_flood_fill(mask, connectivity, min_size):
    labels = flood_fill(mask, connectivity)
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_size
    keep[0] = False
    return keep[labels]


def auroc_pairwise(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    pos = scores[labels][:, None]
    neg = scores[~labels][None, :]
    wins = np.count_nonzero(pos > neg)
    ties = np.count_nonzero(pos == neg)
    return (wins + 0.5 * ties) / (pos.size * neg.size)


def auprc_bruteforce(scores, labels):
    """Sum of rectangle areas, one per distinct threshold, counted directly."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    n_pos = labels.sum()
    area = 0.0
    prev_recall = 0.0
    for t in sorted(set(scores.tolist()), reverse=True):
        pred = scores >= t
        tp = np.count_nonzero(pred & labels)
        precision = tp / np.count_nonzero(pred)
        recall = tp / n_pos
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


def dice_direct(pred, gt):
    total = pred.sum() + gt.sum()
    return 1.0 if total == 0 else 2.0 * np.count_nonzero(pred & gt) / total


def best_dice_oracle(scans, thresholds, postfilter=None, filter_fn=None):
    """Binarize every scan at every threshold, filter, pool, and take the max.

    ``scans`` are (scores, gt) pairs. Returns (max dice, lowest threshold
    reaching it, per-threshold dice list).
    """
    filter_fn = filter_fn or filter_by_flood_fill
    positives = sum(int(np.asarray(g).sum()) for _, g in scans)
    dices = []
    for t in thresholds:
        tp = pred_count = 0
        for scores, gt in scans:
            pred = np.asarray(scores) > t
            if postfilter is not None:
                pred = filter_fn(pred, *postfilter)
            tp += int(np.count_nonzero(pred & gt))
            pred_count += int(pred.sum())
        dices.append(2.0 * tp / (pred_count + positives))
    order = sorted(range(len(thresholds)), key=lambda i: thresholds[i])
    best = max(order, key=lambda i: (dices[i], -thresholds[i]))
    return dices[best], thresholds[best], dices


def triangle_resample(slice2d, target):
    """Bilinear resize as a dense matrix product with a tent kernel."""
    nx, ny = slice2d.shape
    w, h = target

    def weights(n_src, n_dst):
        m = np.zeros((n_dst, n_src))
        for t in range(n_dst):
            xs = min(max((t + 0.5) * n_src / n_dst - 0.5, 0.0), n_src - 1)
            for i in range(n_src):
                m[t, i] = max(0.0, 1.0 - abs(xs - i))
        return m

    return weights(nx, w) @ slice2d @ weights(ny, h).T


def filter_by_scipy(mask, connectivity, min_size):
    """Same as filter_by_flood_fill, via scipy's labeling; fast enough for bulk runs."""
    from scipy import ndimage

    rank = {6: 1, 18: 2, 26: 3}[connectivity]
    labels, _ = ndimage.label(mask, ndimage.generate_binary_structure(3, rank))
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_size
    keep[0] = False
    return keep[labels]
