"""Pure-Python/numpy fallback with the same signatures as ``_ccore``."""
import numpy as np

from ._offsets import neighbor_offsets


def _edges(mask: np.ndarray, connectivity: int):
    """Pairs of flat indices of adjacent foreground voxels (each pair once)."""
    nz, ny, nx = mask.shape
    flat = np.arange(mask.size, dtype=np.int64).reshape(mask.shape)
    src, dst = [], []
    for dz, dy, dx in neighbor_offsets(connectivity, half=True):
        # voxel at p pairs with voxel at p + (dz, dy, dx)
        sl_a, sl_b = [], []
        for d, n in ((dz, nz), (dy, ny), (dx, nx)):
            if d < 0:
                sl_a.append(slice(-d, n))
                sl_b.append(slice(0, n + d))
            elif d > 0:
                sl_a.append(slice(0, n - d))
                sl_b.append(slice(d, n))
            else:
                sl_a.append(slice(0, n))
                sl_b.append(slice(0, n))
        a, b = tuple(sl_a), tuple(sl_b)
        both = mask[a] & mask[b]
        src.append(flat[a][both])
        dst.append(flat[b][both])
    if not src:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(src), np.concatenate(dst)


def _compress(parent: np.ndarray) -> np.ndarray:
    while True:
        grand = parent[parent]
        if np.array_equal(grand, parent):
            return parent
        parent = grand


def label_components(mask: np.ndarray, connectivity: int):
    """Vectorised hook-and-compress labeling; same output contract as ``_ccore``."""
    mask = np.asarray(mask, dtype=bool)
    fg = np.flatnonzero(mask)
    labels = np.zeros(mask.shape, dtype=np.int32)
    if fg.size == 0:
        return labels, np.zeros(0, dtype=np.int64)
    src, dst = _edges(mask, connectivity)
    # work on compact indices; fg is ascending so min index == first raster voxel
    src = np.searchsorted(fg, src)
    dst = np.searchsorted(fg, dst)
    parent = np.arange(fg.size, dtype=np.int64)
    while src.size:
        ra, rb = parent[src], parent[dst]
        live = ra != rb
        if not live.any():
            break
        src, dst, ra, rb = src[live], dst[live], ra[live], rb[live]
        np.minimum.at(parent, np.maximum(ra, rb), np.minimum(ra, rb))
        parent = _compress(parent)
    roots = parent
    uniq, dense = np.unique(roots, return_inverse=True)
    labels.ravel()[fg] = dense.astype(np.int32) + 1
    sizes = np.bincount(dense, minlength=uniq.size).astype(np.int64)
    return labels, sizes


def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        parent[i], i = root, parent[i]
    return root


def sweep_components(order, shape, gt, records, connectivity, min_size):
    """Incremental union-find over voxels activated in ``order``."""
    nz, ny, nx = shape
    plane = ny * nx
    offs = [tuple(int(v) for v in row) for row in neighbor_offsets(connectivity)]
    order = [int(i) for i in order]
    gt = np.asarray(gt).astype(bool).tolist()
    records = [int(r) for r in records]
    parent = {}
    size = {}
    gtc = {}
    out_pred = [0] * len(records)
    out_tp = [0] * len(records)
    big_size = big_gt = 0
    r = 0
    n = len(order)
    for k in range(n + 1):
        while r < len(records) and records[r] == k:
            out_pred[r] = big_size
            out_tp[r] = big_gt
            r += 1
        if k == n:
            break
        i = order[k]
        g = int(gt[i])
        parent[i] = i
        size[i] = 1
        gtc[i] = g
        if 1 >= min_size:
            big_size += 1
            big_gt += g
        z, rem = divmod(i, plane)
        y, x = divmod(rem, nx)
        for dz, dy, dx in offs:
            zz, yy, xx = z + dz, y + dy, x + dx
            if not (0 <= zz < nz and 0 <= yy < ny and 0 <= xx < nx):
                continue
            j = i + dz * plane + dy * nx + dx
            if j not in parent:
                continue
            ri = _find(parent, i)
            rj = _find(parent, j)
            if ri == rj:
                continue
            for root in (ri, rj):
                if size[root] >= min_size:
                    big_size -= size[root]
                    big_gt -= gtc[root]
            if size[ri] < size[rj]:
                ri, rj = rj, ri
            parent[rj] = ri
            size[ri] += size[rj]
            gtc[ri] += gtc[rj]
            if size[ri] >= min_size:
                big_size += size[ri]
                big_gt += gtc[ri]
    return np.array(out_pred, dtype=np.int64), np.array(out_tp, dtype=np.int64)
