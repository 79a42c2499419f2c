# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled voxel kernels. Arrays are C-contiguous (nz, ny, nx)."""
import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t

from ._offsets import neighbor_offsets


cdef inline int64_t _find(int64_t[::1] parent, int64_t i) noexcept nogil:
    cdef int64_t root = i, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


def label_components(const uint8_t[:, :, ::1] mask, int connectivity):
    """Two-pass union-find labeling.

    Returns (labels int32, sizes int64). Labels are 1..K numbered by the
    raster position of each component's first voxel.
    """
    cdef Py_ssize_t nz = mask.shape[0], ny = mask.shape[1], nx = mask.shape[2]
    offs_arr = neighbor_offsets(connectivity, half=True)
    cdef int64_t[:, ::1] offs = offs_arr
    cdef Py_ssize_t n_off = offs_arr.shape[0]
    cdef int64_t n_fg = int(np.count_nonzero(np.asarray(mask)))
    labels_arr = np.zeros((nz, ny, nx), dtype=np.int32)
    cdef int32_t[:, :, ::1] labels = labels_arr
    parent_arr = np.zeros(n_fg + 1, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    cdef int64_t next_label = 0, cur, l, ra, rb
    cdef Py_ssize_t z, y, x, o, zz, yy, xx

    with nogil:
        for z in range(nz):
            for y in range(ny):
                for x in range(nx):
                    if not mask[z, y, x]:
                        continue
                    cur = 0
                    for o in range(n_off):
                        zz = z + offs[o, 0]
                        yy = y + offs[o, 1]
                        xx = x + offs[o, 2]
                        if zz < 0 or yy < 0 or yy >= ny or xx < 0 or xx >= nx:
                            continue
                        l = labels[zz, yy, xx]
                        if l == 0:
                            continue
                        if cur == 0:
                            cur = l
                            continue
                        ra = _find(parent, cur)
                        rb = _find(parent, l)
                        if ra < rb:
                            parent[rb] = ra
                        elif rb < ra:
                            parent[ra] = rb
                    if cur == 0:
                        next_label += 1
                        parent[next_label] = next_label
                        cur = next_label
                    labels[z, y, x] = <int32_t>cur

    dense_arr = np.zeros(next_label + 1, dtype=np.int32)
    cdef int32_t[::1] dense = dense_arr
    cdef int32_t k = 0
    cdef int64_t i, r
    for i in range(1, next_label + 1):
        r = _find(parent, i)
        if r == i:
            k += 1
            dense[i] = k
        else:
            dense[i] = dense[r]
    labels_arr = dense_arr[labels_arr]
    sizes = np.bincount(labels_arr.ravel(), minlength=k + 1)[1:].astype(np.int64)
    return labels_arr, sizes


def sweep_components(
    const int64_t[::1] order,
    shape,
    const uint8_t[::1] gt,
    const int64_t[::1] records,
    int connectivity,
    int64_t min_size,
):
    """Activate voxels in ``order`` one at a time, merging with active neighbours.

    Before activating voxel ``records[r]`` (i.e. once exactly ``records[r]``
    voxels are active) the totals over components with size >= ``min_size``
    are stored: (voxel count, ground-truth voxel count).
    """
    cdef Py_ssize_t nz = shape[0], ny = shape[1], nx = shape[2]
    cdef int64_t n_vox = nz * ny * nx
    offs_arr = neighbor_offsets(connectivity)
    cdef int64_t[:, ::1] offs = offs_arr
    cdef Py_ssize_t n_off = offs_arr.shape[0]
    delta_arr = offs_arr[:, 0] * (ny * nx) + offs_arr[:, 1] * nx + offs_arr[:, 2]
    cdef int64_t[::1] delta = np.ascontiguousarray(delta_arr, dtype=np.int64)

    parent_arr = np.full(n_vox, -1, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    cdef int64_t[::1] size = np.zeros(n_vox, dtype=np.int64)
    cdef int64_t[::1] gtc = np.zeros(n_vox, dtype=np.int64)
    cdef Py_ssize_t n_rec = records.shape[0], n = order.shape[0]
    out_pred_arr = np.zeros(n_rec, dtype=np.int64)
    out_tp_arr = np.zeros(n_rec, dtype=np.int64)
    cdef int64_t[::1] out_pred = out_pred_arr
    cdef int64_t[::1] out_tp = out_tp_arr

    cdef int64_t big_size = 0, big_gt = 0, i, j, ri, rj, tmp, plane = ny * nx
    cdef Py_ssize_t k, r = 0, o, z, y, x, zz, yy, xx

    with nogil:
        for k in range(n + 1):
            while r < n_rec and records[r] == k:
                out_pred[r] = big_size
                out_tp[r] = big_gt
                r += 1
            if k == n:
                break
            i = order[k]
            parent[i] = i
            size[i] = 1
            gtc[i] = gt[i]
            if 1 >= min_size:
                big_size += 1
                big_gt += gt[i]
            z = i // plane
            y = (i - z * plane) // nx
            x = i - z * plane - y * nx
            for o in range(n_off):
                zz = z + offs[o, 0]
                yy = y + offs[o, 1]
                xx = x + offs[o, 2]
                if zz < 0 or zz >= nz or yy < 0 or yy >= ny or xx < 0 or xx >= nx:
                    continue
                j = i + delta[o]
                if parent[j] < 0:
                    continue
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri == rj:
                    continue
                if size[ri] >= min_size:
                    big_size -= size[ri]
                    big_gt -= gtc[ri]
                if size[rj] >= min_size:
                    big_size -= size[rj]
                    big_gt -= gtc[rj]
                if size[ri] < size[rj]:
                    tmp = ri
                    ri = rj
                    rj = tmp
                parent[rj] = ri
                size[ri] += size[rj]
                gtc[ri] += gtc[rj]
                if size[ri] >= min_size:
                    big_size += size[ri]
                    big_gt += gtc[ri]
    return out_pred_arr, out_tp_arr
