import numpy as np

CONNECTIVITIES = (6, 18, 26)


def neighbor_offsets(connectivity: int, half: bool = False) -> np.ndarray:
    """(dz, dy, dx) rows of the 3D neighbourhood.

    ``half=True`` keeps only neighbours that precede the centre in raster
    order (x fastest), which is what a single forward scan can see.
    """
    if connectivity not in CONNECTIVITIES:
        raise ValueError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity}")
    rows = []
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                nonzero = (dz != 0) + (dy != 0) + (dx != 0)
                if nonzero == 0:
                    continue
                if connectivity == 6 and nonzero > 1:
                    continue
                if connectivity == 18 and nonzero > 2:
                    continue
                if half and (dz, dy, dx) > (0, 0, 0):
                    continue
                rows.append((dz, dy, dx))
    return np.array(rows, dtype=np.int64).reshape(-1, 3)
