"""Pure numpy version of the directed max-min kernel.

Kept arithmetic-identical to the compiled loop: squared Euclidean distances
are summed coordinate by coordinate and reduced with min/max, so the two
backends agree bitwise.
"""

import numpy as np

# rows of `a` per block, sized so a block against `b` stays ~tens of MB
_BLOCK_CELLS = 4_000_000


def directed_max_min(a, b, chebyshev):
    if len(b) == 0:
        raise ValueError("empty target cloud")
    best = 0.0
    rows = max(1, _BLOCK_CELLS // len(b))
    for i in range(0, len(a), rows):
        chunk = a[i : i + rows]
        diff = chunk[:, None, :] - b[None, :, :]
        if chebyshev:
            dist = np.abs(diff).max(axis=-1)
        else:
            dist = (diff * diff).sum(axis=-1)
        m = dist.min(axis=1).max()
        if m > best:
            best = float(m)
    return best
