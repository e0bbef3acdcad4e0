"""Denoise a synthetic terrain at a few budgets and report what survives.

Run from the repository root::

    python3 demos/terrain.py [size]

Writes ``terrain_input.pgm`` and ``terrain_delta_<d>.pgm`` to the current
directory.
"""

import sys
import time

import numpy as np

from topsimp import (extend_from_top_cells, from_pixel_grid, pixel_cells,
                     simplify)
from topsimp.io import quantize, write_pgm


def terrain(size, seed=0, beta=2.2):
    """Height field in [0, 1000] with power spectrum ~ 1/k^beta."""
    rng = np.random.default_rng(seed)
    ky = np.fft.fftfreq(size)[:, None]
    kx = np.fft.rfftfreq(size)[None, :]
    k = np.hypot(kx, ky)
    k[0, 0] = 1.0
    amp = k ** (-beta / 2)
    amp[0, 0] = 0.0
    coef = amp * (rng.normal(size=k.shape) + 1j * rng.normal(size=k.shape))
    h = np.fft.irfft2(coef, s=(size, size))
    return 1000 * (h - h.min()) / np.ptp(h)


def main(size=256):
    h = terrain(size)
    cx = from_pixel_grid(size, size)
    f = extend_from_top_cells(cx, h.ravel())
    pix = pixel_cells(cx, h.shape)
    write_pgm("terrain_input.pgm", quantize(h, 255)[0], 255)

    print(f"{size}x{size} terrain, {cx.n} cells "
          "(the virtual cap over the boundary is not counted)")
    print(f"{'delta':>8} {'min':>6} {'saddle':>7} {'max':>6} "
          f"{'max |g-f|':>10} {'seconds':>8}")
    for delta in (0.0, 5.0, 25.0, 100.0, 400.0):
        t0 = time.perf_counter()
        res = simplify(cx, f, delta)
        dt = time.perf_counter() - t0
        crit = res.critical()
        k = [int(np.sum(res.complex.dims[crit] == d)) for d in range(3)]
        g = res.f_mean[pix]
        print(f"{delta:8.1f} {k[0]:6d} {k[1]:7d} {k[2]:6d} "
              f"{np.max(np.abs(g - h)):10.3f} {dt:8.3f}")
        write_pgm(f"terrain_delta_{int(delta)}.pgm", quantize(g, 255)[0], 255)


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 256)
