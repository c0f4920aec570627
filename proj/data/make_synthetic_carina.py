"""Writes the synthetic Carina-like fixture.

Neither file comes from the real survey or the Besancon model. The background
is a two-normal stand-in for a foreground velocity distribution, tabulated on
a 1 km/s grid; the sample mixes it with a narrow normal "member" component.
"""
import pathlib

import numpy as np
from scipy import stats

HERE = pathlib.Path(__file__).resolve().parent
SEED = 1266
N = 1266
ALPHA = 0.36


def background_cdf(x):
    return 0.55 * stats.norm.cdf(x, 25.0, 40.0) + 0.45 * stats.norm.cdf(x, 80.0, 70.0)


def main():
    grid = np.arange(-250.0, 451.0, 1.0)
    cdf = background_cdf(grid)
    cdf = (cdf - cdf[0]) / (cdf[-1] - cdf[0])
    with open(HERE / "carina_like_background.csv", "w", newline="") as f:
        f.write("x,cdf\r\n")
        for x, p in zip(grid, cdf):
            f.write(f"{x:.1f},{p:.12f}\r\n")

    rng = np.random.default_rng(SEED)
    member = rng.random(N) < ALPHA
    comp = rng.random(N) < 0.55
    bg = np.where(comp, rng.normal(25.0, 40.0, N), rng.normal(80.0, 70.0, N))
    bg = np.clip(bg, grid[0], grid[-1])
    x = np.where(member, rng.normal(222.9, 7.5, N), bg)
    with open(HERE / "carina_like_sample.csv", "w", newline="") as f:
        f.write("velocity\r\n")
        for v in x:
            f.write(f"{v:.4f}\r\n")


if __name__ == "__main__":
    main()
