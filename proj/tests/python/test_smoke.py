"""Smoke test for the pyinbd module: generate a sample, run oracle ring
detection, and check the metrics and interpolation bindings end to end."""

import math
import sys

import numpy as np

import pyinbd


def test_generate_and_detect():
    image, labels = pyinbd.generate_sample(image_size=256, n_rings=5, seed=42)
    assert image.shape == (256, 256, 3)
    assert labels.shape == (256, 256)
    assert labels.max() == 5
    assert image.min() >= 0.0 and image.max() <= 1.0

    pred, rings, reason = pyinbd.detect_rings_oracle(image, labels, alpha=2 * math.pi, max_iters=100)
    assert pred.shape == labels.shape
    assert reason in ("BackgroundReached", "NoBoundaryAhead", "MaxIterations")
    assert len(rings) == 5
    # chronological: mean radius strictly increasing
    means = [float(np.mean(r)) for r in rings]
    assert all(a < b for a, b in zip(means, means[1:]))

    mar = pyinbd.mean_average_recall(labels, pred)
    arand = pyinbd.adapted_rand_error(labels, pred)
    assert mar >= 0.9, f"mAR too low: {mar}"
    assert arand <= 0.1, f"ARAND too high: {arand}"
    # perfect prediction is exact
    assert pyinbd.mean_average_recall(labels, labels) == 1.0
    assert pyinbd.adapted_rand_error(labels, labels) == 0.0
    print(f"detect: {len(rings)} rings, mAR {mar:.4f}, ARAND {arand:.4f}")


def test_geometry_bindings():
    mask = np.zeros((64, 64), dtype=np.float64)
    mask[24:40, 24:40] = 1.0
    cx, cy = pyinbd.center_of_mass(mask)
    assert abs(cx - 31.5) < 1e-9 and abs(cy - 31.5) < 1e-9

    m = pyinbd.angular_resolution([100.0] * 8, 2 * math.pi)
    assert m == 628

    values = [1.0, math.nan, math.nan, 4.0]
    out = pyinbd.circular_interpolate(values)
    assert out == [1.0, 2.0, 3.0, 4.0]

    res = pyinbd.resample_circular([0.0, 10.0], 4)
    assert res == [0.0, 5.0, 10.0, 5.0]

    rings = [[10.0] * 8, [20.0] * 8]
    lab = pyinbd.rasterize_rings(rings, 32.0, 32.0, 64, 64)
    assert lab.shape == (64, 64)
    assert set(np.unique(lab)) == {0, 1, 2}
    assert lab[32, 32] == 1
    print("geometry bindings ok")


if __name__ == "__main__":
    test_generate_and_detect()
    test_geometry_bindings()
    print("python smoke: all checks passed")
    sys.exit(0)
