"""Regenerates the bundled track CSVs.

Centerlines are smooth star-shaped closed curves (low-order Fourier radius
perturbations), scaled to a target length and resampled at uniform arclength.
Seeds are searched until the curve's tightest radius leaves room for the
corridor and the boundaries do not overlap.
"""
import sys
from pathlib import Path

import numpy as np
from shapely.geometry import LinearRing, Polygon

OUT = Path(__file__).resolve().parent.parent / "assets" / "tracks"


def resample(xy, spacing):
    closed = np.vstack([xy, xy[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    n = int(round(s[-1] / spacing))
    t = np.linspace(0.0, s[-1], n, endpoint=False)
    return np.column_stack([np.interp(t, s, closed[:, 0]), np.interp(t, s, closed[:, 1])])


def curvature_radius(xy):
    p0, p1, p2 = np.roll(xy, 1, 0), xy, np.roll(xy, -1, 0)
    a = np.linalg.norm(p1 - p0, axis=1)
    b = np.linalg.norm(p2 - p1, axis=1)
    c = np.linalg.norm(p2 - p0, axis=1)
    cross = np.abs((p1 - p0)[:, 0] * (p2 - p1)[:, 1] - (p1 - p0)[:, 1] * (p2 - p1)[:, 0])
    with np.errstate(divide="ignore"):
        return a * b * c / (2.0 * cross)


def offsets(xy, w_left, w_right):
    d = np.roll(xy, -1, 0) - np.roll(xy, 1, 0)
    t = d / np.linalg.norm(d, axis=1)[:, None]
    nrm = np.column_stack([-t[:, 1], t[:, 0]])
    return xy + nrm * w_left[:, None], xy - nrm * w_right[:, None]


def fourier_shape(rng, harmonics, amp, m=4000):
    th = np.linspace(0, 2 * np.pi, m, endpoint=False)
    r = np.ones_like(th)
    for k in range(2, harmonics + 1):
        r += amp * rng.normal() / k**1.2 * np.cos(k * th + rng.uniform(0, 2 * np.pi))
    if r.min() < 0.2:
        return None
    xy = np.column_stack([r * np.cos(th), r * np.sin(th)])
    if not Polygon(xy).exterior.is_ccw:
        xy = xy[::-1]
    return xy


def scaled(xy, length):
    seg = np.linalg.norm(np.diff(np.vstack([xy, xy[:1]]), axis=0), axis=1)
    return xy * (length / seg.sum())


def valid(xy, wl, wr, min_radius):
    if curvature_radius(xy).min() < min_radius:
        return False
    left, right = offsets(xy, wl, wr)
    ring_l, ring_r = LinearRing(left), LinearRing(right)
    if not (ring_l.is_simple and ring_r.is_simple):
        return False
    if ring_l.intersects(ring_r):
        return False
    # the centerline has to stay inside the corridor everywhere
    return Polygon(right).contains(Polygon(left)) or Polygon(left).contains(Polygon(right))


def width_profile(rng, n, base, swing):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    w = base * (1 + swing * np.sin(th * rng.integers(2, 5) + rng.uniform(0, 6.3)))
    return np.round(w, 3)


def generate(name, length, spacing, harmonics, amp, half_width, swing, min_radius, seed):
    rng = np.random.default_rng(seed)
    for _ in range(20000):
        shape = fourier_shape(rng, harmonics, amp)
        if shape is None:
            continue
        xy = resample(scaled(shape, length), spacing)
        wl = width_profile(rng, len(xy), half_width, swing)
        wr = width_profile(rng, len(xy), half_width, swing)
        if valid(xy, wl, wr, min_radius):
            return xy, wl, wr
    raise SystemExit(f"no valid shape for {name}")


def stadium(straight, radius, spacing, half_width):
    pts = []
    per = np.pi * radius
    total = 2 * straight + 2 * per
    for s in np.arange(0.0, total, spacing):
        if s < straight:
            pts.append((s - straight / 2, -radius))
        elif s < straight + per:
            a = (s - straight) / radius - np.pi / 2
            pts.append((straight / 2 + radius * np.cos(a), radius * np.sin(a)))
        elif s < 2 * straight + per:
            pts.append((straight / 2 - (s - straight - per), radius))
        else:
            a = (s - 2 * straight - per) / radius + np.pi / 2
            pts.append((-straight / 2 + radius * np.cos(a), radius * np.sin(a)))
    xy = np.array(pts)
    w = np.full(len(xy), half_width)
    return xy, w, w.copy()


def write(name, xy, wl, wr, note):
    xy = xy - xy.min(axis=0)
    rows = np.column_stack([xy, wl, wr])
    rows = np.vstack([rows, rows[:1]])
    path = OUT / f"{name}.csv"
    with path.open("w") as f:
        f.write(f"# {note}\n")
        f.write("# x_m,y_m,w_tr_right_m,w_tr_left_m\n")
        for x, y, l, r in rows:
            f.write(f"{x:.4f},{y:.4f},{r:.3f},{l:.3f}\n")
    seg = np.linalg.norm(np.diff(rows[:, :2], axis=0), axis=1)
    print(f"{name}: {len(rows)} rows, length {seg.sum():.2f} m, "
          f"min radius {curvature_radius(xy).min():.2f} m", file=sys.stderr)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("porto", *generate("porto", 30.7, 0.1, 4, 0.5, 0.75, 0.15, 2.4, 3),
          "Porto-scale loop, synthetic")
    write("barcelona", *generate("barcelona", 236.8, 0.4, 9, 0.45, 1.1, 0.15, 3.0, 11),
          "Barcelona-scale circuit, synthetic")
    write("monaco", *generate("monaco", 178.3, 0.4, 10, 0.5, 1.0, 0.15, 2.8, 23),
          "Monaco-scale circuit, synthetic")
    write("test_oval", *stadium(10.0, 3.0, 0.1, 0.8), "stadium oval for tests")


if __name__ == "__main__":
    main()
