"""Freezes OPTICS + xi reference outputs from scikit-learn.

Writes tests/data/xi_fixtures.txt. Each fixture is a block:

    fixture <name> <n> <dim>
    point <x_1> ... <x_dim>            (n lines)
    ordering <i_1> ... <i_n>
    reachability <r_1> ... <r_n>        (indexed by point)
    core <c_1> ... <c_n>
    predecessor <p_1> ... <p_n>
    labels <l_1> ... <l_n>              (predecessor_correction=False)
    labels_pc <l_1> ... <l_n>           (predecessor_correction=True)
    end

Run: python3 tests/oracles/make_xi_fixtures.py
"""

import pathlib

import numpy as np
import sklearn
from sklearn.cluster import OPTICS, cluster_optics_xi

MIN_SAMPLES = 4
XI = 0.1


def fixtures():
    rng = np.random.default_rng(20240611)
    yield "two_blobs", np.vstack([
        rng.normal([0.0, 0.0], 0.05, size=(10, 2)),
        rng.normal([3.0, 3.0], 0.05, size=(10, 2)),
    ])
    yield "three_blobs_uneven", np.vstack([
        rng.normal([0, 0, 0], 0.1, size=(20, 3)),
        rng.normal([2, 0, 1], 0.3, size=(15, 3)),
        rng.normal([0, 4, 0], 0.05, size=(10, 3)),
    ])
    yield "uniform", rng.uniform(0, 1, size=(30, 5))
    base = rng.normal(0, 1, size=(3, 4))
    yield "duplicates", np.vstack([np.repeat(base[:1], 5, axis=0), np.repeat(base[1:2], 4, axis=0), base[2:]])
    centers = rng.normal(0, 1, size=(4, 50))
    yield "systems", np.vstack([c + rng.normal(0, 0.05, size=(12, 50)) for c in centers])[:48]
    yield "chain", np.cumsum(rng.exponential(1.0, size=(25, 1)), axis=0)
    for k in range(6):
        n = int(rng.integers(8, 51))
        d = int(rng.integers(1, 8))
        blobs = int(rng.integers(1, 5))
        centers = rng.uniform(-5, 5, size=(blobs, d))
        pts = centers[rng.integers(0, blobs, size=n)] + rng.normal(0, rng.uniform(0.05, 1.0), size=(n, d))
        yield f"random_{k}", pts


def fmt(values):
    return " ".join(repr(float(v)) if not np.isinf(v) else ("inf" if v > 0 else "-inf") for v in values)


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "xi_fixtures.txt"
    lines = [f"# scikit-learn {sklearn.__version__}, min_samples={MIN_SAMPLES}, xi={XI}, metric=chebyshev"]
    for name, pts in fixtures():
        model = OPTICS(min_samples=MIN_SAMPLES, metric="chebyshev", cluster_method="xi", xi=XI,
                       predecessor_correction=False).fit(pts)
        labels_pc, _ = cluster_optics_xi(reachability=model.reachability_, predecessor=model.predecessor_,
                                         ordering=model.ordering_, min_samples=MIN_SAMPLES, xi=XI,
                                         predecessor_correction=True)
        n, dim = pts.shape
        lines.append(f"fixture {name} {n} {dim}")
        lines += ["point " + fmt(p) for p in pts]
        lines.append("ordering " + " ".join(str(int(i)) for i in model.ordering_))
        lines.append("reachability " + fmt(model.reachability_))
        lines.append("core " + fmt(model.core_distances_))
        lines.append("predecessor " + " ".join(str(int(i)) for i in model.predecessor_))
        lines.append("labels " + " ".join(str(int(i)) for i in model.labels_))
        lines.append("labels_pc " + " ".join(str(int(i)) for i in labels_pc))
        lines.append("end")
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
