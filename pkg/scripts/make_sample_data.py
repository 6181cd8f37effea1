"""Regenerate the bundled sample data under src/fcnets/data/.

Everything is seeded, so rerunning this script reproduces the shipped files
byte for byte. The sample set contains:
  - p3.tsv: the 3-node path network used in CLI examples
  - subject_*.csv + manifest.json: a 6-subject, 8-node panel with a planted
    two-block community structure and spatial coordinates
  - group_a_*.csv / group_b_*.csv + coordinates.csv: 10-node connection
    matrices with a localized group contrast, for the compare subcommand
  - config.json: a minimal pipeline config over the bundled panel
"""

import json
import os

import numpy as np

from fcnets.estimators import ConnectionMatrix
from fcnets.networks import BinaryNetwork
from fcnets.panels import TimeSeriesPanel, save_timeseries
from fcnets.runtime import rng_for

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "fcnets", "data")

SEED = 20240811
N_NODES = 8
N_SUBJECTS = 6
T = 240


def make_panel():
    """Two 4-node blocks driven by shared latents, plus node noise."""
    subjects = []
    for s in range(N_SUBJECTS):
        rng = rng_for(SEED, "panel", s)
        latent_a = rng.standard_normal(T)
        latent_b = rng.standard_normal(T)
        x = rng.standard_normal((N_NODES, T))
        x[:4] += 1.2 * latent_a
        x[4:] += 1.2 * latent_b
        subjects.append(np.round(x, 6))
    coords = np.array(
        [[float(i), 0.0, 0.0] for i in range(4)]
        + [[float(i), 5.0, 0.0] for i in range(4)]
    )
    return TimeSeriesPanel(
        subjects=subjects,
        node_labels=[f"node{i}" for i in range(N_NODES)],
        coordinates=coords,
        sampling_interval=2.0,
    )


def make_contrast_groups():
    """10-node matrices; group A has three boosted edges among nodes 0-2."""
    n, subjects = 10, 6
    boosted = [(0, 1), (0, 2), (1, 2)]
    groups = {"a": [], "b": []}
    for name in ("a", "b"):
        for s in range(subjects):
            rng = rng_for(SEED, "contrast", name, s)
            z = 0.25 * rng.standard_normal((n, n))
            z = (z + z.T) / 2
            if name == "a":
                for i, j in boosted:
                    z[i, j] += 0.8
                    z[j, i] += 0.8
            vals = np.tanh(z)
            np.fill_diagonal(vals, 0.0)
            groups[name].append(
                ConnectionMatrix(np.round(vals, 6), "correlation", {"source": "sample"})
            )
    # A gentle curve keeps every dyad midpoint distinct, so distance-kernel
    # correlation structures over these coordinates stay nonsingular.
    xs = np.arange(n, dtype=float)
    coords = np.column_stack([xs, 0.05 * xs**2, np.zeros(n)])
    return groups, coords


def main():
    os.makedirs(OUT, exist_ok=True)

    BinaryNetwork(3, [(0, 1), (1, 2)], meta={"name": "p3"}).save(
        os.path.join(OUT, "p3.tsv")
    )

    panel = make_panel()
    files = []
    for s in range(panel.subject_count):
        fname = f"subject_{s}.csv"
        save_timeseries(os.path.join(OUT, fname), panel, subject=s)
        files.append(fname)
    manifest = {
        "subject_files": files,
        "layout": "rows-are-time",
        "sampling_interval": panel.sampling_interval,
        "node_labels": panel.node_labels,
        "coordinates": panel.coordinates.tolist(),
    }
    with open(os.path.join(OUT, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    groups, coords = make_contrast_groups()
    for name, cms in groups.items():
        for s, cm in enumerate(cms):
            cm.save(os.path.join(OUT, f"group_{name}_{s}.csv"))
    np.savetxt(os.path.join(OUT, "coordinates.csv"), coords, delimiter=",", fmt="%.1f")

    config = {
        "manifest": "manifest.json",
        "estimator": {"name": "correlation"},
        "threshold": {"method": "fixed_degree", "k_target": 3},
        "analyses": [
            {"type": "metrics", "params": {"metrics": ["density", "clustering_mean_local", "global_efficiency"]}},
            {"type": "community", "params": {}},
        ],
        "seed": 7,
    }
    with open(os.path.join(OUT, "config.json"), "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote sample data to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()
