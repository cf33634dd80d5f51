#!/usr/bin/env python3
"""Convert the Planetoid files (ind.<name>.x, .y, .tx, .ty, .allx, .ally,
.graph, .test.index) into the graphflow TSV layout.

    planetoid_to_tsv.py --raw DIR --name cora --out data/cora

Needs numpy and scipy to unpickle the sparse matrices. Citeseer has test
indices with no node behind them; those rows get no features and no label.
"""

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path):
    with open(path, "rb") as f:
        if sys.version_info > (3, 0):
            return pickle.load(f, encoding="latin1")
        return pickle.load(f)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--raw", required=True, type=Path, help="directory holding ind.<name>.* files")
    ap.add_argument("--name", required=True, help="cora, citeseer or pubmed")
    ap.add_argument("--out", required=True, type=Path)
    args = ap.parse_args()

    parts = {}
    for key in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        parts[key] = load_pickle(args.raw / f"ind.{args.name}.{key}")
    test_idx = [int(line) for line in (args.raw / f"ind.{args.name}.test.index").read_text().split()]

    allx = sp.csr_matrix(parts["allx"])
    tx = sp.csr_matrix(parts["tx"])
    ally = np.asarray(parts["ally"])
    ty = np.asarray(parts["ty"])
    n_train_part = allx.shape[0]
    n = max(n_train_part + tx.shape[0], max(test_idx) + 1, len(parts["graph"]))

    # Row i of tx belongs to node test_idx[i] (file order), as in the
    # reference loader's reordering.
    features = sp.lil_matrix((n, allx.shape[1]))
    features[:n_train_part] = allx
    labels = np.full(n, -1, dtype=np.int64)
    labels[:n_train_part] = np.where(ally.sum(1) > 0, ally.argmax(1), -1)
    for row, node in enumerate(test_idx):
        features[node] = tx[row]
        labels[node] = ty[row].argmax() if ty[row].sum() > 0 else -1
    features = features.tocoo()

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "meta.json").write_text(
        json.dumps({"name": args.name, "n": int(n), "d": int(allx.shape[1]), "c": int(ally.shape[1])}) + "\n")
    with open(args.out / "edges.tsv", "w") as f:
        seen = set()
        for u, nbrs in parts["graph"].items():
            for v in nbrs:
                key = (min(u, v), max(u, v))
                if u == v or key in seen:
                    continue
                seen.add(key)
                f.write(f"{key[0]}\t{key[1]}\n")
    with open(args.out / "features.tsv", "w") as f:
        for i, j, v in sorted(zip(features.row, features.col, features.data)):
            if v != 0:
                f.write(f"{i}\t{j}\t{v:g}\n")
    with open(args.out / "labels.tsv", "w") as f:
        for i, y in enumerate(labels):
            if y >= 0:
                f.write(f"{i}\t{y}\n")
    print(f"{args.name}: {n} nodes, {len(seen)} edges, {int((labels >= 0).sum())} labeled")


if __name__ == "__main__":
    main()
