"""File formats.

Response matrices are CSV files of 0/1 cells with an optional header row of
item names. Chains are line-delimited JSON: a header object

    {"format": "ssdmh-chain", "version": 1, "p": ..., "q": ..., "seed": ...}

followed by one object per stored state

    {"iter": t, "theta": [...], "lambda": [...], "sigma2": s, "omega": w}.

Floats are written with ``repr`` precision, so a chain round-trips exactly.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import n_params
from .sampler import Chain

CHAIN_FORMAT = "ssdmh-chain"
CHAIN_VERSION = 1


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending row and column."""


def read_responses(path) -> tuple[np.ndarray, list[str]]:
    """Read a 0/1 CSV. Returns the matrix and item names.

    A first row containing any cell other than ``0``/``1`` is taken as a header.
    Rows and columns in error messages are 1-based file positions.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows:
        raise DataFormatError(f"{path}: no data")
    names = None
    first = [c.strip() for c in rows[0]]
    if any(c not in ("0", "1") for c in first):
        names = first
        rows = rows[1:]
        start = 2
    else:
        start = 1
    if not rows:
        raise DataFormatError(f"{path}: header but no data rows")
    width = len(names) if names is not None else len(rows[0])
    data = np.empty((len(rows), width), dtype=np.uint8)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {i + start} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            c = cell.strip()
            if c not in ("0", "1"):
                raise DataFormatError(
                    f"{path}: row {i + start}, column {j + 1}: non-binary value {c!r}")
            data[i, j] = c == "1"
    if width < 2:
        raise DataFormatError(f"{path}: need at least 2 items, got {width}")
    if names is None:
        names = [f"item{j + 1}" for j in range(width)]
    return data, names


def write_responses(path, x, names=None) -> None:
    x = np.asarray(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if names is not None:
            w.writerow(names)
        w.writerows(x.astype(int).tolist())


class ChainWriter:
    """Append-only writer for chain files."""

    def __init__(self, path, p: int, seed=None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w")
        header = {"format": CHAIN_FORMAT, "version": CHAIN_VERSION, "p": p,
                  "q": n_params(p), "seed": seed}
        self._fh.write(json.dumps(header) + "\n")

    def write_arrays(self, iters, theta, lam, sigma2, omega) -> None:
        for t, th, lm, s2, om in zip(iters, theta, lam, sigma2, omega):
            rec = {"iter": int(t), "theta": [float(v) for v in th],
                   "lambda": [int(v) for v in lm], "sigma2": float(s2), "omega": float(om)}
            self._fh.write(json.dumps(rec) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_chain(path, chain: Chain, seed=None) -> None:
    with ChainWriter(path, chain.p, seed) as w:
        w.write_arrays(chain.iters, chain.theta, chain.lam, chain.sigma2, chain.omega)


def read_chain(path) -> Chain:
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != CHAIN_FORMAT:
            raise DataFormatError(f"{path}: not a chain file")
        if header.get("version") != CHAIN_VERSION:
            raise DataFormatError(f"{path}: unsupported chain version {header.get('version')}")
        recs = [json.loads(line) for line in fh if line.strip()]
    q = header["q"]
    if not recs:
        return Chain(np.empty(0, dtype=np.int64), np.empty((0, q)),
                     np.empty((0, q), dtype=np.uint8), np.empty(0), np.empty(0))
    return Chain(
        [r["iter"] for r in recs],
        np.array([r["theta"] for r in recs], dtype=float),
        np.array([r["lambda"] for r in recs], dtype=np.uint8),
        [r["sigma2"] for r in recs],
        [r["omega"] for r in recs],
    )


def estimate_to_dict(est, names=None) -> dict:
    p = est.p
    names = names or [f"item{j + 1}" for j in range(p)]
    return {
        "p": p,
        "q": n_params(p),
        "items": [
            {"name": names[j], "beta": float(est.theta_hat[j]), "pip": float(est.pip[j])}
            for j in range(p)
        ],
        "edges": [
            {"j": names[j], "k": names[k], "weight": g, "pip": pip}
            for j, k, g, pip in est.edges()
        ],
        "theta_hat": [float(v) for v in est.theta_hat],
        "pip": [float(v) for v in est.pip],
        "signed_adjacency": est.signed_adjacency.astype(int).tolist(),
    }


def estimate_from_dict(d: dict):
    from .sampler import NetworkEstimate

    return NetworkEstimate(np.array(d["theta_hat"], dtype=float), np.array(d["pip"], dtype=float),
                           np.array(d["signed_adjacency"], dtype=np.int8))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
