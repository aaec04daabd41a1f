"""Trace persistence: columnar CSV (full-precision, diffable), an optional
compact NPZ with the same schema, and a JSON header sidecar."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Dict

import numpy as np

from .engine import TRACE_SIGNALS, SimulationTrace
from .errors import ParameterError


def column_names(trace: SimulationTrace):
    cols = ["t"]
    for sig in TRACE_SIGNALS:
        cols.extend(f"{sig}_{node}" for node in trace.node_ids)
    return cols


def write_csv(trace: SimulationTrace, path, decimation: int = 1) -> None:
    """One row per recorded step; floats serialized with repr so the file
    round-trips to the exact same values."""
    if decimation < 1:
        raise ParameterError(f"decimation must be >= 1, got {decimation}")
    path = Path(path)
    rows = range(0, trace.n_records, decimation)
    sig_arrays = [trace.signals[sig] for sig in TRACE_SIGNALS]
    n_nodes = len(trace.node_ids)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(column_names(trace)) + "\n")
        for n in rows:
            parts = [repr(float(trace.t[n]))]
            for arr in sig_arrays:
                row = arr[n]
                parts.extend(repr(float(row[k])) for k in range(n_nodes))
            fh.write(",".join(parts) + "\n")


def read_csv(path) -> Dict[str, np.ndarray]:
    """Columns of a persisted trace, keyed by header name."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = [[] for _ in header]
        for line in fh:
            for k, tok in enumerate(line.rstrip("\n").split(",")):
                data[k].append(float(tok))
    return {name: np.array(vals) for name, vals in zip(header, data)}


def write_npz(trace: SimulationTrace, path, decimation: int = 1) -> None:
    if decimation < 1:
        raise ParameterError(f"decimation must be >= 1, got {decimation}")
    sl = slice(0, trace.n_records, decimation)
    payload = {"t": trace.t[sl]}
    for sig in TRACE_SIGNALS:
        payload[sig] = trace.signals[sig][sl]
    payload["node_ids"] = np.array(trace.node_ids)
    np.savez_compressed(Path(path), **payload)


def read_npz(path) -> Dict[str, np.ndarray]:
    with np.load(Path(path), allow_pickle=False) as z:
        return {k: z[k] for k in z.files}


def write_header(trace: SimulationTrace, path) -> None:
    """JSON sidecar: config echo + hash, seed, RNG id, certification report."""
    header = dict(trace.header)
    header["columns"] = column_names(trace)
    Path(path).write_text(json.dumps(header, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def trace_from_csv(path, header_path=None) -> SimulationTrace:
    """Rebuild a SimulationTrace from persisted files (exact values)."""
    cols = read_csv(path)
    header = {}
    if header_path is not None and Path(header_path).exists():
        header = json.loads(Path(header_path).read_text(encoding="utf-8"))
    node_ids = tuple(header.get("node_ids", [])) or _infer_nodes(cols)
    signals = {}
    for sig in TRACE_SIGNALS:
        signals[sig] = np.column_stack([cols[f"{sig}_{n}"] for n in node_ids])
    return SimulationTrace(t=cols["t"], node_ids=node_ids, signals=signals,
                           header=header)


def _infer_nodes(cols):
    return tuple(name[len("omega_"):] for name in cols
                 if name.startswith("omega_") and not name.startswith("omega_est"))


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
