"""Plain-text formats: state snapshots, trace CSVs, key-value reports and grids.

Floats are written with ``repr`` so every file round-trips bit-exactly and
identical runs produce identical bytes.
"""

import csv

import numpy as np

from .exceptions import DataError
from .models import LatentState, MmsbState, ModelKind

__all__ = [
    "write_state",
    "read_state",
    "write_trace_csv",
    "read_trace_csv",
    "write_key_values",
    "read_key_values",
    "write_grid_csv",
    "read_grid_csv",
    "write_grid_pgm",
    "write_label_counts",
    "read_label_counts",
]


def _fmt(x):
    return repr(float(x))


def _line(key, values):
    return key + " " + " ".join(_fmt(v) for v in np.ravel(values)) + "\n"


def write_state(state, stream):
    """Write a snapshot as ``key value...`` lines.

    Sections: kind, K, n, theta1, theta2, B (row-major), u1, u2, lambda,
    and z1/z2 for the SBM or F (row-major) for the MMSB.
    """
    stream.write(f"kind {state.kind.value}\n")
    stream.write(f"K {state.K}\n")
    stream.write(f"n {state.n}\n")
    if isinstance(state, MmsbState):
        stream.write(_line("B", state.B))
        stream.write(_line("F", state.F))
        return
    stream.write(_line("theta1", state.theta1))
    stream.write(_line("theta2", state.theta2))
    stream.write(_line("B", state.B))
    if state.u1 is not None:
        stream.write(_line("u1", state.u1))
        stream.write(_line("u2", state.u2))
    if state.lam is not None:
        stream.write(_line("lambda", [state.lam]))
    if state.z1 is not None:
        stream.write("z1 " + " ".join(str(int(v)) for v in state.z1) + "\n")
        stream.write("z2 " + " ".join(str(int(v)) for v in state.z2) + "\n")


def read_state(stream):
    fields = {}
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        fields[parts[0]] = parts[1:]
    try:
        kind = ModelKind(fields["kind"][0])
        K = int(fields["K"][0])
        n = int(fields["n"][0])
        B = np.array(fields["B"], dtype=np.float64).reshape(K, K)
        if kind is ModelKind.MMSB:
            F = np.array(fields["F"], dtype=np.float64).reshape(n, K)
            return MmsbState(F, B)

        def floats(key):
            return np.array(fields[key], dtype=np.float64) if key in fields else None

        def ints(key):
            return np.array(fields[key], dtype=np.int64) if key in fields else None

        lam = floats("lambda")
        return LatentState(kind, floats("theta1"), floats("theta2"), B,
                           u1=floats("u1"), u2=floats("u2"),
                           lam=None if lam is None else float(lam[0]),
                           z1=ints("z1"), z2=ints("z2"))
    except (KeyError, ValueError, IndexError) as exc:
        raise DataError(f"malformed state snapshot: {exc}") from None


def _trace_header(K):
    cols = ["sweep", "lambda"]
    cols += [f"theta1_{k}" for k in range(K)]
    cols += [f"theta2_{k}" for k in range(K)]
    cols += [f"B_{a}_{b}" for a in range(K) for b in range(K)]
    cols.append("loglik")
    return cols


def write_trace_csv(trace, stream):
    """One row per retained sample: sweep, lambda, theta1, theta2, B, train log-likelihood."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_trace_header(trace.K))
    for idx in range(trace.n_samples):
        row = [str(int(trace.sweeps[idx])), _fmt(trace.lam[idx])]
        row += [_fmt(v) for v in trace.theta1[idx]]
        row += [_fmt(v) for v in trace.theta2[idx]]
        row += [_fmt(v) for v in trace.B[idx].ravel()]
        row.append(_fmt(trace.loglik[idx]))
        writer.writerow(row)


def read_trace_csv(stream):
    """Parse a trace CSV into a dict of arrays keyed like the `Trace` fields."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty trace file") from None
    K = sum(1 for c in header if c.startswith("theta1_"))
    if header != _trace_header(K):
        raise DataError("unrecognised trace header")
    rows = np.array([[float(v) for v in row] for row in reader if row], dtype=np.float64)
    rows = rows.reshape(-1, len(header))
    return {
        "sweeps": rows[:, 0].astype(np.int64),
        "lam": rows[:, 1],
        "theta1": rows[:, 2:2 + K],
        "theta2": rows[:, 2 + K:2 + 2 * K],
        "B": rows[:, 2 + 2 * K:2 + 2 * K + K * K].reshape(-1, K, K),
        "loglik": rows[:, -1],
        "K": K,
    }


def write_key_values(mapping, stream):
    for key, value in mapping.items():
        if isinstance(value, float):
            value = _fmt(value)
        stream.write(f"{key} {value}\n")


def read_key_values(stream):
    out = {}
    for line in stream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        out[key] = value
    return out


def write_grid_csv(grid, stream):
    writer = csv.writer(stream, lineterminator="\n")
    for row in np.asarray(grid):
        writer.writerow([_fmt(v) for v in row])


def read_grid_csv(stream):
    return np.array([[float(v) for v in row] for row in csv.reader(stream) if row])


def write_grid_pgm(grid, stream):
    """Plain (P2) 8-bit greyscale image, darker pixels for higher intensity."""
    grid = np.asarray(grid, dtype=np.float64)
    pixels = np.floor(255.0 * (1.0 - np.clip(grid, 0.0, 1.0)) + 0.5).astype(np.int64)
    rows, cols = pixels.shape
    stream.write(f"P2\n{cols} {rows}\n255\n")
    for row in pixels:
        stream.write(" ".join(str(v) for v in row) + "\n")


def write_label_counts(trace, stream):
    """Pooled sender counts then receiver counts, one CSV row per node."""
    writer = csv.writer(stream, lineterminator="\n")
    K = trace.K
    writer.writerow([f"sender_{k}" for k in range(K)] + [f"receiver_{k}" for k in range(K)])
    for a, b in zip(trace.label_counts1, trace.label_counts2):
        writer.writerow([str(int(v)) for v in a] + [str(int(v)) for v in b])


def read_label_counts(stream):
    reader = csv.reader(stream)
    header = next(reader)
    K = len(header) // 2
    rows = np.array([[int(v) for v in row] for row in reader if row], dtype=np.int64)
    rows = rows.reshape(-1, 2 * K)
    return rows[:, :K], rows[:, K:]
