"""Flat-text model serialisation.

Layout, one model per file:

    <kind> <d_in> <hidden> <activation>
    lambda <value>                      (ffnn and rnn only)
    <block-name> <rows> <cols>
    ... rows lines of cols whitespace-separated numbers ...
    (next block)

Blocks appear in the order given by the model's weights() method; 1-D
arrays (gate biases) are stored as a single row.  Numbers use shortest
round-trip decimal form, so save/load is lossless and files diff cleanly
across runs and implementations.
"""

from __future__ import annotations

import numpy as np

from .ffnn import FfnnModel
from .lstm import LstmCell, LstmModel
from .rnn import RnnModel

_GATE_BLOCKS = ("w_xi", "w_hi", "b_i", "w_xf", "w_hf", "b_f",
                "w_xo", "w_ho", "b_o", "w_xc", "w_hc", "b_c")


def _model_kind(model) -> str:
    if isinstance(model, FfnnModel):
        return "ffnn"
    if isinstance(model, RnnModel):
        return "rnn"
    if isinstance(model, LstmModel):
        return "blstm" if model.bidirectional else "lstm"
    raise ValueError(f"cannot serialise object of type {type(model).__name__}")


def save_model(model, path) -> None:
    kind = _model_kind(model)
    lines = [f"{kind} {model.d_in} {model.hidden} {model.output_activation}"]
    if kind in ("ffnn", "rnn"):
        lines.append(f"lambda {model.lam!r}")
    for name, arr in model.weights():
        mat = arr.reshape(1, -1) if arr.ndim == 1 else arr
        lines.append(f"{name} {mat.shape[0]} {mat.shape[1]}")
        for row in mat:
            lines.append(" ".join(repr(float(x)) for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _expected_blocks(kind: str, d_in: int, hidden: int):
    if kind == "ffnn":
        return [("w_ih", (d_in, hidden)), ("w_ho", (hidden, 1))]
    if kind == "rnn":
        return [("w_ih", (d_in, hidden)), ("w_hh", (hidden, hidden)),
                ("w_ho", (hidden, 1))]
    shapes = {"w_x": (d_in, hidden), "w_h": (hidden, hidden), "b_": (hidden,)}
    blocks = []
    prefixes = ("fw",) if kind == "lstm" else ("fw", "bw")
    for p in prefixes:
        for name in _GATE_BLOCKS:
            blocks.append((f"{p}.{name}", shapes[name[:-1]]))
    out_rows = hidden if kind == "lstm" else 2 * hidden
    blocks.append(("w_out", (out_rows, 1)))
    return blocks


def load_model(path):
    """Read a model file back; returns the matching model object."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty model file")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    kind, d_in_s, hidden_s, activation = head
    if kind not in ("ffnn", "rnn", "lstm", "blstm"):
        raise ValueError(f"{path}: unknown model kind {kind!r}")
    d_in, hidden = int(d_in_s), int(hidden_s)
    pos = 1
    lam = 1.0
    if kind in ("ffnn", "rnn"):
        tok = lines[pos].split()
        if len(tok) != 2 or tok[0] != "lambda":
            raise ValueError(f"{path}: expected a lambda line, got {lines[pos]!r}")
        lam = float(tok[1])
        pos += 1
    arrays = {}
    for name, shape in _expected_blocks(kind, d_in, hidden):
        if pos >= len(lines):
            raise ValueError(f"{path}: missing block {name!r}")
        tok = lines[pos].split()
        if len(tok) != 3 or tok[0] != name:
            raise ValueError(f"{path}: expected block {name!r}, got {lines[pos]!r}")
        rows, cols = int(tok[1]), int(tok[2])
        pos += 1
        if pos + rows > len(lines):
            raise ValueError(f"{path}: block {name!r} is truncated")
        data = []
        for r in range(rows):
            vals = [float(x) for x in lines[pos + r].split()]
            if len(vals) != cols:
                raise ValueError(
                    f"{path}: block {name!r} row {r} has {len(vals)} values, expected {cols}"
                )
            data.append(vals)
        pos += rows
        arr = np.asarray(data, dtype=np.float64)
        arr = arr.reshape(shape)
        if not np.isfinite(arr).all():
            raise ValueError(f"{path}: block {name!r} contains non-finite values")
        arrays[name] = arr
    if pos != len(lines):
        raise ValueError(f"{path}: trailing content after the last block")
    if kind == "ffnn":
        return FfnnModel(arrays["w_ih"], arrays["w_ho"], lam, activation)
    if kind == "rnn":
        return RnnModel(arrays["w_ih"], arrays["w_hh"], arrays["w_ho"],
                        lam, activation)
    cell_fw = LstmCell(*[arrays[f"fw.{n}"] for n in _GATE_BLOCKS])
    cell_bw = None
    if kind == "blstm":
        cell_bw = LstmCell(*[arrays[f"bw.{n}"] for n in _GATE_BLOCKS])
    return LstmModel(cell_fw, cell_bw, arrays["w_out"], activation)
