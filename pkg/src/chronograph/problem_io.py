"""Problem-file parsing and deterministic output serialization.

Problems travel as JSON documents (schema shipped alongside this module);
trajectories leave as CSV.  All numeric output is decimal with 17 significant
digits, dictionary keys are emitted sorted, and files are written atomically,
so emitted documents are byte-stable under a load/emit round trip.
"""

import json
import os
import tempfile
from importlib import resources

import jsonschema
import numpy as np

from .graph import TimeGraph
from .problem import (ConstantForcing, EdgeOperator, Forcing, SampledForcing,
                      TimeGraphProblem, TransmissionOperator, ZeroForcing,
                      validate)


class ProblemFileError(Exception):
    """Problem document rejected; carries the list of messages."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


def _schema():
    text = resources.files("chronograph").joinpath("problem.schema.json") \
        .read_text(encoding="utf-8")
    return json.loads(text)


def _matrix(value, rows, cols, where, errors):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        if arr.size != rows * cols:
            errors.append(f"{where}: flat matrix length {arr.size} != {rows * cols}")
            return np.zeros((rows, cols))
        return arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        errors.append(f"{where}: shape {arr.shape} != ({rows}, {cols})")
        return np.zeros((rows, cols))
    return arr


def load_problem_dict(doc):
    """Build (problem, mode, options) from a parsed problem document.

    Raises ProblemFileError with every collected message when the document is
    structurally invalid or fails the model's own validation.
    """
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "document"
        raise ProblemFileError([f"{path}: {exc.message}"]) from exc

    errors = []
    edges = []
    lengths = {}
    dims = {}
    operators = []
    g = {}
    steps = {}
    forcing_map = {}
    for k, e in enumerate(doc["edges"]):
        eid = e["id"]
        edges.append(eid)
        lengths[eid] = float(e["length"])
        d = int(e["dim"])
        dims[eid] = d
        steps[eid] = int(e.get("steps", 100))
        operators.append(EdgeOperator(
            eid, _matrix(e["A"], d, d, f"edges[{k}].A", errors)))
        if "g" in e:
            vec = np.asarray(e["g"], dtype=float)
            if vec.shape != (d,):
                errors.append(f"edges[{k}].g: length {vec.size} != {d}")
            else:
                g[eid] = vec
        f = e.get("f", {"kind": "zero"})
        kind = f["kind"]
        if kind == "constant":
            val = np.asarray(f.get("value", []), dtype=float)
            if val.shape != (d,):
                errors.append(f"edges[{k}].f.value: length {val.size} != {d}")
            else:
                forcing_map[eid] = ConstantForcing(val)
        elif kind == "samples":
            val = np.asarray(f.get("value", []), dtype=float)
            if val.ndim == 1:
                val = val[:, None]
            if val.shape != (steps[eid] + 1, d):
                errors.append(
                    f"edges[{k}].f.value: samples shape {val.shape} != "
                    f"({steps[eid] + 1}, {d})")
            else:
                forcing_map[eid] = SampledForcing(val)
        # zero forcing: omit the entry

    blocks = {}
    known = set(edges)
    for k, b in enumerate(doc.get("blocks", [])):
        i, j = b["to"], b["from"]
        if i not in known or j not in known:
            errors.append(f"blocks[{k}]: unknown edge pair ({j!r} -> {i!r})")
            continue
        blocks[(i, j)] = _matrix(b["matrix"], dims[i], dims[j],
                                 f"blocks[{k}].matrix", errors)
    if errors:
        raise ProblemFileError(errors)

    problem = TimeGraphProblem(
        graph=TimeGraph(tuple(edges), lengths, dims),
        operators=tuple(operators),
        B=TransmissionOperator(blocks),
        g=g,
        forcing=Forcing(forcing_map),
        steps=steps,
    )
    violations = validate(problem)
    if violations:
        raise ProblemFileError(violations)
    return problem, doc.get("mode", "parabolic"), doc.get("options", {})


def load_problem_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ProblemFileError([f"cannot read {path}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ProblemFileError([f"{path}: invalid JSON: {exc}"]) from exc
    return load_problem_dict(doc)


def problem_to_dict(problem, mode="parabolic", options=None):
    """Problem document for a model object (inverse of load_problem_dict)."""
    gr = problem.graph
    edges = []
    for e in gr.edges:
        entry = {
            "id": e,
            "length": float(gr.lengths[e]),
            "dim": int(gr.dims[e]),
            "A": [[_real(x) for x in row] for row in problem.operator(e)],
            "steps": problem.steps_for(e),
        }
        spec = problem.forcing.spec_for(e)
        if isinstance(spec, ZeroForcing):
            entry["f"] = {"kind": "zero"}
        elif isinstance(spec, ConstantForcing):
            entry["f"] = {"kind": "constant",
                          "value": [_real(x) for x in spec.value]}
        else:
            entry["f"] = {"kind": "samples",
                          "value": [[_real(x) for x in row]
                                    for row in spec.values]}
        if e in problem.g:
            entry["g"] = [_real(x) for x in problem.g[e]]
        edges.append(entry)
    blocks = [{"from": j, "to": i,
               "matrix": [[_real(x) for x in row] for row in m]}
              for (i, j), m in sorted(problem.B.blocks.items(),
                                      key=lambda kv: _block_key(gr, kv[0]))]
    doc = {"edges": edges, "blocks": blocks, "mode": mode}
    if options:
        doc["options"] = options
    return doc


def _block_key(graph, key):
    pos = {e: k for k, e in enumerate(graph.edges)}
    return (pos[key[0]], pos[key[1]])


def _real(x):
    x = complex(x)
    if x.imag != 0.0:
        raise ValueError("problem files carry real data only")
    return x.real


def format_number(x):
    """Decimal with 17 significant digits; integers stay integral."""
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if v == 0.0:
        return "0"  # avoid the non-round-tripping "-0"
    return f"{v:.17g}"


def canonical_json(obj):
    """Deterministic JSON: sorted keys, 17-significant-digit numbers."""

    def emit(o):
        if o is None:
            return "null"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, (int, float, np.integer, np.floating)):
            return format_number(o)
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(emit(v) for v in o) + "]"
        if isinstance(o, dict):
            items = sorted(o.items(), key=lambda kv: kv[0])
            return "{" + ",".join(
                json.dumps(str(k), ensure_ascii=False) + ":" + emit(v)
                for k, v in items) + "}"
        if isinstance(o, np.ndarray):
            return emit(o.tolist())
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return emit(obj) + "\n"


def atomic_write(path, text):
    """Write via a temp file in the destination directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def solution_csv(report):
    """Trajectories as CSV: edge_id, t, then real and imaginary components.

    Column count is fixed by the largest edge dimension; lower-dimensional
    edges leave the surplus fields empty.
    """
    dmax = max(report.solutions[e].states.shape[1] for e in report.edge_order)
    header = (["edge_id", "t"]
              + [f"re_{k}" for k in range(dmax)]
              + [f"im_{k}" for k in range(dmax)])
    lines = [",".join(header)]
    for e in report.edge_order:
        sol = report.solutions[e]
        d = sol.states.shape[1]
        pad = [""] * (dmax - d)
        for t, state in zip(sol.times, sol.states):
            row = ([str(e), format_number(float(t))]
                   + [format_number(x) for x in state.real] + pad
                   + [format_number(x) for x in state.imag] + pad)
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"
