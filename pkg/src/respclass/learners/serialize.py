"""Self-describing flat-text model files.

One record per line, ``<key> <values...>``; numeric arrays are written as
``array <name> <ndim> <shape...> <values...>`` at 17 significant digits so a
save/load round trip reproduces predictions bit for bit.

    respclass-model 1
    classifier prob_threshold
    theta 0.5
    scorer mlp
    head sigmoid
    layers 1
    array W0 2 2 1 0.13 -0.71
    array b0 1 1 0
    end
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..core import DataError
from .models import (CatePlugin, ConstantClassifier, ConstantScorer, KernelScorer, KernelSpec,
                     LinearScorer, MlpScorer, ProbThreshold, ScoreThreshold)

MAGIC = "respclass-model"
VERSION = 1


def _num(v) -> str:
    return format(float(v), ".17g")


def _array(name, a) -> str:
    a = np.asarray(a, dtype=float)
    head = [name, str(a.ndim)] + [str(s) for s in a.shape]
    return "array " + " ".join(head + [_num(v) for v in a.ravel()])


def _scorer_lines(s) -> list:
    if isinstance(s, MlpScorer):
        out = ["scorer mlp", f"head {s.head}", f"layers {len(s.weights)}"]
        for k, (W, b) in enumerate(zip(s.weights, s.biases)):
            out += [_array(f"W{k}", W), _array(f"b{k}", b)]
    elif isinstance(s, KernelScorer):
        out = ["scorer kernel", f"kernel {s.kernel.kind} {_num(s.kernel.gamma)}",
               _array("sv", s.support_vectors), _array("coef", s.dual_coefs), f"bias {_num(s.bias)}"]
    elif isinstance(s, LinearScorer):
        out = ["scorer linear", _array("w", s.weights), f"bias {_num(s.bias)}"]
    elif isinstance(s, ConstantScorer):
        out = ["scorer constant", f"value {_num(s.value)}", f"dim {s.d}"]
    else:
        raise TypeError(f"cannot serialize scorer {type(s).__name__}")
    return out + ["end"]


def dumps(clf) -> str:
    lines = [f"{MAGIC} {VERSION}"]
    if isinstance(clf, ScoreThreshold):
        lines += ["classifier score_threshold"] + _scorer_lines(clf.scorer)
    elif isinstance(clf, ProbThreshold):
        lines += ["classifier prob_threshold", f"theta {_num(clf.theta)}"] + _scorer_lines(clf.model)
    elif isinstance(clf, CatePlugin):
        lines += (["classifier cate_plugin", f"theta {_num(clf.theta)}"]
                  + _scorer_lines(clf.treated) + _scorer_lines(clf.control))
    elif isinstance(clf, ConstantClassifier):
        lines += ["classifier constant", f"value {clf.value}", f"dim {clf.d}"]
    else:
        raise TypeError(f"cannot serialize classifier {type(clf).__name__}")
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text):
        self.lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        self.i = 0

    def take(self, key):
        if self.i >= len(self.lines):
            raise DataError(f"malformed model file: expected {key!r}, got end of file")
        toks = self.lines[self.i]
        if toks[0] != key:
            raise DataError(f"malformed model file: line {self.i + 1}: expected {key!r}, got {toks[0]!r}")
        self.i += 1
        return toks[1:]

    def array(self, name):
        toks = self.take("array")
        try:
            if toks[0] != name:
                raise DataError(f"malformed model file: expected array {name!r}, got {toks[0]!r}")
            ndim = int(toks[1])
            shape = tuple(int(t) for t in toks[2:2 + ndim])
            vals = np.array([float(t) for t in toks[2 + ndim:]], dtype=float)
        except (ValueError, IndexError):
            raise DataError(f"malformed model file: bad array {name!r}") from None
        if vals.size != int(np.prod(shape)):
            raise DataError(f"malformed model file: array {name!r} has {vals.size} values for shape {shape}")
        return vals.reshape(shape)


def _read_scorer(r: _Lines):
    kind = r.take("scorer")[0]
    if kind == "mlp":
        head = r.take("head")[0]
        n = int(r.take("layers")[0])
        Ws, bs = [], []
        for k in range(n):
            Ws.append(r.array(f"W{k}"))
            bs.append(r.array(f"b{k}"))
        s = MlpScorer(Ws, bs, head)
    elif kind == "kernel":
        kk, g = r.take("kernel")
        sv = r.array("sv")
        coef = r.array("coef")
        s = KernelScorer(sv, coef, float(r.take("bias")[0]), KernelSpec(kk, float(g)))
    elif kind == "linear":
        w = r.array("w")
        s = LinearScorer(w, float(r.take("bias")[0]))
    elif kind == "constant":
        v = float(r.take("value")[0])
        s = ConstantScorer(v, int(r.take("dim")[0]))
    else:
        raise DataError(f"malformed model file: unknown scorer kind {kind!r}")
    r.take("end")
    return s


def loads(text: str):
    r = _Lines(text)
    try:
        magic = r.take(MAGIC)
    except DataError:
        raise DataError("not a respclass model file") from None
    if not magic or int(magic[0]) != VERSION:
        raise DataError(f"unsupported model file version {magic}")
    kind = r.take("classifier")[0]
    try:
        if kind == "score_threshold":
            return ScoreThreshold(_read_scorer(r))
        if kind == "prob_threshold":
            theta = float(r.take("theta")[0])
            return ProbThreshold(_read_scorer(r), theta)
        if kind == "cate_plugin":
            theta = float(r.take("theta")[0])
            return CatePlugin(_read_scorer(r), _read_scorer(r), theta)
        if kind == "constant":
            v = int(r.take("value")[0])
            return ConstantClassifier(v, int(r.take("dim")[0]))
    except (ValueError, IndexError) as exc:
        raise DataError(f"malformed model file: {exc}") from None
    raise DataError(f"malformed model file: unknown classifier kind {kind!r}")


def save_model(clf, path) -> None:
    Path(path).write_text(dumps(clf), encoding="utf-8")


def load_model(path):
    return loads(Path(path).read_text(encoding="utf-8"))
