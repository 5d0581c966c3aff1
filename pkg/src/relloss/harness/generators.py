"""Seeded example sequences.

All randomness comes from ``numpy.random.Philox`` (a counter-based
generator), so a ``(spec, seed, T)`` triple yields the same sequence on every
platform and numpy version that keeps Philox's stream stable.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..families import Bernoulli, Gamma, Gaussian

KINDS = ("iid", "boundary", "permutation", "file")


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text):
        """``kind[:key=value,...]``; list values are separated by ``;``.

        Examples: ``iid``, ``iid:theta=0.5``, ``boundary:X=2``,
        ``permutation:base=1;0;1,index=3``, ``file:path=seq.csv``.
        """
        kind, _, rest = str(text).strip().partition(":")
        kind = {"adversarial_boundary": "boundary", "explicit": "file"}.get(kind, kind)
        if kind not in KINDS:
            raise ParseError(f"unknown generator kind {kind!r}; choose from {KINDS}")
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, value = item.partition("=")
            if not eq:
                raise ParseError(f"generator parameter {item!r} is not key=value")
            params[key.strip()] = value.strip()
        return cls(kind, params)

    def __str__(self):
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(f"{k}={v}" for k, v in self.params.items())

    def floats(self, key, default=None):
        if key not in self.params:
            return default
        return [float(v) for v in self.params[key].split(";")]

    def number(self, key, default):
        value = self.floats(key)
        return default if value is None else value[0]


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def kth_permutation(base, index):
    """The ``index``-th permutation of ``base`` in lexicographic order of positions."""
    items = list(base)
    n = len(items)
    if not 0 <= index < math.factorial(n):
        raise ValueError(f"permutation index {index} out of range for length {n}")
    out = []
    for k in range(n, 0, -1):
        block = math.factorial(k - 1)
        pos, index = divmod(index, block)
        out.append(items.pop(pos))
    return out


def read_sequence_file(path, width):
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                values = [float(v) for v in row]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ParseError(f"{path}:{lineno}: non-numeric value in {row}") from None
            if len(values) != width:
                raise ParseError(f"{path}:{lineno}: expected {width} columns, got {len(values)}")
            rows.append(values)
    return np.array(rows, dtype=float).reshape(-1, width)


def generate(spec, family, seed, T):
    """Sequence of ``T`` examples, shape ``(T, dim)``, for a density family."""
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    d = family.dim
    rng = make_rng(seed)
    if spec.kind == "iid":
        theta = spec.floats("theta")
        if theta is None:
            theta = [-1.0] if isinstance(family, Gamma) else [0.0]
        mu = family.link(np.broadcast_to(np.asarray(theta, dtype=float), (d,)))
        if isinstance(family, Bernoulli):
            xs = (rng.random((T, d)) < mu).astype(float)
        elif isinstance(family, Gaussian):
            xs = mu + rng.standard_normal((T, d))
        else:
            xs = rng.exponential(1.0, (T, d)) * mu
            xs = np.maximum(xs, np.finfo(float).tiny)
    elif spec.kind == "boundary":
        radius = spec.number("X", 1.0)
        if isinstance(family, Bernoulli):
            xs = rng.integers(0, 2, (T, d)).astype(float)
        elif isinstance(family, Gaussian):
            v = rng.standard_normal((T, d))
            xs = radius * v / np.linalg.norm(v, axis=1, keepdims=True)
        else:
            raise ParseError("the Gamma example space has no bounded boundary")
    elif spec.kind == "permutation":
        base = spec.floats("base")
        if base is None:
            raise ParseError("permutation generator needs base=...")
        rows = np.asarray(base, dtype=float).reshape(-1, d)
        order = kth_permutation(range(len(rows)), int(spec.number("index", 0)))
        xs = rows[order]
    else:
        if "path" not in spec.params:
            raise ParseError("file generator needs path=...")
        xs = read_sequence_file(spec.params["path"], d)
        if T and len(xs) > T:
            xs = xs[:T]
    for x in xs:
        family.check_example(x)
    return xs


def generate_regression(spec, dim, seed, T):
    """``(instances, labels)`` with instances ``(T, dim)`` and labels ``(T,)``."""
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    rng = make_rng(seed)
    big_x = spec.number("X", 1.0)
    big_y = spec.number("Y", 1.0)
    if spec.kind == "iid":
        xs = rng.uniform(-big_x, big_x, (T, dim))
        ys = rng.uniform(-big_y, big_y, T)
    elif spec.kind == "boundary":
        xs = big_x * rng.choice([-1.0, 1.0], (T, dim))
        ys = big_y * rng.choice([-1.0, 1.0], T)
    elif spec.kind == "file":
        data = read_sequence_file(spec.params["path"], dim + 1)
        if T and len(data) > T:
            data = data[:T]
        xs, ys = data[:, :dim], data[:, dim]
    else:
        raise ParseError(f"generator {spec.kind!r} is not available for regression")
    return xs, ys
