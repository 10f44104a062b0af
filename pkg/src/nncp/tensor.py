"""
Dense order-k tensors with arithmetic, outer products, norms, and inner products.

A :class:`DenseTensor` is an immutable row-major array of finite doubles.  The
three entrywise norms (E = l1, F = l2, G = l-infinity of the flattened tensor)
are multiplicative on rank-1 tensors, which is what most invariants downstream
lean on.
"""

import json

import numpy as np

NORM_KINDS = ("E", "F", "G")


def _as_float_array(values, what):
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains NaN or Inf")
    return arr


class DenseTensor:
    """Immutable dense tensor of shape d_1 x ... x d_k, row-major storage.

    The flat buffer is ordered with the last index varying fastest.  All
    entries are finite doubles; construction rejects NaN/Inf outright so that
    every downstream operation may assume finiteness.
    """

    __slots__ = ("_array",)

    def __init__(self, shape, data):
        shape = tuple(int(d) for d in shape)
        if len(shape) < 1:
            raise ValueError("tensor order must be >= 1")
        if any(d < 1 for d in shape):
            raise ValueError(f"all dimensions must be positive, got {shape}")
        arr = _as_float_array(data, "tensor data").reshape(-1)
        expected = int(np.prod(shape))
        if arr.size != expected:
            raise ValueError(
                f"data length {arr.size} does not match shape {shape} "
                f"(expected {expected})"
            )
        arr = np.ascontiguousarray(arr.reshape(shape))
        arr.flags.writeable = False
        object.__setattr__(self, "_array", arr)

    def __setattr__(self, name, value):
        raise AttributeError("DenseTensor is immutable")

    @classmethod
    def from_array(cls, array):
        """Build from any array-like; copies into an immutable buffer."""
        arr = np.asarray(array, dtype=np.float64)
        return cls(arr.shape, arr.reshape(-1))

    @classmethod
    def zeros(cls, shape):
        shape = tuple(int(d) for d in shape)
        return cls(shape, np.zeros(int(np.prod(shape))))

    @property
    def shape(self):
        return self._array.shape

    @property
    def order(self):
        return self._array.ndim

    @property
    def size(self):
        return self._array.size

    @property
    def data(self):
        """Flat row-major view of the entries (read-only)."""
        return self._array.reshape(-1)

    def as_array(self):
        """Read-only ndarray view with the tensor's shape."""
        return self._array

    def __getitem__(self, idx):
        """Entry at a full index tuple; validates length and bounds."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) != self.order:
            raise ValueError(
                f"index length {len(idx)} does not match tensor order {self.order}"
            )
        for i, (j, d) in enumerate(zip(idx, self.shape)):
            if not 0 <= int(j) < d:
                raise ValueError(f"index {j} out of bounds for mode {i} (size {d})")
        return float(self._array[tuple(int(j) for j in idx)])

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.shape == other.shape and bool(
            np.array_equal(self._array, other._array)
        )

    def __hash__(self):
        return hash((self.shape, self._array.tobytes()))

    def __repr__(self):
        return f"DenseTensor(shape={self.shape})"


def outer_product(vectors):
    """Outer product of k vectors; entry (j1,...,jk) = x_{j1} y_{j2} ... z_{jk}."""
    if len(vectors) == 0:
        raise ValueError("outer_product needs at least one vector")
    arrs = []
    for i, v in enumerate(vectors):
        a = _as_float_array(v, f"vector {i}").reshape(-1)
        if a.size == 0:
            raise ValueError(f"vector {i} is empty")
        arrs.append(a)
    out = arrs[0]
    for a in arrs[1:]:
        out = np.multiply.outer(out, a)
    return DenseTensor.from_array(out)


def add_scaled(a, b, lam, mu):
    """Entrywise lam*a + mu*b of two same-shape tensors."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    lam = float(lam)
    mu = float(mu)
    if not (np.isfinite(lam) and np.isfinite(mu)):
        raise ValueError("scalars must be finite")
    return DenseTensor.from_array(lam * a.as_array() + mu * b.as_array())


def norm(a, kind):
    """Entrywise norm: E = sum|.|, F = sqrt(sum .^2), G = max|.|."""
    flat = a.data
    if kind == "E":
        return float(np.sum(np.abs(flat)))
    if kind == "F":
        return float(np.sqrt(np.sum(flat * flat)))
    if kind == "G":
        return float(np.max(np.abs(flat)))
    raise ValueError(f"unknown norm kind {kind!r}, expected one of {NORM_KINDS}")


def inner(a, b):
    """Euclidean inner product; inner(A, A) == norm(A, 'F')**2."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a.data * b.data))


# --- tensor file format -----------------------------------------------------
#
# JSON document {"shape": [...], "data": [...]} with data row-major.  Floats
# are emitted with shortest round-trip precision, so write/read is bit-exact.


def tensor_to_json(a):
    return json.dumps({"shape": list(a.shape), "data": a.data.tolist()})


def tensor_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed tensor JSON: {exc}") from exc
    if not isinstance(doc, dict) or "shape" not in doc or "data" not in doc:
        raise ValueError("tensor JSON must have 'shape' and 'data' fields")
    return DenseTensor(doc["shape"], doc["data"])


def write_tensor(a, path):
    with open(path, "w") as fh:
        fh.write(tensor_to_json(a))
        fh.write("\n")


def read_tensor(path):
    with open(path) as fh:
        return tensor_from_json(fh.read())
