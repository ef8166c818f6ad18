"""Reverse-mode automatic differentiation over dense float64 matrices.

Tape-based: every operation returns a :class:`Var` holding the forward
value, references to its inputs, and a closure per differentiable input
that maps the output adjoint to that input's adjoint. ``backward()``
walks the graph once in reverse topological order and accumulates
adjoints by summation, so a node feeding several consumers receives the
sum of their contributions.

Values are plain ``numpy`` arrays; scalars are 0-d arrays. Every public
operation validates that its result is finite and raises
:class:`NumericError` otherwise.
"""

from __future__ import annotations

import numpy as np

from .kernels import ntxent_loss_grad


class NumericError(FloatingPointError):
    """A matrix operation produced NaN/Inf or received invalid input."""


def _check_finite(arr: np.ndarray, context: str = "operation") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite entries produced by {context}")
    return arr


class Var:
    """A node on the tape: forward value plus backward plumbing.

    ``grad`` is populated by :func:`backward` and holds the adjoint
    (partial derivative of the scalar loss w.r.t. this node). Leaves
    never reached by the backward sweep keep ``grad = None``.
    """

    __slots__ = ("value", "grad", "requires_grad", "_vjps")

    def __init__(self, value, requires_grad: bool = False, _vjps=()):
        arr = np.asarray(value, dtype=np.float64)
        _check_finite(arr, "Var construction")
        self.value = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or bool(_vjps)
        self._vjps = _vjps  # tuple of (parent Var, adjoint -> parent adjoint)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(shape={self.value.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return neg(self)


def constant(value) -> Var:
    """Wrap an array as a non-differentiable tape node."""
    return Var(value, requires_grad=False)


def parameter(value) -> Var:
    """Wrap an array as a trainable leaf."""
    return Var(value, requires_grad=True)


def _as_var(x) -> Var:
    return x if isinstance(x, Var) else Var(np.asarray(x, dtype=np.float64))


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Sum an adjoint over the axes numpy broadcasting expanded."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _node(value, vjps, context: str) -> Var:
    live = tuple((p, fn) for p, fn in vjps if p.requires_grad)
    out = Var(value, _vjps=live)
    _check_finite(out.value, context)
    return out


def make_op(value, vjps) -> Var:
    """Build a tape node from a precomputed value and (input, vjp) pairs.

    Escape hatch for fused kernels whose forward pass already produced
    the local gradient.
    """
    return _node(value, vjps, "make_op")


# ---------------------------------------------------------------------------
# elementwise and structural ops


def add(a, b) -> Var:
    a, b = _as_var(a), _as_var(b)
    return _node(
        a.value + b.value,
        [(a, lambda g: _unbroadcast(g, a.value.shape)),
         (b, lambda g: _unbroadcast(g, b.value.shape))],
        "add",
    )


def sub(a, b) -> Var:
    a, b = _as_var(a), _as_var(b)
    return _node(
        a.value - b.value,
        [(a, lambda g: _unbroadcast(g, a.value.shape)),
         (b, lambda g: -_unbroadcast(g, b.value.shape))],
        "sub",
    )


def neg(a) -> Var:
    a = _as_var(a)
    return _node(-a.value, [(a, lambda g: -g)], "neg")


def mul(a, b) -> Var:
    """Entrywise product with numpy broadcasting."""
    a, b = _as_var(a), _as_var(b)
    return _node(
        a.value * b.value,
        [(a, lambda g: _unbroadcast(g * b.value, a.value.shape)),
         (b, lambda g: _unbroadcast(g * a.value, b.value.shape))],
        "mul",
    )


def hadamard(a: Var, b: Var) -> Var:
    """Entrywise product of two same-shaped matrices."""
    a, b = _as_var(a), _as_var(b)
    if a.value.shape != b.value.shape:
        raise ValueError(
            f"hadamard shape mismatch: {a.value.shape} vs {b.value.shape}")
    return mul(a, b)


def scale(a, c: float) -> Var:
    """Multiply by a python scalar constant."""
    a = _as_var(a)
    c = float(c)
    return _node(a.value * c, [(a, lambda g: g * c)], "scale")


def matmul(a: Var, b: Var) -> Var:
    a, b = _as_var(a), _as_var(b)
    if a.value.ndim != 2 or b.value.ndim != 2:
        raise ValueError("matmul expects 2-D matrices")
    if a.value.shape[1] != b.value.shape[0]:
        raise ValueError(
            f"matmul dimension mismatch: {a.value.shape} x {b.value.shape}")
    return _node(
        a.value @ b.value,
        [(a, lambda g: g @ b.value.T),
         (b, lambda g: a.value.T @ g)],
        "matmul",
    )


def transpose(a: Var) -> Var:
    a = _as_var(a)
    return _node(a.value.T, [(a, lambda g: g.T)], "transpose")


def relu(a: Var) -> Var:
    a = _as_var(a)
    mask = a.value > 0  # subgradient at the kink is 0
    return _node(np.maximum(a.value, 0.0), [(a, lambda g: g * mask)], "relu")


def leaky_relu(a: Var, alpha: float = 0.2) -> Var:
    a = _as_var(a)
    slope = np.where(a.value > 0, 1.0, alpha)
    return _node(
        np.where(a.value > 0, a.value, alpha * a.value),
        [(a, lambda g: g * slope)],
        "leaky_relu",
    )


def tanh(a: Var) -> Var:
    a = _as_var(a)
    y = np.tanh(a.value)
    return _node(y, [(a, lambda g: g * (1.0 - y * y))], "tanh")


def elementwise_activation(a: Var, kind: str) -> Var:
    """Dispatch on activation name: relu | leaky_relu | tanh."""
    if kind == "relu":
        return relu(a)
    if kind == "leaky_relu":
        return leaky_relu(a, 0.2)
    if kind == "tanh":
        return tanh(a)
    raise ValueError(f"unknown activation kind: {kind!r}")


def clamp(a: Var, lo: float, hi: float) -> Var:
    """Clip entries to [lo, hi]; gradient passes strictly inside."""
    a = _as_var(a)
    inside = (a.value > lo) & (a.value < hi)
    return _node(np.clip(a.value, lo, hi), [(a, lambda g: g * inside)], "clamp")


def row_sums(a: Var) -> Var:
    """Per-row sum, kept as an (n, 1) column."""
    a = _as_var(a)
    return _node(
        a.value.sum(axis=1, keepdims=True),
        [(a, lambda g: np.broadcast_to(g, a.value.shape))],
        "row_sums",
    )


def power(a: Var, p: float) -> Var:
    a = _as_var(a)
    y = a.value ** p
    return _node(y, [(a, lambda g: g * p * a.value ** (p - 1.0))], "power")


def sumv(a: Var) -> Var:
    """Full reduction to a scalar (0-d) node."""
    a = _as_var(a)
    return _node(
        np.asarray(a.value.sum()),
        [(a, lambda g: np.broadcast_to(g, a.value.shape))],
        "sum",
    )


# ---------------------------------------------------------------------------
# row-normalizations and similarities


def row_softmax(a: Var, scale: float = 1.0) -> Var:
    """Softmax of each row of a / scale, stabilized by row-max subtraction."""
    a = _as_var(a)
    if not scale > 0:
        raise ValueError("row_softmax scale must be positive")
    s = a.value / scale
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    y = e / e.sum(axis=1, keepdims=True)

    def vjp(g):
        inner = (g * y).sum(axis=1, keepdims=True)
        return y * (g - inner) / scale

    return _node(y, [(a, vjp)], "row_softmax")


def masked_row_softmax(a: Var, mask: np.ndarray) -> Var:
    """Row softmax restricted to a boolean support; zero elsewhere.

    Rows whose support is empty come out all-zero.
    """
    a = _as_var(a)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.value.shape:
        raise ValueError("mask shape must match input")
    s = np.where(mask, a.value, -np.inf)
    m = s.max(axis=1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)  # rows with empty support
    e = np.exp(s - m)
    denom = e.sum(axis=1, keepdims=True)
    denom = np.where(denom > 0, denom, 1.0)
    y = e / denom

    def vjp(g):
        inner = (g * y).sum(axis=1, keepdims=True)
        return y * (g - inner)

    return _node(y, [(a, vjp)], "masked_row_softmax")


def row_l2_normalize(a: Var) -> Var:
    """Scale each nonzero row to unit Euclidean norm; zero rows pass through.

    The gradient for zero rows is defined as zero.
    """
    a = _as_var(a)
    norms = np.sqrt((a.value * a.value).sum(axis=1, keepdims=True))
    nonzero = norms > 0
    safe = np.where(nonzero, norms, 1.0)
    y = a.value / safe

    def vjp(g):
        inner = (g * y).sum(axis=1, keepdims=True)
        return np.where(nonzero, (g - y * inner) / safe, 0.0)

    return _node(y, [(a, vjp)], "row_l2_normalize")


def cosine_similarity_matrix(a: Var, b: Var) -> Var:
    """Matrix of cosines between rows of a and rows of b.

    Zero rows yield similarity 0 by convention.
    """
    a, b = _as_var(a), _as_var(b)
    if a.value.shape[1] != b.value.shape[1]:
        raise ValueError(
            f"cosine similarity column mismatch: {a.value.shape} vs {b.value.shape}")
    return matmul(row_l2_normalize(a), transpose(row_l2_normalize(b)))


def ntxent_from_similarity(sim: Var, temp: float,
                           exclude_diagonal: bool = True) -> Var:
    """Temperature-scaled cross-entropy over a cross-view similarity matrix.

    Diagonal entries are the positives. With ``exclude_diagonal`` the
    denominator of each row ranges over the off-diagonal entries only;
    otherwise it includes the positive as well. Forward and local
    gradient come from a fused kernel.
    """
    sim = _as_var(sim)
    loss, dsim = ntxent_loss_grad(sim.value, temp, exclude_diagonal)
    return _node(np.asarray(loss), [(sim, lambda g: float(g) * dsim)], "ntxent")


# ---------------------------------------------------------------------------
# backward sweep


def backward(loss: Var) -> None:
    """Accumulate d(loss)/d(node) into grad for every reachable node.

    ``loss`` must be scalar. Each node's vjps fire exactly once, in
    reverse topological order.
    """
    if loss.value.size != 1:
        raise ValueError(f"backward expects a scalar loss, got shape {loss.value.shape}")

    topo: list[Var] = []
    state: dict[int, int] = {}  # id -> 0 visiting, 1 done
    stack: list[tuple[Var, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        nid = id(node)
        if processed:
            state[nid] = 1
            topo.append(node)
            continue
        if nid in state:
            # a node still marked "visiting" reached again would be a cycle
            assert state[nid] == 1, "cycle in computation graph"
            continue
        state[nid] = 0
        stack.append((node, True))
        for parent, _ in node._vjps:
            if id(parent) not in state:
                stack.append((parent, False))

    loss.grad = np.ones_like(loss.value)
    for node in reversed(topo):
        g = node.grad
        if g is None:
            continue
        for parent, vjp in node._vjps:
            contrib = vjp(g)
            if parent.grad is None:
                parent.grad = contrib
            else:
                parent.grad = parent.grad + contrib
