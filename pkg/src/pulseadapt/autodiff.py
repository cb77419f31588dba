"""Minimal reverse-mode automatic differentiation over dense numpy arrays.

A fixed op set builds a DAG of Tensors; ``backward`` walks it once in
reverse topological order and accumulates gradients into the leaves that
requested them. Every op checks its output for non-finite values so a NaN
is reported at the op that produced it, not three layers downstream.
"""

import logging

import numpy as np

from . import transport
from .augment import interp_positions
from .errors import InvalidArgumentError, InvalidDataError, InvalidStateError, NumericsError

logger = logging.getLogger(__name__)

_KL_FLOOR = 1e-12


class Tensor:
    """Dense float64 array with an optional gradient slot and tape record."""

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise InvalidDataError("tensor values must be finite")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple = ()
        self._backward = None
        self._op: str | None = None
        self._consumed = False

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def __repr__(self) -> str:
        tag = self._op or ("param" if self.requires_grad else "const")
        return f"Tensor({tag}, shape={self.data.shape})"


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def param(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def _make(name: str, data, parents, backward) -> Tensor:
    arr = np.asarray(data, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericsError(f"op '{name}' produced non-finite values")
    out = Tensor.__new__(Tensor)
    out.data = arr
    out.requires_grad = False
    out.grad = None
    out._parents = tuple(parents)
    out._backward = backward
    out._op = name
    out._consumed = False
    return out


def _wants_grad(t: Tensor) -> bool:
    return t.requires_grad or bool(t._parents)


def _accum(grads: dict, node: Tensor, contribution: np.ndarray) -> None:
    # Never mutate a stored gradient in place; contributions may alias each other.
    if not _wants_grad(node):
        return
    key = id(node)
    if key in grads:
        grads[key] = grads[key] + contribution
    else:
        grads[key] = contribution


def backward(loss_root: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable requires_grad leaf.

    The tape is cleared as it is walked; calling backward twice on the same
    root is an error.
    """
    if loss_root.data.size != 1:
        raise InvalidArgumentError("backward expects a scalar loss")
    if loss_root._consumed:
        raise InvalidStateError("tape already consumed; rebuild the forward computation")
    if loss_root._backward is None and not loss_root.requires_grad:
        raise InvalidStateError("loss was not produced by a taped computation")

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss_root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    grads: dict[int, np.ndarray] = {id(loss_root): np.ones_like(loss_root.data)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is not None:
            if node.requires_grad:
                node.grad = g.copy() if node.grad is None else node.grad + g
            if node._backward is not None:
                node._backward(g, grads)
        node._parents = ()
        node._backward = None
    loss_root._consumed = True


def _check_binary(a: Tensor, b: Tensor, name: str) -> None:
    if a.shape != b.shape and a.data.ndim != 0 and b.data.ndim != 0:
        raise InvalidArgumentError(f"{name}: shapes {a.shape} and {b.shape} are incompatible")


def _fit(grad: np.ndarray, shape: tuple) -> np.ndarray:
    return grad if grad.shape == shape else np.asarray(grad.sum()).reshape(shape)


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_binary(a, b, "add")

    def bwd(g, grads):
        _accum(grads, a, _fit(g, a.shape))
        _accum(grads, b, _fit(g, b.shape))

    return _make("add", a.data + b.data, (a, b), bwd)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_binary(a, b, "sub")

    def bwd(g, grads):
        _accum(grads, a, _fit(g, a.shape))
        _accum(grads, b, _fit(-g, b.shape))

    return _make("sub", a.data - b.data, (a, b), bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_binary(a, b, "mul")

    def bwd(g, grads):
        _accum(grads, a, _fit(g * b.data, a.shape))
        _accum(grads, b, _fit(g * a.data, b.shape))

    return _make("mul", a.data * b.data, (a, b), bwd)


def div(a: Tensor, b: Tensor) -> Tensor:
    _check_binary(a, b, "div")

    def bwd(g, grads):
        _accum(grads, a, _fit(g / b.data, a.shape))
        _accum(grads, b, _fit(-g * a.data / (b.data * b.data), b.shape))

    return _make("div", a.data / b.data, (a, b), bwd)


def scale(x: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def bwd(g, grads):
        _accum(grads, x, factor * g)

    return _make("scale", factor * x.data, (x,), bwd)


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def bwd(g, grads):
        _accum(grads, x, (1.0 - y * y) * g)

    return _make("tanh", y, (x,), bwd)


def absval(x: Tensor) -> Tensor:
    def bwd(g, grads):
        _accum(grads, x, np.sign(x.data) * g)

    return _make("absval", np.abs(x.data), (x,), bwd)


def sumall(x: Tensor) -> Tensor:
    def bwd(g, grads):
        _accum(grads, x, np.full(x.shape, float(g)))

    return _make("sumall", np.asarray(x.data.sum()), (x,), bwd)


def meanall(x: Tensor) -> Tensor:
    size = x.data.size

    def bwd(g, grads):
        _accum(grads, x, np.full(x.shape, float(g) / size))

    return _make("meanall", np.asarray(x.data.mean()), (x,), bwd)


def maxall(x: Tensor) -> Tensor:
    """Maximum over all elements; the subgradient routes to the first argmax."""
    idx = int(np.argmax(x.data))

    def bwd(g, grads):
        gx = np.zeros(x.data.size)
        gx[idx] = float(g)
        _accum(grads, x, gx.reshape(x.shape))

    return _make("maxall", np.asarray(x.data.reshape(-1)[idx]), (x,), bwd)


def softmax(x: Tensor) -> Tensor:
    """Softmax over all elements of the tensor (any shape)."""
    flat = x.data.reshape(-1)
    shifted = np.exp(flat - flat.max())
    p = (shifted / shifted.sum()).reshape(x.shape)

    def bwd(g, grads):
        inner = float((g * p).sum())
        _accum(grads, x, p * (g - inner))

    return _make("softmax", p, (x,), bwd)


def reshape(x: Tensor, shape: tuple) -> Tensor:
    def bwd(g, grads):
        _accum(grads, x, g.reshape(x.shape))

    return _make("reshape", x.data.reshape(shape), (x,), bwd)


def matvec(matrix: np.ndarray, x: Tensor) -> Tensor:
    """Constant matrix times tensor vector."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or x.data.ndim != 1 or matrix.shape[1] != x.data.size:
        raise InvalidArgumentError(f"matvec: matrix {matrix.shape} does not act on vector {x.shape}")

    def bwd(g, grads):
        _accum(grads, x, matrix.T @ g)

    return _make("matvec", matrix @ x.data, (x,), bwd)


def conv1d(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """Same-padded cross-correlation along the time axis.

    x is (t, c_in), kernel is (k, c_in, c_out) with k odd, bias is (c_out,).
    """
    if x.data.ndim != 2 or kernel.data.ndim != 3 or bias.data.ndim != 1:
        raise InvalidArgumentError("conv1d: expected x (t,c_in), kernel (k,c_in,c_out), bias (c_out,)")
    t, c_in = x.shape
    k, kc_in, c_out = kernel.shape
    if k % 2 == 0:
        raise InvalidArgumentError("conv1d: kernel length must be odd")
    if kc_in != c_in or bias.shape != (c_out,):
        raise InvalidArgumentError(
            f"conv1d: kernel {kernel.shape} / bias {bias.shape} do not match input {x.shape}"
        )

    pad = k // 2
    padded = np.zeros((t + 2 * pad, c_in))
    padded[pad : pad + t] = x.data
    out = np.tile(bias.data, (t, 1))
    for dk in range(k):
        out += padded[dk : dk + t] @ kernel.data[dk]

    def bwd(g, grads):
        if _wants_grad(x):
            gp = np.zeros_like(padded)
            for dk in range(k):
                gp[dk : dk + t] += g @ kernel.data[dk].T
            _accum(grads, x, gp[pad : pad + t])
        if _wants_grad(kernel):
            gk = np.empty_like(kernel.data)
            for dk in range(k):
                gk[dk] = padded[dk : dk + t].T @ g
            _accum(grads, kernel, gk)
        if _wants_grad(bias):
            _accum(grads, bias, g.sum(axis=0))

    return _make("conv1d", out, (x, kernel, bias), bwd)


def spatial_pool(clip: Tensor, weights: Tensor) -> Tensor:
    """Per-frame weighted average over pixels: (t,h,w,c) x (h,w) -> (t,c)."""
    if clip.data.ndim != 4 or weights.data.ndim != 2 or clip.shape[1:3] != weights.shape:
        raise InvalidArgumentError(
            f"spatial_pool: weights {weights.shape} do not match clip {clip.shape}"
        )

    def bwd(g, grads):
        if _wants_grad(weights):
            _accum(grads, weights, np.einsum("tc,thwc->hw", g, clip.data, optimize=True))
        if _wants_grad(clip):
            _accum(grads, clip, np.einsum("tc,hw->thwc", g, weights.data, optimize=True))

    out = np.einsum("thwc,hw->tc", clip.data, weights.data, optimize=True)
    return _make("spatial_pool", out, (clip, weights), bwd)


def resample(x: Tensor, factor: float) -> Tensor:
    """Differentiable linear-interpolation resampling of a 1-D signal."""
    if x.data.ndim != 1:
        raise InvalidArgumentError("resample acts on 1-D signals")
    _, idx0, frac = interp_positions(x.data.size, factor)
    out = x.data[idx0] * (1.0 - frac) + x.data[idx0 + 1] * frac

    def bwd(g, grads):
        gx = np.zeros(x.data.size)
        np.add.at(gx, idx0, g * (1.0 - frac))
        np.add.at(gx, idx0 + 1, g * frac)
        _accum(grads, x, gx)

    return _make("resample", out, (x,), bwd)


def fit_len(x: Tensor, n: int) -> Tensor:
    """Trim or edge-pad a 1-D signal at the tail to exactly n samples."""
    if x.data.ndim != 1:
        raise InvalidArgumentError("fit_len acts on 1-D signals")
    size = x.data.size
    if size >= n:
        out = x.data[:n]

        def bwd(g, grads):
            gx = np.zeros(size)
            gx[:n] = g
            _accum(grads, x, gx)

    else:
        out = np.concatenate((x.data, np.full(n - size, x.data[-1])))

        def bwd(g, grads):
            gx = g[:size].copy()
            gx[-1] += g[size:].sum()
            _accum(grads, x, gx)

    return _make("fit_len", out, (x,), bwd)


def fwd_loss(p: Tensor, q: Tensor) -> Tensor:
    """Wasserstein distance between two spectral distributions, on the tape.

    Gradients flow to both arguments via the prefix-sum sign formula.
    """
    value = transport.fwd_distance(p.data, q.data)

    def bwd(g, grads):
        pair = transport.fwd_gradient(p.data, q.data)
        s = float(g)
        _accum(grads, p, s * pair.grad_p)
        _accum(grads, q, s * pair.grad_q)

    return _make("fwd_loss", np.asarray(value), (p, q), bwd)


def kl_loss(p: Tensor, q: Tensor) -> Tensor:
    """KL(p || q) on the tape; both sides floored at 1e-12 inside the log."""
    value = transport.kl_divergence(p.data, q.data)

    def bwd(g, grads):
        pf = np.maximum(p.data, _KL_FLOOR)
        qf = np.maximum(q.data, _KL_FLOOR)
        s = float(g)
        _accum(grads, p, s * (np.log(pf / qf) + 1.0))
        _accum(grads, q, s * (-p.data / qf))

    return _make("kl_loss", np.asarray(value), (p, q), bwd)


def ce_loss(p: Tensor, label_bin: int) -> Tensor:
    """Cross-entropy -ln(p[label_bin]) on the tape."""
    value = transport.frequency_ce(p.data, label_bin)

    def bwd(g, grads):
        gp = np.zeros(p.data.size)
        gp[label_bin] = -float(g) / max(p.data[label_bin], _KL_FLOOR)
        _accum(grads, p, gp.reshape(p.shape))

    return _make("ce_loss", np.asarray(value), (p,), bwd)


def neg_pearson(x: Tensor, y: Tensor) -> Tensor:
    """1 - PearsonR(x, y); a zero-variance side gives loss 1 and zero gradient."""
    if x.data.shape != y.data.shape or x.data.ndim != 1:
        raise InvalidArgumentError("neg_pearson expects equal-length 1-D signals")
    xc = x.data - x.data.mean()
    yc = y.data - y.data.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    sxy = float(xc @ yc)

    if sxx == 0.0 or syy == 0.0:
        logger.warning("neg_pearson: zero-variance input, treating correlation as 0")

        def bwd(g, grads):
            _accum(grads, x, np.zeros_like(x.data))
            _accum(grads, y, np.zeros_like(y.data))

        return _make("neg_pearson", np.asarray(1.0), (x, y), bwd)

    denom = np.sqrt(sxx * syy)
    r = sxy / denom

    def bwd(g, grads):
        s = float(g)
        _accum(grads, x, -s * (yc - xc * (sxy / sxx)) / denom)
        _accum(grads, y, -s * (xc - yc * (sxy / syy)) / denom)

    return _make("neg_pearson", np.asarray(1.0 - r), (x, y), bwd)
