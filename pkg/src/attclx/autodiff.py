"""A small define-by-run reverse-mode autodiff engine on top of numpy.

Usage::

    w = Tensor(np.ones(3), requires_grad=True)
    with Tape() as tape:
        loss = mean(w * x)
    grads = tape.backward(loss)   # {w: ndarray}

Operations executed while a tape is active, and touching at least one tensor
that requires a gradient, are appended to the tape together with a closure
that maps the output gradient to input gradients. ``Tape.backward`` replays
the record in reverse. A tape supports one backward pass; call ``reset`` to
reuse it.

Every forward op checks its output for NaN/Inf and raises NonFiniteValue
naming the op.
"""
from __future__ import annotations

import threading
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NonFiniteValue, NonScalarLoss, ShapeMismatch, TapeAlreadyConsumed


class Tensor:
    __slots__ = ("data", "requires_grad", "name", "__weakref__")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.requires_grad = requires_grad
        self.name = name
        self.data = np.asarray(data, dtype=np.float64)

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return slice_(self, index)


class _Record:
    __slots__ = ("inputs", "output", "backward", "op")

    def __init__(self, inputs, output, backward, op):
        self.inputs = inputs
        self.output = output
        self.backward = backward
        self.op = op


_state = threading.local()


def _active_tape() -> Optional["Tape"]:
    stack = getattr(_state, "stack", None)
    return stack[-1] if stack else None


class Tape:
    """Ordered record of differentiable operations for one forward pass."""

    def __init__(self):
        self.records: list[_Record] = []
        self.consumed = False

    def __enter__(self):
        if not hasattr(_state, "stack"):
            _state.stack = []
        _state.stack.append(self)
        return self

    def __exit__(self, *exc):
        _state.stack.pop()
        return False

    def __len__(self):
        return len(self.records)

    def reset(self):
        self.records.clear()
        self.consumed = False

    def backward(self, loss: Tensor) -> dict:
        """Gradients of scalar ``loss`` w.r.t. every leaf tensor that requires grad.

        Returns a dict keyed by the leaf Tensor objects; gradient shapes equal
        the leaf shapes.
        """
        if self.consumed:
            raise TapeAlreadyConsumed("tape already used for a backward pass; call reset()")
        if loss.data.size != 1:
            raise NonScalarLoss(f"loss must be scalar, got shape {loss.shape}")
        if not self.records:
            raise ValueError("tape is empty")
        self.consumed = True
        produced = {id(r.output) for r in self.records}
        grads = {id(loss): np.ones_like(loss.data)}
        leaves: dict[int, Tensor] = {}
        for rec in reversed(self.records):
            g = grads.pop(id(rec.output), None)
            if g is None:
                continue
            in_grads = rec.backward(g)
            for t, gi in zip(rec.inputs, in_grads):
                if gi is None or not isinstance(t, Tensor) or not t.requires_grad:
                    continue
                key = id(t)
                if key in grads:
                    grads[key] = grads[key] + gi
                else:
                    grads[key] = gi
                if key not in produced:
                    leaves[key] = t
        return {t: grads.get(k, np.zeros_like(t.data)) for k, t in leaves.items()}


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _check(op: str, out: np.ndarray) -> np.ndarray:
    # a NaN or Inf anywhere makes the sum non-finite; the full scan only
    # runs to rule out an overflowing sum of finite values
    if not np.isfinite(np.sum(out)) and not np.all(np.isfinite(out)):
        raise NonFiniteValue(op)
    return out


def _emit(op: str, out: np.ndarray, inputs: Sequence[Tensor], backward: Callable) -> Tensor:
    _check(op, out)
    tape = _active_tape()
    needs = tape is not None and any(t.requires_grad for t in inputs)
    result = Tensor(out, requires_grad=needs)
    if needs:
        tape.records.append(_Record(tuple(inputs), result, backward, op))
    return result


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(op, b.shape, a.shape) from None


# ---------------------------------------------------------------- elementwise

def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return _emit("add", a.data + b.data, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return _emit("sub", a.data - b.data, (a, b), lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def mul(a, b) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    a, b = _as_tensor(a), _as_tensor(b)
    _broadcast_shape("elementwise_mul", a, b)
    ad, bd = a.data, b.data
    return _emit(
        "elementwise_mul",
        ad * bd,
        (a, b),
        lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)),
    )


elementwise_mul = mul


def scale(a: Tensor, c: float) -> Tensor:
    return _emit("scale", a.data * c, (a,), lambda g: (g * c,))


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.data)
    return _emit("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _emit("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _emit("relu", np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def dropout(a: Tensor, rate: float, rng: Optional[np.random.Generator], train: bool = True) -> Tensor:
    """Inverted dropout: zero with probability ``rate``, scale survivors by 1/(1-rate).

    Identity (the same tensor object) in eval mode or at rate 0.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return a
    mask = (rng.random(a.shape) >= rate) / (1.0 - rate)
    return _emit("dropout", a.data * mask, (a,), lambda g: (g * mask,))


# ---------------------------------------------------------------- structural

def matmul(a, b) -> Tensor:
    """Matrix product with numpy batching semantics (both operands >= 2-D)."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch("matmul", b.shape, (a.shape[-1] if a.ndim else None, "..."))
    ad, bd = a.data, b.data

    def back(g):
        ga = g @ np.swapaxes(bd, -1, -2)
        gb = np.swapaxes(ad, -1, -2) @ g
        return _unbroadcast(ga, ad.shape), _unbroadcast(gb, bd.shape)

    return _emit("matmul", ad @ bd, (a, b), back)


def transpose(a: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(axes)
    inv = tuple(np.argsort(axes))
    return _emit("transpose", np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inv),))


def swap_last(a: Tensor) -> Tensor:
    axes = list(range(a.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(a, axes)


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    src = a.shape
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeMismatch("reshape", tuple(shape), src) from None
    return _emit("reshape", out, (a,), lambda g: (g.reshape(src),))


def slice_(a: Tensor, index) -> Tensor:
    """Basic (view) indexing; the gradient scatters back into a zero array."""
    src = a.shape
    out = a.data[index]

    def back(g):
        full = np.zeros(src)
        full[index] += g
        return (full,)

    return _emit("slice", np.array(out, copy=True), (a,), back)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    ax = axis % tensors[0].ndim
    ref = tensors[0].shape
    for t in tensors[1:]:
        if t.ndim != len(ref) or any(t.shape[i] != ref[i] for i in range(len(ref)) if i != ax):
            raise ShapeMismatch("concat", t.shape, ref)
    bounds = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def back(g):
        return tuple(np.split(g, bounds, axis=ax))

    return _emit("concat", np.concatenate([t.data for t in tensors], axis=ax), tensors, back)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    ref = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != ref:
            raise ShapeMismatch("stack", t.shape, ref)
    ax = axis % (len(ref) + 1)

    def back(g):
        return tuple(np.take(g, i, axis=ax) for i in range(len(tensors)))

    return _emit("stack", np.stack([t.data for t in tensors], axis=ax), tensors, back)


def flip(a: Tensor, axis: int) -> Tensor:
    return _emit("flip", np.flip(a.data, axis=axis).copy(), (a,), lambda g: (np.flip(g, axis=axis).copy(),))


# ---------------------------------------------------------------- reductions

def sum_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    src = a.shape

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, src).copy(),)

    return _emit("sum", np.sum(a.data, axis=axis, keepdims=keepdims), (a,), back)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    src = a.shape
    count = a.data.size if axis is None else np.prod([src[i] for i in np.atleast_1d(axis)])

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, src).copy(),)

    return _emit("mean", np.mean(a.data, axis=axis, keepdims=keepdims), (a,), back)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return _emit("softmax", out, (a,), back)


def mse_loss(pred: Tensor, target) -> Tensor:
    """Mean squared error averaged over every element (so over the batch too)."""
    pred, target = _as_tensor(pred), _as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeMismatch("mse_loss", target.shape, pred.shape)
    diff = pred.data - target.data
    n = diff.size

    def back(g):
        gp = g * 2.0 * diff / n
        return gp, -gp

    return _emit("mse_loss", np.array(np.mean(diff * diff)), (pred, target), back)


# ---------------------------------------------------------------- convolution

def conv1d(x: Tensor, kernel: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Stride-1 convolution along the time axis with 'same' zero padding.

    x is (T, C_in) or (B, T, C_in); kernel is (K, C_in, C_out); bias (C_out,).
    Output keeps the time length T. Computed as cross-correlation, with the
    kernel centre at offset (K - 1) // 2.
    """
    x, kernel = _as_tensor(x), _as_tensor(kernel)
    squeeze = x.ndim == 2
    xd = x.data[None] if squeeze else x.data
    if xd.ndim != 3 or kernel.ndim != 3 or kernel.shape[1] != xd.shape[2]:
        raise ShapeMismatch("conv1d", kernel.shape, ("K", xd.shape[-1], "C_out"))
    K, cin, cout = kernel.shape
    if bias is not None and bias.shape != (cout,):
        raise ShapeMismatch("conv1d", bias.shape, (cout,))
    B, T, _ = xd.shape
    left = (K - 1) // 2
    xp = np.zeros((B, T + K - 1, cin))
    xp[:, left : left + T] = xd
    cols = np.stack([xp[:, k : k + T] for k in range(K)], axis=2).reshape(B, T, K * cin)
    wmat = kernel.data.reshape(K * cin, cout)
    out = cols @ wmat
    if bias is not None:
        out = out + bias.data
    if squeeze:
        out = out[0]

    def back(g):
        g3 = g[None] if squeeze else g
        gw = (cols.reshape(-1, K * cin).T @ g3.reshape(-1, cout)).reshape(K, cin, cout)
        gcols = (g3 @ wmat.T).reshape(B, T, K, cin)
        gxp = np.zeros_like(xp)
        for k in range(K):
            gxp[:, k : k + T] += gcols[:, :, k]
        gx = gxp[:, left : left + T]
        if squeeze:
            gx = gx[0]
        gb = g3.sum(axis=(0, 1)) if bias is not None else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    inputs = (x, kernel, bias) if bias is not None else (x, kernel)
    return _emit("conv1d", out, inputs, back)


# ---------------------------------------------------------------- recurrence

def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def lstm_sequence(x: Tensor, w: Tensor, u: Tensor, b: Tensor, reverse: bool = False) -> Tensor:
    """Run an LSTM over (B, T, D) as one recorded op; returns hidden states (B, T, H).

    Gate blocks are [input, forget, output, candidate]. With ``reverse`` the
    sequence is consumed from t = T-1 down to 0, and output row t still
    refers to input position t. Backward is hand-written BPTT; it must agree
    with the composite per-step graph built from the primitive ops.
    """
    B, T, D = x.shape
    H = u.shape[0]
    if w.shape != (D, 4 * H) or u.shape != (H, 4 * H) or b.shape != (4 * H,):
        raise ShapeMismatch("lstm_sequence", (w.shape, u.shape, b.shape), ((D, 4 * H), (H, 4 * H), (4 * H,)))
    xd, wd, ud = x.data, w.data, u.data
    xw = xd @ wd + b.data
    order = range(T - 1, -1, -1) if reverse else range(T)
    gates = np.empty((B, T, 4 * H))
    cs = np.empty((B, T, H))
    hs = np.empty((B, T, H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    prev = []
    for t in order:
        prev.append((t, h, c))
        z = xw[:, t] + h @ ud
        a = np.empty_like(z)
        a[:, : 3 * H] = _sigmoid(z[:, : 3 * H])
        a[:, 3 * H :] = np.tanh(z[:, 3 * H :])
        c = a[:, H : 2 * H] * c + a[:, :H] * a[:, 3 * H :]
        h = a[:, 2 * H : 3 * H] * np.tanh(c)
        gates[:, t] = a
        cs[:, t] = c
        hs[:, t] = h

    def back(g):
        dxw = np.empty((B, T, 4 * H))
        du = np.zeros_like(ud)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t, h_prev, c_prev in reversed(prev):
            a = gates[:, t]
            i, f, o, gg = a[:, :H], a[:, H : 2 * H], a[:, 2 * H : 3 * H], a[:, 3 * H :]
            tc = np.tanh(cs[:, t])
            dh = g[:, t] + dh_next
            dc = dh * o * (1.0 - tc * tc) + dc_next
            dz = dxw[:, t]
            dz[:, :H] = dc * gg * i * (1.0 - i)
            dz[:, H : 2 * H] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * H : 3 * H] = dh * tc * o * (1.0 - o)
            dz[:, 3 * H :] = dc * i * (1.0 - gg * gg)
            du += h_prev.T @ dz
            dh_next = dz @ ud.T
            dc_next = dc * f
        flat = dxw.reshape(-1, 4 * H)
        dw = xd.reshape(-1, D).T @ flat
        return dxw @ wd.T, dw, du, flat.sum(axis=0)

    return _emit("lstm_sequence", hs, (x, w, u, b), back)


# ---------------------------------------------------------------- checking

def numeric_grad(f: Callable[[], Tensor], t: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of scalar ``f()`` w.r.t. ``t.data``."""
    g = np.zeros_like(t.data)
    flat = t.data.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = float(f().data)
        flat[i] = orig - h
        fm = float(f().data)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * h)
    return g


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """max_i |a_i - n_i| / max(|a_i|, |n_i|, floor)."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def gradcheck(f: Callable[[], Tensor], params: Sequence[Tensor], h: float = 1e-5) -> float:
    """Largest relative error between tape gradients and central differences.

    ``f`` must be deterministic and build its graph from ``params``.
    """
    with Tape() as tape:
        loss = f()
    grads = tape.backward(loss)
    worst = 0.0
    for p in params:
        analytic = grads.get(p, np.zeros_like(p.data))
        worst = max(worst, relative_error(analytic, numeric_grad(f, p, h)))
    return worst
