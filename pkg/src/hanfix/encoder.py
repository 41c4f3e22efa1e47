"""Small transformer encoder over character embeddings, with hand-written
backward passes.

Everything runs in float64 numpy so the analytic gradients can be checked
against central finite differences tightly.  Shapes follow the [out, in]
weight convention: y = x @ W.T + b.  Pre-LN blocks plus a final LayerNorm:

    x = x + MHA(LN1(x));  x = x + FFN(LN2(x));  ...;  h = LNf(x)

Forward functions return a cache consumed by the matching backward
function; gradients come back in a flat {tensor_name: array} dict keyed
exactly like the parameter dict.
"""

from __future__ import annotations

import numpy as np

_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_A = 0.044715


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + _GELU_A * x**3)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    u = _GELU_C * (x + _GELU_A * x**3)
    t = np.tanh(u)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    m = x.max(axis=axis, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=axis, keepdims=True)


def masked_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over the last axis restricted to mask==1 entries.

    Rows whose mask is all zero come back as all zeros (not NaN), which is
    exactly the no-candidate fallback the fusion layer relies on.
    """
    s = np.where(mask > 0, scores, -1e30)
    m = s.max(axis=-1, keepdims=True)
    e = np.exp(s - m) * (mask > 0)
    z = e.sum(axis=-1, keepdims=True)
    return e / np.where(z == 0.0, 1.0, z)


def softmax_backward(a: np.ndarray, da: np.ndarray) -> np.ndarray:
    """d(scores) given softmax output `a` and upstream gradient `da`.

    Valid for masked softmax too: zero rows/entries yield zero gradient.
    """
    return a * (da - (da * a).sum(axis=-1, keepdims=True))


# ------------------------------------------------------------------ layernorm

_LN_EPS = 1e-5


def ln_forward(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mu) * inv
    return xhat * g + b, (xhat, inv, g)


def ln_backward(dy: np.ndarray, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


# ------------------------------------------------------------------- encoder


def init_encoder_tensors(cfg, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Embeddings, L attention blocks, and the final LayerNorm."""
    d, ffn = cfg.d_c, cfg.ffn_dim
    t: dict[str, np.ndarray] = {}
    t["E_c"] = rng.normal(0.0, 0.02, (cfg.char_vocab_size, d))
    t["P"] = rng.normal(0.0, 0.02, (cfg.max_len, d))
    for l in range(cfg.layers):
        p = f"blk{l}."
        t[p + "ln1.g"] = np.ones(d)
        t[p + "ln1.b"] = np.zeros(d)
        for name in ("Wq", "Wk", "Wv", "Wo"):
            t[p + name] = rng.normal(0.0, 0.02, (d, d))
        for name in ("bq", "bk", "bv", "bo"):
            t[p + name] = np.zeros(d)
        t[p + "ln2.g"] = np.ones(d)
        t[p + "ln2.b"] = np.zeros(d)
        t[p + "W1"] = rng.normal(0.0, 0.02, (ffn, d))
        t[p + "c1"] = np.zeros(ffn)
        t[p + "W2"] = rng.normal(0.0, 0.02, (d, ffn))
        t[p + "c2"] = np.zeros(d)
    t["ln_f.g"] = np.ones(d)
    t["ln_f.b"] = np.zeros(d)
    return t


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    B, n, d = x.shape
    return x.reshape(B, n, heads, d // heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    B, H, n, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, n, H * dh)


def encoder_forward(tensors, cfg, char_ids: np.ndarray, cmask: np.ndarray):
    """char ids [B, n] -> hidden states [B, n, d_c].

    cmask marks real (non-pad) positions; pad positions are excluded as
    attention keys so they never leak into real positions.
    """
    B, n = char_ids.shape
    x = tensors["E_c"][char_ids] + tensors["P"][:n][None, :, :]
    kmask = cmask[:, None, None, :]  # broadcast over heads and queries
    caches = []
    for l in range(cfg.layers):
        p = f"blk{l}."
        t, ln1c = ln_forward(x, tensors[p + "ln1.g"], tensors[p + "ln1.b"])
        Q = t @ tensors[p + "Wq"].T + tensors[p + "bq"]
        K = t @ tensors[p + "Wk"].T + tensors[p + "bk"]
        V = t @ tensors[p + "Wv"].T + tensors[p + "bv"]
        Qh, Kh, Vh = (_split_heads(z, cfg.heads) for z in (Q, K, V))
        scale = 1.0 / np.sqrt(Qh.shape[-1])
        S = (Qh @ Kh.transpose(0, 1, 3, 2)) * scale
        A = masked_softmax(S, np.broadcast_to(kmask, S.shape))
        Oh = A @ Vh
        O = _merge_heads(Oh)
        att = O @ tensors[p + "Wo"].T + tensors[p + "bo"]
        x1 = x + att
        t2, ln2c = ln_forward(x1, tensors[p + "ln2.g"], tensors[p + "ln2.b"])
        pre = t2 @ tensors[p + "W1"].T + tensors[p + "c1"]
        f = gelu(pre)
        x = x1 + f @ tensors[p + "W2"].T + tensors[p + "c2"]
        caches.append((t, ln1c, Qh, Kh, Vh, A, O, x1, t2, ln2c, pre, f, scale))
    h, lnfc = ln_forward(x, tensors["ln_f.g"], tensors["ln_f.b"])
    return h, (char_ids, n, caches, lnfc)


def encoder_backward(tensors, cfg, cache, dh: np.ndarray) -> dict[str, np.ndarray]:
    char_ids, n, caches, lnfc = cache
    grads: dict[str, np.ndarray] = {}
    dx, grads["ln_f.g"], grads["ln_f.b"] = ln_backward(dh, lnfc)
    for l in reversed(range(cfg.layers)):
        p = f"blk{l}."
        t, ln1c, Qh, Kh, Vh, A, O, x1, t2, ln2c, pre, f, scale = caches[l]
        # FFN sublayer
        dq_out = dx
        grads[p + "W2"] = np.einsum("bnd,bnf->df", dq_out, f)
        grads[p + "c2"] = dq_out.sum(axis=(0, 1))
        df = dq_out @ tensors[p + "W2"]
        dpre = df * gelu_grad(pre)
        grads[p + "W1"] = np.einsum("bnf,bnd->fd", dpre, t2)
        grads[p + "c1"] = dpre.sum(axis=(0, 1))
        dt2 = dpre @ tensors[p + "W1"]
        dx1_ln, grads[p + "ln2.g"], grads[p + "ln2.b"] = ln_backward(dt2, ln2c)
        dx1 = dx + dx1_ln
        # attention sublayer
        datt = dx1
        grads[p + "Wo"] = np.einsum("bnd,bne->de", datt, O)
        grads[p + "bo"] = datt.sum(axis=(0, 1))
        dO = datt @ tensors[p + "Wo"]
        dOh = _split_heads(dO, cfg.heads)
        dA = dOh @ Vh.transpose(0, 1, 3, 2)
        dVh = A.transpose(0, 1, 3, 2) @ dOh
        dS = softmax_backward(A, dA)
        dQh = (dS @ Kh) * scale
        dKh = (dS.transpose(0, 1, 3, 2) @ Qh) * scale
        dQ, dK, dV = (_merge_heads(z) for z in (dQh, dKh, dVh))
        grads[p + "Wq"] = np.einsum("bnd,bne->de", dQ, t)
        grads[p + "bq"] = dQ.sum(axis=(0, 1))
        grads[p + "Wk"] = np.einsum("bnd,bne->de", dK, t)
        grads[p + "bk"] = dK.sum(axis=(0, 1))
        grads[p + "Wv"] = np.einsum("bnd,bne->de", dV, t)
        grads[p + "bv"] = dV.sum(axis=(0, 1))
        dt = dQ @ tensors[p + "Wq"] + dK @ tensors[p + "Wk"] + dV @ tensors[p + "Wv"]
        dx_ln, grads[p + "ln1.g"], grads[p + "ln1.b"] = ln_backward(dt, ln1c)
        dx = dx1 + dx_ln
    dE = np.zeros_like(tensors["E_c"])
    np.add.at(dE, char_ids, dx)
    grads["E_c"] = dE
    dP = np.zeros_like(tensors["P"])
    dP[:n] = dx.sum(axis=0)
    grads["P"] = dP
    return grads
