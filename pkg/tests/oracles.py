"""Direct loop transcriptions used as reference implementations in tests."""

from __future__ import annotations

import math

import numpy as np


def naive_conv2d(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    c, h, w = x.shape
    k, c2, kh, kw = weights.shape
    assert c == c2
    out = np.zeros((k, h - kh + 1, w - kw + 1))
    for o in range(k):
        for i in range(h - kh + 1):
            for j in range(w - kw + 1):
                acc = float(bias[o])
                for ch in range(c):
                    for u in range(kh):
                        for v in range(kw):
                            acc += float(weights[o, ch, u, v]) * float(x[ch, i + u, j + v])
                out[o, i, j] = acc
    return out


def naive_sqdist(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for va, vb in zip(np.ravel(a), np.ravel(b)):
        total += (float(va) - float(vb)) ** 2
    return total


def naive_generative(preds, targets) -> float:
    return sum(naive_sqdist(p, s) for p, s in zip(preds, targets)) / len(preds)


def naive_discriminative(preds, targets, lam: float) -> float:
    n = len(preds)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += math.log1p(math.exp(-naive_sqdist(targets[i], preds[j]) / lam))
    return total / (n * (n - 1))


def naive_prl(gt: np.ndarray, pred: np.ndarray) -> float:
    _, h, w = gt.shape
    total = 0.0
    for y in range(h):
        for x in range(w):
            total += (float(gt[0, y, x]) - float(pred[0, y, x])) ** 2
    return math.sqrt(total) / (w * h)
