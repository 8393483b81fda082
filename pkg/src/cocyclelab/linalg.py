"""Dense matrix kernels: induced norms, inversion, spectral radius, scaled products.

Operators are plain ``numpy`` arrays of shape ``(d, d)``. Long products are
carried as :class:`ScaledOperator`, a normalized matrix plus a natural-log
scale factor, so that growth rates far outside the float range stay usable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SingularOperator

NORM_KINDS = ("l2", "l1", "linf")
_ALIASES = {
    "l2": "l2", "l2_induced": "l2", "2": "l2",
    "l1": "l1", "l1_induced": "l1", "1": "l1",
    "linf": "linf", "linf_induced": "linf", "inf": "linf",
}

#: condition number above which :func:`invert` refuses
SINGULAR_COND = 1e14


def norm_kind(kind) -> str:
    """Canonical tag for a norm name (``"l2"``, ``"l1"`` or ``"linf"``)."""
    try:
        return _ALIASES[str(kind)]
    except KeyError:
        raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}") from None


def as_operator(a) -> np.ndarray:
    """Validate and return ``a`` as a square, finite float matrix."""
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator entries must be finite")
    return arr


def op_norm(a, kind="l2") -> float:
    """Induced operator norm of a single matrix.

    ``l1`` is the maximum absolute column sum, ``linf`` the maximum absolute
    row sum and ``l2`` the largest singular value.
    """
    a = np.asarray(a, dtype=float)
    kind = norm_kind(kind)
    if kind == "l1":
        return float(np.abs(a).sum(axis=0).max())
    if kind == "linf":
        return float(np.abs(a).sum(axis=1).max())
    return float(np.linalg.svd(a, compute_uv=False)[0])


def op_norms(mats, kind="l2") -> np.ndarray:
    """Batched :func:`op_norm` over the leading axis of an ``(..., d, d)`` array."""
    mats = np.asarray(mats, dtype=float)
    kind = norm_kind(kind)
    if kind == "l1":
        return np.abs(mats).sum(axis=-2).max(axis=-1)
    if kind == "linf":
        return np.abs(mats).sum(axis=-1).max(axis=-1)
    if mats.shape[-1] == 2:
        # closed form for 2x2: sigma_max^2 = (F^2 + sqrt(F^4 - 4 det^2)) / 2
        fro2 = (mats * mats).sum(axis=(-2, -1))
        det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
        disc = np.sqrt(np.maximum(fro2 * fro2 - 4.0 * det * det, 0.0))
        return np.sqrt(0.5 * (fro2 + disc))
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def vector_norms(v, kind="l2", axis=-1) -> np.ndarray:
    """Vector norms dual to the induced operator norm of the same kind."""
    kind = norm_kind(kind)
    order = {"l2": 2, "l1": 1, "linf": np.inf}[kind]
    return np.linalg.norm(v, ord=order, axis=axis)


def invert(a) -> np.ndarray:
    """Inverse of ``a``; raises :class:`SingularOperator` when the 2-norm
    condition number exceeds ``SINGULAR_COND``."""
    a = as_operator(a)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise SingularOperator(f"condition number {cond:.3g} exceeds {SINGULAR_COND:g}")
    return np.linalg.inv(a)


def spectral_radius(a) -> float:
    """Largest eigenvalue modulus."""
    a = np.asarray(a, dtype=float)
    return float(np.abs(np.linalg.eigvals(a)).max())


def spectral_radii(mats) -> np.ndarray:
    """Batched :func:`spectral_radius`."""
    return np.abs(np.linalg.eigvals(np.asarray(mats, dtype=float))).max(axis=-1)


@dataclass(frozen=True)
class ScaledOperator:
    """The operator ``exp(log_scale) * matrix``."""

    matrix: np.ndarray
    log_scale: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        """The product as an ordinary matrix (may overflow for long products)."""
        return np.exp(self.log_scale) * self.matrix

    def log_norm(self, kind="l2") -> float:
        return self.log_scale + float(np.log(op_norm(self.matrix, kind)))

    def log_spectral_radius(self) -> float:
        r = spectral_radius(self.matrix)
        return self.log_scale + float(np.log(r)) if r > 0 else -np.inf

    def __matmul__(self, other: "ScaledOperator") -> "ScaledOperator":
        return _normalized(self.matrix @ other.matrix, self.log_scale + other.log_scale)


def _normalized(m, log_scale=0.0) -> ScaledOperator:
    s = float(np.abs(m).max())
    if s == 0.0 or not np.isfinite(s):
        return ScaledOperator(m, log_scale)
    return ScaledOperator(m / s, log_scale + float(np.log(s)))


def identity(d) -> ScaledOperator:
    return ScaledOperator(np.eye(d), 0.0)


def chain_product(mats) -> ScaledOperator:
    """Product ``M[n-1] @ ... @ M[0]`` of a stack applied in index order.

    Pairwise tree reduction with per-node renormalization; no entry of an
    intermediate exceeds 1 in absolute value.
    """
    mats = np.array(mats, dtype=float)
    if mats.ndim != 3:
        raise ValueError("expected a stack of square matrices")
    n, d = mats.shape[0], mats.shape[-1]
    if n == 0:
        return identity(d)
    logs = np.zeros(n)
    eye = np.eye(d)[None]
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, eye])
            logs = np.append(logs, 0.0)
        mats = mats[1::2] @ mats[0::2]
        logs = logs[1::2] + logs[0::2]
        scale = np.abs(mats).max(axis=(1, 2))
        scale[scale == 0.0] = 1.0
        mats /= scale[:, None, None]
        logs += np.log(scale)
    return _normalized(mats[0], float(logs[0]))


def prefix_products(mats):
    """All partial products ``P_j = M[j-1] @ ... @ M[0]`` for ``j = 0..n``.

    Returns ``(P, logs)`` with ``P`` of shape ``(n + 1, d, d)`` normalized to
    max-entry 1 and ``logs`` the matching log scales.
    """
    mats = np.asarray(mats, dtype=float)
    n, d = mats.shape[0], mats.shape[-1]
    out = np.empty((n + 1, d, d))
    logs = np.zeros(n + 1)
    out[0] = np.eye(d)
    cur, s = out[0], 0.0
    for j in range(n):
        cur = mats[j] @ cur
        m = np.abs(cur).max()
        if m > 0:
            cur = cur / m
            s += np.log(m)
        out[j + 1] = cur
        logs[j + 1] = s
    return out, logs


def operator_from_json(obj) -> np.ndarray:
    """Parse a row-major array-of-arrays (or its JSON text) into an operator."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValueError("operator JSON must be a non-empty array of arrays")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise ValueError("ragged operator rows")
    for row in obj:
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"non-numeric operator entry {v!r}")
    return as_operator(obj)


def operator_to_json(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a, dtype=float)]
