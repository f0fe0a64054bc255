"""Kernel expression trees: evaluation, Gram matrices, analytic gradients.

One-dimensional inputs only.  Every positive hyperparameter is stored in
log space so optimization is unconstrained; the linear kernel's offset is
the single raw-valued parameter.  Flattening walks the tree depth-first in
field-declaration order, so a parameter vector and a template spec together
determine a kernel exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelSpec",
    "RBF",
    "RQ",
    "Linear",
    "SpectralMixture",
    "Product",
    "eval_kernel",
    "kernel_matrix",
    "kernel_grads",
    "flatten_params",
    "unflatten_params",
    "default_sm_init",
    "spec_to_dict",
    "spec_from_dict",
    "spec_to_json",
    "spec_from_json",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RBF:
    log_lengthscale: float
    log_signal_var: float


@dataclass(frozen=True)
class RQ:
    log_lengthscale: float
    log_signal_var: float
    log_alpha: float


@dataclass(frozen=True)
class Linear:
    log_slope_var: float
    offset_c: float


@dataclass(frozen=True)
class SpectralMixture:
    # each component: (log_weight, log_frequency, log_freq_var)
    components: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("spectral mixture needs at least one component")
        object.__setattr__(
            self, "components", tuple(tuple(map(float, c)) for c in self.components)
        )


@dataclass(frozen=True)
class Product:
    left: "KernelSpec"
    right: "KernelSpec"


KernelSpec = RBF | RQ | Linear | SpectralMixture | Product


def validate_spec(spec: KernelSpec) -> None:
    """Raise ValueError if any stored hyperparameter is non-finite."""
    for v in flatten_params(spec):
        if not np.isfinite(v):
            raise ValueError(f"non-finite hyperparameter in {type(spec).__name__}")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _eval(spec: KernelSpec, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Evaluate k(xa, xb) elementwise on broadcast arrays."""
    if isinstance(spec, RBF):
        ell = np.exp(spec.log_lengthscale)
        sv = np.exp(spec.log_signal_var)
        r2 = (xa - xb) ** 2
        return sv * np.exp(-0.5 * r2 / ell**2)
    if isinstance(spec, RQ):
        ell = np.exp(spec.log_lengthscale)
        sv = np.exp(spec.log_signal_var)
        alpha = np.exp(spec.log_alpha)
        z = (xa - xb) ** 2 / (2.0 * alpha * ell**2)
        return sv * (1.0 + z) ** (-alpha)
    if isinstance(spec, Linear):
        sv = np.exp(spec.log_slope_var)
        return sv * (xa - spec.offset_c) * (xb - spec.offset_c)
    if isinstance(spec, SpectralMixture):
        tau = xa - xb
        out = np.zeros(np.broadcast(xa, xb).shape)
        for lw, lmu, lv in spec.components:
            w, mu, v = np.exp(lw), np.exp(lmu), np.exp(lv)
            out += w * np.exp(-2.0 * math.pi**2 * tau**2 * v) * np.cos(_TWO_PI * tau * mu)
        return out
    if isinstance(spec, Product):
        return _eval(spec.left, xa, xb) * _eval(spec.right, xa, xb)
    raise TypeError(f"unknown kernel node {type(spec).__name__}")


def eval_kernel(spec: KernelSpec, x: float, x2: float) -> float:
    return float(_eval(spec, np.asarray(x, dtype=float), np.asarray(x2, dtype=float)))


def kernel_matrix(spec: KernelSpec, X, X2=None) -> np.ndarray:
    """Gram matrix K[i, j] = k(X[i], X2[j]); X2 defaults to X."""
    X = np.asarray(X, dtype=float).ravel()
    Xb = X if X2 is None else np.asarray(X2, dtype=float).ravel()
    K = _eval(spec, X[:, None], Xb[None, :])
    if Xb is X:
        K = 0.5 * (K + K.T)  # kill last-bit asymmetry
    return K


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------

def _eval_and_grads(spec: KernelSpec, xa: np.ndarray, xb: np.ndarray):
    """Return (K, [dK/dθ_i ...]) in flattening order."""
    if isinstance(spec, RBF):
        ell = np.exp(spec.log_lengthscale)
        sv = np.exp(spec.log_signal_var)
        r2 = (xa - xb) ** 2
        K = sv * np.exp(-0.5 * r2 / ell**2)
        return K, [K * r2 / ell**2, K.copy()]
    if isinstance(spec, RQ):
        ell = np.exp(spec.log_lengthscale)
        sv = np.exp(spec.log_signal_var)
        alpha = np.exp(spec.log_alpha)
        z = (xa - xb) ** 2 / (2.0 * alpha * ell**2)
        base = 1.0 + z
        K = sv * base ** (-alpha)
        d_ls = K * 2.0 * alpha * z / base
        d_alpha = K * alpha * (z / base - np.log(base))
        return K, [d_ls, K.copy(), d_alpha]
    if isinstance(spec, Linear):
        sv = np.exp(spec.log_slope_var)
        da = xa - spec.offset_c
        db = xb - spec.offset_c
        K = sv * da * db
        return K, [K.copy(), -sv * (da + db)]
    if isinstance(spec, SpectralMixture):
        tau = xa - xb
        shape = np.broadcast(xa, xb).shape
        K = np.zeros(shape)
        grads: list[np.ndarray] = []
        for lw, lmu, lv in spec.components:
            w, mu, v = np.exp(lw), np.exp(lmu), np.exp(lv)
            env = np.exp(-2.0 * math.pi**2 * tau**2 * v)
            cos_t = np.cos(_TWO_PI * tau * mu)
            kq = w * env * cos_t
            K += kq
            d_w = kq.copy()
            d_mu = -w * env * np.sin(_TWO_PI * tau * mu) * _TWO_PI * tau * mu
            d_v = kq * (-2.0 * math.pi**2 * tau**2) * v
            grads.extend([d_w, d_mu, d_v])
        return K, grads
    if isinstance(spec, Product):
        Kl, gl = _eval_and_grads(spec.left, xa, xb)
        Kr, gr = _eval_and_grads(spec.right, xa, xb)
        return Kl * Kr, [g * Kr for g in gl] + [Kl * g for g in gr]
    raise TypeError(f"unknown kernel node {type(spec).__name__}")


def kernel_grads(spec: KernelSpec, X) -> list[np.ndarray]:
    """dK/dθ_i over the square Gram matrix on X, one matrix per parameter."""
    X = np.asarray(X, dtype=float).ravel()
    _, grads = _eval_and_grads(spec, X[:, None], X[None, :])
    return [0.5 * (g + g.T) for g in grads]


# ---------------------------------------------------------------------------
# parameter vector
# ---------------------------------------------------------------------------

def flatten_params(spec: KernelSpec) -> np.ndarray:
    out: list[float] = []

    def walk(s: KernelSpec):
        if isinstance(s, RBF):
            out.extend([s.log_lengthscale, s.log_signal_var])
        elif isinstance(s, RQ):
            out.extend([s.log_lengthscale, s.log_signal_var, s.log_alpha])
        elif isinstance(s, Linear):
            out.extend([s.log_slope_var, s.offset_c])
        elif isinstance(s, SpectralMixture):
            for c in s.components:
                out.extend(c)
        elif isinstance(s, Product):
            walk(s.left)
            walk(s.right)
        else:
            raise TypeError(f"unknown kernel node {type(s).__name__}")

    walk(spec)
    return np.asarray(out, dtype=float)


def n_params(spec: KernelSpec) -> int:
    return flatten_params(spec).size


def unflatten_params(template: KernelSpec, v) -> KernelSpec:
    v = np.asarray(v, dtype=float).ravel()
    pos = 0

    def take(n: int) -> list[float]:
        nonlocal pos
        if pos + n > v.size:
            raise ValueError("parameter vector too short for template")
        chunk = [float(x) for x in v[pos : pos + n]]
        pos += n
        return chunk

    def walk(s: KernelSpec) -> KernelSpec:
        if isinstance(s, RBF):
            a, b = take(2)
            return RBF(a, b)
        if isinstance(s, RQ):
            a, b, c = take(3)
            return RQ(a, b, c)
        if isinstance(s, Linear):
            a, b = take(2)
            return Linear(a, b)
        if isinstance(s, SpectralMixture):
            comps = []
            for _ in s.components:
                comps.append(tuple(take(3)))
            return SpectralMixture(tuple(comps))
        if isinstance(s, Product):
            left = walk(s.left)
            right = walk(s.right)
            return Product(left, right)
        raise TypeError(f"unknown kernel node {type(s).__name__}")

    rebuilt = walk(template)
    if pos != v.size:
        raise ValueError(f"parameter vector has {v.size} entries, template needs {pos}")
    return rebuilt


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def default_sm_init(
    x_range: float, y_variance: float, nyquist: float, Q: int, seed: int
) -> SpectralMixture:
    """Random spectral-mixture start: uniform frequencies up to the Nyquist
    limit, equal weights summing to the signal variance, and bandwidths
    scaled to the input range."""
    if x_range <= 0 or y_variance <= 0 or nyquist <= 0 or Q < 1:
        raise ValueError("x_range, y_variance, nyquist must be > 0 and Q >= 1")
    rng = np.random.default_rng(seed)
    comps = []
    for _ in range(Q):
        w = y_variance / Q
        mu = max(rng.uniform(0.0, nyquist), 1e-8 * nyquist)
        sd = abs(rng.normal(0.0, 1.0 / x_range))
        v = max(sd**2, 1e-12 / x_range**2)
        comps.append((math.log(w), math.log(mu), math.log(v)))
    return SpectralMixture(tuple(comps))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def spec_to_dict(spec: KernelSpec) -> dict:
    if isinstance(spec, RBF):
        return {"type": "rbf", "log_lengthscale": spec.log_lengthscale,
                "log_signal_var": spec.log_signal_var}
    if isinstance(spec, RQ):
        return {"type": "rq", "log_lengthscale": spec.log_lengthscale,
                "log_signal_var": spec.log_signal_var, "log_alpha": spec.log_alpha}
    if isinstance(spec, Linear):
        return {"type": "linear", "log_slope_var": spec.log_slope_var,
                "offset_c": spec.offset_c}
    if isinstance(spec, SpectralMixture):
        return {"type": "spectral_mixture",
                "components": [list(c) for c in spec.components]}
    if isinstance(spec, Product):
        return {"type": "product", "left": spec_to_dict(spec.left),
                "right": spec_to_dict(spec.right)}
    raise TypeError(f"unknown kernel node {type(spec).__name__}")


def spec_from_dict(d: dict) -> KernelSpec:
    t = d["type"]
    if t == "rbf":
        return RBF(float(d["log_lengthscale"]), float(d["log_signal_var"]))
    if t == "rq":
        return RQ(float(d["log_lengthscale"]), float(d["log_signal_var"]),
                  float(d["log_alpha"]))
    if t == "linear":
        return Linear(float(d["log_slope_var"]), float(d["offset_c"]))
    if t == "spectral_mixture":
        return SpectralMixture(tuple(tuple(map(float, c)) for c in d["components"]))
    if t == "product":
        return Product(spec_from_dict(d["left"]), spec_from_dict(d["right"]))
    raise ValueError(f"unknown kernel type tag {t!r}")


def spec_to_json(spec: KernelSpec) -> str:
    return json.dumps(spec_to_dict(spec))


def spec_from_json(s: str) -> KernelSpec:
    return spec_from_dict(json.loads(s))
