"""Component test-function registry.

24 scalable black-box functions spanning the five classic difficulty
groups.  Every raw function is vectorized ((m, d) -> (m,)), deterministic,
nonnegative on all of R^d, and attains its minimum value 0 exactly at the
origin.  Two functions differ from their classic templates because the
classic form has no interior optimum: the linear slope is replaced by a
weighted L1 cone, and the rotated-Rosenbrock slot holds Griewank (instance
rotations already produce rotated variants of every entry).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RegistryError

GROUPS = (
    "separable",
    "low-conditioning",
    "high-conditioning",
    "multimodal-adequate",
    "multimodal-weak",
)


@dataclass(frozen=True)
class ComponentFunction:
    """One registry entry: a raw scalable test function."""

    id: int
    name: str
    group: str
    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    raw_optimum_value: float = 0.0


def _as_batch(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    return z


def _cond(d: int, alpha: float) -> np.ndarray:
    """Per-coordinate scaling 10^(alpha * (i-1)/(d-1)); all-ones for d=1."""
    if d == 1:
        return np.ones(1)
    return 10.0 ** (alpha * np.arange(d) / (d - 1))


def t_osz(x: np.ndarray) -> np.ndarray:
    """Monotone oscillating warp; preserves sign and fixes 0."""
    zero = x == 0
    pos = x > 0
    with np.errstate(divide="ignore"):
        lg = np.log(np.where(zero, 1.0, np.abs(x)))
    c1 = np.where(pos, 10.0, 5.5)
    c2 = np.where(pos, 7.9, 3.1)
    y = np.sign(x) * np.exp(lg + 0.049 * (np.sin(c1 * lg) + np.sin(c2 * lg)))
    return np.where(zero, 0.0, y)


def t_asy(x: np.ndarray, beta: float) -> np.ndarray:
    """Monotone asymmetry warp; identity for nonpositive coordinates."""
    d = x.shape[-1]
    if d == 1:
        expo = np.zeros(1)
    else:
        expo = beta * np.arange(d) / (d - 1)
    y = x.copy()
    pos = x > 0
    y[pos] = (x ** (1.0 + expo * np.sqrt(np.where(pos, x, 0.0))))[pos]
    return y


def _sphere(z):
    z = _as_batch(z)
    return np.sum(z * z, axis=1)


def _ellipsoid_sep(z):
    z = _as_batch(z)
    return np.sum(_cond(z.shape[1], 6.0) * z * z, axis=1)


def _rastrigin_sep(z):
    z = _as_batch(z)
    d = z.shape[1]
    return 10.0 * (d - np.sum(np.cos(2.0 * np.pi * z), axis=1)) + np.sum(z * z, axis=1)


def _buche_rastrigin(z):
    z = _as_batch(z)
    d = z.shape[1]
    s = np.tile(_cond(d, 0.5), (len(z), 1))
    odd = np.arange(d) % 2 == 0  # 1-based odd coordinates
    s = np.where(odd[None, :] & (z > 0), 10.0 * s, s)
    t = s * z
    return 10.0 * (d - np.sum(np.cos(2.0 * np.pi * t), axis=1)) + np.sum(t * t, axis=1)


def _linear_cone(z):
    # interior-optimum substitute for the boundary-optimum linear slope
    z = _as_batch(z)
    return np.sum(_cond(z.shape[1], 1.0) * np.abs(z), axis=1)


def _attractive_sector(z):
    z = _as_batch(z)
    s = np.where(z > 0, 100.0, 1.0)
    return np.sum((s * z) ** 2, axis=1) ** 0.9


def _step_ellipsoid(z):
    z = _as_batch(z)
    d = z.shape[1]
    zt = np.where(np.abs(z) > 0.5, np.floor(0.5 + z), np.floor(0.5 + 10.0 * z) / 10.0)
    quad = np.sum(_cond(d, 2.0) * zt * zt, axis=1)
    return 0.1 * np.maximum(np.abs(z[:, 0]) / 1e4, quad)


def _rosenbrock(z):
    z = _as_batch(z)
    if z.shape[1] == 1:
        return z[:, 0] ** 2
    u = z + 1.0
    return np.sum(100.0 * (u[:, :-1] ** 2 - u[:, 1:]) ** 2 + (u[:, :-1] - 1.0) ** 2, axis=1)


def _griewank(z):
    z = _as_batch(z)
    d = z.shape[1]
    return (
        np.sum(z * z, axis=1) / 4000.0
        - np.prod(np.cos(z / np.sqrt(np.arange(1, d + 1))), axis=1)
        + 1.0
    )


def _ellipsoid_osz(z):
    z = _as_batch(z)
    zh = t_osz(z)
    return np.sum(_cond(z.shape[1], 6.0) * zh * zh, axis=1)


def _discus(z):
    z = _as_batch(z)
    zh = t_osz(z)
    return 1e6 * zh[:, 0] ** 2 + np.sum(zh[:, 1:] ** 2, axis=1)


def _bent_cigar(z):
    z = _as_batch(z)
    zh = t_asy(z, 0.5)
    return zh[:, 0] ** 2 + 1e6 * np.sum(zh[:, 1:] ** 2, axis=1)


def _sharp_ridge(z):
    z = _as_batch(z)
    return z[:, 0] ** 2 + 100.0 * np.sqrt(np.sum(z[:, 1:] ** 2, axis=1))


def _different_powers(z):
    z = _as_batch(z)
    d = z.shape[1]
    if d == 1:
        expo = np.full(1, 2.0)
    else:
        expo = 2.0 + 4.0 * np.arange(d) / (d - 1)
    return np.sqrt(np.sum(np.abs(z) ** expo, axis=1))


def _rastrigin(z):
    z = _as_batch(z)
    d = z.shape[1]
    zh = t_asy(t_osz(z), 0.2)
    return 10.0 * (d - np.sum(np.cos(2.0 * np.pi * zh), axis=1)) + np.sum(zh * zh, axis=1)


_WEIER_K = np.arange(12)
_WEIER_HALF = 0.5 ** _WEIER_K
_WEIER_THREE = 3.0 ** _WEIER_K
_WEIER_F0 = float(np.sum(_WEIER_HALF * np.cos(np.pi * _WEIER_THREE)))


def _weierstrass(z):
    z = _as_batch(z)
    d = z.shape[1]
    arg = 2.0 * np.pi * _WEIER_THREE[None, None, :] * (z[:, :, None] + 0.5)
    g = np.sum(_WEIER_HALF[None, None, :] * np.cos(arg), axis=2)
    return 10.0 * (np.mean(g, axis=1) - _WEIER_F0) ** 3


def _schaffers(z, alpha):
    z = _as_batch(z)
    d = z.shape[1]
    t = _cond(d, alpha) * z
    if d == 1:
        s = np.abs(t[:, 0])
    else:
        s = np.sqrt(t[:, :-1] ** 2 + t[:, 1:] ** 2)
    term = np.sqrt(s) * (1.0 + np.sin(50.0 * s ** 0.2) ** 2)
    if d == 1:
        return term ** 2
    return (np.mean(term, axis=1)) ** 2


def _schaffers_f7(z):
    return _schaffers(z, 0.5)


def _schaffers_f7_ill(z):
    return _schaffers(z, 1.5)


def _griewank_rosenbrock(z):
    z = _as_batch(z)
    if z.shape[1] == 1:
        u = np.concatenate([z + 1.0, np.ones((len(z), 1))], axis=1)
    else:
        u = z + 1.0
    s = 100.0 * (u[:, :-1] ** 2 - u[:, 1:]) ** 2 + (u[:, :-1] - 1.0) ** 2
    return np.mean(s / 4000.0 - np.cos(s) + 1.0, axis=1)


_SCHWEFEL_WOPT = 420.96874636
_SCHWEFEL_PEAK = float(_SCHWEFEL_WOPT * np.sin(np.sqrt(_SCHWEFEL_WOPT)))


def _schwefel(z):
    z = _as_batch(z)
    w = 100.0 * z + _SCHWEFEL_WOPT
    wc = np.clip(w, -500.0, 500.0)
    g = wc * np.sin(np.sqrt(np.abs(wc)))
    pen = np.maximum(0.0, np.abs(w) - 500.0) ** 2
    return np.sum((_SCHWEFEL_PEAK - g) + 0.01 * pen, axis=1)


@functools.lru_cache(maxsize=None)
def _gallagher_layout(n_peaks: int, d: int):
    # fixed layout per (n_peaks, d): peak 1 is the global optimum at the origin
    rng = np.random.default_rng(0x6A11A6 + 1000 * n_peaks + d)
    Y = rng.uniform(-4.5, 4.5, size=(n_peaks, d))
    Y[0] = 0.0
    w = np.empty(n_peaks)
    w[0] = 10.0
    denom = max(n_peaks - 2, 1)
    w[1:] = 1.1 + 8.0 * np.arange(n_peaks - 1) / denom
    alpha = np.empty(n_peaks)
    alpha[0] = 1.0
    alpha[1:] = 1000.0 ** (rng.permutation(n_peaks - 1) / denom)
    if d == 1:
        expo = np.full((1, 1), 0.0)
    else:
        expo = (np.arange(d) / (d - 1) - 0.5)[None, :]
    C = alpha[:, None] ** expo  # diagonal scalings, condition alpha_i
    # expanded quadratic form: q = z^2 A^T + z B^T + c0
    A = C.T.copy()
    B = (-2.0 * C * Y).T.copy()
    c0 = np.sum(C * Y * Y, axis=1)
    return w, A, B, c0


def _gallagher(z, n_peaks):
    z = _as_batch(z)
    w, A, B, c0 = _gallagher_layout(n_peaks, z.shape[1])
    # einsum keeps per-element rounding independent of the batch size
    q = np.einsum("md,dp->mp", z * z, A) + np.einsum("md,dp->mp", z, B) + c0
    vals = w[None, :] * np.exp(-q / (2.0 * z.shape[1]))
    s = 10.0 - np.max(vals, axis=1)
    return t_osz(s) ** 2


def _gallagher_101(z):
    return _gallagher(z, 101)


def _gallagher_21(z):
    return _gallagher(z, 21)


def _katsuura(z):
    z = _as_batch(z)
    d = z.shape[1]
    j = 2.0 ** np.arange(1, 33)
    zj = z[:, :, None] * j[None, None, :]
    frac = np.abs(zj - np.round(zj)) / j[None, None, :]
    inner = 1.0 + np.arange(1, d + 1)[None, :] * np.sum(frac, axis=2)
    expo = 10.0 / d ** 1.2
    return (10.0 / d ** 2) * (np.prod(inner ** expo, axis=1) - 1.0)


def _lunacek(z):
    z = _as_batch(z)
    d = z.shape[1]
    mu0 = 2.5
    # the classic depth parameter turns negative at d=1; keep it positive
    s = max(1.0 - 1.0 / (2.0 * np.sqrt(d + 20.0) - 8.2), 0.2)
    mu1 = -np.sqrt((mu0 * mu0 - 1.0) / s)
    sphere0 = np.sum(z * z, axis=1)
    sphere1 = d + s * np.sum((z + mu0 - mu1) ** 2, axis=1)
    ras = 10.0 * (d - np.sum(np.cos(2.0 * np.pi * z), axis=1))
    return np.minimum(sphere0, sphere1) + ras


REGISTRY: tuple[ComponentFunction, ...] = (
    ComponentFunction(1, "sphere", "separable", _sphere),
    ComponentFunction(2, "ellipsoid_separable", "separable", _ellipsoid_sep),
    ComponentFunction(3, "rastrigin_separable", "separable", _rastrigin_sep),
    ComponentFunction(4, "buche_rastrigin", "separable", _buche_rastrigin),
    ComponentFunction(5, "linear_cone", "separable", _linear_cone),
    ComponentFunction(6, "attractive_sector", "low-conditioning", _attractive_sector),
    ComponentFunction(7, "step_ellipsoid", "low-conditioning", _step_ellipsoid),
    ComponentFunction(8, "rosenbrock", "low-conditioning", _rosenbrock),
    ComponentFunction(9, "griewank", "low-conditioning", _griewank),
    ComponentFunction(10, "ellipsoid", "high-conditioning", _ellipsoid_osz),
    ComponentFunction(11, "discus", "high-conditioning", _discus),
    ComponentFunction(12, "bent_cigar", "high-conditioning", _bent_cigar),
    ComponentFunction(13, "sharp_ridge", "high-conditioning", _sharp_ridge),
    ComponentFunction(14, "different_powers", "high-conditioning", _different_powers),
    ComponentFunction(15, "rastrigin", "multimodal-adequate", _rastrigin),
    ComponentFunction(16, "weierstrass", "multimodal-adequate", _weierstrass),
    ComponentFunction(17, "schaffers_f7", "multimodal-adequate", _schaffers_f7),
    ComponentFunction(18, "schaffers_f7_ill", "multimodal-adequate", _schaffers_f7_ill),
    ComponentFunction(19, "griewank_rosenbrock", "multimodal-adequate", _griewank_rosenbrock),
    ComponentFunction(20, "schwefel", "multimodal-weak", _schwefel),
    ComponentFunction(21, "gallagher_101", "multimodal-weak", _gallagher_101),
    ComponentFunction(22, "gallagher_21", "multimodal-weak", _gallagher_21),
    ComponentFunction(23, "katsuura", "multimodal-weak", _katsuura),
    ComponentFunction(24, "lunacek_bi_rastrigin", "multimodal-weak", _lunacek),
)

_BY_ID = {f.id: f for f in REGISTRY}


def get_component(component_id: int) -> ComponentFunction:
    try:
        return _BY_ID[component_id]
    except KeyError:
        raise RegistryError(f"unknown component id {component_id}") from None


def registry_size() -> int:
    return len(REGISTRY)
