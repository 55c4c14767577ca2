"""Limit extrapolation and tail classification for sampled sequences.

Potential ratios along approach paths behave like ``L + A r^s`` with an
unknown correction exponent ``s``; series terms behave like ``c q^i`` or
``c i^-q``.  The helpers here estimate the structural parameters from
trailing windows by least squares in log coordinates and report fit
residuals so callers can decide how much to trust the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import _as_vec


@dataclass(frozen=True)
class ApproachPath:
    """Sample points ``anchor + r * direction`` for a decreasing radius
    ladder; the standard probe geometry for limits at a point."""

    anchor: np.ndarray
    direction: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        anchor = _as_vec(self.anchor)
        direction = np.asarray(self.direction, dtype=float)
        if direction.shape != anchor.shape:
            raise ValueError("direction must match the anchor dimension")
        norm = float(np.linalg.norm(direction))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("direction must be a nonzero finite vector")
        radii = np.asarray(self.radii, dtype=float)
        if radii.ndim != 1 or radii.size == 0:
            raise ValueError("radii must be a nonempty 1-D array")
        if np.any(radii <= 0) or np.any(np.diff(radii) >= 0):
            raise ValueError("radii must be positive and strictly decreasing")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "direction", direction / norm)
        object.__setattr__(self, "radii", radii)

    @staticmethod
    def geometric(anchor, direction, r0: float = 0.5, ratio: float = 0.5,
                  count: int = 20) -> "ApproachPath":
        if not 0.0 < ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        if count < 1:
            raise ValueError("count must be positive")
        radii = r0 * ratio ** np.arange(count)
        return ApproachPath(anchor, direction, radii)

    @property
    def dim(self) -> int:
        return self.anchor.size

    def points(self) -> np.ndarray:
        return self.anchor[None, :] + self.radii[:, None] * self.direction[None, :]


def loglog_slope(x, y):
    """Least-squares slope and intercept of log y against log x over the
    entries where both are positive; returns (slope, intercept, r2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2:
        raise ValueError("need at least two positive samples for a log-log fit")
    lx, ly = np.log(x[keep]), np.log(y[keep])
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    fit = A @ coef
    ss_res = float(((ly - fit) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


@dataclass(frozen=True)
class LimitFit:
    """Extrapolated limit of samples v(r) ~ limit + amplitude * r**exponent."""

    limit: float
    amplitude: float
    exponent: float | None
    residual: float
    window: int


def fit_limit(radii, values, window: int | None = None) -> LimitFit:
    """Extrapolate ``values`` sampled at decreasing ``radii`` to r -> 0.

    The correction exponent is estimated from successive differences in
    log-log coordinates, then the limit comes from a linear fit of
    ``values`` against ``radii**exponent`` on the trailing window.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.shape != v.shape or r.ndim != 1:
        raise ValueError("radii and values must be matching 1-D arrays")
    if r.size < 4:
        raise ValueError("need at least 4 samples to extrapolate a limit")
    if np.any(np.diff(r) >= 0):
        raise ValueError("radii must be strictly decreasing")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if window is None:
        window = max(4, r.size // 2)
    window = min(window, r.size)
    rw, vw = r[-window:], v[-window:]

    scale = max(1.0, float(np.max(np.abs(vw))))
    diffs = np.abs(np.diff(vw))
    live = diffs > 1e-14 * scale
    if live.sum() < 2:
        # already converged to machine level inside the window
        return LimitFit(float(vw[-1]), 0.0, None, float(diffs.max(initial=0.0)), window)
    s, _, _ = loglog_slope(rw[:-1][live], diffs[live])
    if s <= 0.05:
        # corrections do not decay; report the trailing mean with the
        # observed spread as the residual
        tail = vw[-3:]
        return LimitFit(float(tail.mean()), 0.0, float(s),
                        float(np.ptp(tail)), window)
    basis = np.stack([np.ones_like(rw), rw ** s], axis=1)
    coef, *_ = np.linalg.lstsq(basis, vw, rcond=None)
    resid = float(np.max(np.abs(basis @ coef - vw)))
    return LimitFit(float(coef[0]), float(coef[1]), float(s), resid, window)


@dataclass(frozen=True)
class TailFit:
    """Classification of a nonnegative series tail.

    ``model`` is one of ``zero``, ``geometric``, ``power`` or ``flat``;
    ``rate`` is the ratio q for the geometric model and the exponent q
    for the power model; ``tail_bound`` estimates the sum beyond the
    computed terms (inf when the fitted model is not summable).
    """

    model: str
    rate: float
    r2: float
    tail_bound: float
    summable: bool
    window: int


def fit_tail(terms, floor: float = 0.0) -> TailFit:
    """Fit the trailing half of a nonnegative sequence indexed 1, 2, ...

    Compares a geometric model ``c q^i`` against a power model
    ``c i^-q`` in log coordinates and keeps the better one.
    """
    t = np.asarray(terms, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("terms must be a nonempty 1-D array")
    if np.any(t < 0):
        raise ValueError("terms must be nonnegative")
    if floor <= 0.0:
        floor = 1e-12 * max(1.0, float(t.max(initial=0.0)))
    idx = np.arange(1, t.size + 1, dtype=float)
    window = max(4, t.size // 2)
    window = min(window, t.size)
    ti, ii = t[-window:], idx[-window:]
    live = ti > floor
    if not np.any(live):
        return TailFit("zero", 0.0, 1.0, 0.0, True, window)
    if live.sum() < 3:
        if ti[-1] <= floor:
            return TailFit("zero", 0.0, 1.0, float(ti[live].sum()), True, window)
        return TailFit("flat", 0.0, 0.0, math.inf, False, window)

    lt = np.log(ti[live])
    # geometric: log t = a + i log q
    Ag = np.stack([ii[live], np.ones(live.sum())], axis=1)
    cg, *_ = np.linalg.lstsq(Ag, lt, rcond=None)
    rg = Ag @ cg - lt
    # power: log t = a - q log i
    Ap = np.stack([np.log(ii[live]), np.ones(live.sum())], axis=1)
    cp, *_ = np.linalg.lstsq(Ap, lt, rcond=None)
    rp = Ap @ cp - lt
    ss = float(((lt - lt.mean()) ** 2).sum())
    r2g = 1.0 if ss == 0 else 1.0 - float((rg ** 2).sum()) / ss
    r2p = 1.0 if ss == 0 else 1.0 - float((rp ** 2).sum()) / ss

    i_last = float(idx[-1])
    t_last = float(t[-1])
    if r2g >= r2p:
        q = math.exp(cg[0])
        if q < 1.0:
            bound = t_last * q / (1.0 - q)
            return TailFit("geometric", q, r2g, bound, q <= 0.95, window)
        return TailFit("geometric", q, r2g, math.inf, False, window)
    q = -float(cp[0])
    if q > 1.0:
        bound = t_last * i_last / (q - 1.0)
        return TailFit("power", q, r2p, bound, q >= 1.1, window)
    return TailFit("power", q, r2p, math.inf, False, window)


@dataclass(frozen=True)
class LimitReport:
    """Sampled scaled values along a path together with the fitted limit."""

    radii: np.ndarray
    values: np.ndarray
    limit: float
    correction_exponent: float | None
    residual: float
    extras: dict = field(default_factory=dict)

    @property
    def samples(self) -> np.ndarray:
        return np.stack([self.radii, self.values], axis=1)


@dataclass(frozen=True)
class DecayReport:
    """Growth-rate check of potential values along an approach path.

    ``measured_exponent`` is the fitted blow-up rate sigma in
    ``value ~ radius**(-sigma)``; the check passes when it does not
    exceed ``bound_exponent``.  ``constant`` is the smallest admissible
    prefactor for the bound at the sampled radii.
    """

    radii: np.ndarray
    values: np.ndarray
    measured_exponent: float
    bound_exponent: float
    constant: float
    hypothesis_constant: float
    passed: bool
    extras: dict = field(default_factory=dict)


def blowup_exponent(radii, values) -> float:
    """Fitted sigma with ``values ~ radii**(-sigma)`` on the trailing
    half; 0 when fewer than two positive samples remain."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    half = max(2, r.size // 2)
    r, v = r[-half:], v[-half:]
    keep = v > 0
    if keep.sum() < 2:
        return 0.0
    slope, _, _ = loglog_slope(r[keep], v[keep])
    return -slope
