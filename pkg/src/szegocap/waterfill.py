"""Water-filling power allocation: discrete spectra, continuous symbols, and
the rate functions r, p together with their smooth surrogates f_eps.

Conventions: for water level B and per-unit-time power budget S,

    capacity рate = (1/alpha) sum_{B lam_k >= 1} log(B lam_k)
    power         = (1/alpha) sum_{B lam_k >= 1} (B - 1/lam_k)

and the continuous analogue replaces the sum by the (x, omega) integral of
r(B sigma) resp. B p(B sigma) over one period cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NoCapacityError, UnsupportedSymbolError
from .families import SymbolSpec, eval_symbol
from .spectral import Spectrum

B_REL_TOL = 1e-12


def rate_log(x) -> np.ndarray:
    """r(x) = log(x) on [1, inf), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    act = x >= 1.0
    out[act] = np.log(x[act])
    return out


def power_gap(x) -> np.ndarray:
    """p(x) = (x - 1)/x on [1, inf), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    act = x >= 1.0
    out[act] = (x[act] - 1.0) / x[act]
    return out


def smoothstep(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing between."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    with np.errstate(over="ignore"):
        a = np.exp(-1.0 / tm)
        b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


_H_TAGS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "log": np.log,
    "power_gap": lambda x: (x - 1.0) / x,
}


def build_f_eps(h, eps: float, support_hi: float = 16.0,
                roll_width: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth surrogate f_eps(x) = h(x) * step((x-1)/eps), rolled off to zero
    above support_hi so the result has compact support.

    h may be a tag ('log', 'power_gap'), a polynomial coefficient sequence
    (highest degree first), or a callable.  f_eps agrees with h(x) * chi_[1,inf)
    exactly for x <= 1 and 1 + eps <= x <= support_hi.
    """
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if support_hi <= 1.0 + eps:
        raise DomainError("support_hi must exceed 1 + eps")
    if callable(h):
        h_fn = h
    elif isinstance(h, str):
        if h not in _H_TAGS:
            raise DomainError(f"unknown h tag {h!r}; known: {sorted(_H_TAGS)}")
        h_fn = _H_TAGS[h]
    else:
        coeffs = np.asarray(h, dtype=float)
        h_fn = lambda x: np.polyval(coeffs, x)

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 1.0
        if np.any(pos):
            xp = x[pos]
            out[pos] = (h_fn(xp) * smoothstep((xp - 1.0) / eps)
                        * (1.0 - smoothstep((xp - support_hi) / roll_width)))
        return out

    return f


@dataclass(frozen=True)
class RateFunctions:
    r: Callable[[np.ndarray], np.ndarray]
    p: Callable[[np.ndarray], np.ndarray]
    f_eps: Callable[..., Callable[[np.ndarray], np.ndarray]]


RATE_FUNCTIONS = RateFunctions(r=rate_log, p=power_gap, f_eps=build_f_eps)


@dataclass(frozen=True)
class WaterfillSolution:
    B: float
    capacity_rate: float
    power_achieved: float
    active_count: int


def _solve_level(values: np.ndarray, weights: np.ndarray, S: float) -> WaterfillSolution:
    """Shared solver: values (positive, any order) with quadrature weights.

    power(B) = sum_{B v >= 1} w (B - 1/v),  rate(B) = sum_{B v >= 1} w log(B v).
    B is found by bisection (doubled upper bracket) to relative B_REL_TOL.
    """
    order = np.argsort(values)[::-1]
    v = values[order]
    w = weights[order]
    inv = 1.0 / v                                  # ascending
    cum_w = np.concatenate([[0.0], np.cumsum(w)])
    cum_winv = np.concatenate([[0.0], np.cumsum(w * inv)])
    cum_wlog = np.concatenate([[0.0], np.cumsum(w * np.log(v))])

    def power(B: float) -> float:
        k = int(np.searchsorted(inv, B, side="right"))
        return B * cum_w[k] - cum_winv[k]

    v_max = float(v[0])
    if S == 0.0:
        return WaterfillSolution(B=1.0 / v_max, capacity_rate=0.0,
                                 power_achieved=0.0, active_count=0)

    lo = 1.0 / v_max
    hi = 2.0 * lo
    while power(hi) < S:
        hi *= 2.0
    while (hi - lo) > B_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if power(mid) < S:
            lo = mid
        else:
            hi = mid
    B = 0.5 * (lo + hi)

    k = int(np.searchsorted(inv, B, side="right"))
    rate = float(np.log(B) * cum_w[k] + cum_wlog[k])
    active = int(np.searchsorted(inv, B, side="left"))   # strictly B v > 1
    return WaterfillSolution(B=float(B), capacity_rate=rate,
                             power_achieved=float(power(B)), active_count=active)


def waterfill_discrete(spectrum, S: float, alpha: float) -> WaterfillSolution:
    """Water-fill a discrete spectrum against the per-unit-time budget S.

    Nonpositive eigenvalues never activate and are ignored; a spectrum with no
    positive eigenvalue raises NoCapacityError.
    """
    if S < 0:
        raise DomainError(f"power budget S must be nonnegative, got {S}")
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=float)
    pos = values[values > 0.0]
    if pos.size == 0:
        raise NoCapacityError("no positive eigenvalues to allocate power over")
    weights = np.full(pos.size, 1.0 / alpha)
    return _solve_level(pos, weights, float(S))


@dataclass(frozen=True)
class QuadratureConfig:
    """Tensor quadrature for the symbol water-fill: x on one period cell
    (uniform, periodic), omega on [-omega_max, omega_max] (trapezoid)."""
    density: int = 256
    omega_max: float = 8.0

    def x_nodes(self) -> np.ndarray:
        return np.arange(self.density) / self.density

    def omega_nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        n = 2 * int(round(self.omega_max * self.density)) + 1
        nodes = np.linspace(-self.omega_max, self.omega_max, n)
        w = np.full(n, 2.0 * self.omega_max / (n - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return nodes, w


def waterfill_symbol(spec: SymbolSpec, S: float,
                     quad: QuadratureConfig | None = None) -> WaterfillSolution:
    """Water-fill the continuous symbol: rate = integral of r(B sigma) over one
    period cell x in [0,1) and the truncated frequency axis."""
    if S < 0:
        raise DomainError(f"power budget S must be nonnegative, got {S}")
    if quad is None:
        quad = QuadratureConfig()
    if not spec.time_invariant:
        if spec.period_x is None or abs(spec.period_x - 1.0) > 1e-12:
            raise UnsupportedSymbolError(
                "continuous water-filling needs a time-invariant or 1-periodic symbol")

    omega, w_om = quad.omega_nodes_weights()
    if spec.time_invariant:
        sigma = np.asarray(eval_symbol(spec, 0.0, omega), dtype=float)[None, :]
        w_x = np.array([1.0])
    else:
        x = quad.x_nodes()
        sigma = np.asarray(eval_symbol(spec, x[:, None], omega[None, :]), dtype=float)
        w_x = np.full(x.size, 1.0 / x.size)

    weights = (w_x[:, None] * w_om[None, :]).ravel()
    values = sigma.ravel()
    pos = values > 0.0
    if not np.any(pos):
        raise NoCapacityError("symbol is nonpositive everywhere on the quadrature grid")
    return _solve_level(values[pos], weights[pos], float(S))


def sup_abs_second_derivative(f, lo: float, hi: float, n: int = 400001) -> float:
    """Sup norm of f'' on [lo, hi] by central second differences on a dense grid."""
    xs = np.linspace(lo, hi, n)
    h = xs[1] - xs[0]
    v = np.asarray(f(xs), dtype=float)
    d2 = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h ** 2
    return float(np.abs(d2).max())
