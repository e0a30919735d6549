"""Outcome maps, total success probability and amplitude optimization.

A protocol run ends with a discrete joint outcome and two homodyne values
(q_a, q_b).  :func:`outcome_map` tabulates, for one discrete outcome, the
joint density of (outcome, q_a, q_b) and the four Bell fidelities of the
conditional Alice-Bob state on a uniform square grid.  The total success
probability is the density integral over the region where the best Bell
fidelity clears the cutoff; the region is resolved below grid spacing by
:func:`cell_coverage` and the integral uses the 2D trapezoid rule.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import GridTooCoarse
from .measurement import (
    DENSITY_FLOOR,
    HomodynePOVM,
    JointOutcome,
    bell_fidelities,
    condition_grid,
    joint_outcomes,
    project_joint,
)
from .states import FourModeState, lossy_four_mode

ENCODINGS = ("mod2", "mod4", "mod4p")
_ALIASES = {"mod4+parity": "mod4p", "mod4+pa+pb": "mod4p"}
MIN_POINTS = 201
GRID_MARGIN = 6.0
REFINE_TOL = 1e-3
LOG_FLOOR = 1e-12


def thread_count() -> int:
    """Worker cap from ``CATLINK_THREADS`` (default 1)."""
    raw = os.environ.get("CATLINK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ProtocolConfig:
    """One protocol instance plus its outcome grid and fidelity cutoff.

    ``grid_l`` defaults to sqrt(eta1) alpha + 6; explicit values below that
    are rejected, as are grids with fewer than 201 points per axis.
    """

    encoding: str
    alpha: float
    eta1: float = 1.0
    eta2: float = 1.0
    grid_l: float | None = None
    n_pts: int = 401
    cutoff: float = 0.9

    def __post_init__(self):
        enc = _ALIASES.get(self.encoding, self.encoding)
        if enc not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}, got {self.encoding!r}")
        object.__setattr__(self, "encoding", enc)
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        for name in ("eta1", "eta2"):
            val = getattr(self, name)
            if not (0.0 < val <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {val}")
        if not (0.0 <= self.cutoff <= 1.0):
            raise ValueError(f"cutoff must lie in [0, 1], got {self.cutoff}")
        if self.n_pts < MIN_POINTS:
            raise ValueError(f"n_pts must be >= {MIN_POINTS}, got {self.n_pts}")
        floor = self.alpha_bar + GRID_MARGIN
        if self.grid_l is None:
            object.__setattr__(self, "grid_l", floor)
        elif self.grid_l < floor - 1e-12:
            raise ValueError(f"grid_l must be >= {floor:.6g}, got {self.grid_l}")

    @property
    def alpha_bar(self) -> float:
        return math.sqrt(self.eta1) * self.alpha

    @property
    def state_encoding(self) -> str:
        return "mod2" if self.encoding == "mod2" else "mod4"

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.grid_l, self.grid_l, self.n_pts)

    def refined(self) -> "ProtocolConfig":
        """Same config with the grid spacing halved."""
        return replace(self, n_pts=2 * self.n_pts - 1)

    def as_dict(self) -> dict:
        return {"encoding": self.encoding, "alpha": self.alpha, "eta1": self.eta1,
                "eta2": self.eta2, "grid_l": self.grid_l, "n_pts": self.n_pts,
                "cutoff": self.cutoff}


@dataclass
class OutcomeGrid:
    """Joint density and Bell fidelities on the (q_a, q_b) grid of one outcome.

    ``density[i, j]`` is the joint density of the discrete outcome and
    (axis[i], axis[j]), so its integral is the outcome probability.
    ``fidelities[i, j]`` holds (phi+, phi-, psi+, psi-); cells whose density
    is below 1e-300 are marked invalid and carry NaN fidelities.
    """

    axis: np.ndarray
    density: np.ndarray
    fidelities: np.ndarray
    label: str
    probability: float
    valid: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.valid is None:
            self.valid = self.density > DENSITY_FLOOR

    @property
    def max_fidelity(self) -> np.ndarray:
        """Best Bell fidelity per cell (NaN where invalid)."""
        return np.max(self.fidelities, axis=-1)

    def integrate(self, values: np.ndarray | None = None) -> float:
        """Trapezoid integral of ``density`` (times ``values`` if given)."""
        f = self.density if values is None else self.density * values
        return trapezoid_2d(f, self.axis)

    def peak(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.density), self.density.shape)
        return float(self.axis[i]), float(self.axis[j])

    def rows(self):
        """(q_a, q_b, density, F_phi+, F_phi-, F_psi+, F_psi-) per cell, q_b fastest."""
        qa, qb = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.column_stack([qa.ravel(), qb.ravel(), self.density.ravel(),
                                self.fidelities.reshape(-1, 4)])


def cell_coverage(margin: np.ndarray, h: float) -> np.ndarray:
    """Fraction of each node's h x h cell on which ``margin >= 0``.

    ``margin`` is linearized from its central-difference gradient; the
    level-set fraction of a linear function over a square is the CDF of a
    sum of two uniforms (a trapezoidal law).  Replacing the bare indicator
    with this fraction turns the O(h) error of a thresholded trapezoid rule
    into O(h^2).
    """
    gx, gy = np.gradient(margin, h)
    a = 0.5 * h * np.abs(gx)
    b = 0.5 * h * np.abs(gy)
    big, small = np.maximum(a, b), np.minimum(a, b)
    t = margin
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = np.clip((t + big) / (2.0 * big), 0.0, 1.0)
        low = (t + big + small) ** 2 / (8.0 * big * small)
        high = 1.0 - (big + small - t) ** 2 / (8.0 * big * small)
    frac = np.where(t < -big + small, low, np.where(t > big - small, high, ramp))
    frac = np.where(t <= -big - small, 0.0, np.where(t >= big + small, 1.0, frac))
    return np.where(big > 0.0, frac, (t >= 0.0).astype(float))


def trapezoid_2d(values: np.ndarray, axis: np.ndarray) -> float:
    """2D trapezoid rule on a square grid built from ``axis``."""
    inner = np.trapezoid(values, axis, axis=1)
    return float(np.trapezoid(inner, axis))


@lru_cache(maxsize=32)
def _state(encoding: str, alpha: float, eta1: float) -> FourModeState:
    return lossy_four_mode(encoding, alpha, eta1)


def outcome_map(config: ProtocolConfig, outcome: JointOutcome | str) -> OutcomeGrid:
    """Fill the outcome grid for a single discrete outcome."""
    if isinstance(outcome, str):
        outcome = JointOutcome.parse(outcome)
    state = _state(config.state_encoding, config.alpha, config.eta1)
    projected, prob = project_joint(state, outcome)
    axis = config.axis
    rho, density = condition_grid(projected, axis, axis, HomodynePOVM(config.eta2))
    density = np.maximum(density, 0.0)
    valid = density > DENSITY_FLOOR
    safe = np.where(valid, density, 1.0)
    fids = bell_fidelities(rho / safe[..., None, None])
    fids = np.where(valid[..., None], np.clip(fids, 0.0, 1.0), np.nan)
    return OutcomeGrid(axis, density, fids, outcome.label, prob, valid)


def outcome_maps(config: ProtocolConfig) -> list[OutcomeGrid]:
    """Maps of every discrete outcome of the configured protocol."""
    return [outcome_map(config, o) for o in joint_outcomes(config.encoding)]


def success_curve(config: ProtocolConfig, cutoffs) -> np.ndarray:
    """P_total for each cutoff in ``cutoffs`` from a single grid evaluation."""
    cutoffs = np.atleast_1d(np.asarray(cutoffs, dtype=float))
    totals = np.zeros(cutoffs.shape)
    for grid in outcome_maps(config):
        best = np.where(grid.valid, grid.max_fidelity, 0.0)
        h = grid.axis[1] - grid.axis[0]
        for k, fc in enumerate(cutoffs):
            totals[k] += grid.integrate(cell_coverage(best - fc, h))
    return np.clip(totals, 0.0, 1.0)


def success_probability(config: ProtocolConfig, check: bool = True) -> float:
    """Total probability of heralding a Bell state with fidelity >= cutoff.

    With ``check`` set, the grid is refined once (spacing halved) and
    GridTooCoarse is raised if the result moves by more than 1e-3.
    """
    p = float(success_curve(config, [config.cutoff])[0])
    if check:
        p_fine = float(success_curve(config.refined(), [config.cutoff])[0])
        if abs(p_fine - p) > REFINE_TOL:
            raise GridTooCoarse(f"refinement moved P_total from {p:.6g} to {p_fine:.6g}")
        return p_fine
    return p


def _grid_kwargs(grid_l, n_pts):
    return {"grid_l": grid_l, "n_pts": n_pts}


def alpha_scan(encoding: str, eta1: float, eta2: float, cutoffs, alphas,
               n_pts: int = 401, grid_l: float | None = None) -> np.ndarray:
    """P_total over ``alphas`` x ``cutoffs``; shape (len(alphas), len(cutoffs))."""
    alphas = np.asarray(alphas, dtype=float)

    def one(a):
        cfg = ProtocolConfig(encoding, float(a), eta1, eta2, cutoff=0.0,
                             **_grid_kwargs(_grid_for(grid_l, a, eta1), n_pts))
        return success_curve(cfg, cutoffs)

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, alphas))
    else:
        rows = [one(a) for a in alphas]
    return np.array(rows)


def _grid_for(grid_l, alpha, eta1):
    # a fixed grid_l may be too short for large alpha; fall back to the default
    if grid_l is None or grid_l < math.sqrt(eta1) * alpha + GRID_MARGIN:
        return None
    return grid_l


def coarse_alphas(alpha_range=(0.0, 3.0), step: float = 0.05) -> np.ndarray:
    """Scan points ``lo + step, lo + 2 step, ...`` up to ``hi`` (alpha = 0 excluded)."""
    lo, hi = alpha_range
    if not (0.0 <= lo < hi <= 3.0):
        raise ValueError(f"alpha_range must lie in (0, 3], got {alpha_range}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = lo + step * np.arange(1, n + 1)
    if lo > 0:
        pts = np.concatenate([[lo], pts])
    return pts


@dataclass(frozen=True)
class OptimumResult:
    alpha_star: float
    p_star: float
    scan_alphas: np.ndarray = field(repr=False)
    scan_values: np.ndarray = field(repr=False)


def optimize_alpha(encoding: str, eta1: float, eta2: float, cutoff: float,
                   alpha_range=(0.0, 3.0), step: float = 0.05, xtol: float = 1e-3,
                   n_pts: int = 401, check: bool = True) -> OptimumResult:
    """Maximize P_total over alpha: grid scan, then golden-section refinement.

    The scan guards against the non-monotone P_total(alpha) of the mod 4
    schemes; golden section then runs on the bracket around the best scan
    point.  Plateaus (ties) and maxima at the scan edge return the scan
    point itself.  ``check`` re-evaluates the optimum on a refined grid and
    propagates GridTooCoarse.
    """
    alphas = coarse_alphas(alpha_range, step)
    values = alpha_scan(encoding, eta1, eta2, [cutoff], alphas, n_pts=n_pts)[:, 0]
    i = int(np.argmax(values))
    best_a, best_p = float(alphas[i]), float(values[i])

    def f(a):
        cfg = ProtocolConfig(encoding, float(a), eta1, eta2, n_pts=n_pts, cutoff=cutoff)
        return float(success_curve(cfg, [cutoff])[0])

    if 0 < i < len(alphas) - 1 and values[i] > values[i - 1] and values[i] > values[i + 1]:
        a, b, c = alphas[i - 1], alphas[i], alphas[i + 1]
        res = minimize_scalar(lambda x: -f(x), bracket=(a, b, c), method="golden",
                              options={"xtol": xtol / b})
        if -res.fun > best_p and a <= res.x <= c:
            best_a, best_p = float(res.x), float(-res.fun)
    if check:
        cfg = ProtocolConfig(encoding, best_a, eta1, eta2, n_pts=n_pts, cutoff=cutoff)
        best_p = success_probability(cfg, check=True)
    return OptimumResult(best_a, best_p, alphas, values)


@dataclass(frozen=True)
class Heatmap:
    """log10 of the alpha-optimized P_total over (eta, cutoff)."""

    encoding: str
    etas: np.ndarray
    cutoffs: np.ndarray
    p_star: np.ndarray       # (len(etas), len(cutoffs))
    alpha_star: np.ndarray

    @property
    def log10(self) -> np.ndarray:
        return np.log10(np.maximum(self.p_star, LOG_FLOOR))


def heatmap(encoding: str, etas, cutoffs, alpha_range=(0.0, 3.0), step: float = 0.05,
            n_pts: int = 401, progress=None) -> Heatmap:
    """Optimized success over an (eta1 = eta2 = eta) x cutoff lattice.

    Each eta needs one alpha scan; all cutoffs come out of the same grid
    evaluations, and P* is the best scan value per cutoff.
    """
    etas = np.asarray(etas, dtype=float)
    cutoffs = np.asarray(cutoffs, dtype=float)
    alphas = coarse_alphas(alpha_range, step)
    p_star = np.zeros((len(etas), len(cutoffs)))
    a_star = np.zeros_like(p_star)
    for k, eta in enumerate(etas):
        table = alpha_scan(encoding, eta, eta, cutoffs, alphas, n_pts=n_pts)
        idx = np.argmax(table, axis=0)
        p_star[k] = table[idx, np.arange(len(cutoffs))]
        a_star[k] = alphas[idx]
        if progress is not None:
            progress(eta)
    return Heatmap(encoding, etas, cutoffs, p_star, a_star)


def parse_range(text: str) -> np.ndarray:
    """``lo:hi:step`` to an inclusive float grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected lo:hi:step, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ValueError(f"invalid range {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)
