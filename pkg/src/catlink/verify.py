"""Engine-versus-oracle comparisons.

Each check rebuilds a quantity in the truncated Fock basis with
:mod:`catlink.fock` and compares it with the closed-form engine.  The
lattice runner is what ``catlink verify`` executes.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .cats import CatSpec, class_count
from .fock import OraclePipeline, default_nmax, fock_cat, lossy_pair_fock, trace_distance
from .measurement import HomodynePOVM, condition_grid, joint_outcomes, project_joint
from .states import PairState, lossy_four_mode, lossy_pair

PROB_TOL = 1e-7
TRACE_TOL = 1e-7
MIN_BRANCH_PROB = 1e-14


def pair_to_fock(state: PairState, nmax: int) -> np.ndarray:
    """Rewrite a cat-basis pair density as a (2 (nmax+1))^2 Fock matrix."""
    d = class_count(state.encoding)
    basis = np.stack([fock_cat(CatSpec.from_class(state.alpha_bar, state.encoding, g), nmax)
                      for g in range(d)])  # (d, nmax+1)
    t = np.einsum("jgJG,gn,Gm->jnJm", state.coeff, basis, basis.conj())
    size = 2 * (nmax + 1)
    return t.reshape(size, size)


def pair_trace_distance(encoding: str, alpha: float, eta1: float, nmax: int | None = None) -> float:
    """Trace distance between the engine's lossy pair and the Kraus-evolved one."""
    nmax = default_nmax(alpha) if nmax is None else nmax
    engine = pair_to_fock(lossy_pair(encoding, alpha, eta1), nmax)
    oracle = lossy_pair_fock(encoding, alpha, eta1, nmax)
    return trace_distance(engine, oracle)


def default_points(n: int = 25, span: float = 2.0, seed: int = 0) -> np.ndarray:
    """``n`` fixed homodyne points (q_a, q_b) in [-span, span]^2."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-span, span, size=(n, 2))


@dataclass
class CaseResult:
    encoding: str
    alpha: float
    eta1: float
    eta2: float
    nmax: int
    max_prob_delta: float = 0.0
    max_density_delta: float = 0.0
    max_trace_distance: float = 0.0
    pair_trace_distance: float = 0.0
    branches: int = 0
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return (self.max_prob_delta < PROB_TOL and self.max_density_delta < PROB_TOL
                and self.max_trace_distance < TRACE_TOL and self.pair_trace_distance < TRACE_TOL)


def compare_case(encoding: str, alpha: float, eta1: float, eta2: float,
                 points: np.ndarray | None = None, nmax: int | None = None,
                 with_parities: bool = True) -> CaseResult:
    """Compare outcome probabilities, homodyne densities and conditional states.

    ``encoding`` is mod2 or mod4; for mod4 the (mod 4)+Pa+Pb branches are
    checked too when ``with_parities`` is set.  Conditional states are
    compared only where the oracle density exceeds 1e-12, below which both
    routes lose their relative precision.
    """
    points = default_points() if points is None else np.asarray(points, float)
    oracle = OraclePipeline(encoding, alpha, eta1, eta2, nmax=nmax)
    res = CaseResult(encoding, alpha, eta1, eta2, oracle.nmax)
    res.pair_trace_distance = pair_trace_distance(encoding, alpha, eta1, oracle.nmax)
    state = lossy_four_mode(encoding, alpha, eta1)
    povm = HomodynePOVM(eta2)
    outcomes = joint_outcomes(encoding)
    if encoding == "mod4" and with_parities:
        outcomes = outcomes + joint_outcomes("mod4p")
    for outcome in outcomes:
        projected, prob = project_joint(state, outcome)
        prob_o = oracle.probability(outcome)
        res.max_prob_delta = max(res.max_prob_delta, abs(prob - prob_o))
        if prob_o < MIN_BRANCH_PROB:
            res.skipped += 1
            continue
        res.branches += 1
        for qa, qb in points:
            rho, dens = condition_grid(projected, [qa], [qb], povm)
            rho_o, dens_o = oracle.condition(outcome, qa, qb)
            res.max_density_delta = max(res.max_density_delta, abs(dens[0, 0] - dens_o))
            if dens_o > 1e-12:
                td = trace_distance(rho[0, 0] / dens[0, 0], rho_o / dens_o)
                res.max_trace_distance = max(res.max_trace_distance, td)
    return res


@dataclass
class VerifyReport:
    cases: list[CaseResult] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def worst(self, attr: str) -> float:
        return max((getattr(c, attr) for c in self.cases), default=0.0)


def run_lattice(alphas=(0.5, 1.0, 1.5), etas=(0.8, 1.0), encodings=("mod2", "mod4"),
                n_points: int = 25, seed: int = 0, with_parities: bool = True,
                nmax: int | None = None, progress=None) -> VerifyReport:
    """Full verification lattice: every alpha x eta1 x eta2 x encoding.

    ``nmax`` fixes the Fock cutoff; by default each alpha gets its own.
    """
    t0 = time.perf_counter()
    report = VerifyReport()
    points = default_points(n_points, seed=seed)
    for enc, a, e1, e2 in itertools.product(encodings, alphas, etas, etas):
        case = compare_case(enc, a, e1, e2, points, nmax=nmax, with_parities=with_parities)
        report.cases.append(case)
        if progress is not None:
            progress(case)
    report.wall_time = time.perf_counter() - t0
    return report
