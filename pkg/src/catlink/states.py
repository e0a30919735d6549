"""Exact four-mode density operators in the qubit (x) cat basis.

A qubit-ancilla pair (Alice-arnie or Bob-bert) lives in span{|j, C^g>} with
j in {g, e} and g running over the cat classes of the encoding (2 for mod2,
4 for mod4), all cats taken at the attenuated amplitude
``alpha_bar = sqrt(eta1) * alpha``.  The cat classes are mutually orthogonal
(disjoint Fock support), so a density operator is just a coefficient tensor
over these indices and every number-resolving measurement is an index
filter.

Coefficient tensors are stored densely; :meth:`FourModeState.terms` yields
the equivalent list of weighted dyads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .cats import class_count, coherent_in_cat_basis, mod4_norm, parity_norm
from .errors import InvalidEfficiency

PRUNE = 1e-16


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (0.0 < eta <= 1.0):
        raise InvalidEfficiency(f"efficiency must lie in (0, 1], got {eta}")
    return eta


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a[np.abs(a) < PRUNE] = 0.0
    a.flags.writeable = False
    return a


class DyadTerm(NamedTuple):
    """``coeff * |j,l><j',l'| (x) |C^g, C^d><C^g', C^d'|``."""

    ket_qubits: tuple[int, int]
    bra_qubits: tuple[int, int]
    ket_cats: tuple[int, int]
    bra_cats: tuple[int, int]
    coeff: complex


@dataclass(frozen=True)
class PairState:
    """Density of one stationary qubit plus its ancilla mode.

    ``coeff[j, g, j', g']`` multiplies ``|j, C^g><j', C^g'|``.
    """

    encoding: str
    alpha: float
    eta1: float
    coeff: np.ndarray = field(repr=False)

    @property
    def alpha_bar(self) -> float:
        return math.sqrt(self.eta1) * self.alpha

    @property
    def epsilon(self) -> float:
        return math.sqrt(1.0 - self.eta1) * self.alpha

    def matrix(self) -> np.ndarray:
        d = class_count(self.encoding)
        return self.coeff.reshape(2 * d, 2 * d)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix())))


@dataclass(frozen=True)
class FourModeState:
    """Alice (x) Bob (x) arnie (x) bert density operator.

    ``coeff[j, l, g, d, j', l', g', d']`` multiplies
    ``|j, l><j', l'| (x) |C^g, C^d><C^g', C^d'|``.  Arm-resolved loss is
    carried in ``eta1 = (eta_arnie, eta_bert)``; arnie's cats live at
    ``alpha_bars[0]``, bert's at ``alpha_bars[1]``.
    """

    encoding: str
    alpha: float
    eta1: tuple[float, float]
    coeff: np.ndarray = field(repr=False)

    @property
    def alpha_bars(self) -> tuple[float, float]:
        return tuple(math.sqrt(e) * self.alpha for e in self.eta1)

    @property
    def alpha_bar(self) -> float:
        """Attenuated amplitude of arnie (equal to bert's for symmetric loss)."""
        return self.alpha_bars[0]

    @property
    def epsilon(self) -> float:
        return math.sqrt(1.0 - self.eta1[0]) * self.alpha

    @property
    def dim(self) -> int:
        return class_count(self.encoding)

    def matrix(self) -> np.ndarray:
        n = 4 * self.dim * self.dim
        return self.coeff.reshape(n, n)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix())))

    def with_coeff(self, coeff: np.ndarray) -> "FourModeState":
        return FourModeState(self.encoding, self.alpha, self.eta1, _frozen(coeff))

    def terms(self) -> Iterator[DyadTerm]:
        for idx in zip(*np.nonzero(self.coeff)):
            j, l, g, d, jp, lp, gp, dp = (int(i) for i in idx)
            yield DyadTerm((j, l), (jp, lp), (g, d), (gp, dp), complex(self.coeff[idx]))


def _qubit_weights(encoding: str, alpha: float) -> np.ndarray:
    """Amplitude prefactor of |j> in the initial pair state, per qubit value j."""
    if encoding == "mod2":
        return np.array([parity_norm(alpha, 1), parity_norm(alpha, -1)])
    n_plus = parity_norm(alpha, 1)
    return np.array([mod4_norm(alpha, 0) * n_plus, mod4_norm(alpha, 2) * n_plus])


def residue_series(z: float, r: int, k: int) -> float:
    """sum_{n = r mod k} z^n / n!  for k in {2, 4}, without cancellation."""
    if k == 2:
        return math.cosh(z) if r % 2 == 0 else math.sinh(z)
    r %= 4
    if z < 2.0:
        total, n = 0.0, r
        term = z**r / math.factorial(r)
        while True:
            total += term
            nxt = term * z**4 / ((n + 1) * (n + 2) * (n + 3) * (n + 4))
            n += 4
            if nxt <= 1e-18 * total or nxt == 0.0:
                return total
            term = nxt
    hyp = math.cosh(z) if r % 2 == 0 else math.sinh(z)
    trig = (math.cos(z), math.sin(z), -math.cos(z), -math.sin(z))[r]
    return 0.5 * (hyp + trig)


def _check_pair_args(encoding: str, alpha: float, eta1: float) -> tuple[float, float]:
    if encoding not in ("mod2", "mod4"):
        raise ValueError(f"unknown encoding {encoding!r}")
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return alpha, _check_eta(eta1)


def _class_norms(encoding: str, alpha: float) -> np.ndarray:
    """Full coherent-state prefactor of each cat class (N_k, or N~_g N_g)."""
    if encoding == "mod2":
        return np.array([parity_norm(alpha, 1), parity_norm(alpha, -1)])
    return np.array([mod4_norm(alpha, g) * parity_norm(alpha, 1 if g % 2 == 0 else -1)
                     for g in range(4)])


def lossy_pair(encoding: str, alpha: float, eta1: float) -> PairState:
    """Qubit-ancilla pair after the ancilla crossed a beam splitter of transmissivity eta1.

    mod2::

        rho = 1/8 sum_{j j' k k' mu mu'} N_j N_j' / (Nb_k Nb_k') (-1)^{mu(j+k) + mu'(j'+k')}
              exp(-eps^2 {1 - (-1)^{mu+mu'}}) |j, C^k><j', C^k'|

    mod4::

        rho = 1/2^5 sum N~_{2j} N_{2j} N~_{2j'} N_{2j'} / (Nb~_g Nb_g Nb~_g' Nb_g')
              (-1)^{nu j + nu' j' + mu g + mu' g'} i^{nu g - nu' g'}
              exp(-eps^2 {1 - (-1)^{mu+mu'} i^{nu-nu'}}) |j, C^g><j', C^g'|

    with barred normalizations evaluated at alpha_bar = sqrt(eta1) alpha and
    eps = sqrt(1 - eta1) alpha.

    The branch sums are carried out in closed form: writing the coherent
    branch as i^b alpha (b = 2 mu + nu), the double sum factorizes into a
    selection rule ``c(j) - g == c(j') - g' (mod K)`` and a residue series
    ``S_r(eps^2) = sum_{n = r mod K} eps^(2n)/n!`` with ``r = c(j) - g``,
    giving ``coeff = w_j w_j' e^{-eps^2} S_r(eps^2) / (2 Nb_g Nb_g')``.
    Here c(j) = j (mod2) or 2j (mod4) and K = 2 or 4.  This is the same
    number as the literal branch sum (see :func:`lossy_pair_direct`) without
    its cancellation at small alpha.
    """
    alpha, eta1 = _check_pair_args(encoding, alpha, eta1)
    alpha_bar = math.sqrt(eta1) * alpha
    z = (1.0 - eta1) * alpha * alpha
    d = class_count(encoding)
    step = 1 if encoding == "mod2" else 2
    qubit_w = _qubit_weights(encoding, alpha)
    nbar = _class_norms(encoding, alpha_bar)
    damp = math.exp(-z)
    series = [residue_series(z, r, d) for r in range(d)]

    coeff = np.zeros((2, d, 2, d), dtype=complex)
    for jj, g, jp, gp in itertools.product(range(2), range(d), range(2), range(d)):
        r = (step * jj - g) % d
        if (step * jp - gp) % d != r:
            continue
        coeff[jj, g, jp, gp] = (qubit_w[jj] * qubit_w[jp] * damp * series[r]
                                / (2.0 * nbar[g] * nbar[gp]))
    return PairState(encoding, alpha, eta1, _frozen(coeff))


def lossy_pair_direct(encoding: str, alpha: float, eta1: float) -> PairState:
    """Literal branch-by-branch evaluation of :func:`lossy_pair`'s double sum.

    Kept as a cross-check; loses relative precision in the rarely populated
    classes once alpha drops below ~0.2.
    """
    alpha, eta1 = _check_pair_args(encoding, alpha, eta1)
    alpha_bar = math.sqrt(eta1) * alpha
    eps2 = (1.0 - eta1) * alpha * alpha
    d = class_count(encoding)
    qubit_w = _qubit_weights(encoding, alpha)
    j = np.arange(2)

    # each coherent branch (-1)^mu i^nu alpha contributes a ket vector v[j, g]
    branches = []
    nus = (0,) if encoding == "mod2" else (0, 1)
    for mu in (0, 1):
        for nu in nus:
            # sign carried by |j>: (-1)^{j mu} for mod2, (-1)^{j nu} for mod4
            sign = (-1.0) ** (j * (mu if encoding == "mod2" else nu))
            cat = coherent_in_cat_basis(mu, nu, alpha_bar, encoding)
            phase = (-1.0) ** mu * (1j) ** nu
            v = np.outer(qubit_w * sign, cat) / math.sqrt(2.0)
            branches.append((phase, v))

    coeff = np.zeros((2, d, 2, d), dtype=complex)
    for (ph, v), (php, vp) in itertools.product(branches, repeat=2):
        # <beta'|beta> of the traced-out environment modes
        overlap = np.exp(-eps2 * (1.0 - ph * np.conj(php)))
        coeff += overlap * np.einsum("ab,cd->abcd", v, np.conj(vp))
    return PairState(encoding, alpha, eta1, _frozen(coeff))


def _tensor(a: PairState, b: PairState) -> np.ndarray:
    # (j g j' g') x (l d l' d') -> (j l g d j' l' g' d')
    return np.einsum("agcd,lhmn->alghcmdn", a.coeff, b.coeff)


def lossy_four_mode(encoding: str, alpha: float, eta1: float,
                    eta1_b: float | None = None) -> FourModeState:
    """Tensor product of the two lossy pairs (arm losses default to equal)."""
    eta_b = eta1 if eta1_b is None else eta1_b
    pa = lossy_pair(encoding, alpha, eta1)
    pb = lossy_pair(encoding, alpha, eta_b)
    return FourModeState(encoding, float(alpha), (pa.eta1, pb.eta1), _frozen(_tensor(pa, pb)))


def perfect_four_mode(encoding: str, alpha: float) -> FourModeState:
    """Lossless four-mode state, 1/2 sum_{j,l} |j, l, C^{c(j)}, C^{c(l)}>.

    c(j) = j for mod2 (even/odd cat) and 2j for mod4 (0/2 mod 4 cat).
    """
    alpha, _ = _check_pair_args(encoding, alpha, 1.0)
    # touch the norms so degenerate amplitudes raise like the lossy path
    _qubit_weights(encoding, alpha)
    d = class_count(encoding)
    step = 1 if encoding == "mod2" else 2
    psi = np.zeros((2, 2, d, d), dtype=complex)
    for jj, ll in itertools.product((0, 1), repeat=2):
        psi[jj, ll, step * jj, step * ll] = 0.5
    coeff = np.einsum("abcd,efgh->abcdefgh", psi, np.conj(psi))
    return FourModeState(encoding, alpha, (1.0, 1.0), _frozen(coeff))


def is_hermitian(state: FourModeState, atol: float = 1e-12) -> bool:
    m = state.matrix()
    return bool(np.allclose(m, m.conj().T, atol=atol, rtol=0))
