"""Truncated Fock-space oracle.

Everything here is built from photon-number amplitudes, Hermite functions
and the amplitude-damping Kraus family, without touching the cat-basis
algebra of :mod:`catlink.cats` / :mod:`catlink.states`.  It is slow and
exists to certify the closed-form engine.

Densities are plain ndarrays; multi-mode operators are described by a
``dims`` tuple and stored as ``(prod(dims), prod(dims))`` matrices.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .cats import CatSpec
from .errors import InvalidEfficiency, TruncationError

TAIL_TOL = 1e-12


def default_nmax(alpha: float) -> int:
    """ceil(|alpha|^2 + 8|alpha| + 10), at least 20."""
    a = abs(alpha)
    return max(20, math.ceil(a * a + 8 * a + 10))


def _poisson_log_amplitudes(alpha: float, n: np.ndarray) -> np.ndarray:
    # log(alpha^n / sqrt(n!)), alpha > 0
    return n * math.log(alpha) - 0.5 * gammaln(n + 1)


def fock_cat(spec: CatSpec, nmax: int) -> np.ndarray:
    """Fock amplitudes (length nmax + 1) of a parity or mod 4 cat.

    The coherent-state amplitudes alpha^n/sqrt(n!) are restricted to
    n = residue (mod 2 or 4) and normalized.  Raises TruncationError if the
    discarded tail carries more than 1e-12 of the class weight.
    """
    alpha = float(spec.alpha)
    k, r = spec.modulus, spec.residue
    if alpha == 0.0:
        if r != 0:
            raise TruncationError(f"class {r} mod {k} is empty at alpha=0")
        vec = np.zeros(nmax + 1, dtype=complex)
        vec[0] = 1.0
        return vec
    n_ext = np.arange(r, nmax + 1 + 40 * (k + int(alpha * alpha) + 10), k)
    logs = _poisson_log_amplitudes(alpha, n_ext)
    shift = logs.max()
    w = np.exp(2 * (logs - shift))
    inside = n_ext <= nmax
    total = w.sum()
    tail = w[~inside].sum() / total
    if tail > TAIL_TOL:
        raise TruncationError(f"tail mass {tail:.3e} beyond nmax={nmax} for {spec}")
    vec = np.zeros(nmax + 1, dtype=complex)
    amp = np.exp(logs[inside] - shift)
    vec[n_ext[inside]] = amp / np.linalg.norm(amp)
    return vec


def fock_coherent(beta: complex, nmax: int) -> np.ndarray:
    """Truncated coherent-state amplitudes e^{-|b|^2/2} b^n / sqrt(n!)."""
    n = np.arange(nmax + 1)
    if beta == 0:
        vec = np.zeros(nmax + 1, dtype=complex)
        vec[0] = 1.0
        return vec
    mag = np.exp(-0.5 * abs(beta) ** 2 + _poisson_log_amplitudes(abs(beta), n))
    return mag * np.exp(1j * np.angle(beta) * n)


def hermite_functions(nmax: int, x) -> np.ndarray:
    """psi_n(x) for n = 0..nmax, shape (nmax + 1,) + x.shape.

    psi_n(x) = (2/pi)^(1/4) (2^n n!)^(-1/2) H_n(sqrt(2) x) e^{-x^2}, orthonormal
    in x; computed with the stable three-term recurrence.
    """
    x = np.asarray(x, dtype=float)
    y = math.sqrt(2.0) * x
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = (2.0 / math.pi) ** 0.25 * np.exp(-x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def quadrature_wavefunction(n: int, x):
    """Single Hermite function psi_n(x) (see :func:`hermite_functions`)."""
    return hermite_functions(n, x)[n]


def kraus_loss(eta: float, nmax: int) -> list[np.ndarray]:
    """E_k = sum_n sqrt(C(n, k) eta^(n-k) (1-eta)^k) |n-k><n|, k = 0..nmax."""
    eta = float(eta)
    if not (0.0 < eta <= 1.0):
        raise InvalidEfficiency(f"eta must lie in (0, 1], got {eta}")
    if eta == 1.0:
        return [np.eye(nmax + 1)]
    ops = []
    n = np.arange(nmax + 1)
    for k in range(nmax + 1):
        m = n[k:]
        logc = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
        amp = np.exp(0.5 * (logc + (m - k) * math.log(eta) + k * math.log1p(-eta)))
        e = np.zeros((nmax + 1, nmax + 1))
        e[m - k, m] = amp
        ops.append(e)
    return ops


def _apply_local(rho: np.ndarray, ops_left, ops_right, dims, mode):
    """sum_k (A_k on `mode`) rho (B_k on `mode`)^dag."""
    dims = tuple(dims)
    n = len(dims)
    t = rho.reshape(dims + dims)
    out = np.zeros_like(t, dtype=complex)
    for a, b in zip(ops_left, ops_right):
        tmp = np.tensordot(a, t, axes=([1], [mode]))
        tmp = np.moveaxis(tmp, 0, mode)
        tmp = np.tensordot(tmp, b.conj(), axes=([n + mode], [1]))
        tmp = np.moveaxis(tmp, -1, n + mode)
        out += tmp
    size = int(np.prod(dims))
    return out.reshape(size, size)


def loss_channel(rho: np.ndarray, eta: float, dims=None, mode: int = 0) -> np.ndarray:
    """Amplitude damping of transmissivity ``eta`` on subsystem ``mode``.

    Linear in ``rho``, so it may be applied to non-Hermitian operator blocks.
    """
    if dims is None:
        dims = (rho.shape[0],)
    ops = kraus_loss(eta, dims[mode] - 1)
    return _apply_local(rho, ops, ops, dims, mode)


def modk_projector(rho: np.ndarray, k: int, residue: int, dims=None, modes=None):
    """Project onto total photon number of ``modes`` = residue (mod k).

    Returns the unnormalized operator and its trace.
    """
    if residue >= k or residue < 0:
        raise ValueError(f"residue must lie in [0, {k})")
    if dims is None:
        dims = (rho.shape[0],)
    if modes is None:
        modes = tuple(range(len(dims)))
    total = np.zeros(dims, dtype=int)
    for m in modes:
        shape = [1] * len(dims)
        shape[m] = dims[m]
        total = total + np.arange(dims[m]).reshape(shape)
    keep = ((total % k) == residue).ravel()
    out = np.where(np.outer(keep, keep), rho, 0.0)
    return out, float(np.real(np.trace(out)))


def quadrature_project(rho: np.ndarray, x: float, dims, mode: int) -> tuple[np.ndarray, tuple]:
    """<x|_mode rho |x>_mode, the operator on the remaining subsystems."""
    dims = tuple(dims)
    n = len(dims)
    psi = hermite_functions(dims[mode] - 1, x)
    t = rho.reshape(dims + dims)
    t = np.tensordot(t, psi, axes=([n + mode], [0]))
    t = np.tensordot(t, psi, axes=([mode], [0]))
    rest = dims[:mode] + dims[mode + 1:]
    size = int(np.prod(rest)) if rest else 1
    return t.reshape(size, size), rest


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) ||a - b||_1 for Hermitian a, b."""
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


# protocol pipeline

def initial_pair(encoding: str, alpha: float, nmax: int) -> np.ndarray:
    """(|g, C_0> + |e, C_1>)/sqrt(2) as a (2(nmax+1))^2 density, qubit first.

    mod2 uses even/odd cats, mod4 the 0/2 mod 4 cats.
    """
    if encoding == "mod2":
        c0 = fock_cat(CatSpec(alpha, parity=1), nmax)
        c1 = fock_cat(CatSpec(alpha, parity=-1), nmax)
    elif encoding == "mod4":
        c0 = fock_cat(CatSpec(alpha, lam=0), nmax)
        c1 = fock_cat(CatSpec(alpha, lam=2), nmax)
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    vec = np.concatenate([c0, c1]) / math.sqrt(2.0)
    return np.outer(vec, vec.conj())


def lossy_pair_fock(encoding: str, alpha: float, eta1: float, nmax: int) -> np.ndarray:
    """Initial pair followed by loss eta1 on the ancilla."""
    rho = initial_pair(encoding, alpha, nmax)
    return loss_channel(rho, eta1, dims=(2, nmax + 1), mode=1)


def _residue_projector(nmax: int, k: int, r: int) -> np.ndarray:
    return ((np.arange(nmax + 1) % k) == r).astype(float)


class OraclePipeline:
    """Brute-force protocol evaluation for one (encoding, alpha, eta1, eta2).

    The four-mode operator is never formed: since the joint projector is
    sum_r P_r (x) P_{lam-r}, the projected state is a sum of tensor products
    of blocks ``P_r rho_pair P_s``, each of which is then sent through the
    eta2 loss channel and the perfect quadrature projector.
    """

    def __init__(self, encoding: str, alpha: float, eta1: float, eta2: float,
                 nmax: int | None = None, eta1_b: float | None = None):
        if encoding not in ("mod2", "mod4"):
            raise ValueError(f"unknown encoding {encoding!r}")
        self.encoding = encoding
        self.k = 2 if encoding == "mod2" else 4
        self.nmax = default_nmax(alpha) if nmax is None else nmax
        self.eta2 = eta2
        etas = (eta1, eta1 if eta1_b is None else eta1_b)
        self.pairs = [lossy_pair_fock(encoding, alpha, e, self.nmax) for e in etas]
        dims = (2, self.nmax + 1)
        proj = [_residue_projector(self.nmax, self.k, r) for r in range(self.k)]
        self.blocks = []
        self.block_traces = []
        for pair in self.pairs:
            t = pair.reshape(2, self.nmax + 1, 2, self.nmax + 1)
            blocks, traces = {}, {}
            for r in range(self.k):
                for s in range(self.k):
                    b = t * proj[r][None, :, None, None] * proj[s][None, None, None, :]
                    b = b.reshape(pair.shape)
                    if r == s:
                        traces[r] = float(np.real(np.trace(b)))
                    if eta2 < 1.0:
                        b = loss_channel(b, eta2, dims=dims, mode=1)
                    blocks[(r, s)] = b
            self.blocks.append(blocks)
            self.block_traces.append(traces)

    def _residue_pairs(self, lam: int, parities):
        """(r_a, r_b) residue assignments compatible with the outcome."""
        out = []
        for ra in range(self.k):
            rb = (lam - ra) % self.k
            if parities is not None:
                pa, pb = parities
                if ra % 2 != (0 if pa == 1 else 1) or rb % 2 != (0 if pb == 1 else 1):
                    continue
            out.append((ra, rb))
        return out

    @staticmethod
    def _lam(outcome) -> int:
        if outcome.kind == "mod2":
            return 0 if outcome.value == 1 else 1
        return outcome.value

    def probability(self, outcome) -> float:
        lam = self._lam(outcome)
        return sum(self.block_traces[0][ra] * self.block_traces[1][rb]
                   for ra, rb in self._residue_pairs(lam, outcome.parities))

    def condition(self, outcome, q_a: float, q_b: float) -> tuple[np.ndarray, float]:
        """Unnormalized Alice-Bob operator (4x4, basis gg, ge, eg, ee) and its trace."""
        lam = self._lam(outcome)
        combos = self._residue_pairs(lam, outcome.parities)
        dims = (2, self.nmax + 1)
        ma, mb = {}, {}
        for ra, _ in combos:
            for sa, _ in combos:
                ma[(ra, sa)], _ = quadrature_project(self.blocks[0][(ra, sa)], q_a, dims, 1)
        for _, rb in combos:
            for _, sb in combos:
                mb[(rb, sb)], _ = quadrature_project(self.blocks[1][(rb, sb)], q_b, dims, 1)
        rho = np.zeros((4, 4), dtype=complex)
        for ra, rb in combos:
            for sa, sb in combos:
                rho += np.kron(ma[(ra, sa)], mb[(rb, sb)])
        return rho, float(np.real(np.trace(rho)))
