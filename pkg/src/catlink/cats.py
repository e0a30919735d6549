"""Scalar kernels for coherent, parity (mod 2) and mod 4 cat states.

Position-quadrature convention used throughout the package::

    <x|beta> = (2/pi)**(1/4) * exp(-x**2 + 2*beta*x - beta**2/2 - |beta|**2/2)

i.e. x = (a + a^dag)/2 with vacuum variance 1/4.  This is the only Gaussian
convention under which the even-cat wavefunctions at real and imaginary
amplitude take the forms ``~ exp(-x^2 - alpha^2) cosh(2 alpha x)`` and
``~ exp(-x^2) cos(2 alpha x)`` simultaneously.

Every cat state is a finite superposition of coherent states
``|i^k alpha>``; :func:`cat_components` exposes that superposition and the
rest of the package (homodyne kernels in particular) is built on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateNorm

Encoding = Literal["mod2", "mod4"]

_VAC_PREFACTOR = (2.0 / math.pi) ** 0.25


@dataclass(frozen=True)
class CatSpec:
    """Label of a cat state.

    Exactly one of ``parity`` (+1 even, -1 odd) or ``lam`` (mod 4 class
    0..3) must be given.  ``alpha`` is the real, non-negative amplitude.
    """

    alpha: float
    parity: int | None = None
    lam: int | None = None

    def __post_init__(self):
        if isinstance(self.alpha, complex):
            raise TypeError("alpha must be real; complex amplitudes are not supported")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if (self.parity is None) == (self.lam is None):
            raise ValueError("give exactly one of parity or lam")
        if self.parity is not None and self.parity not in (1, -1):
            raise ValueError(f"parity must be +1 or -1, got {self.parity}")
        if self.lam is not None and self.lam not in (0, 1, 2, 3):
            raise ValueError(f"lam must be in 0..3, got {self.lam}")

    @property
    def modulus(self) -> int:
        return 2 if self.parity is not None else 4

    @property
    def residue(self) -> int:
        """Photon-number residue class carried by the state."""
        if self.parity is not None:
            return 0 if self.parity == 1 else 1
        return self.lam

    @classmethod
    def from_class(cls, alpha: float, encoding: Encoding, index: int) -> "CatSpec":
        """Basis label ``index`` of ``encoding`` (mod2: 0 -> even, 1 -> odd)."""
        if encoding == "mod2":
            return cls(alpha, parity=1 if index == 0 else -1)
        if encoding == "mod4":
            return cls(alpha, lam=index)
        raise ValueError(f"unknown encoding {encoding!r}")


def parity_norm(alpha: float, parity: int) -> float:
    """N_pm = 1/sqrt(2 (1 pm exp(-2 alpha^2)))."""
    a2 = alpha * alpha
    if parity == 1:
        denom = 2.0 * (1.0 + math.exp(-2.0 * a2))
    else:
        denom = -2.0 * math.expm1(-2.0 * a2)
    if denom <= 0.0:
        raise DegenerateNorm(f"odd cat has no normalization at alpha={alpha}")
    return 1.0 / math.sqrt(denom)


def _sinh_minus_sin(a: float) -> float:
    if a < 1.0:
        # 2 * sum_m a^(4m+3)/(4m+3)!
        total, term, k = 0.0, a**3 / 6.0, 3
        while term > 1e-300 and abs(term) > 1e-18 * abs(total):
            total += term
            term *= a**4 / ((k + 1) * (k + 2) * (k + 3) * (k + 4))
            k += 4
        return 2.0 * total
    return math.sinh(a) - math.sin(a)


def mod4_norm(alpha: float, lam: int) -> float:
    """The mod 4 normalization N~_lam for class ``lam``.

    N~_lam = [2 + 2 (-i)^lam {e^{i a} + (-1)^lam e^{-i a}} / {e^{a} + (-1)^lam e^{-a}}]^(-1/2),
    a = alpha^2.  The bracket is real for every lam; it reduces to
    2(1 +- cos a / cosh a) for lam = 0/2 and 2(1 +- sin a / sinh a) for lam = 1/3.
    """
    a = alpha * alpha
    if lam == 0:
        bracket = 2.0 * (1.0 + 2.0 * math.cos(a) * math.exp(-a) / (1.0 + math.exp(-2.0 * a)))
    elif lam == 2:
        if a == 0.0:
            raise DegenerateNorm("mod4 class 2 has no normalization at alpha=0")
        if a < 1.0:
            # cosh a - cos a = 2 (sinh^2(a/2) + sin^2(a/2))
            num = 2.0 * (math.sinh(a / 2) ** 2 + math.sin(a / 2) ** 2)
            bracket = 2.0 * num / math.cosh(a)
        else:
            bracket = 2.0 * (1.0 - 2.0 * math.cos(a) * math.exp(-a) / (1.0 + math.exp(-2.0 * a)))
    elif lam in (1, 3):
        if a == 0.0:
            raise DegenerateNorm(f"mod4 class {lam} has no normalization at alpha=0")
        if lam == 1:
            ratio = 2.0 * math.sin(a) * math.exp(-a) / -math.expm1(-2.0 * a)
            bracket = 2.0 * (1.0 + ratio)
        elif a < 1.0:
            bracket = 2.0 * _sinh_minus_sin(a) / math.sinh(a)
        else:
            ratio = 2.0 * math.sin(a) * math.exp(-a) / -math.expm1(-2.0 * a)
            bracket = 2.0 * (1.0 - ratio)
    else:
        raise ValueError(f"lam must be in 0..3, got {lam}")
    if not bracket > 0.0:
        raise DegenerateNorm(f"mod4 class {lam} degenerate at alpha={alpha}")
    return 1.0 / math.sqrt(bracket)


def cat_norm(spec: CatSpec) -> float:
    """N_pm for parity cats, N~_lam for mod 4 cats.

    A mod 4 cat is N~_lam (|C^s_alpha> + (-i)^lam |C^s_{i alpha}>) with s the
    parity of lam, so its full coherent-state prefactor is
    ``cat_norm(spec) * parity_norm(alpha, s)``.
    """
    if spec.parity is not None:
        return parity_norm(spec.alpha, spec.parity)
    return mod4_norm(spec.alpha, spec.lam)


def cat_components(spec: CatSpec) -> tuple[np.ndarray, np.ndarray]:
    """Coherent-state decomposition ``|C> = sum_k coeffs[k] |betas[k]>``."""
    a = float(spec.alpha)
    if spec.parity is not None:
        n = parity_norm(a, spec.parity)
        return (np.array([n, spec.parity * n], dtype=complex),
                np.array([a, -a], dtype=complex))
    lam = spec.lam
    pref = cat_norm(spec) * parity_norm(a, 1 if lam % 2 == 0 else -1)
    k = np.arange(4)
    coeffs = pref * (-1j) ** ((lam * k) % 4)
    betas = a * (1j) ** k
    return coeffs.astype(complex), betas.astype(complex)


def coherent_amplitude(x, beta: complex):
    """Position wavefunction <x|beta> of a coherent state."""
    x = np.asarray(x, dtype=float)
    beta = complex(beta)
    expo = -x * x + 2.0 * beta * x - 0.5 * beta * beta - 0.5 * abs(beta) ** 2
    return _VAC_PREFACTOR * np.exp(expo)


def cat_amplitude(x, spec: CatSpec):
    """Position wavefunction <x|C> of a parity or mod 4 cat state."""
    x = np.asarray(x, dtype=float)
    if spec.parity is not None:
        # exp(-(x -+ alpha)^2) avoids overflow in cosh/sinh for large x*alpha
        a = spec.alpha
        n = parity_norm(a, spec.parity)
        out = np.exp(-(x - a) ** 2) + spec.parity * np.exp(-(x + a) ** 2)
        return (_VAC_PREFACTOR * n * out).astype(complex)
    coeffs, betas = cat_components(spec)
    out = np.zeros(x.shape, dtype=complex)
    for c, b in zip(coeffs, betas):
        out += c * coherent_amplitude(x, b)
    return out


def f_lambda(x, alpha: float, lam: int):
    """F_lam(x) = exp(-alpha^2) cosh(2 alpha x) + i^lam cos(2 alpha x), lam in {0, 2}."""
    x = np.asarray(x, dtype=float)
    if lam not in (0, 2):
        raise ValueError("F_lam is defined for lam in {0, 2}")
    sign = 1.0 if lam == 0 else -1.0
    return np.exp(-alpha * alpha) * np.cosh(2 * alpha * x) + sign * np.cos(2 * alpha * x)


def coherent_in_cat_basis(mu: int, nu: int, alpha: float, encoding: Encoding) -> np.ndarray:
    """Expansion coefficients of ``|(-1)^mu i^nu alpha>`` in the cat basis.

    mod2 (``nu`` ignored): ``c[k] = (-1)^(mu k) / (2 N_k)``, k = 0 (even), 1 (odd).
    mod4: ``c[g] = (-1)^(mu g) i^(nu g) / (4 N~_g N_g)``, g = 0..3, where N_g is
    the parity normalization of the parity of g.
    """
    if encoding == "mod2":
        k = np.arange(2)
        norms = np.array([parity_norm(alpha, 1), parity_norm(alpha, -1)])
        return ((-1.0) ** (mu * k) / (2.0 * norms)).astype(complex)
    if encoding == "mod4":
        g = np.arange(4)
        norms = np.array([mod4_norm(alpha, lam) * parity_norm(alpha, 1 if lam % 2 == 0 else -1)
                          for lam in range(4)])
        phase = (-1.0) ** (mu * g) * (1j) ** ((nu * g) % 4)
        return phase / (4.0 * norms)
    raise ValueError(f"unknown encoding {encoding!r}")


def class_count(encoding: str) -> int:
    """Number of cat-basis classes of an encoding (2 for mod2, 4 for mod4)."""
    if encoding == "mod2":
        return 2
    if encoding in ("mod4", "mod4p"):
        return 4
    raise ValueError(f"unknown encoding {encoding!r}")
