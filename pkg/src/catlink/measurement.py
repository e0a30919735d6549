"""Measurement channels acting on :class:`~catlink.states.FourModeState`.

Joint photon-number-modulo-k and individual parity measurements are index
filters on the cat classes.  Homodyne detection of the X quadrature reduces
each ancilla to a matrix of cat-cat overlaps ``I[g, g'](q)``; an imperfect
detector of efficiency eta2 is the Gaussian-smoothed POVM element

    E_q = 1/(sigma sqrt(pi eta2)) * int dx exp(-(q/sqrt(eta2) - x)^2 / sigma^2) |x><x|,
    sigma^2 = (1 - eta2) / (2 eta2),

i.e. the square of a Gaussian-enveloped Kraus operator of width sigma.  The
prefactor makes ``int dq E_q = 1`` per mode; the outcome q is the X
quadrature of the mode after a beam splitter of transmissivity eta2, so
the two descriptions agree exactly.  Because every cat is a superposition
of coherent states, ``I[g, g'](q)`` is a finite sum of Gaussian integrals
and is evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cats import CatSpec, cat_components, class_count, f_lambda
from .errors import EncodingMismatch, InvalidEfficiency, ZeroDensity
from .states import FourModeState

DENSITY_FLOOR = 1e-300
BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class JointOutcome:
    """Result of the ancilla-ancilla measurement.

    ``kind`` is ``"mod2"`` (value p = +1/-1) or ``"mod4"`` (value lam = 0..3).
    ``parities`` optionally adds the individual parity outcomes (pa, pb) of
    the (mod 4)+Pa+Pb protocol.
    """

    kind: str
    value: int
    parities: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind == "mod2":
            if self.value not in (1, -1):
                raise EncodingMismatch(f"mod2 outcome must be +1/-1, got {self.value}")
            if self.parities is not None:
                raise EncodingMismatch("individual parities only apply to mod4")
        elif self.kind == "mod4":
            if self.value not in (0, 1, 2, 3):
                raise EncodingMismatch(f"mod4 outcome must be 0..3, got {self.value}")
            if self.parities is not None and any(p not in (1, -1) for p in self.parities):
                raise EncodingMismatch(f"parities must be +1/-1, got {self.parities}")
        else:
            raise EncodingMismatch(f"unknown outcome kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "mod2":
            return f"p={self.value:+d}"
        if self.parities is None:
            return f"lambda={self.value}"
        pa, pb = self.parities
        return f"pa={pa:+d},pb={pb:+d},lambda={self.value}"

    @classmethod
    def parse(cls, text: str) -> "JointOutcome":
        """Parse ``p=+1``, ``lambda=2`` or ``pa=+1,pb=-1,lambda=2``."""
        fields = {}
        for part in text.replace(" ", "").split(","):
            if "=" not in part:
                raise ValueError(f"malformed outcome {text!r}")
            key, val = part.split("=", 1)
            fields[key.lower()] = int(val)
        if set(fields) == {"p"}:
            return cls("mod2", fields["p"])
        lam = fields.get("lambda", fields.get("lam"))
        if lam is None:
            raise ValueError(f"malformed outcome {text!r}")
        rest = set(fields) - {"lambda", "lam"}
        if not rest:
            return cls("mod4", lam)
        if rest == {"pa", "pb"}:
            return cls("mod4", lam, (fields["pa"], fields["pb"]))
        raise ValueError(f"malformed outcome {text!r}")


def joint_outcomes(protocol: str) -> list[JointOutcome]:
    """All outcomes of a protocol: ``mod2``, ``mod4`` or ``mod4p`` (with Pa, Pb)."""
    if protocol == "mod2":
        return [JointOutcome("mod2", 1), JointOutcome("mod2", -1)]
    if protocol == "mod4":
        return [JointOutcome("mod4", lam) for lam in range(4)]
    if protocol == "mod4p":
        out = []
        for pa in (1, -1):
            for pb in (1, -1):
                # lam parity is fixed by the two individual parities
                odd = (pa == -1) ^ (pb == -1)
                for lam in ((1, 3) if odd else (0, 2)):
                    out.append(JointOutcome("mod4", lam, (pa, pb)))
        return out
    raise ValueError(f"unknown protocol {protocol!r}")


def _class_sum_mask(d: int, k: int, residue: int) -> np.ndarray:
    g = np.arange(d)
    return ((g[:, None] + g[None, :]) % k) == residue


def project_joint(state: FourModeState, outcome: JointOutcome) -> tuple[FourModeState, float]:
    """Keep the dyads whose ket and bra both satisfy ``g + d == outcome (mod k)``.

    Returns the unnormalized post-measurement state and the outcome
    probability (its trace).  With ``outcome.parities`` set, the individual
    parity filter is applied as well.
    """
    if outcome.kind != state.encoding:
        raise EncodingMismatch(f"{outcome.kind} outcome on a {state.encoding} state")
    d = state.dim
    if outcome.kind == "mod2":
        keep = _class_sum_mask(d, 2, 0 if outcome.value == 1 else 1)
    else:
        keep = _class_sum_mask(d, 4, outcome.value)
    mask = keep[None, None, :, :, None, None, None, None] & keep[None, None, None, None, None, None, :, :]
    projected = state.with_coeff(np.where(mask, state.coeff, 0.0))
    if outcome.parities is not None:
        return project_individual_parity(projected, *outcome.parities)
    return projected, projected.trace()


def project_individual_parity(state: FourModeState, pa: int, pb: int) -> tuple[FourModeState, float]:
    """Individual photon-number parity of arnie (pa) and bert (pb) on a mod4 state."""
    if state.encoding != "mod4":
        raise EncodingMismatch("individual parity measurement requires a mod4 state")
    if pa not in (1, -1) or pb not in (1, -1):
        raise EncodingMismatch(f"parities must be +1/-1, got {(pa, pb)}")
    g = np.arange(4)
    ka = (g % 2) == (0 if pa == 1 else 1)
    kb = (g % 2) == (0 if pb == 1 else 1)
    mask = (ka[None, None, :, None, None, None, None, None]
            & kb[None, None, None, :, None, None, None, None]
            & ka[None, None, None, None, None, None, :, None]
            & kb[None, None, None, None, None, None, None, :])
    projected = state.with_coeff(np.where(mask, state.coeff, 0.0))
    return projected, projected.trace()


@dataclass(frozen=True)
class HomodynePOVM:
    """X-quadrature homodyne detector of efficiency ``eta2``."""

    eta2: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.eta2 <= 1.0):
            raise InvalidEfficiency(f"eta2 must lie in (0, 1], got {self.eta2}")

    @property
    def sigma_sq(self) -> float:
        return (1.0 - self.eta2) / (2.0 * self.eta2)

    @property
    def normalization(self) -> float:
        """Per-mode POVM prefactor 1/(sigma sqrt(pi eta2)) (undefined at eta2 = 1)."""
        return 1.0 / (math.sqrt(self.sigma_sq * math.pi * self.eta2))


def _pair_kernel(q: np.ndarray, beta: complex, beta_p: complex, povm: HomodynePOVM) -> np.ndarray:
    """int dx w_q(x) <x|beta> conj(<x|beta'>) for the Gaussian weight of ``povm``.

    Writes the integrand as exp(-(x-u)^2/s2 - 2x^2 + b0 x + c0), u = q/sqrt(eta2),
    and completes the square in a form that stays exact as s2 -> 0.
    """
    s2 = povm.sigma_sq
    u = q / math.sqrt(povm.eta2)
    bpc = np.conj(beta_p)
    b0 = 2.0 * (beta + bpc)
    c0 = -0.5 * (beta * beta + bpc * bpc + abs(beta) ** 2 + abs(beta_p) ** 2)
    expo = c0 + (4.0 * u * b0 + b0 * b0 * s2 - 8.0 * u * u) / (4.0 * (1.0 + 2.0 * s2))
    pref = math.sqrt(2.0 / math.pi) / math.sqrt(povm.eta2 * (1.0 + 2.0 * s2))
    return pref * np.exp(expo)


def homodyne_overlaps(alpha_bar: float, encoding: str, q, povm: HomodynePOVM) -> np.ndarray:
    """``I[..., g, g'] = Tr(E_q |C^g><C^g'|)`` for the cat basis at ``alpha_bar``.

    At eta2 = 1 this is ``<q|C^g> conj(<q|C^g'>)``.
    """
    q = np.asarray(q, dtype=float)
    d = class_count(encoding)
    comps = [cat_components(CatSpec.from_class(alpha_bar, encoding, g)) for g in range(d)]
    out = np.zeros(q.shape + (d, d), dtype=complex)
    for g in range(d):
        cg, bg = comps[g]
        for gp in range(g, d):
            cgp, bgp = comps[gp]
            acc = np.zeros(q.shape, dtype=complex)
            for c1, b1 in zip(cg, bg):
                for c2, b2 in zip(cgp, bgp):
                    acc += c1 * np.conj(c2) * _pair_kernel(q, b1, b2, povm)
            out[..., g, gp] = acc
            out[..., gp, g] = np.conj(acc)
    return out


def condition_grid(state: FourModeState, qa, qb, povm: HomodynePOVM) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized Alice-Bob operator and outcome density on a (qa x qb) grid.

    Returns ``(rho, density)`` with ``rho.shape == (len(qa), len(qb), 4, 4)``
    in the basis (gg, ge, eg, ee) and ``density = trace(rho)``.  For a state
    coming out of :func:`project_joint` the density is the joint density of
    the joint outcome and the homodyne pair (qa, qb).
    """
    qa = np.atleast_1d(np.asarray(qa, dtype=float))
    qb = np.atleast_1d(np.asarray(qb, dtype=float))
    ab_a, ab_b = state.alpha_bars
    ia = homodyne_overlaps(ab_a, state.encoding, qa, povm)
    ib = homodyne_overlaps(ab_b, state.encoding, qb, povm)
    # contract arnie's classes first, then bert's
    t = np.einsum("jlgdJLGD,agG->ajldJLD", state.coeff, ia, optimize=True)
    rho = np.einsum("ajldJLD,bdD->abjlJL", t, ib, optimize=True)
    rho = rho.reshape(len(qa), len(qb), 4, 4)
    density = np.real(np.einsum("abii->ab", rho))
    return rho, density


def homodyne_condition(state: FourModeState, q_a: float, q_b: float,
                       povm: HomodynePOVM) -> tuple[np.ndarray, float]:
    """Condition a projected state on homodyne outcomes (q_a, q_b).

    ``state`` is the (unnormalized) output of :func:`project_joint`; it is
    renormalized internally, so the returned density value is conditional on
    the joint outcome and ``probability * density`` is the joint density.
    Raises :class:`ZeroDensity` where the density underflows.
    """
    tr = state.trace()
    if not tr > 0.0:
        raise ZeroDensity("conditioning a state of zero trace")
    rho, dens = condition_grid(state, [q_a], [q_b], povm)
    value = float(dens[0, 0]) / tr
    if not value > DENSITY_FLOOR:
        raise ZeroDensity(f"outcome density {value!r} at ({q_a}, {q_b})")
    rho_ab = rho[0, 0] / dens[0, 0]
    return 0.5 * (rho_ab + rho_ab.conj().T), value


def bell_fidelities(rho: np.ndarray) -> np.ndarray:
    """Overlaps with (phi+, phi-, psi+, psi-) along the last axis.

    ``rho`` has shape (..., 4, 4) in the (gg, ge, eg, ee) basis.
    """
    d00 = np.real(rho[..., 0, 0])
    d11 = np.real(rho[..., 1, 1])
    d22 = np.real(rho[..., 2, 2])
    d33 = np.real(rho[..., 3, 3])
    c03 = np.real(rho[..., 0, 3] + rho[..., 3, 0]) / 2.0
    c12 = np.real(rho[..., 1, 2] + rho[..., 2, 1]) / 2.0
    return np.stack([
        0.5 * (d00 + d33) + c03,
        0.5 * (d00 + d33) - c03,
        0.5 * (d11 + d22) + c12,
        0.5 * (d11 + d22) - c12,
    ], axis=-1)


def transmon_outcomes_to_lambda(p1: int, p2: int) -> int:
    """Joint mod 4 outcome from the two transmon readouts.

    p1 is the joint parity (+1: even), p2 tells {4k, 4k+1} (+1) from
    {4k+2, 4k+3} (-1).
    """
    if p1 not in (1, -1) or p2 not in (1, -1):
        raise ValueError(f"transmon outcomes must be +1/-1, got {(p1, p2)}")
    return (0 if p1 == 1 else 1) + (0 if p2 == 1 else 2)


# closed forms for the lossless protocol, used as references

def perfect_mod2_closed_form(xa, xb, alpha: float, p: int):
    """Joint density P^p(xa, xb) and Bell overlaps (phi+, phi-, psi+, psi-)."""
    xa, xb = np.broadcast_arrays(np.asarray(xa, float), np.asarray(xb, float))
    a2 = alpha * alpha
    ca, cb = np.cosh(2 * xa * alpha), np.cosh(2 * xb * alpha)
    sa, sb = np.sinh(2 * xa * alpha), np.sinh(2 * xb * alpha)
    if p == 1:
        n_p = (ca * cb) ** 2 / (1 + math.exp(-2 * a2)) ** 2 + (sa * sb) ** 2 / (-math.expm1(-2 * a2)) ** 2
    else:
        n_p = ((ca * sb) ** 2 + (sa * cb) ** 2) / -math.expm1(-4 * a2)
    dens = (2 / math.pi) * np.exp(-2 * (xa**2 + xb**2) - 4 * a2) * n_p
    corr = np.sinh(4 * xa * alpha) * np.sinh(4 * xb * alpha) / (4 * n_p * -math.expm1(-4 * a2))
    even, odd = (1 + p) / 2, (1 - p) / 2
    fids = np.stack([even * (0.5 + corr), even * (0.5 - corr),
                     odd * (0.5 + corr), odd * (0.5 - corr)], axis=-1)
    return dens, fids


def perfect_mod4_closed_form(xa, xb, alpha: float, lam: int):
    """Joint density P^lam(xa, xb) and Bell overlaps for lam in {0, 2}."""
    if lam not in (0, 2):
        raise ValueError("lossless mod4 outcomes are lam = 0, 2")
    xa, xb = np.broadcast_arrays(np.asarray(xa, float), np.asarray(xb, float))
    a2 = alpha * alpha
    c = 2 * math.cos(a2) * math.exp(-a2) / (1 + math.exp(-2 * a2))  # cos/cosh
    f0a, f0b = f_lambda(xa, alpha, 0), f_lambda(xb, alpha, 0)
    f2a, f2b = f_lambda(xa, alpha, 2), f_lambda(xb, alpha, 2)
    if lam == 0:
        n_t = (f0a * f0b / (1 + c)) ** 2 + (f2a * f2b / (1 - c)) ** 2
    else:
        n_t = ((f0a * f2b) ** 2 + (f2a * f0b) ** 2) / (1 - c * c)
    dens = np.exp(-2 * (xa**2 + xb**2)) / (2 * math.pi * (1 + math.exp(-2 * a2)) ** 2) * n_t
    corr = f0a * f0b * f2a * f2b / (n_t * (1 - c * c))
    even = 1.0 if lam == 0 else 0.0
    odd = 1.0 - even
    fids = np.stack([even * (0.5 + corr), even * (0.5 - corr),
                     odd * (0.5 + corr), odd * (0.5 - corr)], axis=-1)
    return dens, fids

