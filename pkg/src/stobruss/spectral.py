"""Neumann eigenmodes and per-mode stability of the linearised stochastic system.

Each cosine mode ``k`` of the interval ``(0, L)`` carries a 2x2 linear SDE

    dV = A_k V dt + Bn V dW,    A_k = [[a - d_u mu_k, b], [c, d - d_v mu_k]],
    Bn = diag(sigma_u, sigma_v),

whose Ito drift after the exponential change of variables is
``E_k = A_k - Bn**2 / 2``. With equal intensities ``Bn = sigma I`` commutes
with ``A_k`` and ``spec(E_k) = spec(A_k) - sigma**2 / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    ConsistencyError,
    InvalidArgumentError,
    ModeTruncationError,
    NonCommutingError,
)
from .model import BrusselatorParams, LinearCoefficients, linearize

DEFAULT_MODE_COUNT = 200

# |discriminant| below this (scaled by max(1, |M|^2)) counts as a repeated root
DEFECTIVE_TOL = 1e-12
# below this |q| the cosh/sinhc pair is summed as a power series in q
_SERIES_Q = 1e-4


# ---------------------------------------------------------------------------
# 2x2 primitives


def _entries(M) -> tuple[float, float, float, float]:
    arr = np.asarray(M, dtype=float)
    if arr.shape != (2, 2):
        raise InvalidArgumentError(f"expected a 2x2 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return float(arr[0, 0]), float(arr[0, 1]), float(arr[1, 0]), float(arr[1, 1])


def _roots_from_half_trace(m: float, q: float, prod: float) -> tuple[complex, complex]:
    # roots of lam^2 - 2 m lam + prod, with q = m^2 - prod supplied separately
    if q >= 0.0:
        s = math.sqrt(q)
        big = m + s if m >= 0.0 else m - s
        small = prod / big if big != 0.0 else (m - s if m >= 0.0 else m + s)
        hi, lo = (big, small) if big >= small else (small, big)
        return complex(hi), complex(lo)
    t = math.sqrt(-q)
    return complex(m, t), complex(m, -t)


def eig2(M) -> tuple[complex, complex]:
    """Eigenvalues of a real 2x2 matrix, sorted by descending real part.

    The discriminant is formed as ``((a - d)/2)**2 + b c`` so that nearly
    repeated roots do not suffer the ``m**2 - det`` cancellation, and the
    smaller real root is recovered from the determinant.
    """
    a, b, c, d = _entries(M)
    m = 0.5 * (a + d)
    h = 0.5 * (a - d)
    q = h * h + b * c
    return _roots_from_half_trace(m, q, a * d - b * c)


def quadratic_roots(w: float, z: float) -> tuple[complex, complex]:
    """Roots of ``lam**2 - w lam + z`` sorted by descending real part."""
    m = 0.5 * w
    return _roots_from_half_trace(m, m * m - z, z)


def _cosh_sinhc(q: float) -> tuple[float, float]:
    """``cosh(sqrt q)`` and ``sinh(sqrt q)/sqrt q`` for any real ``q``."""
    if abs(q) < _SERIES_Q:
        c = s = 0.0
        term_c, term_s = 1.0, 1.0
        for n in range(6):
            c += term_c
            s += term_s
            term_c *= q / ((2 * n + 1) * (2 * n + 2))
            term_s *= q / ((2 * n + 2) * (2 * n + 3))
        return c, s
    if q > 0.0:
        r = math.sqrt(q)
        return math.cosh(r), math.sinh(r) / r
    r = math.sqrt(-q)
    return math.cos(r), math.sin(r) / r


def expm2(M) -> np.ndarray:
    """Closed-form exponential of a real 2x2 matrix.

    Writes ``M = m I + N`` with ``N**2 = q I``; then
    ``exp(M) = e**m (cosh(sqrt q) I + sinh(sqrt q)/sqrt q N)``. The real-distinct
    branch is evaluated through ``e**(m +- s)`` with the ``s - |h|`` factor
    recovered from ``b c`` to avoid cancellation; the defective and
    near-defective cases go through the power series of the same functions.
    """
    a, b, c, d = _entries(M)
    m = 0.5 * (a + d)
    h = 0.5 * (a - d)
    q = h * h + b * c
    norm2 = a * a + b * b + c * c + d * d
    defective = abs(4.0 * q) < DEFECTIVE_TOL * max(1.0, norm2)
    if defective or abs(q) < _SERIES_Q or q < 0.0:
        C, S = _cosh_sinhc(q)
        em = math.exp(m)
        return em * np.array([[C + h * S, b * S], [c * S, C - h * S]])
    s = math.sqrt(q)
    p = s + abs(h)
    r = (b * c) / p  # = s - |h|
    plus, minus = (p, r) if h >= 0.0 else (r, p)  # s + h, s - h
    ep = math.exp(m + s)
    en = math.exp(m - s)
    inv = 0.5 / s
    off = (ep - en) * inv
    return np.array(
        [
            [(ep * plus + en * minus) * inv, b * off],
            [c * off, (ep * minus + en * plus) * inv],
        ]
    )


# ---------------------------------------------------------------------------
# Modes


@dataclass(frozen=True)
class EigenMode:
    """Neumann eigenpair of ``-d^2/dx^2`` on ``(0, L)``; ``k`` is 1-based.

    ``mu`` is the continuous eigenvalue ``((k-1) pi / L)**2`` unless the mode
    was built by :func:`discrete_eigenpairs`, in which case it is the
    eigenvalue of the cell-centred three-point stencil.
    """

    k: int
    mu: float
    L: float = 1.0
    discrete: bool = False

    @property
    def frequency(self) -> float:
        return (self.k - 1) * math.pi / self.L

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.k == 1:
            return np.full_like(x, 1.0 / math.sqrt(self.L))
        return math.sqrt(2.0 / self.L) * np.cos(self.frequency * x)


def neumann_eigenpairs(L: float, K: int) -> list[EigenMode]:
    if not L > 0:
        raise InvalidArgumentError(f"domain length must be > 0, got {L!r}")
    if int(K) != K or K < 1:
        raise InvalidArgumentError(f"mode count must be a positive integer, got {K!r}")
    return [EigenMode(k, ((k - 1) * math.pi / L) ** 2, L) for k in range(1, int(K) + 1)]


def discrete_mu(k, N: int, dx: float):
    """Eigenvalue of the reflecting-ghost Laplacian for cosine mode ``k``."""
    k = np.asarray(k, dtype=float)
    return (4.0 / dx**2) * np.sin((k - 1) * math.pi / (2 * N)) ** 2


def discrete_eigenpairs(L: float, N: int, K: int) -> list[EigenMode]:
    if K > N:
        raise InvalidArgumentError(f"only {N} modes are resolvable on {N} cells, asked for {K}")
    dx = L / N
    return [
        EigenMode(k, float(discrete_mu(k, N, dx)), L, discrete=True)
        for k in range(1, int(K) + 1)
    ]


@dataclass(frozen=True)
class ModeMatrices:
    k: int
    mu: float
    A_k: np.ndarray
    B_noise: np.ndarray
    E_k: np.ndarray = field(repr=False)

    @property
    def sigma_u(self) -> float:
        return float(self.B_noise[0, 0])

    @property
    def sigma_v(self) -> float:
        return float(self.B_noise[1, 1])

    @property
    def commutator_norm(self) -> float:
        C = self.A_k @ self.B_noise - self.B_noise @ self.A_k
        return float(np.linalg.norm(C))

    @property
    def commutes(self) -> bool:
        return self.commutator_norm == 0.0


def drift_matrix(coeffs: LinearCoefficients, d_u: float, d_v: float, mu: float) -> np.ndarray:
    return np.array([[coeffs.a - d_u * mu, coeffs.b], [coeffs.c, coeffs.d - d_v * mu]])


def mode_matrices(coeffs, d_u, d_v, sigma_u, sigma_v, mode: EigenMode) -> ModeMatrices:
    A_k = drift_matrix(coeffs, d_u, d_v, mode.mu)
    Bn = np.diag([float(sigma_u), float(sigma_v)])
    E_k = A_k - 0.5 * (Bn @ Bn)
    return ModeMatrices(k=mode.k, mu=mode.mu, A_k=A_k, B_noise=Bn, E_k=E_k)


def characteristic_coeffs(coeffs: LinearCoefficients, d_u, d_v, mu, sigma):
    """``(w, z)`` with ``det(E_k - lam I) = lam**2 - w lam + z`` for
    equal intensities ``sigma``. Vectorises over ``mu``."""
    s2 = sigma * sigma
    T = coeffs.trace_T
    shifted = T - (d_u + d_v) * mu
    w = shifted - s2
    z = (
        0.25 * s2 * s2
        - 0.5 * s2 * shifted
        + d_u * d_v * mu * mu
        - (coeffs.a * d_v + coeffs.d * d_u) * mu
        + coeffs.det_D
    )
    return w, z


@dataclass(frozen=True)
class DispersionPoint:
    k: int
    mu: float
    w: float
    z: float
    lambda_pair: tuple[complex, complex]

    @property
    def discriminant(self) -> float:
        return self.w * self.w - 4.0 * self.z

    @property
    def lambda_re_max(self) -> float:
        return self.lambda_pair[0].real


def _split_sigma(sigma) -> tuple[float, float]:
    if np.ndim(sigma) == 0:
        return float(sigma), float(sigma)
    su, sv = sigma
    return float(su), float(sv)


def dispersion(params: BrusselatorParams, sigma, modes: Sequence[EigenMode]) -> list[DispersionPoint]:
    """Per-mode characteristic data of ``E_k``.

    ``sigma`` is either one intensity (both species) or a pair
    ``(sigma_u, sigma_v)``. Equal intensities use the closed form in
    ``(w, z)``; unequal ones take trace and determinant of ``E_k`` directly.
    """
    if len(modes) == 0:
        raise InvalidArgumentError("no modes given")
    coeffs = linearize(params)
    su, sv = _split_sigma(sigma)
    out = []
    for mode in modes:
        if su == sv:
            w, z = characteristic_coeffs(coeffs, params.d_u, params.d_v, mode.mu, su)
            pair = quadratic_roots(w, z)
        else:
            E = mode_matrices(coeffs, params.d_u, params.d_v, su, sv, mode).E_k
            w = float(E[0, 0] + E[1, 1])
            z = float(E[0, 0] * E[1, 1] - E[0, 1] * E[1, 0])
            pair = eig2(E)
        out.append(DispersionPoint(mode.k, mode.mu, float(w), float(z), pair))
    return out


def spectral_abscissa(params: BrusselatorParams, sigma, modes: Sequence[EigenMode]) -> np.ndarray:
    return np.array([p.lambda_re_max for p in dispersion(params, sigma, modes)])


def deterministic_unstable_band(params: BrusselatorParams, modes: Sequence[EigenMode]) -> frozenset[int]:
    """Modes with ``det(A_k) < 0``, i.e. the diffusion-driven (Turing) band."""
    coeffs = linearize(params)
    band = []
    for mode in modes:
        _, z = characteristic_coeffs(coeffs, params.d_u, params.d_v, mode.mu, 0.0)
        if z < 0:
            band.append(mode.k)
    if band:
        ks = sorted(m.k for m in modes)
        pos = [ks.index(k) for k in band]
        if pos != list(range(pos[0], pos[0] + len(pos))):
            raise ConsistencyError(f"unstable band is not contiguous: {band}")
    return frozenset(band)


# ---------------------------------------------------------------------------
# Noise-induced stabilisation


@dataclass(frozen=True)
class StabilityCertificate:
    sigma0: float
    omega: float | None
    mode_count_checked: int
    verdict: str  # "certified-stable" | "not-certified"
    max_lambda_re: float

    @property
    def certified(self) -> bool:
        return self.verdict == "certified-stable"


def certified_decay_rate(params: BrusselatorParams, sigma: float) -> float | None:
    """Guaranteed decay rate ``omega(sigma)``, or ``None`` when
    ``sigma**2 <= 2 (B - 1)`` and the bound does not apply."""
    s2 = float(sigma) ** 2
    if not s2 > 2.0 * (params.B - 1.0):
        return None
    T = linearize(params).trace_T
    return min(0.5 * (-T + s2), -params.B + 1.0 + 0.5 * s2)


def lemma1_certificate(params: BrusselatorParams, sigma: float, K: int = DEFAULT_MODE_COUNT,
                       L: float = 1.0) -> StabilityCertificate:
    """Certify ``Re spec(E_k) <= -omega`` for equal intensities ``sigma``.

    The analytic verdict is cross-checked against the computed spectrum of
    modes ``1..K``; a violation raises :class:`ConsistencyError`.
    """
    if not params.in_stable_regime:
        raise InvalidArgumentError(f"certificate needs 1 < B < 1 + A^2, got A={params.A}, B={params.B}")
    modes = neumann_eigenpairs(L, K)
    lam_max = float(spectral_abscissa(params, float(sigma), modes).max())
    sigma0 = math.sqrt(2.0 * (params.B - 1.0))
    omega = certified_decay_rate(params, sigma)
    if omega is None:
        return StabilityCertificate(sigma0, None, len(modes), "not-certified", lam_max)
    if lam_max > -omega + 1e-12:
        raise ConsistencyError(
            f"spectral abscissa {lam_max!r} exceeds certified bound {-omega!r} at sigma={sigma!r}"
        )
    return StabilityCertificate(sigma0, omega, len(modes), "certified-stable", lam_max)


@dataclass(frozen=True)
class CriticalSigma:
    sigma_crit: float
    k_max: int
    lambda_star: float


def critical_sigma_same(params: BrusselatorParams, K: int = DEFAULT_MODE_COUNT, L: float = 1.0,
                        modes: Sequence[EigenMode] | None = None) -> CriticalSigma:
    """Smallest equal intensity that makes every mode decay.

    Because equal noise shifts the whole spectrum by ``-sigma**2/2``, the
    threshold is ``sqrt(2 max(0, lambda*))`` with ``lambda*`` the largest
    deterministic growth rate over the modes.
    """
    if modes is None:
        modes = neumann_eigenpairs(L, K)
    rates = spectral_abscissa(params, 0.0, modes)
    i = int(np.argmax(rates))
    lam_star = float(rates[i])
    if i == len(modes) - 1 and len(modes) > 1:
        raise ModeTruncationError(
            f"growth rate still maximal at the last mode k={modes[i].k}; increase K"
        )
    return CriticalSigma(math.sqrt(2.0 * max(0.0, lam_star)), modes[i].k, lam_star)


def exact_mode_solution(mm: ModeMatrices, V0, t: float, W_t: float) -> np.ndarray:
    """``exp(E_k t) exp(Bn W_t) V0``; valid only for equal intensities."""
    if mm.sigma_u != mm.sigma_v:
        raise NonCommutingError("closed-form mode solution needs sigma_u == sigma_v")
    if t < 0:
        raise InvalidArgumentError("t must be >= 0")
    V0 = np.asarray(V0, dtype=float)
    return expm2(mm.E_k * t) @ V0 * math.exp(mm.sigma_u * W_t)


def mode_table(params: BrusselatorParams, modes: Iterable[EigenMode], sigma=0.0):
    """Convenience: ``(k, mu, lambda_re_max)`` arrays."""
    pts = dispersion(params, sigma, list(modes))
    return (
        np.array([p.k for p in pts]),
        np.array([p.mu for p in pts]),
        np.array([p.lambda_re_max for p in pts]),
    )
