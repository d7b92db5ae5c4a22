"""Characteristic polynomial, discriminant reconstruction and degeneracy roots.

Every entry of H(g) is affine in g, so the discriminant

    D(g) = prod_{m<m'} (E_m(g) - E_{m'}(g))^2

is an exact polynomial in g of degree at most M = n(n-1).  Its coefficients
are recovered by sampling D on an origin-centered circle at M+1 equispaced
points and inverting the discrete Fourier system; the full degeneracy set is
then the polynomial's root set, obtained from the companion matrix and
polished by Newton iteration.

Two independent evaluation routes are kept for cross-checking: the product of
squared eigenvalue gaps, and the Sylvester resultant of the characteristic
polynomial with its derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InterpolationError
from .model import as_family
from .spectra import eigendecompose

__all__ = [
    "char_poly",
    "poly_eval",
    "discriminant_at",
    "DiscriminantPoly",
    "discriminant_poly",
    "DegeneracyRoot",
    "find_degeneracies",
    "discriminant_grid",
]

DEFAULT_RADIUS = 0.5
DEFAULT_CLUSTER_FACTOR = 1e-4
HOLDOUT_TOL = 1e-6


def char_poly(H: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial of det(E*I - H), ascending coefficients.

    Uses the Faddeev-LeVerrier recurrence: only traces, matrix products and
    divisions by the integer step counter.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    N = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        M = H @ N
        c[n - k] = -np.trace(M) / k
        N = M + c[n - k] * np.eye(n)
    return c


def poly_eval(coeffs: np.ndarray, x: complex) -> complex:
    """Horner evaluation; ``coeffs`` ascending."""
    v = 0.0 + 0.0j
    for a in coeffs[::-1]:
        v = v * x + a
    return v


def poly_derivative(coeffs: np.ndarray) -> np.ndarray:
    c = np.asarray(coeffs)
    if len(c) <= 1:
        return np.zeros(1, dtype=c.dtype)
    return c[1:] * np.arange(1, len(c))


def _sylvester(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Sylvester matrix of two polynomials given by ascending coefficients."""
    dp, dq = len(p) - 1, len(q) - 1
    S = np.zeros((dp + dq, dp + dq), dtype=complex)
    p_desc, q_desc = p[::-1], q[::-1]
    for r in range(dq):
        S[r, r:r + dp + 1] = p_desc
    for r in range(dp):
        S[dq + r, r:r + dq + 1] = q_desc
    return S


def discriminant_from_charpoly(coeffs: np.ndarray) -> complex:
    """disc(p) = (-1)^{d(d-1)/2} Res(p, p') for monic p."""
    d = len(coeffs) - 1
    if d < 2:
        return 1.0 + 0j
    res = np.linalg.det(_sylvester(coeffs, poly_derivative(coeffs)))
    return (-1) ** (d * (d - 1) // 2) * res


def discriminant_from_eigenvalues(eigenvalues: np.ndarray) -> complex:
    e = np.asarray(eigenvalues)
    d = 1.0 + 0.0j
    for i in range(len(e)):
        for j in range(i + 1, len(e)):
            d *= (e[i] - e[j]) ** 2
    return complex(d)


def discriminant_at(model_or_family, g: complex, method: str = "product") -> complex:
    """D(g) by the squared-gap product or by the resultant route.

    Both routes agree to rounding; the resultant never touches eigenvalues,
    which makes it the independent oracle for the product path.
    """
    family = as_family(model_or_family)
    H = family.matrix(complex(g))
    if method == "product":
        return discriminant_from_eigenvalues(np.linalg.eigvals(H))
    if method == "resultant":
        return discriminant_from_charpoly(char_poly(H))
    raise ValueError(f"unknown method {method!r}")


@dataclass
class DiscriminantPoly:
    """Reconstructed discriminant polynomial in g (ascending coefficients)."""

    coefficients: np.ndarray
    radius: float
    holdout_residual: float
    is_real: bool

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, g: complex) -> complex:
        return poly_eval(self.coefficients, complex(g))

    def derivative(self) -> np.ndarray:
        return poly_derivative(self.coefficients)

    def scale_at(self, g: complex) -> float:
        """Evaluation scale sum_k |c_k| |g|^k (cancellation-free)."""
        a = np.abs(self.coefficients)
        r = abs(g)
        return float(poly_eval(a, r).real)

    @property
    def disc_norm(self) -> float:
        """Sup-norm bound of the polynomial on the interpolation circle."""
        return self.scale_at(self.radius)


def _trim_trailing(coeffs: np.ndarray, radius: float) -> np.ndarray:
    weights = np.abs(coeffs) * radius ** np.arange(len(coeffs))
    top = weights.max()
    deg = len(coeffs) - 1
    while deg > 0 and weights[deg] <= 1e-10 * top:
        deg -= 1
    return coeffs[: deg + 1]


def discriminant_poly(model_or_family, radius: float = DEFAULT_RADIUS,
                      holdout_tol: float = HOLDOUT_TOL,
                      holdout_points: int = 8) -> DiscriminantPoly:
    """Recover D(g) as an exact polynomial of degree <= n(n-1).

    Samples the squared-gap product at M+1 equispaced points on |g| = radius
    and inverts by FFT.  The reconstruction is validated at held-out
    pseudo-random points inside the circle; failure retries a schedule of
    larger and smaller radii before giving up.
    """
    family = as_family(model_or_family)
    n = family.dim
    M = n * (n - 1)
    if M == 0:
        return DiscriminantPoly(np.array([1.0 + 0j]), radius, 0.0, family.is_real)

    last_residual = np.inf
    for r0 in (radius, 2 * radius, 0.5 * radius, 4 * radius, 0.25 * radius):
        Ns = M + 1
        nodes = r0 * np.exp(2j * np.pi * np.arange(Ns) / Ns)
        samples = np.array(
            [discriminant_from_eigenvalues(np.linalg.eigvals(family.matrix(g)))
             for g in nodes]
        )
        coeffs = np.fft.fft(samples) / Ns / r0 ** np.arange(Ns)
        if family.is_real:
            # D(g*) = D(g)* forces real coefficients; rounding leaves dust.
            coeffs = coeffs.real.astype(complex)
        coeffs = _trim_trailing(coeffs, r0)
        poly = DiscriminantPoly(coeffs, r0, np.nan, family.is_real)

        rng = np.random.default_rng(20260808)
        worst = 0.0
        for _ in range(holdout_points):
            g = r0 * (0.15 + 0.75 * rng.random()) * np.exp(2j * np.pi * rng.random())
            direct = discriminant_from_eigenvalues(
                np.linalg.eigvals(family.matrix(g))
            )
            diff = abs(poly(g) - direct)
            if diff == 0.0:
                continue  # covers identically vanishing discriminants too
            scale = max(abs(direct), 1e-9 * poly.scale_at(g))
            worst = max(worst, diff / scale) if scale > 0 else np.inf
        if worst <= holdout_tol:
            poly.holdout_residual = worst
            return poly
        last_residual = min(last_residual, worst)
    raise InterpolationError(
        f"discriminant reconstruction failed hold-out validation "
        f"(best residual {last_residual:.3e} > {holdout_tol:.0e})"
    )


@dataclass
class DegeneracyRoot:
    """One degeneracy of H(g): location, multiplicity and diagnostics.

    ``involved_pair`` holds the 1-based labels (canonical order at g0) of the
    two closest eigenvalues; ``residual`` is |D(g0)| under the reconstructed
    polynomial and ``min_gap`` the closest eigenvalue distance found at g0.
    """

    g0: complex
    multiplicity: int
    residual: float
    involved_pair: tuple
    min_gap: float
    converged: bool = True

    def as_dict(self) -> dict:
        return {
            "g_re": self.g0.real,
            "g_im": self.g0.imag,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
            "pair": list(self.involved_pair),
        }


def _newton_polish(coeffs, roots, max_iter=60):
    dcoeffs = poly_derivative(coeffs)
    roots = np.array(roots, dtype=complex)
    converged = np.zeros(len(roots), dtype=bool)
    for k in range(len(roots)):
        r = roots[k]
        for _ in range(max_iter):
            d = poly_eval(dcoeffs, r)
            if d == 0:
                break
            step = poly_eval(coeffs, r) / d
            r = r - step
            if abs(step) <= 8 * np.finfo(float).eps * max(1.0, abs(r)):
                converged[k] = True
                break
        roots[k] = r
    return roots, converged


def _cluster(roots, rho):
    remaining = sorted(range(len(roots)), key=lambda i: (roots[i].imag, roots[i].real))
    clusters = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        changed = True
        while changed:
            changed = False
            for j in list(remaining):
                if any(abs(roots[j] - roots[m]) <= rho for m in members):
                    members.append(j)
                    remaining.remove(j)
                    changed = True
        clusters.append(members)
    return clusters


def _closest_gap_squared(family, g: complex) -> complex:
    e = np.linalg.eigvals(family.matrix(g))
    best = None
    for i in range(len(e)):
        for j in range(i + 1, len(e)):
            d = e[i] - e[j]
            if best is None or abs(d) < abs(best):
                best = d
    return best * best


def _gap_newton(family, g0: complex, multiplicity: int, step_bound: float,
                max_iter: int = 12) -> complex:
    """Polish a root directly on the squared gap of the closest pair.

    d(g) = (E_a - E_b)^2 is analytic through the degeneracy with a zero of
    order equal to the root multiplicity, so the multiplicity-aware Newton
    step m*d/d' converges quadratically and needs no branch bookkeeping
    (d is symmetric in the pair).  The reconstructed polynomial's roots carry
    its coefficient-rounding noise (~1e-8 here); the gap is evaluated from
    fresh eigenvalues and reaches machine accuracy, which the eigenvector
    coalescence measure used by classification requires.
    """
    g = complex(g0)
    h = 1e-6 * max(1.0, abs(g))
    for _ in range(max_iter):
        d0 = _closest_gap_squared(family, g)
        der = (_closest_gap_squared(family, g + h)
               - _closest_gap_squared(family, g - h)) / (2 * h)
        if der == 0:
            break
        step = multiplicity * d0 / der
        if abs(step) > step_bound:
            return complex(g0)
        g = g - step
        if abs(step) <= 1e-15 * max(1.0, abs(g)):
            break
    if abs(g - g0) > step_bound:
        return complex(g0)
    return g


def _gcd_degree(coeffs, radius: float) -> int:
    """Degree of gcd(D, D') from the numerical rank of their Sylvester matrix.

    The variable is rescaled by the interpolation radius first: the raw
    coefficients span ~12 orders of magnitude here and would drown the rank
    decision.  After scaling, the spectrum shows a multi-decade gap at the
    true deficiency; 1e-13 of the largest singular value sits inside it.
    """
    d = len(coeffs) - 1
    if d < 2:
        return 0
    scaled = np.asarray(coeffs) * radius ** np.arange(d + 1)
    scaled = scaled / np.abs(scaled).max()
    S = _sylvester(scaled, poly_derivative(scaled))
    sv = np.linalg.svd(S, compute_uv=False)
    rank = int(np.sum(sv > 1e-13 * sv[0]))
    return S.shape[0] - rank


def find_degeneracies(model_or_family, radius: float = DEFAULT_RADIUS,
                      cluster_factor: float = DEFAULT_CLUSTER_FACTOR,
                      poly: DiscriminantPoly = None,
                      with_diagnostics: bool = False):
    """All roots of D(g) with multiplicities: the complete degeneracy set.

    Roots come from the companion matrix of the reconstructed discriminant,
    are Newton-polished on D, and clustered with radius
    ``cluster_factor * radius``: double-precision coefficient rounding splits
    a true double root by roughly sqrt(eps * local scale / |D''|), which is
    of order 1e-5 here, so the cluster radius must sit above that.  Cluster
    centroids of multiplicity m are re-polished on the (m-1)-th derivative,
    where the root is simple again.  Multiplicities are cross-checked against
    the numerically estimated degree of gcd(D, D').
    """
    family = as_family(model_or_family)
    if poly is None:
        poly = discriminant_poly(family, radius=radius)
    coeffs = poly.coefficients
    if poly.degree < 1:
        return ([], {"gcd_degree": 0, "multiplicity_consistent": True}) \
            if with_diagnostics else []

    raw = np.roots(coeffs[::-1])
    raw, converged = _newton_polish(coeffs, raw)
    rho = cluster_factor * poly.radius
    clusters = _cluster(raw, rho)

    roots = []
    for members in clusters:
        pts = raw[members]
        mult = len(members)
        g0 = complex(np.mean(pts))
        ok = bool(np.all(converged[members]))
        if mult >= 2:
            # The (mult-1)-th derivative has a simple root at an exact
            # multiple root; Newton there sharpens the centroid.
            dk = coeffs
            for _ in range(mult - 1):
                dk = poly_derivative(dk)
            polished, conv = _newton_polish(dk, np.array([g0]))
            if conv[0] and abs(polished[0] - g0) <= 2 * rho:
                g0 = complex(polished[0])
        g0 = _gap_newton(family, g0, mult, step_bound=2 * rho)
        spec = eigendecompose(family.matrix(g0), g=g0)
        e = spec.eigenvalues
        pair, gap = (1, 2), np.inf
        for i in range(len(e)):
            for j in range(i + 1, len(e)):
                if abs(e[i] - e[j]) < gap:
                    gap = abs(e[i] - e[j])
                    pair = (i + 1, j + 1)
        roots.append(
            DegeneracyRoot(
                g0=g0,
                multiplicity=mult,
                residual=abs(poly(g0)),
                involved_pair=pair,
                min_gap=float(gap),
                converged=ok,
            )
        )
    roots.sort(key=lambda r: (r.g0.imag, r.g0.real))
    if not with_diagnostics:
        return roots
    gcd_deg = _gcd_degree(coeffs, poly.radius)
    excess = sum(r.multiplicity - 1 for r in roots)
    diagnostics = {
        "gcd_degree": gcd_deg,
        "multiplicity_excess": excess,
        "multiplicity_consistent": gcd_deg == excess,
        "degree": poly.degree,
        "holdout_residual": poly.holdout_residual,
    }
    return roots, diagnostics


def discriminant_grid(model_or_family, window, n_re: int, n_im: int,
                      threads: int = 1):
    """|D(g)| on a rectangular grid, row-major, by direct evaluation.

    ``window`` is (re_min, re_max, im_min, im_max).  Rows are computed
    independently (optionally in a thread pool) and assembled in index order
    so the output is deterministic.
    """
    family = as_family(model_or_family)
    re_min, re_max, im_min, im_max = window
    res = np.linspace(re_min, re_max, n_re)
    ims = np.linspace(im_min, im_max, n_im)

    def row(i):
        return [
            abs(discriminant_from_eigenvalues(
                np.linalg.eigvals(family.matrix(complex(x, ims[i])))))
            for x in res
        ]

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            grid = list(pool.map(row, range(n_im)))
    else:
        grid = [row(i) for i in range(n_im)]
    return res, ims, np.array(grid)
