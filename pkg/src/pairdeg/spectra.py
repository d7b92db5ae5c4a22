"""Complex-symmetric eigendecomposition, c-product normalization and continuation.

For a complex-symmetric matrix the left eigenvector of an eigenpair is the
transpose (not the conjugate) of the right one, so all biorthogonality here
uses the bilinear c-product  b(u, v) = sum_k u_k v_k.  Eigenvectors are
normalized to b(u, u) = 1 except near eigenvector coalescence, where |b| of
the Hermitian-normalized vector drops below the threshold ``tau_c`` and the
vector is flagged self-orthogonal and left with unit 2-norm instead.

Continuation along paths in the coupling plane matches states between
neighbouring samples by eigenvalue proximity only; eigenvector overlap is
deliberately not used because merging vectors become numerically
indistinguishable near an exceptional point while their eigenvalues still
separate linearly along the paths studied here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EigensolverError, MatchingAmbiguityError
from .model import MatrixFamily, as_family

__all__ = [
    "Spectrum",
    "CutTable",
    "Matching",
    "eigendecompose",
    "c_normalize",
    "match_states",
    "continue_spectrum",
    "spectrum_along",
    "branch_slopes",
    "canonical_order",
]

DEFAULT_TAU_C = 1e-6
RESIDUAL_BOUND = 1e-9
MATCH_AMBIGUITY_TOL = 1e-12
EXHAUSTIVE_MATCH_LIMIT = 7


def bilinear(u: np.ndarray, v: np.ndarray) -> complex:
    """c-product sum_k u_k v_k (no conjugation)."""
    return complex(u @ v)


def canonical_order(eigenvalues: np.ndarray, im_tol: float = 1e-8) -> np.ndarray:
    """Index order: ascending Im, with Re breaking ties inside Im clusters.

    Eigenvalues whose imaginary parts differ by no more than
    ``im_tol * max(1, max|E|)`` are treated as one cluster and ordered by
    ascending real part.  The loose-tolerance variant is what reference-point
    labeling near a degeneracy uses.
    """
    e = np.asarray(eigenvalues)
    scale = max(1.0, float(np.max(np.abs(e))) if e.size else 1.0)
    atol = im_tol * scale
    order = np.argsort(e.imag, kind="stable")
    out = []
    k = 0
    while k < len(order):
        j = k + 1
        while j < len(order) and e.imag[order[j]] - e.imag[order[j - 1]] <= atol:
            j += 1
        cluster = order[k:j]
        cluster = cluster[np.lexsort((e.imag[cluster], e.real[cluster]))]
        out.extend(cluster.tolist())
        k = j
    return np.array(out, dtype=int)


@dataclass
class Spectrum:
    """Eigendecomposition of H(g) at one coupling value.

    ``eigenvectors`` holds one state per column. ``self_orthogonality`` is the
    c-norm b(v, v) of each Hermitian-normalized vector, recorded before any
    rescaling; ``self_orthogonal`` flags entries with |b| <= tau_c.
    """

    g: complex
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    self_orthogonality: np.ndarray
    self_orthogonal: np.ndarray = field(default=None)
    c_normalized: bool = False

    def __post_init__(self):
        if self.self_orthogonal is None:
            self.self_orthogonal = np.zeros(len(self.eigenvalues), dtype=bool)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def permuted(self, perm) -> "Spectrum":
        perm = np.asarray(perm, dtype=int)
        return Spectrum(
            g=self.g,
            eigenvalues=self.eigenvalues[perm],
            eigenvectors=self.eigenvectors[:, perm],
            self_orthogonality=self.self_orthogonality[perm],
            self_orthogonal=self.self_orthogonal[perm],
            c_normalized=self.c_normalized,
        )


def eigendecompose(H: np.ndarray, g: complex = None, im_tol: float = 1e-8) -> Spectrum:
    """Full eigensystem of a dense complex matrix, canonically ordered.

    Residuals are required to satisfy ||H u - E u|| <= 1e-9 ||H||_F for every
    returned pair; LAPACK failures and out-of-tolerance pairs raise
    EigensolverError naming the offending coupling.
    """
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise EigensolverError("matrix has non-finite entries", g=g)
    try:
        eigenvalues, vectors = np.linalg.eig(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}", g=g) from exc
    scale = np.linalg.norm(H)
    residual = np.linalg.norm(H @ vectors - vectors * eigenvalues[None, :], axis=0)
    if scale > 0 and np.any(residual > RESIDUAL_BOUND * scale):
        raise EigensolverError(
            f"eigenpair residual {residual.max():.3e} exceeds "
            f"{RESIDUAL_BOUND:.0e} * ||H||",
            g=g,
        )
    order = canonical_order(eigenvalues, im_tol=im_tol)
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    b = np.einsum("ij,ij->j", vectors, vectors)
    return Spectrum(
        g=complex(g) if g is not None else 0j,
        eigenvalues=eigenvalues,
        eigenvectors=vectors,
        self_orthogonality=b,
    )


def _fix_gauge(v: np.ndarray) -> np.ndarray:
    """Flip the residual +-1 so the largest component's arg lies in (-pi/2, pi/2]."""
    a = v[int(np.argmax(np.abs(v)))]
    if a.real < 0 or (a.real == 0 and a.imag < 0):
        return -v
    return v


def c_normalize(spectrum: Spectrum, tau_c: float = DEFAULT_TAU_C) -> Spectrum:
    """Scale eigenvectors to b(u, u) = 1, guarding against self-orthogonality.

    Within numerically degenerate eigenvalue clusters the vectors are first
    c-orthogonalized (Gram-Schmidt under the bilinear form) so that a diabolic
    pair is represented by a c-orthonormal basis rather than an arbitrary
    LAPACK mixture; the orthogonalization is skipped for vectors already
    inside the self-orthogonality guard, which is the defective (EP-like)
    situation.  Vectors with |b| <= tau_c keep unit 2-norm and are flagged.
    The remaining sign freedom is fixed by pushing the largest-magnitude
    component's argument into (-pi/2, pi/2].
    """
    V = spectrum.eigenvectors.astype(complex).copy()
    e = spectrum.eigenvalues
    n = spectrum.dim
    # Hermitian-normalize first (LAPACK already does, but keep it exact).
    V /= np.linalg.norm(V, axis=0)[None, :]

    scale = max(1.0, float(np.max(np.abs(e))))
    cluster_tol = 1e-9 * scale
    k = 0
    while k < n:
        j = k + 1
        while j < n and abs(e[j] - e[k]) <= cluster_tol:
            j += 1
        if j - k > 1:
            for a in range(k, j):
                for b_ in range(k, a):
                    nb = bilinear(V[:, b_], V[:, b_])
                    if abs(nb) <= tau_c:
                        continue
                    V[:, a] = V[:, a] - V[:, b_] * (bilinear(V[:, b_], V[:, a]) / nb)
                norm = np.linalg.norm(V[:, a])
                if norm > 0:
                    V[:, a] /= norm
        k = j

    b_values = np.einsum("ij,ij->j", V, V)
    flagged = np.abs(b_values) <= tau_c
    for m in range(n):
        if not flagged[m]:
            V[:, m] = V[:, m] / np.sqrt(b_values[m])
        V[:, m] = _fix_gauge(V[:, m])
    return Spectrum(
        g=spectrum.g,
        eigenvalues=e.copy(),
        eigenvectors=V,
        self_orthogonality=b_values,
        self_orthogonal=flagged,
        c_normalized=True,
    )


class Matching(NamedTuple):
    """Result of pairing two spectra by eigenvalue proximity."""

    perm: tuple
    cost: float
    margin: float          # best alternative cost minus best cost
    ambiguous: bool        # margin below the ambiguity tolerance
    benign_tie: bool       # the ambiguity only permutes coincident eigenvalues


def _eigs_of(x) -> np.ndarray:
    return np.asarray(x.eigenvalues if isinstance(x, Spectrum) else x)


def match_states(prev, next, ambiguity_tol: float = MATCH_AMBIGUITY_TOL) -> Matching:
    """Permutation pi minimizing sum_m |E_m^prev - E_pi(m)^next|.

    For dimensions up to 7 the assignment is solved exhaustively, which also
    yields the gap to the best alternative; two assignments within
    ``ambiguity_tol`` of each other raise the ``ambiguous`` flag.  A tie whose
    alternatives only swap eigenvalues that coincide within 1e-9 of the
    spectral scale is additionally marked ``benign_tie``: no refinement of the
    step can (or needs to) resolve it.  Larger dimensions fall back to
    scipy's assignment solver without ambiguity detection.
    """
    ep = _eigs_of(prev)
    en = _eigs_of(next)
    if ep.shape != en.shape:
        raise ValueError("spectra have different dimensions")
    n = len(ep)
    cost = np.abs(ep[:, None] - en[None, :])
    if n > EXHAUSTIVE_MATCH_LIMIT:
        from scipy.optimize import linear_sum_assignment

        rows, cols = linear_sum_assignment(cost)
        perm = tuple(int(c) for c in cols[np.argsort(rows)])
        return Matching(perm, float(cost[rows, cols].sum()), np.inf, False, False)

    import itertools

    best_perm, best_cost = None, np.inf
    second_perm, second_cost = None, np.inf
    for p in itertools.permutations(range(n)):
        c = float(sum(cost[i, p[i]] for i in range(n)))
        if c < best_cost:
            second_perm, second_cost = best_perm, best_cost
            best_perm, best_cost = p, c
        elif c < second_cost:
            second_perm, second_cost = p, c
    margin = second_cost - best_cost
    ambiguous = bool(margin <= ambiguity_tol)
    benign = False
    if ambiguous and second_perm is not None:
        # A tie is unresolvable-but-harmless when the competing assignments
        # only permute eigenvalues that coincide -- on the target side, or on
        # the source side (leaving an exact degeneracy, the branch labels are
        # genuinely undefined and no step refinement can split them).
        scale = max(1.0, float(np.max(np.abs(en))), float(np.max(np.abs(ep))))
        tol = 1e-9 * scale
        orbit = [i for i in range(n) if best_perm[i] != second_perm[i]]
        benign_next = all(
            abs(en[best_perm[i]] - en[second_perm[i]]) <= tol for i in orbit
        )
        benign_prev = all(
            abs(ep[s] - ep[t]) <= tol for s in orbit for t in orbit
        )
        benign = benign_next or benign_prev
    return Matching(tuple(best_perm), best_cost, margin, ambiguous, benign)


@dataclass
class AmbiguityRecord:
    """One flagged matching ambiguity along a continuation."""

    g_from: complex
    g_to: complex
    margin: float
    benign: bool
    refined: int = 0


@dataclass
class ContinuationResult:
    spectra: list
    ambiguities: list

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([s.eigenvalues for s in self.spectra])


def _align_next(family, current: Spectrum, g_to, want_vectors, tau_c, depth,
                records, max_bisect):
    """One continuation step current -> g_to with recursive bisection."""
    nxt = eigendecompose(family.matrix(g_to), g=g_to)
    m = match_states(current.eigenvalues, nxt.eigenvalues)
    if m.ambiguous and not m.benign_tie:
        if depth >= max_bisect:
            raise MatchingAmbiguityError(
                f"state matching still ambiguous after {max_bisect} bisections "
                f"between g = {current.g} and g = {g_to} (margin {m.margin:.3e})"
            )
        g_mid = 0.5 * (current.g + g_to)
        mid = _align_next(family, current, g_mid, want_vectors, tau_c,
                          depth + 1, records, max_bisect)
        return _align_next(family, mid, g_to, want_vectors, tau_c,
                           depth + 1, records, max_bisect)
    if m.ambiguous:
        records.append(AmbiguityRecord(current.g, complex(g_to), m.margin,
                                       benign=True, refined=depth))
    aligned = nxt.permuted(m.perm)
    if not want_vectors:
        return aligned
    aligned = c_normalize(aligned, tau_c=tau_c)
    # Continue the sign gauge: make the Hermitian overlap with the previous
    # sample lie in the right half-plane.
    if current.c_normalized:
        for k in range(aligned.dim):
            ov = np.vdot(current.eigenvectors[:, k], aligned.eigenvectors[:, k])
            if ov.real < 0:
                aligned.eigenvectors[:, k] = -aligned.eigenvectors[:, k]
    return aligned


def continue_spectrum(model_or_family, points, want_vectors: bool = True,
                      tau_c: float = DEFAULT_TAU_C, start_im_tol: float = 1e-8,
                      max_bisect: int = 12) -> ContinuationResult:
    """Continue a labeled eigensystem through a sequence of couplings.

    Labels are assigned at the first point by canonical ordering (ascending
    Im with ``start_im_tol`` clustering) and then propagated by eigenvalue
    matching; flagged ambiguities trigger step bisection up to ``max_bisect``
    levels unless they are benign ties.  Traversing the reversed path returns
    states to their original labels.
    """
    family = as_family(model_or_family)
    points = [complex(p) for p in points]
    if len(points) < 1:
        raise ValueError("need at least one path point")
    records: list[AmbiguityRecord] = []
    start = eigendecompose(family.matrix(points[0]), g=points[0], im_tol=start_im_tol)
    if want_vectors:
        start = c_normalize(start, tau_c=tau_c)
    spectra = [start]
    for g_to in points[1:]:
        spectra.append(
            _align_next(family, spectra[-1], g_to, want_vectors, tau_c, 0,
                        records, max_bisect)
        )
    return ContinuationResult(spectra=spectra, ambiguities=records)


@dataclass
class CutTable:
    """Label-stable eigenvalue branches along a straight segment."""

    gs: np.ndarray
    energies: np.ndarray          # (samples, dim), column m is state m+1
    vectors: np.ndarray = None    # (samples, dim, dim) if requested
    ambiguities: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    def csv_rows(self):
        names = ["g_re", "g_im"]
        for m in range(self.dim):
            names += [f"E{m + 1}_re", f"E{m + 1}_im"]
        rows = []
        for g, row in zip(self.gs, self.energies):
            out = [g.real, g.imag]
            for E in row:
                out += [E.real, E.imag]
            rows.append(out)
        return names, rows

    def to_csv(self, path, meta=()):
        from ._csvio import write_csv

        names, rows = self.csv_rows()
        write_csv(path, names, rows, meta=meta)


def spectrum_along(model_or_family, start, stop, n: int,
                   want_vectors: bool = False, tau_c: float = DEFAULT_TAU_C,
                   start_im_tol: float = 1e-8, max_bisect: int = 12) -> CutTable:
    """Sample a straight segment in the coupling plane with stable labels."""
    if n < 2:
        raise ValueError("need at least two samples along a cut")
    points = np.linspace(complex(start), complex(stop), n)
    res = continue_spectrum(model_or_family, points, want_vectors=want_vectors,
                            tau_c=tau_c, start_im_tol=start_im_tol,
                            max_bisect=max_bisect)
    vectors = None
    if want_vectors:
        vectors = np.array([s.eigenvectors for s in res.spectra])
    return CutTable(
        gs=points,
        energies=res.eigenvalues,
        vectors=vectors,
        ambiguities=res.ambiguities,
    )


def semicircle(g0: complex, h: float, steps: int, upper: bool = True) -> np.ndarray:
    """Arc from g0 - h to g0 + h avoiding g0 (upper half by default)."""
    thetas = np.linspace(np.pi, 0.0, steps + 1)
    if not upper:
        thetas = -thetas
    return g0 + h * np.exp(1j * thetas)


def branch_slopes(model_or_family, g0: complex, h: float = 1e-4,
                  steps: int = 32, label_im_tol: float = 1e-3) -> np.ndarray:
    """Central-difference dE/d(delta) at g0 along the real direction.

    The two evaluation points g0 -+ h are connected by analytic continuation
    over a semicircle around g0, so the branch assignment is well defined even
    when the spectrum is degenerate at g0 itself (matching straight across the
    degeneracy is ambiguous at O(h^3)).  Labels are canonical at g0 - h with a
    loose imaginary-part clustering so nearly degenerate pairs are ordered by
    real part there.
    """
    path = semicircle(complex(g0), h, steps)
    res = continue_spectrum(model_or_family, path, want_vectors=False,
                            start_im_tol=label_im_tol)
    return (res.spectra[-1].eigenvalues - res.spectra[0].eigenvalues) / (2 * h)
