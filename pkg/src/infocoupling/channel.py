"""Channel matrices, the divergence transition matrix, and its spectrum.

A discrete memoryless channel is stored column-stochastic: ``W[y, x] =
P(y | x)``, so pushing an input distribution through the channel is the
plain matrix-vector product ``P_Y = W @ P_X``.  At an operating point
``P_X`` with output ``P_Y`` the divergence transition matrix

    B = diag(sqrt(P_Y))^-1 @ W @ diag(sqrt(P_X))

maps weighted input perturbations to weighted output perturbations.  Its
full singular system is computed once at construction and cached; the
top pair is always ``sigma_0 = 1`` with right vector ``sqrt(P_X)`` and
left vector ``sqrt(P_Y)``, and every other singular value is at most 1.

Sign and ordering conventions (needed for bit-reproducible spectra):
singular values descend; within a tie (values within ``TIE_ATOL``) the
right vectors are ordered lexicographically; each right vector's first
component larger than ``SIGN_ATOL`` in magnitude is made positive, with
the left vector flipped along with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOutputError, DimensionMismatchError
from .prob import Distribution

COLUMN_SUM_ATOL = 1e-12
SIGN_ATOL = 1e-9
TIE_ATOL = 1e-10
LOSSLESS_ATOL = 1e-10


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Column-stochastic conditional law ``entries[y, x] = P(y | x)``."""

    entries: np.ndarray
    column_atol: float = COLUMN_SUM_ATOL

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or 0 in entries.shape:
            raise DimensionMismatchError("channel must be a non-empty 2-D matrix")
        if np.any(entries < 0) or np.any(entries > 1):
            raise DimensionMismatchError("channel entries must lie in [0, 1]")
        sums = entries.sum(axis=0)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > self.column_atol:
            raise DimensionMismatchError(
                f"channel columns must sum to 1; worst deviation {worst!r}"
            )
        object.__setattr__(self, "entries", _freeze(entries))

    @property
    def input_size(self) -> int:
        return self.entries.shape[1]

    @property
    def output_size(self) -> int:
        return self.entries.shape[0]


def output_distribution(w: ChannelMatrix, px: Distribution) -> Distribution:
    """Push ``px`` through the channel: ``P_Y = W @ P_X``."""
    if px.alphabet_size != w.input_size:
        raise DimensionMismatchError(
            f"input distribution has {px.alphabet_size} symbols, channel expects "
            f"{w.input_size}"
        )
    return Distribution(w.entries @ px.probs)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Full singular system of a coupling matrix.

    ``right_vectors`` and ``left_vectors`` hold the vectors as columns,
    index-aligned with ``singular_values``.
    """

    singular_values: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "singular_values", _freeze(self.singular_values))
        object.__setattr__(self, "right_vectors", _freeze(self.right_vectors))
        object.__setattr__(self, "left_vectors", _freeze(self.left_vectors))

    def __len__(self) -> int:
        return self.singular_values.size


def _canonical_sign(right: np.ndarray, left: np.ndarray):
    """Make the first component of each right vector exceeding SIGN_ATOL
    positive, flipping the paired left vector to preserve the product."""
    for j in range(right.shape[1]):
        col = right[:, j]
        big = np.nonzero(np.abs(col) > SIGN_ATOL)[0]
        if big.size and col[big[0]] < 0:
            right[:, j] = -right[:, j]
            left[:, j] = -left[:, j]
    return right, left


def _canonical_order(s: np.ndarray, right: np.ndarray, left: np.ndarray):
    """Stable descending order with lexicographic right-vector tie-break."""
    order = list(range(s.size))
    cols = [tuple(right[:, j]) for j in order]
    order.sort(key=lambda j: cols[j])
    order.sort(key=lambda j: -s[j])  # stable: ties keep lexicographic order
    # group genuine ties (within TIE_ATOL) and re-sort each group lexicographically
    final: list[int] = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(s[order[j + 1]] - s[order[i]]) <= TIE_ATOL:
            j += 1
        group = sorted(order[i : j + 1], key=lambda k: cols[k])
        final.extend(group)
        i = j + 1
    idx = np.array(final)
    return s[idx], right[:, idx], left[:, idx]


def compute_spectrum(matrix: np.ndarray, top_target: np.ndarray | None = None) -> Spectrum:
    """Deterministic full SVD under the package sign/ordering conventions.

    When the analytically known top right vector ``top_target`` is given,
    the top tied block (trivial in the generic case) is rotated so its
    first right vector is exactly the target direction, which the tie
    makes an equally valid choice; otherwise a tie at the top would
    surface an arbitrary basis of the invariant subspace.  The aligned
    column stays pinned at index 0.
    """
    u, s, vt = np.linalg.svd(np.asarray(matrix, dtype=float), full_matrices=False)
    right = vt.T.copy()
    left = u.copy()
    if top_target is not None:
        right, left = _align_top_block(s, right, left, top_target)
        r_rest, l_rest = _canonical_sign(right[:, 1:], left[:, 1:])
        s_rest, r_rest, l_rest = _canonical_order(s[1:], r_rest, l_rest)
        s = np.concatenate([s[:1], s_rest])
        right = np.concatenate([right[:, :1], r_rest], axis=1)
        left = np.concatenate([left[:, :1], l_rest], axis=1)
        return Spectrum(s, right, left)
    right, left = _canonical_sign(right, left)
    s, right, left = _canonical_order(s, right, left)
    return Spectrum(s, right, left)


def _align_top_block(s, right, left, target):
    """Rotate the top tied singular block so its first column equals the
    normalized projection of ``target`` (assumed to lie in the block)."""
    from scipy.linalg import null_space

    block = np.nonzero(s >= s[0] - TIE_ATOL)[0]
    v = right[:, block]
    w = left[:, block]
    coeff = v.T @ (target / np.linalg.norm(target))
    norm = np.linalg.norm(coeff)
    if norm < 1e-9:
        return right, left
    c0 = coeff / norm
    if block.size == 1:
        rot = np.array([[1.0 if c0[0] >= 0 else -1.0]])
    else:
        rot = np.column_stack([c0, null_space(c0[np.newaxis, :])])
    right[:, block] = v @ rot
    left[:, block] = w @ rot
    return right, left


@dataclass(frozen=True, eq=False)
class Dtm:
    """Divergence transition matrix at a fixed operating point.

    Holds the matrix ``B``, the operating input/output distributions, and
    the cached full spectrum.  Use :func:`build_dtm` to construct one.
    """

    matrix: np.ndarray
    input: Distribution
    output: Distribution
    channel: ChannelMatrix
    spectrum: Spectrum

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(self.matrix))

    @property
    def singular_values(self) -> np.ndarray:
        return self.spectrum.singular_values

    def right_vector(self, i: int) -> np.ndarray:
        return self.spectrum.right_vectors[:, i]

    def left_vector(self, i: int) -> np.ndarray:
        return self.spectrum.left_vectors[:, i]

    @property
    def second_singular_value(self) -> float:
        s = self.spectrum.singular_values
        return float(s[1]) if s.size > 1 else 0.0


def build_dtm(w: ChannelMatrix, px: Distribution) -> Dtm:
    """Build the divergence transition matrix and its cached spectrum.

    Requires a strictly positive operating point and a strictly positive
    output distribution (otherwise the output weighting is singular).
    """
    px.require_strictly_positive("operating point")
    py = output_distribution(w, px)
    if not py.strictly_positive:
        idx = int(np.argmin(py.probs))
        raise DegenerateOutputError(
            f"output symbol {idx} has zero probability at this operating point"
        )
    b = (w.entries * px.sqrt()[np.newaxis, :]) / py.sqrt()[:, np.newaxis]
    return Dtm(b, px, py, w, compute_spectrum(b, top_target=px.sqrt()))


@dataclass(frozen=True)
class TopPairReport:
    """Residuals of the analytically known top singular triple."""

    sigma0_err: float
    v0_err: float
    w0_err: float

    @property
    def max_err(self) -> float:
        return max(self.sigma0_err, self.v0_err, self.w0_err)


def verify_top_singular(dtm: Dtm) -> TopPairReport:
    """Check ``sigma_0 = 1``, ``v_0 = sqrt(P_X)``, ``w_0 = sqrt(P_Y)``.

    Vectors are sign-aligned before differencing, so the report measures
    subspace agreement rather than an arbitrary orientation.
    """
    s = dtm.spectrum
    v0 = s.right_vectors[:, 0]
    w0 = s.left_vectors[:, 0]
    v_ref = dtm.input.sqrt()
    w_ref = dtm.output.sqrt()
    if float(v0 @ v_ref) < 0:
        v0 = -v0
    if float(w0 @ w_ref) < 0:
        w0 = -w0
    return TopPairReport(
        sigma0_err=abs(float(s.singular_values[0]) - 1.0),
        v0_err=float(np.linalg.norm(v0 - v_ref)),
        w0_err=float(np.linalg.norm(w0 - w_ref)),
    )


def strong_dpi_coefficient(dtm: Dtm) -> float:
    """Square of the second singular value: the contraction factor bounding
    ``I(U;Y) / I(U;X)`` for couplings local around the operating point."""
    return dtm.second_singular_value**2


@dataclass(frozen=True, eq=False)
class RenyiCorrelation:
    """Maximal correlation with its achieving function pair.

    ``f`` and ``g`` are tables over the input and output alphabets with
    zero mean and unit variance under the operating distributions.
    ``ambiguous`` is set when the second singular value is tied within
    ``TIE_ATOL``, in which case the maximizing pair is not unique and the
    returned one is just the convention-ordered representative.
    """

    rho: float
    f: np.ndarray
    g: np.ndarray
    ambiguous: bool

    def __post_init__(self):
        object.__setattr__(self, "f", _freeze(self.f))
        object.__setattr__(self, "g", _freeze(self.g))


def renyi_correlation(dtm: Dtm) -> RenyiCorrelation:
    """Maximal correlation of the (input, output) pair at the operating point.

    Equals the second singular value of the coupling matrix; the optimal
    functions are the second singular vectors divided coordinate-wise by
    ``sqrt(P_X)`` and ``sqrt(P_Y)``.  They satisfy the fixed-point
    property ``E[g(Y) | X] = rho * f(X)`` (and symmetrically for ``f``).
    """
    s = dtm.spectrum
    if len(s) < 2:
        raise DimensionMismatchError("alphabets too small for a nontrivial correlation")
    rho = float(s.singular_values[1])
    f = s.right_vectors[:, 1] / dtm.input.sqrt()
    g = s.left_vectors[:, 1] / dtm.output.sqrt()
    ambiguous = len(s) > 2 and (rho - float(s.singular_values[2])) <= TIE_ATOL
    return RenyiCorrelation(rho=rho, f=f, g=g, ambiguous=ambiguous)
