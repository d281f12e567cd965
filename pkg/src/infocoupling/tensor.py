"""Kronecker lifting of coupling matrices to several letters.

The n-letter version of a memoryless channel has the n-fold Kronecker
power of the single-letter coupling matrix as its coupling matrix, with
letter 1 the slowest-varying index (matching ``np.kron``'s block
layout).  Tensor products of single-letter singular vectors are singular
vectors of the lift, with singular values multiplying, so the second
singular value never grows with the number of letters.  These routines
exist to verify exactly that, at materializable sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .channel import Dtm, Spectrum, compute_spectrum
from .errors import CapacityError, DimensionMismatchError

KRON_SIZE_CAP = 4096
MAX_LETTERS = 3


def kron(a: np.ndarray, b: np.ndarray, size_cap: int = KRON_SIZE_CAP) -> np.ndarray:
    """Kronecker product with a guard on the materialized size."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > size_cap or cols > size_cap:
        raise CapacityError(
            f"kron result would be {rows}x{cols}, above the cap {size_cap}"
        )
    return np.kron(a, b)


def kron_power(matrix: np.ndarray, n: int, size_cap: int = KRON_SIZE_CAP) -> np.ndarray:
    if n < 1:
        raise DimensionMismatchError("need at least one letter")
    return reduce(lambda acc, _: kron(acc, matrix, size_cap), range(n - 1), np.asarray(matrix, dtype=float))


@dataclass(frozen=True, eq=False)
class LiftedDtm:
    """An n-letter lift of a coupling matrix.

    The matrix is materialized only when it fits under the size cap;
    :meth:`apply` always works, multiplying by the base matrix one
    letter index at a time.
    """

    base: Dtm
    letters: int
    materialized: np.ndarray | None

    @property
    def matrix(self) -> np.ndarray:
        if self.materialized is None:
            raise CapacityError(
                f"{self.letters}-letter lift exceeds the materialization cap"
            )
        return self.materialized

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply the lift to a vector over the n-letter input alphabet
        without materializing the Kronecker power."""
        nx = self.base.input.alphabet_size
        ny = self.base.output.alphabet_size
        vec = np.asarray(vec, dtype=float)
        if vec.size != nx**self.letters:
            raise DimensionMismatchError(
                f"vector has {vec.size} entries, lift expects {nx**self.letters}"
            )
        tensor = vec.reshape((nx,) * self.letters)
        for axis in range(self.letters):
            tensor = np.tensordot(self.base.matrix, tensor, axes=([1], [axis]))
            tensor = np.moveaxis(tensor, 0, axis)
        assert tensor.shape == (ny,) * self.letters
        return tensor.reshape(-1)


def lift_dtm(dtm: Dtm, letters: int, size_cap: int = KRON_SIZE_CAP) -> LiftedDtm:
    if letters < 1:
        raise DimensionMismatchError("need at least one letter")
    nx = dtm.input.alphabet_size
    ny = dtm.output.alphabet_size
    if nx**letters <= size_cap and ny**letters <= size_cap:
        materialized = kron_power(dtm.matrix, letters, size_cap)
    else:
        materialized = None
    return LiftedDtm(base=dtm, letters=letters, materialized=materialized)


def kron_pair_residual(dtm: Dtm, i: int, j: int) -> float:
    """Residual of the product singular pair on the two-letter lift.

    ``v_i (x) v_j`` should be a right singular vector of the two-letter
    lift with singular value ``sigma_i * sigma_j`` and left vector
    ``w_i (x) w_j``; returns the Euclidean norm of the defect.
    """
    s = dtm.spectrum
    if not (0 <= i < len(s) and 0 <= j < len(s)):
        raise DimensionMismatchError("singular index out of range")
    lifted = lift_dtm(dtm, 2)
    v = np.kron(s.right_vectors[:, i], s.right_vectors[:, j])
    w = np.kron(s.left_vectors[:, i], s.left_vectors[:, j])
    sigma = float(s.singular_values[i] * s.singular_values[j])
    return float(np.linalg.norm(lifted.apply(v) - sigma * w))


def lifted_spectrum(dtm: Dtm, n: int, size_cap: int = KRON_SIZE_CAP) -> Spectrum:
    lifted = lift_dtm(dtm, n, size_cap)
    return compute_spectrum(lifted.matrix)


def second_singular_of_power(dtm: Dtm, n: int, size_cap: int = KRON_SIZE_CAP) -> float:
    """Second-largest singular value of the n-letter lift, by full SVD.

    Tensorization makes this equal to the single-letter second singular
    value for every ``n``; only ``n <= MAX_LETTERS`` is supported since
    the check is meaningful at desk scale only.
    """
    if not 1 <= n <= MAX_LETTERS:
        raise CapacityError(f"letter count must be in [1, {MAX_LETTERS}]")
    values = lifted_spectrum(dtm, n, size_cap).singular_values
    return float(values[1]) if values.size > 1 else 0.0


@dataclass(frozen=True, eq=False)
class ProductFormDecomposition:
    """Least-squares split of an n-letter weighted vector into single
    active letters.

    ``components[k]`` is the per-letter vector occupying slot ``k`` (all
    other slots filled with the reference direction); ``residual`` is the
    norm of the part outside the single-active-letter subspace.  The
    split itself is not unique (slots overlap in the pure reference
    direction); the minimum-norm solution is returned.
    """

    components: np.ndarray
    residual: float


def product_form_projector(psi: np.ndarray, base_v0: np.ndarray) -> ProductFormDecomposition:
    """Project an n-letter vector onto the span of single-active-letter
    products ``v0 (x) ... (x) c_k (x) ... (x) v0``."""
    psi = np.asarray(psi, dtype=float)
    v0 = np.asarray(base_v0, dtype=float)
    nx = v0.size
    n = round(math.log(psi.size, nx))
    if nx**n != psi.size:
        raise DimensionMismatchError(
            f"vector length {psi.size} is not a power of the base size {nx}"
        )
    if n > MAX_LETTERS:
        raise CapacityError(f"letter count {n} above the supported maximum {MAX_LETTERS}")
    columns = []
    eye = np.eye(nx)
    for k in range(n):
        factors = [v0] * n
        for j in range(nx):
            factors[k] = eye[:, j]
            columns.append(reduce(np.kron, factors))
    basis = np.stack(columns, axis=1)
    coeffs, _, _, _ = np.linalg.lstsq(basis, psi, rcond=None)
    residual = float(np.linalg.norm(psi - basis @ coeffs))
    return ProductFormDecomposition(
        components=coeffs.reshape(n, nx), residual=residual
    )
