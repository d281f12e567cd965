"""Solvers for linear information coupling problems.

Point to point, the best local coupling direction is just the second
right singular vector of the coupling matrix.  Broadcasting a common
message to K receivers turns this into a max-min over K quadratic forms
on the valid-perturbation plane,

    max { min_i tr(G_i M) :  M >= 0,  tr M = 1,  M v0 = 0 },

with ``G_i = B_i^T B_i``; this module solves it through the convex dual
``min_{w in simplex} lambda_max(Pi (sum_i w_i G_i) Pi)`` and recovers an
achieving ensemble of antipodal perturbation pairs from the optimal Gram
matrix.  For a common source feeding a multiple access channel the
per-transmitter coupling matrices stack side by side and a single
singular-vector computation answers the question, coherent combining
gain included.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from .channel import ChannelMatrix, Dtm, TIE_ATOL, build_dtm
from .errors import (
    BudgetError,
    DimensionMismatchError,
    InfeasibleError,
    InputMismatchError,
)
from .prob import (
    ConditionalFamily,
    Distribution,
    WeightedVector,
    kl_divergence,
)

ENSEMBLE_ATOL = 1e-9
GAP_TOL = 1e-7
SHARED_POINT_ATOL = 1e-10
DUAL_BUDGET = 10_000


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class PerturbationEnsemble:
    """An auxiliary law together with one weighted direction per value.

    Valid ensembles have unit average squared norm, every direction
    orthogonal to ``sqrt(P_X)``, and zero mean, which makes all the
    materialized conditionals valid distributions with the operating
    point as their exact mixture.
    """

    u_law: Distribution
    directions: tuple[WeightedVector, ...]
    epsilon: float

    def __post_init__(self):
        directions = tuple(self.directions)
        if len(directions) != self.u_law.alphabet_size:
            raise DimensionMismatchError("one direction per auxiliary value required")
        ref = directions[0].reference
        for d in directions:
            if d.reference is not ref and not np.array_equal(
                d.reference.probs, ref.probs
            ):
                raise InputMismatchError("ensemble directions use different references")
        pu = self.u_law.probs
        coords = np.stack([d.coords for d in directions])
        second_moment = float(pu @ np.sum(coords**2, axis=1))
        if abs(second_moment - 1.0) > ENSEMBLE_ATOL:
            raise InputMismatchError(
                f"ensemble second moment is {second_moment!r}, not 1"
            )
        v0 = ref.sqrt()
        overlap = float(np.max(np.abs(coords @ v0)))
        if overlap > ENSEMBLE_ATOL:
            raise InputMismatchError(
                f"a direction overlaps sqrt(P_X) by {overlap!r}"
            )
        mean = float(np.max(np.abs(pu @ coords)))
        if mean > ENSEMBLE_ATOL:
            raise InputMismatchError(f"ensemble mean deviates from 0 by {mean!r}")
        object.__setattr__(self, "directions", directions)

    @property
    def reference(self) -> Distribution:
        return self.directions[0].reference

    @property
    def cardinality(self) -> int:
        return self.u_law.alphabet_size

    def conditional_family(self, epsilon: float | None = None) -> ConditionalFamily:
        """Materialize the conditionals ``P_X + eps * sqrt(P_X) * psi_u``."""
        eps = self.epsilon if epsilon is None else epsilon
        base = self.reference.probs
        root = self.reference.sqrt()
        kernels = tuple(
            Distribution(base + eps * root * d.coords) for d in self.directions
        )
        return ConditionalFamily(self.u_law, kernels)

    def gram(self) -> np.ndarray:
        """Second-moment matrix ``sum_u P_U(u) psi_u psi_u^T``."""
        coords = np.stack([d.coords for d in self.directions])
        return (coords.T * self.u_law.probs) @ coords


def antipodal_pair_ensemble(psi: np.ndarray, ref: Distribution, epsilon: float) -> PerturbationEnsemble:
    """Binary equiprobable ensemble along ``+psi`` and ``-psi``."""
    psi = np.asarray(psi, dtype=float)
    psi = psi / np.linalg.norm(psi)
    return PerturbationEnsemble(
        u_law=Distribution(np.array([0.5, 0.5])),
        directions=(WeightedVector(psi, ref), WeightedVector(-psi, ref)),
        epsilon=epsilon,
    )


@dataclass(frozen=True, eq=False)
class P2PSolution:
    ensemble: PerturbationEnsemble
    rate: float  # nats
    sigma1: float
    ambiguous: bool


def solve_p2p(dtm: Dtm, epsilon: float) -> P2PSolution:
    """Optimal local coupling for a single receiver.

    The best direction is the second right singular vector; a binary
    equiprobable auxiliary along its antipodes satisfies every ensemble
    constraint by construction and achieves rate ``eps^2 sigma_1^2 / 2``
    nats.  When the second singular value is tied the returned maximizer
    is one of many and the ambiguity flag is set.
    """
    s = dtm.spectrum
    if len(s) < 2:
        raise DimensionMismatchError("alphabets too small for a coupling direction")
    sigma1 = float(s.singular_values[1])
    ambiguous = len(s) > 2 and sigma1 - float(s.singular_values[2]) <= TIE_ATOL
    ensemble = antipodal_pair_ensemble(s.right_vectors[:, 1], dtm.input, epsilon)
    rate = 0.5 * epsilon**2 * sigma1**2
    return P2PSolution(ensemble=ensemble, rate=rate, sigma1=sigma1, ambiguous=ambiguous)


def _require_shared_input(dtms) -> Distribution:
    if not dtms:
        raise InputMismatchError("need at least one coupling matrix")
    ref = dtms[0].input
    for d in dtms[1:]:
        if float(np.max(np.abs(d.input.probs - ref.probs))) > SHARED_POINT_ATOL:
            raise InputMismatchError("receivers do not share the input operating point")
    return ref


def valid_plane_basis(px: Distribution) -> np.ndarray:
    """Orthonormal basis of the valid-perturbation plane (orthogonal
    complement of ``sqrt(P_X)``), deterministic in ``px``."""
    v0 = px.sqrt()
    return null_space(v0[np.newaxis, :])


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


class _DualObjective:
    """Largest eigenvalue of the weighted quadratic-form combination,
    restricted to the valid plane; remembers the best weights seen."""

    def __init__(self, h_list):
        self.h_list = h_list
        self.best_value = math.inf
        self.best_w = None
        self.evaluations = 0

    def __call__(self, w: np.ndarray):
        self.evaluations += 1
        a = sum(wi * h for wi, h in zip(w, self.h_list))
        vals, vecs = np.linalg.eigh(a)
        value = float(vals[-1])
        if value < self.best_value:
            self.best_value = value
            self.best_w = np.array(w)
        return value, vecs[:, -1], vals, vecs


def _golden_section_dual(obj: _DualObjective, iterations: int = 90):
    """Minimize the K=2 dual over the weight t of the first system."""

    def g(t):
        return obj(np.array([t, 1.0 - t]))[0]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, 1.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(d)
    for t in (0.0, 1.0, 0.5 * (a + b)):
        g(t)


def _polyak_subgradient_dual(obj: _DualObjective, k: int, budget: int):
    """Projected subgradient with Polyak-style steps and a shrinking
    optimistic target; standard treatment for a sharp convex minimum."""
    w = np.full(k, 1.0 / k)
    value, top, _, _ = obj(w)
    delta = 0.5 * max(value, 1e-9)
    stall = 0
    for _ in range(budget - 1):
        subgrad = np.array([float(top @ h @ top) for h in obj.h_list])
        target = obj.best_value - delta
        norm2 = float(subgrad @ subgrad)
        if norm2 < 1e-30:
            break
        step = (value - target) / norm2
        w = _project_simplex(w - step * subgrad)
        previous_best = obj.best_value
        value, top, _, _ = obj(w)
        if obj.best_value < previous_best - 1e-15:
            stall = 0
        else:
            stall += 1
            if stall >= 25:
                delta *= 0.5
                stall = 0
                w = obj.best_w.copy()
                value, top, _, _ = obj(w)
        if delta < 1e-14 * max(obj.best_value, 1e-9):
            break


def _pairwise_polish_dual(obj: _DualObjective, passes: int = 6):
    """Golden-section sweeps over every coordinate pair of the simplex.

    A deterministic finisher for the subgradient phase: each sweep moves
    mass between two weights at a time, which is exact for the piecewise
    smooth dual along those segments."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    w = obj.best_w.copy()
    for _ in range(passes):
        before = obj.best_value
        for i in range(w.size):
            for j in range(i + 1, w.size):
                total = w[i] + w[j]
                if total < 1e-14:
                    continue

                def g(t):
                    trial = w.copy()
                    trial[i] = t
                    trial[j] = total - t
                    return obj(trial)[0]

                a, b = 0.0, total
                c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
                f1, f2 = g(c1), g(c2)
                for _ in range(40):
                    if f1 < f2:
                        b, c2, f2 = c2, c1, f1
                        c1 = b - invphi * (b - a)
                        f1 = g(c1)
                    else:
                        a, c1, f1 = c1, c2, f2
                        c2 = a + invphi * (b - a)
                        f2 = g(c2)
                w = obj.best_w.copy()
        if before - obj.best_value < 1e-15:
            break


def _sphere_grid(dim: int, resolution: int, rng_seed: int = 20_240_501) -> np.ndarray:
    """Deterministic spread of unit vectors in ``dim`` dimensions."""
    if dim == 1:
        return np.array([[1.0]])
    if dim == 2:
        theta = np.linspace(0.0, math.pi, resolution, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if dim == 3:
        pts = []
        n = resolution * resolution // 8
        golden = math.pi * (3.0 - math.sqrt(5.0))
        for i in range(n):
            z = 1.0 - 2.0 * (i + 0.5) / n
            r = math.sqrt(max(0.0, 1.0 - z * z))
            pts.append([r * math.cos(golden * i), r * math.sin(golden * i), z])
        return np.asarray(pts)
    rng = np.random.default_rng(rng_seed)
    pts = rng.standard_normal((resolution * dim, dim))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class BroadcastSolution:
    """Max-min common-message coupling across K receivers.

    ``value`` is the primal max-min, certified by ``dual_weights`` whose
    dual value exceeds it by at most ``gap``.  ``gram`` is the achieving
    second-moment matrix (PSD, unit trace, annihilates ``sqrt(P_X)``)
    and ``ensemble`` realizes it with antipodal direction pairs, so the
    auxiliary cardinality is at most twice the Gram rank.
    """

    value: float
    ensemble: PerturbationEnsemble
    dual_weights: np.ndarray
    dual_value: float
    gap: float
    gram: np.ndarray
    system_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dual_weights", _freeze(self.dual_weights))
        object.__setattr__(self, "gram", _freeze(self.gram))
        object.__setattr__(self, "system_values", _freeze(self.system_values))

    @property
    def cardinality(self) -> int:
        return self.ensemble.cardinality


def _primal_candidates(h_list, a_vals, a_vecs, seen, rng_seed: int = 7):
    """Candidate unit directions for the primal mixture.

    The optimal Gram matrix lives in the top eigenspace of the optimal
    dual combination, but the numerically found weights sit slightly off
    the exact optimum, splitting that eigenspace.  So the top two- and
    three-dimensional eigen-subspaces are gridded unconditionally, and
    the per-system top directions plus the eigenvectors collected during
    the descent are thrown in as well."""
    d = a_vecs.shape[0]
    cands = [a_vecs[:, j] for j in range(d)]
    if d >= 2:
        theta = np.linspace(0.0, math.pi, 720, endpoint=False)
        plane = a_vecs[:, -2:] @ np.stack([np.cos(theta), np.sin(theta)])
        cands.extend(plane.T)
    if d >= 3:
        sphere = _sphere_grid(3, 110)
        cands.extend((a_vecs[:, -3:] @ sphere.T).T)
    if d >= 4:
        lam = a_vals[-1]
        tol = max(1e-6 * max(abs(lam), 1.0), 1e-12)
        top = a_vecs[:, a_vals >= lam - tol]
        if top.shape[1] > 3:
            rng = np.random.default_rng(rng_seed)
            raw = rng.standard_normal((60 * top.shape[1], top.shape[1]))
            raw /= np.linalg.norm(raw, axis=1, keepdims=True)
            cands.extend((top @ raw.T).T)
    for h in h_list:
        vals, vecs = np.linalg.eigh(h)
        cands.append(vecs[:, -1])
        if d > 1:
            cands.append(vecs[:, -2])
    cands.extend(seen)
    mat = np.stack(cands)
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    return mat


def solve_broadcast(dtms, budget: int = DUAL_BUDGET, epsilon: float = 1.0) -> BroadcastSolution:
    """Best common-message coupling value across receivers sharing an input.

    Solves the Gram relaxation exactly: dual descent over receiver
    weights (golden section for two receivers, projected subgradient
    with Polyak steps beyond), then a small linear program over rank-one
    mixtures drawn from the optimal dual's top eigenspace.  Raises
    :class:`BudgetError` carrying the best gap when primal and dual fail
    to meet within ``GAP_TOL``.
    """
    k = len(dtms)
    if not 1 <= k <= 8:
        raise InputMismatchError("supported receiver counts are 1 through 8")
    px = _require_shared_input(dtms)
    q = valid_plane_basis(px)
    h_list = []
    for d in dtms:
        g = d.matrix.T @ d.matrix
        h = q.T @ g @ q
        h_list.append(0.5 * (h + h.T))

    obj = _DualObjective(h_list)
    seen: list[np.ndarray] = []
    if k == 1:
        _, top, _, _ = obj(np.array([1.0]))
        seen.append(top)
    elif k == 2:
        _golden_section_dual(obj)
    else:
        _polyak_subgradient_dual(obj, k, budget // 2)
        _pairwise_polish_dual(obj)

    _, top, a_vals, a_vecs = obj(obj.best_w)
    seen.append(top)

    cands = _primal_candidates(h_list, a_vals, a_vecs, seen)

    def mixture_lp(ratings: np.ndarray):
        """max_p min_i (ratings @ p), returning the mixture and the LP's
        own dual weights over the systems (the cutting-plane feedback)."""
        n_c = ratings.shape[1]
        c_vec = np.zeros(n_c + 1)
        c_vec[-1] = -1.0
        res = linprog(
            c_vec,
            A_ub=np.hstack([-ratings, np.ones((k, 1))]),
            b_ub=np.zeros(k),
            A_eq=np.hstack([np.ones((1, n_c)), np.zeros((1, 1))]),
            b_eq=np.ones(1),
            bounds=[(0, None)] * n_c + [(None, None)],
            method="highs",
        )
        if not res.success:
            raise BudgetError("primal mixture LP failed", best_gap=None)
        p = np.maximum(res.x[:n_c], 0.0)
        p /= p.sum()
        duals = np.abs(np.asarray(res.ineqlin.marginals))
        total = duals.sum()
        duals = np.full(k, 1.0 / k) if total < 1e-12 else duals / total
        return p, duals

    ratings = np.stack([np.einsum("jd,de,je->j", cands, h, cands) for h in h_list])
    best_primal = -math.inf
    best_m = None
    # cutting-plane endgame: the LP dual weights query the eigenvalue
    # oracle, whose top directions enter the candidate set as new cuts
    for _ in range(40):
        p, w_lp = mixture_lp(ratings)
        m_small = (cands.T * p) @ cands
        m_small = 0.5 * (m_small + m_small.T)
        m_small /= np.trace(m_small)
        primal = min(float(np.sum(h * m_small)) for h in h_list)
        if primal > best_primal:
            best_primal, best_m = primal, m_small
        if obj.best_value - best_primal <= 0.5 * GAP_TOL:
            break
        _, _, cut_vals, cut_vecs = obj(w_lp)
        new = cut_vecs[:, -2:].T if cut_vals.size > 1 else cut_vecs[:, -1:].T
        cands = np.vstack([cands, new])
        ratings = np.hstack(
            [ratings, np.stack([np.einsum("jd,de,je->j", new, h, new) for h in h_list])]
        )

    m_small = best_m
    dual_value = obj.best_value
    system_values = np.array([float(np.sum(h * m_small)) for h in h_list])
    primal_value = float(system_values.min())
    w_star = obj.best_w
    gap = dual_value - primal_value
    if gap > GAP_TOL:
        raise BudgetError(
            f"duality gap {gap!r} above tolerance after budget", best_gap=gap
        )

    gram_full = q @ m_small @ q.T
    gram_full = 0.5 * (gram_full + gram_full.T)

    mu, phi = np.linalg.eigh(m_small)
    keep = mu > 1e-12
    mu, phi = mu[keep], phi[:, keep]
    order = np.argsort(mu)[::-1]
    mu, phi = mu[order], phi[:, order]
    weights = np.repeat(mu / 2.0, 2)
    weights /= weights.sum()
    directions = []
    for j in range(mu.size):
        psi = q @ phi[:, j]
        psi /= np.linalg.norm(psi)
        directions.append(WeightedVector(psi, px))
        directions.append(WeightedVector(-psi, px))
    ensemble = PerturbationEnsemble(
        u_law=Distribution(weights), directions=tuple(directions), epsilon=epsilon
    )
    return BroadcastSolution(
        value=primal_value,
        ensemble=ensemble,
        dual_weights=w_star,
        dual_value=dual_value,
        gap=abs(gap),
        gram=gram_full,
        system_values=system_values,
    )


@dataclass(frozen=True, eq=False)
class SingleDirectionResult:
    """Best single coupling direction shared by all receivers.

    ``grid_gap`` certifies grid adequacy: the change in the best grid
    value when the angular resolution is doubled (nan when the search
    dimension forced multi-start ascent instead of exhaustive grids).
    """

    value: float
    psi: np.ndarray
    grid_gap: float

    def __post_init__(self):
        object.__setattr__(self, "psi", _freeze(self.psi))


def _min_quadratic(h_list, c: np.ndarray) -> float:
    return min(float(c @ h @ c) for h in h_list)


def _polish_on_circle(h_list, start: np.ndarray, half_width: float) -> np.ndarray:
    """Golden-section maximization of the worst quadratic image around a
    grid optimum on the unit circle."""
    theta0 = math.atan2(start[1], start[0])

    def f(theta: float) -> float:
        c = np.array([math.cos(theta), math.sin(theta)])
        return _min_quadratic(h_list, c)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = theta0 - half_width, theta0 + half_width
    c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
    f1, f2 = f(c1), f(c2)
    for _ in range(80):
        if f1 > f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = f(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = f(c2)
    theta = 0.5 * (a + b)
    best = max(
        [(f(theta), theta), (f(theta0), theta0)], key=lambda pair: pair[0]
    )[1]
    return np.array([math.cos(best), math.sin(best)])


def solve_broadcast_single_direction(
    dtms, grid_resolution: int = 360, certificate_tol: float = 1e-4
) -> SingleDirectionResult:
    """Max over unit directions (orthogonal to ``sqrt(P_X)``) of the worst
    receiver's squared image.

    Exhaustive angular grids up to a 3-dimensional search space, each
    followed by a local polish; multi-start local ascent beyond.  Raises
    :class:`BudgetError` when doubling the grid still moves the value by
    ``certificate_tol`` or more.
    """
    px = _require_shared_input(dtms)
    q = valid_plane_basis(px)
    h_list = []
    for d in dtms:
        g = d.matrix.T @ d.matrix
        h = q.T @ g @ q
        h_list.append(0.5 * (h + h.T))
    dim = q.shape[1]

    def value_of(c: np.ndarray) -> float:
        c = c / np.linalg.norm(c)
        return _min_quadratic(h_list, c)

    if dim == 1:
        c = np.array([1.0])
        best = value_of(c)
        psi = q[:, 0]
        return SingleDirectionResult(best, psi, 0.0)

    def best_on_grid(res: int):
        if dim == 2:
            theta = np.linspace(0.0, math.pi, res, endpoint=False)
            cands = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            theta = np.linspace(0.0, math.pi, res, endpoint=False)
            phi = np.linspace(0.0, math.pi, res, endpoint=False)
            tt, pp = np.meshgrid(theta, phi, indexing="ij")
            cands = np.stack(
                [np.cos(tt), np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp)], axis=-1
            ).reshape(-1, 3)
        best_val, best_c = -math.inf, None
        chunk = 500_000
        for start in range(0, cands.shape[0], chunk):
            part = cands[start : start + chunk]
            vals = np.min(
                np.stack([np.einsum("jd,de,je->j", part, h, part) for h in h_list]),
                axis=0,
            )
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val, best_c = float(vals[j]), part[j]
        return best_val, best_c

    def polish(start: np.ndarray, res: int) -> np.ndarray:
        if dim == 2:
            return _polish_on_circle(h_list, start, 1.5 * math.pi / res)
        opt = minimize(
            lambda c: -value_of(c),
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000},
        )
        cand = opt.x / np.linalg.norm(opt.x)
        return cand if value_of(cand) >= value_of(start) else start / np.linalg.norm(start)

    if dim <= 3:
        # certificate: the polished value must settle once the grid is
        # fine enough to land in the right basin
        res = grid_resolution if dim == 2 else min(grid_resolution, 180)
        doublings = 6 if dim == 2 else 2
        _, c = best_on_grid(res)
        best_c = polish(c, res)
        best_val = value_of(best_c)
        grid_gap = math.inf
        for _ in range(doublings):
            res *= 2
            _, c = best_on_grid(res)
            cand = polish(c, res)
            val = value_of(cand)
            grid_gap = abs(val - best_val)
            if val > best_val:
                best_val, best_c = val, cand
            if grid_gap < certificate_tol:
                break
        if grid_gap >= certificate_tol:
            raise BudgetError(
                f"grid value still moving by {grid_gap!r} after refinement",
                best_gap=grid_gap,
            )
    else:
        grid_gap = math.nan
        starts = []
        for h in h_list:
            _, vecs = np.linalg.eigh(h)
            starts.append(vecs[:, -1])
        rng = np.random.default_rng(11)
        extra = rng.standard_normal((8, dim))
        starts.extend(extra / np.linalg.norm(extra, axis=1, keepdims=True))
        best_val = -math.inf
        best_c = None
        for start in starts:
            cand = polish(start, 0)
            val = value_of(cand)
            if val > best_val + 1e-15 or (
                abs(val - best_val) <= 1e-15
                and best_c is not None
                and tuple(cand) < tuple(best_c)
            ):
                best_val, best_c = val, cand
    psi = q @ best_c
    psi /= np.linalg.norm(psi)
    big = np.nonzero(np.abs(psi) > 1e-9)[0]
    if big.size and psi[big[0]] < 0:
        psi = -psi
    return SingleDirectionResult(best_val, psi, grid_gap)


@dataclass(frozen=True, eq=False)
class DiagonalInstance:
    """A family of diagonal quadratic forms, plus the orthogonal change of
    basis that related the original singular systems (kept for
    provenance; the solver uses the diagonals only)."""

    thetas: tuple
    basis_change: np.ndarray | None = None

    def __post_init__(self):
        thetas = tuple(np.asarray(t, dtype=float) for t in self.thetas)
        if not thetas:
            raise DimensionMismatchError("need at least one diagonal system")
        m = thetas[0].size
        for t in thetas:
            if t.ndim != 1 or t.size != m:
                raise DimensionMismatchError("diagonal systems must share one length")
            if not np.all(np.isfinite(t)) or np.any(t < 0):
                raise InfeasibleError("diagonal entries must be finite and non-negative")
        if self.basis_change is not None:
            phi = np.asarray(self.basis_change, dtype=float)
            if float(np.max(np.abs(phi.T @ phi - np.eye(phi.shape[1])))) > 1e-10:
                raise DimensionMismatchError("basis change must be orthogonal")
            object.__setattr__(self, "basis_change", _freeze(phi))
        object.__setattr__(self, "thetas", tuple(_freeze(t) for t in thetas))


@dataclass(frozen=True, eq=False)
class DiagonalMaxMinResult:
    c_star: np.ndarray
    support: tuple
    value: float

    def __post_init__(self):
        object.__setattr__(self, "c_star", _freeze(self.c_star))


def diagonal_maxmin(inst: DiagonalInstance, target_levels=None) -> DiagonalMaxMinResult:
    """Optimal unit vector for a family of commuting (diagonal) systems.

    On squared coordinates every quadratic form is linear, so both the
    max-min problem and the equality-constrained variant (fix the first
    systems at ``target_levels``, maximize the last) are linear programs
    over the simplex.  A vertex optimum is requested, which bounds the
    support size by the number of systems.
    """
    squares = np.stack([t**2 for t in inst.thetas])
    k, m = squares.shape
    if target_levels is not None:
        levels = np.asarray(target_levels, dtype=float)
        if levels.size != k - 1:
            raise DimensionMismatchError(
                "need one target level per system except the last"
            )
        res = linprog(
            -squares[-1],
            A_eq=np.vstack([squares[:-1], np.ones((1, m))]),
            b_eq=np.concatenate([levels, [1.0]]),
            bounds=[(0, None)] * m,
            method="highs-ds",
        )
        if res.status == 2:
            raise InfeasibleError("no unit vector attains the requested levels")
        if not res.success:
            raise BudgetError("diagonal linear program failed")
        s = np.maximum(res.x, 0.0)
        value = float(squares[-1] @ s)
    else:
        c_vec = np.zeros(m + 1)
        c_vec[-1] = -1.0
        a_ub = np.hstack([-squares, np.ones((k, 1))])
        res = linprog(
            c_vec,
            A_ub=a_ub,
            b_ub=np.zeros(k),
            A_eq=np.hstack([np.ones((1, m)), np.zeros((1, 1))]),
            b_eq=np.ones(1),
            bounds=[(0, None)] * m + [(None, None)],
            method="highs-ds",
        )
        if not res.success:
            raise BudgetError("diagonal linear program failed")
        s = np.maximum(res.x[:m], 0.0)
        value = float(np.min(squares @ s))
    s /= s.sum()
    support = tuple(int(i) for i in np.nonzero(s > 1e-12)[0])
    return DiagonalMaxMinResult(c_star=np.sqrt(s), support=support, value=value)


# ---------------------------------------------------------------------------
# Multiple access with a common source
# ---------------------------------------------------------------------------


def mac_marginal_channels(joint: np.ndarray, input_dists) -> tuple[list[ChannelMatrix], Distribution]:
    """Per-transmitter channels seen through the others' operating points.

    ``joint[y, x_1, ..., x_k]`` is the conditional law of the output;
    transmitter ``i``'s effective channel averages the joint over every
    other transmitter's input distribution, and all of them share the
    output distribution at the operating point.
    """
    joint = np.asarray(joint, dtype=float)
    k = joint.ndim - 1
    if k < 1 or len(input_dists) != k:
        raise DimensionMismatchError("one input distribution per transmitter required")
    col_sums = joint.sum(axis=0)
    if float(np.max(np.abs(col_sums - 1.0))) > 1e-9:
        raise DimensionMismatchError("joint channel columns must sum to 1")
    channels = []
    for i in range(k):
        tmp = joint
        axis = 1
        for j in range(k):
            if j == i:
                axis += 1
                continue
            tmp = np.tensordot(tmp, input_dists[j].probs, axes=([axis], [0]))
        channels.append(ChannelMatrix(tmp))
    py = channels[0].entries @ input_dists[0].probs
    return channels, Distribution(py)


def build_mac_dtms(joint: np.ndarray, input_dists) -> list[Dtm]:
    channels, _ = mac_marginal_channels(joint, input_dists)
    return [build_dtm(w, px) for w, px in zip(channels, input_dists)]


@dataclass(frozen=True, eq=False)
class MacSolution:
    """Common-source coupling across transmitters of a multiple access
    channel.

    The per-transmitter coupling matrices stack into ``[B_1 ... B_k]``;
    after removing the known top pair (value ``sqrt(k)``, right vector
    the stacked ``sqrt(P_X_i)/sqrt(k)``), the next singular value is the
    common-source coupling coefficient.  Each block of the achieving
    stacked vector is orthogonal to its own ``sqrt(P_X_i)`` (residuals
    reported), and ``gain_db`` compares the common coefficient against
    the best private one.
    """

    sigma_common: float
    stacked_vector: np.ndarray
    block_orthogonality_residuals: np.ndarray
    gain_db: float
    private_sigmas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "stacked_vector", _freeze(self.stacked_vector))
        object.__setattr__(
            self,
            "block_orthogonality_residuals",
            _freeze(self.block_orthogonality_residuals),
        )
        object.__setattr__(self, "private_sigmas", _freeze(self.private_sigmas))

    def blocks(self, sizes) -> list[np.ndarray]:
        out = []
        start = 0
        for n in sizes:
            out.append(self.stacked_vector[start : start + n])
            start += n
        return out


def _require_shared_output(dtms) -> Distribution:
    ref = dtms[0].output
    for d in dtms[1:]:
        if float(np.max(np.abs(d.output.probs - ref.probs))) > SHARED_POINT_ATOL:
            raise InputMismatchError(
                "transmitters do not share the output distribution"
            )
    return ref


def solve_mac_common(dtms) -> MacSolution:
    """Common-source coupling coefficient from the stacked coupling matrix."""
    if not dtms:
        raise InputMismatchError("need at least one transmitter")
    _require_shared_output(dtms)
    from .channel import compute_spectrum  # local import to avoid cycle noise

    b0 = np.hstack([d.matrix for d in dtms])
    stacked_target = np.concatenate([d.input.sqrt() for d in dtms])
    spec = compute_spectrum(b0, top_target=stacked_target)
    sigma_common = float(spec.singular_values[1]) if len(spec) > 1 else 0.0
    psi = spec.right_vectors[:, 1] if len(spec) > 1 else np.zeros(b0.shape[1])
    residuals = []
    start = 0
    for d in dtms:
        n = d.input.alphabet_size
        residuals.append(float(psi[start : start + n] @ d.input.sqrt()))
        start += n
    private = np.array([d.second_singular_value for d in dtms])
    gain_db = 10.0 * math.log10(sigma_common**2 / float(np.max(private) ** 2))
    return MacSolution(
        sigma_common=sigma_common,
        stacked_vector=psi,
        block_orthogonality_residuals=np.array(residuals),
        gain_db=gain_db,
        private_sigmas=private,
    )


def mac_tensorization_check(dtms) -> float:
    """Gap between the two-letter and one-letter common-source coefficients.

    Stacks the letterwise Kronecker squares, removes each stack's top
    pair, and compares second singular values; tensorization makes the
    difference vanish.
    """
    from .channel import compute_spectrum
    from .tensor import kron

    _require_shared_output(dtms)
    b0 = np.hstack([d.matrix for d in dtms])
    b02 = np.hstack([kron(d.matrix, d.matrix) for d in dtms])
    target1 = np.concatenate([d.input.sqrt() for d in dtms])
    target2 = np.concatenate([np.kron(d.input.sqrt(), d.input.sqrt()) for d in dtms])
    s1 = compute_spectrum(b0, top_target=target1).singular_values
    s2 = compute_spectrum(b02, top_target=target2).singular_values
    one = float(s1[1]) if s1.size > 1 else 0.0
    two = float(s2[1]) if s2.size > 1 else 0.0
    return abs(two - one)


# ---------------------------------------------------------------------------
# Two-receiver rate-region split
# ---------------------------------------------------------------------------


def split_rate_region(dtm1: Dtm, dtm2: Dtm, splits) -> list[tuple[float, float, float]]:
    """Rate triples (common, private 1, private 2) for given budget splits.

    Each split ``(e0sq, e1sq, e2sq)`` budgets squared perturbation sizes
    for the common and private messages; the rates in nats are half the
    budget times the respective coupling coefficients.
    """
    lam = solve_broadcast([dtm1, dtm2]).value
    s1 = dtm1.second_singular_value**2
    s2 = dtm2.second_singular_value**2
    out = []
    for split in splits:
        e0, e1, e2 = (float(v) for v in split)
        if e0 < 0 or e1 < 0 or e2 < 0:
            raise InputMismatchError("split components must be non-negative")
        out.append((0.5 * e0 * lam, 0.5 * e1 * s1, 0.5 * e2 * s2))
    return out


def superposition_information(base: Distribution, families) -> float:
    """Exact input-side information of independently superposed families.

    ``families`` is a sequence of ``(u_law, directions, epsilon)``
    triples; each direction set is unweighted (per-symbol deltas), one
    row per auxiliary value, zero-mean under its law.  The superposed
    conditional for a joint value adds every family's scaled direction to
    the base, and the mixture over all joint values is exactly the base,
    so the mutual information is the weighted divergence sum.
    """
    law_list = [np.asarray(law, dtype=float) for law, _, _ in families]
    dir_list = [np.asarray(dirs, dtype=float) for _, dirs, _ in families]
    eps_list = [float(eps) for _, _, eps in families]
    total = 0.0
    for combo in itertools.product(*(range(law.size) for law in law_list)):
        weight = 1.0
        point = base.probs.copy()
        for law, dirs, eps, u in zip(law_list, dir_list, eps_list, combo):
            weight *= law[u]
            point = point + eps * dirs[u]
        if weight == 0.0:
            continue
        total += weight * kl_divergence(Distribution(point), base)
    return total
