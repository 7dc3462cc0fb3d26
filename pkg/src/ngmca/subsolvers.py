"""Exact solvers for the two constrained sub-problems of the alternation.

The S update minimizes 1/2 ||Y - A S||^2 + sum_i lambda_i ||s_i||_1 + i+(S)
with FISTA; the A update minimizes 1/2 ||Y - A S||^2 + i+(A) with the same
accelerated scheme and the orthant projection as prox. Both use the fixed
step 1/L with L the spectral norm of the relevant Gram matrix, and a
monotone restart so the returned objective never exceeds the start's.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError, ShapeMismatchError
from .linops import nonneg_project, spectral_norm
from .priors import hard_threshold, prox_nonneg_l1

SOFT = "soft"
HARD = "hard"

#: accuracy requested from power iteration for the step size; a 1e-6
#: relative error on L is immaterial for a gradient step and avoids
#: thousands of iterations when the top eigenvalues are nearly tied
LIPSCHITZ_TOL = 1e-6


@dataclass
class SubsolverOptions:
    max_inner_iterations: int = 80
    rel_tol: float = 1e-6
    thresholding_mode: str = SOFT

    def __post_init__(self):
        if self.max_inner_iterations < 1:
            raise ValueError("max_inner_iterations must be >= 1")
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be > 0")
        if self.thresholding_mode not in (SOFT, HARD):
            raise ValueError(f"unknown thresholding mode {self.thresholding_mode!r}")


def _check_finite(m: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(f"{what} iterate diverged (check the step size)")


def fista_update_S(y: np.ndarray, a: np.ndarray, lam, s0: np.ndarray,
                   opts: SubsolverOptions | None = None,
                   lipschitz: float | None = None) -> np.ndarray:
    """Accelerated forward-backward solve of the sparse S sub-problem.

    lam is one threshold per source row (a scalar broadcasts). In soft mode
    the prox is the non-negative soft threshold and the result is the
    minimizer within opts.rel_tol; in hard mode the same iteration runs with
    the hard threshold instead (no optimality guarantee, cap-based stop).
    An explicit lipschitz overrides the computed gradient constant; an
    underestimate voids the convergence guarantee.
    """
    opts = opts or SubsolverOptions()
    m, n = y.shape
    r = a.shape[1]
    if a.shape[0] != m or s0.shape != (r, n):
        raise ShapeMismatchError(
            f"Y {y.shape}, A {a.shape}, S0 {s0.shape} do not conform")
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (r,)).reshape(r, 1)

    gram = a.T @ a
    if lipschitz is None:
        lipschitz = spectral_norm(gram, tol=LIPSCHITZ_TOL,
                                  max_iterations=10000)
    if lipschitz == 0.0:
        return np.zeros_like(s0)
    aty = a.T @ y
    lam_step = lam / lipschitz
    soft_mode = opts.thresholding_mode == SOFT

    def objective(s):
        resid = y - a @ s
        return 0.5 * np.sum(resid * resid) + np.sum(lam * np.abs(s))

    def prox(x):
        if soft_mode:
            return prox_nonneg_l1(x, lam_step)
        return nonneg_project(hard_threshold(x, lam_step))

    s_prev = nonneg_project(s0)
    r_mat = s_prev
    t = 1.0
    obj_prev = objective(s_prev) if soft_mode else None

    for _ in range(opts.max_inner_iterations):
        cand = prox(r_mat - (gram @ r_mat - aty) / lipschitz)
        if soft_mode:
            obj_cand = objective(cand)
            if obj_cand > obj_prev:
                # momentum overshot: restart and take the plain FBS step
                t = 1.0
                cand = prox(s_prev - (gram @ s_prev - aty) / lipschitz)
                obj_cand = objective(cand)
            obj_prev = obj_cand
        _check_finite(cand, "S")
        diff = np.linalg.norm(cand - s_prev)
        denom = max(np.linalg.norm(s_prev), np.finfo(float).tiny)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        r_mat = cand + ((t - 1.0) / t_next) * (cand - s_prev)
        s_prev = cand
        t = t_next
        if soft_mode and diff <= opts.rel_tol * denom:
            break
        if not soft_mode and diff == 0.0:
            break
    return s_prev


def fista_update_A(y: np.ndarray, s: np.ndarray, a0: np.ndarray,
                   opts: SubsolverOptions | None = None) -> np.ndarray:
    """Accelerated projected-gradient solve of the non-negative A sub-problem."""
    opts = opts or SubsolverOptions()
    m, n = y.shape
    r = s.shape[0]
    if s.shape[1] != n or a0.shape != (m, r):
        raise ShapeMismatchError(
            f"Y {y.shape}, S {s.shape}, A0 {a0.shape} do not conform")

    gram = s @ s.T
    lipschitz = spectral_norm(gram, tol=LIPSCHITZ_TOL, max_iterations=10000)
    if lipschitz == 0.0:
        return nonneg_project(a0)
    yst = y @ s.T

    def objective(a):
        resid = y - a @ s
        return 0.5 * np.sum(resid * resid)

    a_prev = nonneg_project(a0)
    r_mat = a_prev
    t = 1.0
    obj_prev = objective(a_prev)

    for _ in range(opts.max_inner_iterations):
        cand = nonneg_project(r_mat - (r_mat @ gram - yst) / lipschitz)
        obj_cand = objective(cand)
        if obj_cand > obj_prev:
            t = 1.0
            cand = nonneg_project(a_prev - (a_prev @ gram - yst) / lipschitz)
            obj_cand = objective(cand)
        obj_prev = obj_cand
        _check_finite(cand, "A")
        diff = np.linalg.norm(cand - a_prev)
        denom = max(np.linalg.norm(a_prev), np.finfo(float).tiny)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        r_mat = cand + ((t - 1.0) / t_next) * (cand - a_prev)
        a_prev = cand
        t = t_next
        if diff <= opts.rel_tol * denom:
            break
    return a_prev
