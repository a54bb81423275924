"""Regularized Gauss-Newton iteration for the penalty-augmented moment system."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import sparse

from .moment_system import penalty_constant

__all__ = [
    "SolverConfig",
    "SolveTrace",
    "SolveAbort",
    "tikhonov_step",
    "shifted_step",
    "normal_equation_step",
    "select_lambda",
    "lambda_schedule",
    "newton_decrement",
    "solve",
]


@dataclass
class SolverConfig:
    tol: float = 1e-8
    max_iters: int = 1000
    lambda_update_period: int = 30
    lambda_override: float | None = None
    penalty_A: float = 1e3
    stagnation_window: int = 5
    high_dim_mode: bool = False
    shifted_switch: float = 1e-2  # switch to the shifted step below this residual
    progress_window: int = 60  # also stagnate when this many iterations bring
    progress_factor: float = 0.99  # less than a 1% residual reduction

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveTrace:
    """Per-iteration residual norms, Newton decrement, penalty constant, lambda."""

    res_aug: list = field(default_factory=list)
    res: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    c: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    outcome: str = "iter_cap"
    final_res_aug: float = float("nan")
    final_res: float = float("nan")
    negative_decrements: int = 0

    @property
    def iterations(self):
        return len(self.res_aug)

    def record(self, res_aug, res, eta, c, lam):
        self.res_aug.append(float(res_aug))
        self.res.append(float(res))
        self.eta.append(float(eta))
        self.c.append(float(c))
        self.lam.append(float(lam))

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iter,res_aug,res,eta,c,lambda\n")
            for i in range(self.iterations):
                fh.write(
                    f"{i},{self.res_aug[i]:.17g},{self.res[i]:.17g},"
                    f"{self.eta[i]:.17g},{self.c[i]:.17g},{self.lam[i]:.17g}\n"
                )


class SolveAbort(RuntimeError):
    """Non-finite residual or step; carries the trace gathered so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _step_from_svd(U, s, Vt, R, lam, shifted):
    ur = U.T @ R
    tiny = np.finfo(float).eps * (s[0] if len(s) else 1.0)
    if shifted:
        denom = s + lam
        coef = np.where(denom > tiny, ur / np.where(denom > tiny, denom, 1.0), 0.0)
    else:
        denom = s * s + lam * lam
        coef = np.where(denom > tiny * tiny, s * ur / np.where(denom > 0, denom, 1.0), 0.0)
    return Vt.T @ coef


def tikhonov_step(J_aug, R_aug, lam):
    """Tikhonov-filtered least-squares step: ratios sigma^2/(sigma^2 + lambda^2).

    With lambda = 0 this is the pseudoinverse (plain Gauss-Newton) step.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    U, s, Vt = np.linalg.svd(np.asarray(J_aug, dtype=np.float64), full_matrices=False)
    return _step_from_svd(U, s, Vt, R_aug, lam, shifted=False)


def shifted_step(J_aug, R_aug, lam):
    """Singular-value-shifted step: coefficients (u_i'R)/(sigma_i + lambda).

    Preferred near the root, where the plain filter slows the final digits.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    U, s, Vt = np.linalg.svd(np.asarray(J_aug, dtype=np.float64), full_matrices=False)
    return _step_from_svd(U, s, Vt, R_aug, lam, shifted=True)


def normal_equation_step(J_aug, R_aug, lam):
    """Shifted normal-equation step (J'J + lambda I)^{-1} J'R, no SVD.

    Accepts dense or scipy.sparse J. Matches ``tikhonov_step`` under the
    correspondence lambda_normal = lambda_tikhonov^2.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if sparse.issparse(J_aug):
        G = (J_aug.T @ J_aug).toarray()
        rhs = J_aug.T @ R_aug
    else:
        J_aug = np.asarray(J_aug, dtype=np.float64)
        G = J_aug.T @ J_aug
        rhs = J_aug.T @ R_aug
    if lam == 0.0:
        step, *_ = np.linalg.lstsq(G, rhs, rcond=None)
        return step
    G[np.diag_indices_from(G)] += lam
    cf = sla.cho_factor(G, overwrite_a=True, check_finite=False)
    return sla.cho_solve(cf, rhs, check_finite=False)


def select_lambda(singular_values):
    """Regularization parameter from the bend of the singular-value spectrum.

    Takes the second central difference of log(sigma) and returns the singular
    value just below the first pronounced spike (above 5x the median absolute
    difference; falls back to the largest spike). Flat or short spectra yield
    the geometric mean of the extremes. The result is bounded by the extremal
    singular values by construction.
    """
    s = np.asarray(singular_values, dtype=np.float64)
    s = s[s > 0.0]
    if len(s) == 0:
        return 0.0
    s = s[s > s[0] * 1e-12]  # drop the numerical-rank tail
    if len(s) < 3:
        return float(np.sqrt(s[0] * s[-1]))
    logs = np.log(s)
    d2 = logs[2:] - 2.0 * logs[1:-1] + logs[:-2]
    mag = np.abs(d2)
    # a spike must beat the median-scaled threshold and be a decade-scale kink;
    # smoothly decaying spectra have no corner worth acting on
    prominence = np.log(10.0)
    threshold = max(5.0 * float(np.median(mag)), prominence)
    spikes = np.nonzero(mag > threshold)[0]
    if len(spikes):
        center = spikes[0] + 1
    elif mag.max() > prominence:
        center = int(np.argmax(mag)) + 1
    else:
        # no corner: the least-damping admissible value (equals the common
        # value, i.e. the geometric mean, on a flat spectrum)
        return float(s[-1])
    idx = min(center + 1, len(s) - 1)
    return float(s[idx])


def lambda_schedule(r_norm):
    """Piecewise regularization schedule keyed to the moment-residual norm."""
    r = float(r_norm)
    if r >= 500.0:
        return r / 10.0
    if r >= 200.0:
        return 50.0
    if r >= 20.0:
        return 10.0
    if r >= 2.0:
        return 1.0
    if r >= 0.2:
        return 0.1
    return max(r / 2.0, 1e-10)


def newton_decrement(step, J_aug, R_aug):
    """Decrement sqrt(step' J'R); clipped to 0 when the product turns negative."""
    g = J_aug.T @ R_aug
    val = float(np.dot(step, g))
    if val < 0.0:
        return 0.0, True
    return float(np.sqrt(val)), False


def _aug_residual_norm(system, dv, c, high_dim):
    from .domains import penalty_values

    if high_dim:
        R, _ = system.residual_and_vandermonde(dv)
    else:
        R = system.residual(dv)
    pv = penalty_values(system.domain, dv)
    return float(np.sqrt(np.sum(R * R) + c * c * np.sum(pv * pv)))


def solve(system, d0, cfg=None):
    """Iterate regularized Gauss-Newton until convergence, stagnation, or the cap.

    Returns the final decision vector and the solve trace. The penalty
    constant follows max(A, 1/||R||), floored at its running maximum so the
    sequence stays monotone. Full steps are taken, but a step that would blow
    up the augmented residual escalates lambda (x10, same factorization)
    before being re-taken.
    """
    cfg = cfg or SolverConfig()
    dv = d0.copy()
    trace = SolveTrace()
    c_run = 0.0
    lam = cfg.lambda_override
    stagnant = 0
    r_at_selection = None

    for it in range(cfg.max_iters + 1):
        if cfg.high_dim_mode:
            R, _ = system.residual_and_vandermonde(dv)
        else:
            R = system.residual(dv)
        if not np.all(np.isfinite(R)):
            raise SolveAbort(f"non-finite residual at iteration {it}", trace)
        r_norm = float(np.linalg.norm(R))
        c = max(penalty_constant(r_norm, cfg.penalty_A), c_run)
        c_run = c
        if cfg.high_dim_mode:
            R_aug, J_aug = system.augmented_sparse(dv, c)
        else:
            R_aug, J_aug = system.augmented(dv, c)
        rt_norm = float(np.linalg.norm(R_aug))

        if rt_norm < cfg.tol:
            trace.outcome = "converged"
            trace.final_res_aug = rt_norm
            trace.final_res = r_norm
            return dv, trace
        if it >= cfg.max_iters:
            break

        if cfg.high_dim_mode:
            lam = cfg.lambda_override if cfg.lambda_override is not None else lambda_schedule(r_norm)
            step = normal_equation_step(J_aug, R_aug, lam * lam)
        else:
            U, s, Vt = np.linalg.svd(J_aug, full_matrices=False)
            if cfg.lambda_override is not None:
                lam = cfg.lambda_override
            else:
                stale = r_at_selection is not None and r_norm < 0.02 * r_at_selection
                if lam is None or stale or it % cfg.lambda_update_period == 0:
                    # spectrum corner, floored by the residual-keyed schedule:
                    # the corner alone under-regularizes rank-deficient spectra
                    lam = max(select_lambda(s), lambda_schedule(r_norm))
                    r_at_selection = r_norm
            shifted = rt_norm < cfg.shifted_switch
            step = _step_from_svd(U, s, Vt, R_aug, lam, shifted=shifted)
            if cfg.lambda_override is None:
                trial = dv.copy()
                for _ in range(8):
                    trial.data[:] = dv.data - step
                    if _aug_residual_norm(system, trial, c, False) <= 10.0 * rt_norm:
                        break
                    lam *= 10.0
                    step = _step_from_svd(U, s, Vt, R_aug, lam, shifted=shifted)

        if not np.all(np.isfinite(step)):
            raise SolveAbort(f"non-finite step at iteration {it}", trace)
        eta, flipped = newton_decrement(step, J_aug, R_aug)
        if flipped:
            trace.negative_decrements += 1
        trace.record(rt_norm, r_norm, eta, c, lam)

        if rt_norm > 1e6 * (trace.res_aug[0] + 1.0):
            trace.outcome = "diverged"
            trace.final_res_aug = rt_norm
            trace.final_res = r_norm
            return dv, trace

        no_progress = (
            it >= cfg.progress_window
            and rt_norm >= 10.0 * cfg.tol
            and rt_norm > cfg.progress_factor * trace.res_aug[it - cfg.progress_window]
        )
        if (eta < cfg.tol and rt_norm >= 10.0 * cfg.tol) or no_progress:
            stagnant += 1
            if stagnant >= cfg.stagnation_window:
                trace.outcome = "stagnated"
                trace.final_res_aug = rt_norm
                trace.final_res = r_norm
                return dv, trace
        else:
            stagnant = 0

        dv.data -= step

    trace.outcome = "iter_cap"
    trace.final_res_aug = float(trace.res_aug[-1]) if trace.res_aug else float("nan")
    trace.final_res = float(trace.res[-1]) if trace.res else float("nan")
    return dv, trace
