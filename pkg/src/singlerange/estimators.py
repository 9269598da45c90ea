"""Derived linear outputs and the two range-only Kalman filters.

The squared-range measurement y is never filtered directly. Combining it
with its value at an anchor instant and the running input integral gives a
scalar that is exactly linear in the state:

* drift-free, regression on the initial position ("free_x0"):
      ybar = (y - y0 - ||I||^2) / 2  =  I^T x0
* drift-free, output on the current position ("free_xt"):
      ybar = (y - y0 + ||I||^2) / 2  =  I^T x(t)
* unknown constant current ("current"):
      ybar = y - y0 + ||I||^2  =  [-2 I^T, -2t, t^2, 0] z(t)

with I and t measured from the anchor. The 3-state filter uses the
"free_xt" form; the 8-state filter uses "current" on the augmented state
z = (r, r0.v_f, ||v_f||^2, v_f). Both filters use the information-form
gain K = (P^-1 + C^T R^-1 C)^-1 C^T R^-1 evaluated via Cholesky; loss of
positive definiteness raises instead of being silently regularized, and a
Joseph-form update is available for ill-conditioned runs.

Because every ybar form is an exact identity at any anchor, the anchor
measurement y0 can be replaced mid-run ("re-anchoring") to shed the
influence of an early outlier while the state estimate keeps its own
update dynamics.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from singlerange.observability import drift_matrices, output_row_current

SYMMETRY_TOL = 1e-10

OUTPUT_MODES = ("free_x0", "free_xt", "current")


class CovarianceError(RuntimeError):
    """Covariance matrix lost symmetry or positive definiteness."""

    def __init__(self, step, message):
        super().__init__(f"step {step}: {message}")
        self.step = step


def derived_output(mode, y, y_anchor, i_k, t_k):
    """Scalar linear output from a squared-range sample.

    i_k and t_k are the input integral and time measured from the anchor
    instant; y_anchor is the measurement taken there.
    """
    sq = float(np.dot(i_k, i_k))
    if mode == "free_x0":
        return 0.5 * (y - y_anchor - sq)
    if mode == "free_xt":
        return 0.5 * (y - y_anchor + sq)
    if mode == "current":
        return y - y_anchor + sq
    raise ValueError(f"unknown output mode {mode!r}")


@dataclass(frozen=True)
class DerivedOutput:
    """Anchored output map: fixed mode plus the current anchor sample."""

    mode: str
    y_anchor: float
    t_anchor: float
    i_anchor: np.ndarray  # raw input integral at the anchor instant

    def __post_init__(self):
        if self.mode not in OUTPUT_MODES:
            raise ValueError(f"unknown output mode {self.mode!r}")
        object.__setattr__(
            self, "i_anchor", np.asarray(self.i_anchor, dtype=float)
        )

    def relative(self, i_raw, t):
        """(integral, time) measured from the anchor."""
        return i_raw - self.i_anchor, t - self.t_anchor

    def value(self, y, i_raw, t):
        i_rel, t_rel = self.relative(i_raw, t)
        return derived_output(self.mode, y, self.y_anchor, i_rel, t_rel)

    def row(self, i_raw, t):
        """Measurement row for the filter state (3- or 8-vector)."""
        i_rel, t_rel = self.relative(i_raw, t)
        if self.mode == "current":
            return output_row_current(i_rel, t_rel)
        return i_rel


@dataclass(frozen=True)
class FilterState:
    """Estimate vector with covariance at step k.

    P must stay symmetric positive definite; the filter steps verify this
    where they factorize it and raise CovarianceError on failure.
    """

    xhat: np.ndarray
    P: np.ndarray
    k: int = 0

    def __post_init__(self):
        xhat = np.asarray(self.xhat, dtype=float)
        P = np.asarray(self.P, dtype=float)
        d = xhat.shape[0]
        if P.shape != (d, d):
            raise ValueError(f"P shape {P.shape} does not match state dim {d}")
        object.__setattr__(self, "xhat", xhat)
        object.__setattr__(self, "P", P)


@dataclass(frozen=True)
class LtiSystem8:
    """Augmented 8-state constant-current model and its discretization."""

    ts: float
    A: np.ndarray
    B: np.ndarray
    Ad: np.ndarray   # I + ts*A, determinant 1 (A nilpotent)
    Bd: np.ndarray   # ts*B

    @classmethod
    def build(cls, ts):
        A, B = drift_matrices()
        return cls(ts=ts, A=A, B=B, Ad=np.eye(8) + ts * A, Bd=ts * B)


def _as_cov(q, d):
    q = np.asarray(q, dtype=float)
    if q.ndim == 0:
        return q * np.eye(d)
    if q.ndim == 1:
        if q.shape[0] != d:
            raise ValueError(f"expected {d} variances, got {q.shape[0]}")
        return np.diag(q)
    if q.shape != (d, d):
        raise ValueError(f"covariance shape {q.shape} does not match dim {d}")
    return q


def _check_symmetry(P, step):
    defect = np.abs(P - P.T).max()
    if defect > SYMMETRY_TOL * max(np.abs(P).max(), 1e-300):
        raise CovarianceError(step, f"covariance asymmetry {defect:.3e}")
    return 0.5 * (P + P.T)


def _information_update(P, c, r, step, joseph):
    """Scalar-measurement update; returns (gain, posterior covariance).

    r = inf encodes an uninformative measurement (R^-1 = 0): zero gain.
    """
    d = len(c)
    if np.isinf(r):
        return np.zeros(d), P.copy()
    if joseph:
        s = float(c @ P @ c) + r
        if s <= 0.0:
            raise CovarianceError(step, f"innovation variance {s:.3e} <= 0")
        K = (P @ c) / s
        ikc = np.eye(d) - np.outer(K, c)
        post = ikc @ P @ ikc.T + r * np.outer(K, K)
        return K, 0.5 * (post + post.T)
    try:
        cf = cho_factor(P, lower=True)
        p_inv = cho_solve(cf, np.eye(d))
        m = p_inv + np.outer(c, c) / r
        m = 0.5 * (m + m.T)
        cf_m = cho_factor(m, lower=True)
        K = cho_solve(cf_m, c / r)
        post = cho_solve(cf_m, np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise CovarianceError(step, f"covariance not positive definite ({exc})")
    return K, 0.5 * (post + post.T)


def kf_free_step(state, v_k, i_next, ybar_next, q, r, joseph_update=False):
    """One predict/update cycle of the 3-state drift-free filter.

    Prediction adds the known position increment v_k and inflates the
    covariance by Q; the update uses the anchored integral i_next as the
    measurement row for the derived output ybar_next.
    """
    q = _as_cov(q, 3)
    x_pred = state.xhat + np.asarray(v_k, dtype=float)
    p_pred = _check_symmetry(state.P + q, state.k + 1)
    c = np.asarray(i_next, dtype=float)
    K, p_post = _information_update(p_pred, c, r, state.k + 1, joseph_update)
    x_post = x_pred + K * (ybar_next - c @ x_pred)
    return FilterState(x_post, p_post, state.k + 1)


def kf_current_step(state, sys, v_r_k, c_next, ybar_next, q, r,
                    joseph_update=False):
    """One predict/update cycle of the 8-state constant-current filter."""
    q = _as_cov(q, 8)
    z_pred = sys.Ad @ state.xhat + sys.Bd @ np.asarray(v_r_k, dtype=float)
    p_pred = _check_symmetry(sys.Ad @ state.P @ sys.Ad.T + q, state.k + 1)
    c = np.asarray(c_next, dtype=float)
    K, p_post = _information_update(p_pred, c, r, state.k + 1, joseph_update)
    z_post = z_pred + K * (ybar_next - c @ z_pred)
    return FilterState(z_post, p_post, state.k + 1)


def reanchor(anchor, y_new, t_new, i_raw_new, state=None):
    """Move the output anchor to a fresh measurement.

    Returns the updated (DerivedOutput, FilterState). The derived output
    behaves as if measurement had started at the new instant. In "current"
    mode the state component r0.v_f refers to r at the anchor, so it is
    re-expressed from the current estimates (first-order covariance
    propagation); the other components keep their meaning.
    """
    new_anchor = DerivedOutput(
        mode=anchor.mode,
        y_anchor=float(y_new),
        t_anchor=float(t_new),
        i_anchor=np.asarray(i_raw_new, dtype=float),
    )
    if state is None or anchor.mode != "current":
        return new_anchor, state
    z = state.xhat.copy()
    r_hat, vf_hat = z[0:3], z[5:8]
    jac = np.eye(8)
    jac[3, 0:3] = vf_hat
    jac[3, 3] = 0.0
    jac[3, 5:8] = r_hat
    z[3] = r_hat @ vf_hat
    p_new = jac @ state.P @ jac.T
    p_new = 0.5 * (p_new + p_new.T)
    # The remap makes the anchored-product component an exact function of
    # the others, so jac is singular; a machine-scale variance floor keeps
    # the covariance factorizable even under zero process noise.
    p_new[3, 3] += 1e-12 * (1.0 + np.trace(p_new))
    return new_anchor, FilterState(z, p_new, state.k)


def truth_z(trace, v_f):
    """Ground-truth augmented state sequence assembled from a trace."""
    if trace.r is None:
        raise ValueError("truth_z requires a current-model trace (r present)")
    v_f = np.asarray(v_f, dtype=float)
    n = len(trace.y)
    z = np.zeros((n, 8))
    z[:, 0:3] = trace.r
    z[:, 3] = trace.r[0] @ v_f
    z[:, 4] = v_f @ v_f
    z[:, 5:8] = v_f
    return z


@dataclass(frozen=True)
class FilterRun:
    """Trajectory of a filter over a trace, with truth-referenced errors."""

    mode: str
    t: np.ndarray
    state_estimates: np.ndarray   # (n+1, 3) or (n+1, 8)
    pos_estimates: np.ndarray     # (n+1, 3) position estimate in both modes
    err_norm: np.ndarray          # ||position estimate - true position||
    trace_p: np.ndarray           # trace of the covariance
    innovations: np.ndarray       # ybar - C xhat_pred (0 at k=0)
    final_state: FilterState
    vf_estimates: np.ndarray = None   # (n+1, 3), 8-state filter only
    vf_err: np.ndarray = None         # ||vf estimate - true vf||


def run_free_filter(trace, integral, x0_hat, p0, q, r, *,
                    joseph_update=False, reanchor_every=0):
    """Run the 3-state filter over a measured drift-free trace."""
    y, t, ii = trace.y, trace.times, integral.values
    n = len(y) - 1
    state = FilterState(np.asarray(x0_hat, dtype=float), _as_cov(p0, 3), 0)
    anchor = DerivedOutput("free_xt", y[0], t[0], ii[0])
    est = np.zeros((n + 1, 3))
    err = np.zeros(n + 1)
    tr_p = np.zeros(n + 1)
    innov = np.zeros(n + 1)
    est[0] = state.xhat
    err[0] = np.linalg.norm(state.xhat - trace.x[0])
    tr_p[0] = np.trace(state.P)
    for k in range(n):
        v = ii[k + 1] - ii[k]
        row = anchor.row(ii[k + 1], t[k + 1])
        ybar = anchor.value(y[k + 1], ii[k + 1], t[k + 1])
        innov[k + 1] = ybar - row @ (state.xhat + v)
        state = kf_free_step(state, v, row, ybar, q, r,
                             joseph_update=joseph_update)
        est[k + 1] = state.xhat
        err[k + 1] = np.linalg.norm(state.xhat - trace.x[k + 1])
        tr_p[k + 1] = np.trace(state.P)
        if reanchor_every and (k + 1) % reanchor_every == 0:
            anchor, state = reanchor(anchor, y[k + 1], t[k + 1], ii[k + 1],
                                     state)
    return FilterRun(
        mode="free", t=t, state_estimates=est, pos_estimates=est,
        err_norm=err, trace_p=tr_p, innovations=innov, final_state=state,
    )


def run_current_filter(trace, integral, x0_hat, vf_hat, p0, q, r, s, *,
                       v_f_true=None, joseph_update=False, reanchor_every=0):
    """Run the 8-state filter over a measured constant-current trace.

    The filter is initialized from a position guess x0_hat and current
    guess vf_hat; the anchored-product and speed-squared components are
    filled in consistently from those guesses.
    """
    s = np.asarray(s, dtype=float)
    y, t, ii = trace.y, trace.times, integral.values
    n = len(y) - 1
    sys = LtiSystem8.build(trace.ts)
    r0_hat = s - np.asarray(x0_hat, dtype=float)
    vf_hat = np.asarray(vf_hat, dtype=float)
    z0 = np.concatenate([r0_hat, [r0_hat @ vf_hat], [vf_hat @ vf_hat], vf_hat])
    state = FilterState(z0, _as_cov(p0, 8), 0)
    anchor = DerivedOutput("current", y[0], t[0], ii[0])
    est = np.zeros((n + 1, 8))
    pos = np.zeros((n + 1, 3))
    err = np.zeros(n + 1)
    tr_p = np.zeros(n + 1)
    innov = np.zeros(n + 1)
    vf_est = np.zeros((n + 1, 3))
    est[0] = state.xhat
    pos[0] = s - state.xhat[0:3]
    err[0] = np.linalg.norm(pos[0] - trace.x[0])
    tr_p[0] = np.trace(state.P)
    vf_est[0] = state.xhat[5:8]
    for k in range(n):
        v_r = (ii[k + 1] - ii[k]) / trace.ts
        row = anchor.row(ii[k + 1], t[k + 1])
        ybar = anchor.value(y[k + 1], ii[k + 1], t[k + 1])
        innov[k + 1] = ybar - row @ (sys.Ad @ state.xhat + sys.Bd @ v_r)
        state = kf_current_step(state, sys, v_r, row, ybar, q, r,
                                joseph_update=joseph_update)
        est[k + 1] = state.xhat
        pos[k + 1] = s - state.xhat[0:3]
        err[k + 1] = np.linalg.norm(pos[k + 1] - trace.x[k + 1])
        tr_p[k + 1] = np.trace(state.P)
        vf_est[k + 1] = state.xhat[5:8]
        if reanchor_every and (k + 1) % reanchor_every == 0:
            anchor, state = reanchor(anchor, y[k + 1], t[k + 1], ii[k + 1],
                                     state)
    vf_err = None
    if v_f_true is not None:
        vf_err = np.linalg.norm(vf_est - np.asarray(v_f_true, dtype=float),
                                axis=1)
    return FilterRun(
        mode="current", t=t, state_estimates=est, pos_estimates=pos,
        err_norm=err, trace_p=tr_p, innovations=innov, final_state=state,
        vf_estimates=vf_est, vf_err=vf_err,
    )
