"""Gaussian mutual information through covariance determinants.

Rates are in bits per channel use unless the log base is switched to nats
with :func:`use_log_base`.
"""

from __future__ import annotations

import contextlib
import contextvars
import math

import numpy as np

from .errors import DomainError

PSD_RTOL = 1e-12
SYM_RTOL = 1e-12

_log_base = contextvars.ContextVar("log_base", default=2.0)


def get_log_base() -> float:
    return _log_base.get()


def set_log_base(base) -> None:
    """Set the logarithm base for every rate: 2 (bits) or ``"e"`` (nats)."""
    _log_base.set(_parse_base(base))


@contextlib.contextmanager
def use_log_base(base):
    token = _log_base.set(_parse_base(base))
    try:
        yield
    finally:
        _log_base.reset(token)


def _parse_base(base) -> float:
    if base in ("e", "nats", math.e):
        return math.e
    if base in (2, "2", 2.0, "bits"):
        return 2.0
    raise DomainError(f"unsupported log base {base!r}; use 2 or 'e'")


def half_log1p(x: float) -> float:
    """0.5 * log(1 + x) in the current base."""
    return 0.5 * math.log1p(x) / math.log(get_log_base())


def check_covariance(m) -> np.ndarray:
    """Return ``m`` as a float array after checking symmetry and PSD-ness.

    Eigenvalues down to ``-1e-12 * max(diag)`` are accepted as rounding noise.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DomainError(f"covariance must be a non-empty square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise DomainError("covariance has non-finite entries")
    scale = max(float(np.abs(np.diag(a)).max()), np.finfo(float).tiny)
    if np.abs(a - a.T).max() > SYM_RTOL * scale:
        raise DomainError("covariance is not symmetric")
    if np.linalg.eigvalsh(a).min() < -PSD_RTOL * scale:
        raise DomainError("covariance is not positive semidefinite")
    return a


def log_det2(m) -> float:
    """log2 det(m) for a symmetric positive definite matrix, via Cholesky."""
    a = check_covariance(m)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise DomainError("matrix is not positive definite") from None
    return 2.0 * float(np.sum(np.log2(np.diag(chol))))


def _log_det(m) -> float:
    # log det in the current base
    return log_det2(m) / math.log2(get_log_base())


def conditional_entropy_gap(joint, n_cond: int, noise_vars) -> float:
    """I(X; Y | C) for jointly Gaussian (C, Y) with additive independent noise.

    ``joint`` is the covariance of ``(C, Y)`` with the conditioning variables
    first. Returns ``0.5 [log det joint - log det cov(C)] - 0.5 log prod(noise)``,
    i.e. h(Y|C) - h(Y|X, C) with the 2*pi*e factors cancelled.
    """
    joint = np.asarray(joint, dtype=float)
    h_y_given_c = _log_det(joint) - (_log_det(joint[:n_cond, :n_cond]) if n_cond else 0.0)
    h_noise = _log_det(np.diag(np.asarray(noise_vars, dtype=float)))
    return 0.5 * (h_y_given_c - h_noise)


def broadcast_mi_t3(P1, P2, N2, N3, alpha) -> float:
    """I(X1; Y2, Y3 | X2) with correlated Gaussian input X1 = alpha X2 + W.

    All gains are 1. Computed from the covariance of (X2, Y2, Y3), so the
    effect of the correlation enters through the determinants.
    """
    for name, v in (("P1", P1), ("P2", P2), ("N2", N2), ("N3", N3)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    pw = P1 - alpha**2 * P2
    if pw < -1e-12 * P1:
        raise DomainError(f"alpha^2 P2 = {alpha**2 * P2} exceeds P1 = {P1}: negative residual power")
    pw = max(pw, 0.0)
    # X1 = a X2 + W; Y2 = X1 + Z2; Y3 = X1 + X2 + Z3
    a = alpha
    c_x2_y2 = a * P2
    c_x2_y3 = (a + 1) * P2
    v_y2 = a * a * P2 + pw + N2
    v_y3 = (a + 1) ** 2 * P2 + pw + N3
    c_y2_y3 = a * (a + 1) * P2 + pw
    joint = np.array(
        [
            [P2, c_x2_y2, c_x2_y3],
            [c_x2_y2, v_y2, c_y2_y3],
            [c_x2_y3, c_y2_y3, v_y3],
        ]
    )
    return conditional_entropy_gap(joint, 1, [N2, N3])


def broadcast_mi_t4_beta(P1, N2, N3, N4, beta, P3=1.0, PW=1.0) -> float:
    """I(X1; Y2, Y3, Y4 | X2, X3) with relay inputs correlated as X2 = beta X3 + W.

    X1 is independent of the relays and all gains are 1. The value is taken
    from the joint covariance of (X2, X3, Y2, Y3, Y4), so ``beta`` genuinely
    enters the computation; it cancels only through the determinant algebra.
    ``P3`` and ``PW`` fix the relay powers (P2 = beta^2 P3 + PW).
    """
    for name, v in (("P1", P1), ("N2", N2), ("N3", N3), ("N4", N4), ("P3", P3), ("PW", PW)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    # rows of A map (X1, X3, W) -> (X2, X3, Y2, Y3, Y4)
    b = beta
    A = np.array(
        [
            [0.0, b, 1.0],          # X2
            [0.0, 1.0, 0.0],        # X3
            [1.0, 1.0, 0.0],        # Y2 = X1 + X3
            [1.0, b, 1.0],          # Y3 = X1 + X2
            [1.0, 1.0 + b, 1.0],    # Y4 = X1 + X2 + X3
        ]
    )
    src = np.diag([P1, P3, PW])
    joint = A @ src @ A.T + np.diag([0.0, 0.0, N2, N3, N4])
    return conditional_entropy_gap(joint, 2, [N2, N3, N4])


def broadcast_cut_capacity(net) -> float:
    """Rate across the cut isolating the source, with independent Gaussian inputs.

    This is 0.5 log(1 + P1 * sum_j gain(1, j) / N_j) over all receivers, the
    capacity the relay network approaches as the relay powers grow.
    """
    P1 = net.P(1)
    snr = sum(net.gain(1, j) * P1 / net.N(j) for j in net.receivers)
    return half_log1p(snr)
