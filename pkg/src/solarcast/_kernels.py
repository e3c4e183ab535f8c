"""Hot inner loops, JIT-compiled with numba when available.

Set SOLARCAST_NUMBA=0 to force the pure-numpy fallbacks (same functions,
un-jitted).  ``benchmarks/bench_kernels.py`` times both paths.
"""

import os

import numpy as np


def _css_residuals_impl(w, ar_lags, ar_coefs, ma_lags, ma_coefs, intercept):
    """One-step residuals of a (seasonal) ARMA recursion on the differenced series.

    ar_lags/ar_coefs hold the expanded AR polynomial terms for lags >= 1 (signed
    as they appear on the observation side), ma_lags/ma_coefs the expanded MA
    polynomial terms for lags >= 1.  Pre-sample observations and errors are zero.
    """
    n = w.shape[0]
    eps = np.zeros(n)
    for t in range(n):
        acc = w[t] - intercept
        for j in range(ar_lags.shape[0]):
            lag = ar_lags[j]
            if t - lag >= 0:
                acc += ar_coefs[j] * w[t - lag]
        for j in range(ma_lags.shape[0]):
            lag = ma_lags[j]
            if t - lag >= 0:
                acc -= ma_coefs[j] * eps[t - lag]
        eps[t] = acc
    return eps


def _mlp_epoch_impl(x, y, order, w1, b1, w2, b2, vw1, vb1, vw2, vb2, lr, momentum):
    """One epoch of per-row backprop with momentum; updates weights in place.

    Hidden layer sigmoid, linear output, loss 0.5*(out - y)^2 per row.
    b2 and vb2 are 1-element arrays so the bias updates in place.
    Returns the sum of squared errors accumulated as rows were visited.
    """
    sse = 0.0
    for i in range(order.shape[0]):
        row = x[order[i]]
        target = y[order[i]]

        z = np.minimum(np.maximum(w1 @ row + b1, -500.0), 500.0)
        hidden = 1.0 / (1.0 + np.exp(-z))
        out = w2 @ hidden + b2[0]
        err = out - target
        sse += err * err

        grad_hidden = (err * w2) * hidden * (1.0 - hidden)
        vw2[:] = momentum * vw2 - lr * (err * hidden)
        vb2[0] = momentum * vb2[0] - lr * err
        vw1[:] = momentum * vw1 - lr * grad_hidden.reshape(-1, 1) * row.reshape(1, -1)
        vb1[:] = momentum * vb1 - lr * grad_hidden

        w2 += vw2
        b2[0] += vb2[0]
        w1 += vw1
        b1 += vb1
    return sse


def _numba_enabled() -> bool:
    if os.environ.get("SOLARCAST_NUMBA", "1").lower() in ("0", "false", "no"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()

if NUMBA_ENABLED:
    from numba import njit

    css_residuals = njit(cache=True)(_css_residuals_impl)
    mlp_epoch = njit(cache=True)(_mlp_epoch_impl)
else:
    css_residuals = _css_residuals_impl
    mlp_epoch = _mlp_epoch_impl
