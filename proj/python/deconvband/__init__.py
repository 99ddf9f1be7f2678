"""Deconvolution density estimates and uniform confidence bands."""

import json

import numpy as np

from ._deconvband import (
    DataError,
    DegenerateEcfError,
    DomainError,
    Error,
    SingularityError,
    __version__,
    deconv_kernel,
    ecf,
    from_repeated,
    set_max_threads,
)
from . import _deconvband as _core

__all__ = [
    "DataError",
    "DegenerateEcfError",
    "DomainError",
    "Error",
    "SingularityError",
    "__version__",
    "band",
    "bandwidth",
    "coverage_study",
    "deconv_kernel",
    "ecf",
    "ecf_rate",
    "estimate",
    "from_repeated",
    "panel_band",
    "power_study",
    "set_max_threads",
]

_ARRAY_KEYS = {"x", "f_hat", "sigma_hat", "lower", "upper", "candidates", "distances"}


def _decode(text):
    def arrays(obj):
        return {k: np.asarray(v, dtype=float) if k in _ARRAY_KEYS else v for k, v in obj.items()}

    return json.loads(text, object_hook=arrays)


def _vec(values):
    return np.ascontiguousarray(values, dtype=float).ravel().tolist()


def estimate(y, eta, h, x, floor_sigma=True, quad_nodes=4097):
    """Density estimate and pointwise standard deviation on the nodes x."""
    return _decode(_core._estimate(_vec(y), _vec(eta), float(h), _vec(x), floor_sigma, quad_nodes))


def bandwidth(y, eta, x, h_pilot=None, J=20, rho=3.0):
    """Two-step bandwidth choice with its candidate grid and distances."""
    return _decode(_core._bandwidth(_vec(y), _vec(eta), _vec(x), h_pilot, J, rho))


def band(y, eta, x, tau=0.1, B=2500, seed=0, h=None, J=20, rho=3.0, floor_sigma=True, quad_nodes=4097):
    """Uniform band(s) at level 1 - tau; tau may be a scalar or a sequence.

    Returns a dict with 'estimate', 'bandwidth' (None for a fixed h) and
    'bands', one per tau in request order.
    """
    taus = [float(tau)] if np.isscalar(tau) else _vec(tau)
    return _decode(_core._band(_vec(y), _vec(eta), _vec(x), taus, B, seed, h, J, rho, floor_sigma, quad_nodes))


def panel_band(y1, y2, w1, w2, x, tau=0.1, theta=None, B=2500, seed=0, h=None, floor_sigma=True):
    """Band for the fixed-effect density of a two-period panel."""
    taus = [float(tau)] if np.isscalar(tau) else _vec(tau)
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if w1.ndim == 1:
        w1 = w1[:, None]
        w2 = w2[:, None]
    theta = None if theta is None else _vec(theta)
    text = _core._panel_band(_vec(y1), _vec(y2), w1.tolist(), w2.tolist(), theta, _vec(x), taus, B, seed, h,
                             floor_sigma)
    result = _decode(text)
    result["theta"] = np.asarray(result["theta"], dtype=float)
    return result


def coverage_study(model="1", n=500, signal_noise=2.0, levels=(0.80, 0.90, 0.95), reps=300, B=500, seed=1,
                   grid_n=64, floor_sigma=False):
    """Monte Carlo coverage of the band for one simulation design."""
    return json.loads(_core._coverage_study(str(model), n, signal_noise, _vec(levels), reps, B, seed, grid_n,
                                            floor_sigma))


def power_study(params=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5), family="mean", model="1", n=500, signal_noise=1.0,
                level=0.90, reps=300, B=500, seed=1):
    """Coverage of alternative normal densities by the estimated band."""
    return json.loads(_core._power_study(str(model), n, signal_noise, family, _vec(params), level, reps, B, seed))


def ecf_rate(law="laplace", n_list=(250, 1000, 4000, 16000), T=10.0, reps=50, seed=1, grid_nodes=2001):
    """Mean sup-error of the empirical characteristic function against n."""
    return json.loads(_core._ecf_rate(law, [int(v) for v in n_list], T, reps, seed, grid_nodes))
