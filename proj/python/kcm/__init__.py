"""Weakly asymmetric constrained exclusion process on a ring.

Exact quantities come back as ``fractions.Fraction``; pipelines return the
parsed JSON summary and the CSV text written by the ``kcm`` command line tool.
"""

import json
from fractions import Fraction

from . import _kcm
from ._kcm import (
    Error,
    InvalidInput,
    ModelParams,
    NoCluster,
    SizeLimit,
    Trajectory,
    bgp2_rhs_bound,
    estimate_mean_current,
    exact_mean_current,
    exchange_path,
    fit_power_law,
    gaussian_ou_covariance,
    is_blocked,
    ou_covariance_gaussian,
    run,
    sample_bernoulli,
    verify_gradient_condition,
    verify_stationarity,
)

__all__ = [
    "Error",
    "InvalidInput",
    "ModelParams",
    "NoCluster",
    "SizeLimit",
    "Trajectory",
    "asym_polynomials",
    "bad_box_bound",
    "bgp2_rhs_bound",
    "center_monomial",
    "estimate_mean_current",
    "exact_bad_box_probability",
    "exact_mean_current",
    "exchange_path",
    "fit_power_law",
    "flux_second",
    "gaussian_ou_covariance",
    "is_blocked",
    "ou_covariance_gaussian",
    "run",
    "run_pipeline",
    "sample_bernoulli",
    "verify_gradient_condition",
    "verify_stationarity",
]


def _polys(parts):
    return [{sites: Fraction(c) for sites, c in part.items()} for part in parts]


def asym_polynomials(m, rho, b):
    """Homogeneous parts of the centered antisymmetric current, lowest degree first."""
    return _polys(_kcm.asym_polynomials(m, rho, b))


def center_monomial(sites, rho):
    return _polys(_kcm.center_monomial(list(sites), rho))


def exact_bad_box_probability(rho, ell, m):
    return Fraction(_kcm.exact_bad_box_probability(rho, ell, m))


def bad_box_bound(rho, ell, m):
    return Fraction(_kcm.bad_box_bound(rho, ell, m))


def flux_second(m, b, rho):
    return Fraction(_kcm.flux_second(m, b, rho))


def run_pipeline(command, **settings):
    """Runs a CLI pipeline in process. Keyword names use underscores for dashes
    (n_traj for --n-traj); lists may be given as Python sequences."""
    flat = {}
    for key, value in settings.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        flat[key.replace("_", "-")] = str(value)
    summary, csv, passed = _kcm.run_pipeline(command, flat)
    return json.loads(summary), csv, passed
