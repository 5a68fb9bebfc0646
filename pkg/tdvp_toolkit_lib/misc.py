"""Miscellaneous functions."""

import os
import sys
import datetime
import logging

import numpy as np
import pytz

logging.basicConfig()


class ConfigError(ValueError):
    """Invalid experiment configuration (optionally tied to a line)."""

    def __init__(self, msg, lineno=None):
        if lineno is not None:
            msg = "line {}: {}".format(lineno, msg)
        super().__init__(msg)
        self.lineno = lineno


class DenseCapError(ValueError):
    """A system exceeds the configured dense-size cap."""


class DegenerateGroundStateError(ValueError):
    """The lowest eigenvalue of a Hamiltonian is degenerate."""


class NumericalAbort(RuntimeError):
    """An integrator or solver left its admissible numerical regime."""


def log(s):
    """A logging function.

    :param s: String to print (with the current date and time).
    """
    # Use UTC time for logging.
    utc_now = pytz.utc.localize(datetime.datetime.utcnow())
    utc_now_str = "{}/{}|{:02d}:{:02d}:{:02d}".format(
        utc_now.month, utc_now.day, utc_now.hour, utc_now.minute, utc_now.second
    )
    sys.stdout.write("{}: {}\n".format(utc_now_str, s))
    sys.stdout.flush()


def utc_timestamp():
    """Returns the current UTC time in ISO 8601 format."""
    return pytz.utc.localize(datetime.datetime.utcnow()).isoformat()


def ensure_dir(path):
    """Ensures that the specified directory exists.

    :param path: Path to the directory.
    """
    if not os.path.exists(path):
        os.makedirs(path)


def get_logger(name: str):
    logger = logging.getLogger(name)
    logger.setLevel(logging.INFO)
    return logger


def get_run_signature(mode, **kwargs):
    """Generates a signature for the specified run settings.

    :param mode: Run mode ('exact', 'gaussified', 'tdvp', 'compare').
    :param kwargs: Optional settings; 'alpha' is the only one used so far.
    :return: Generated signature, used as the stem of trajectory files.
    """
    run_sign = mode
    if kwargs.get("alpha") is not None:
        run_sign += "_alpha={:.3f}".format(kwargs["alpha"])
    return run_sign


def upper_indices(dim):
    """Row and column indices of the strictly upper triangle, row-major.

    :param dim: Matrix dimension.
    :return: Tuple (rows, cols) of 1D int ndarrays of length dim*(dim-1)/2.
    """
    return np.triu_indices(dim, k=1)


def antisymmetric_from_upper(x, dim):
    """Builds a real antisymmetric matrix from its strictly upper triangle.

    :param x: 1D ndarray with the upper-triangle entries (see upper_indices).
    :param dim: Matrix dimension.
    :return: dim x dim antisymmetric ndarray.
    """
    rows, cols = upper_indices(dim)
    if x.shape[0] != rows.shape[0]:
        raise ValueError(
            "Expected {} upper-triangle entries, got {}.".format(rows.shape[0], x.shape[0])
        )
    A = np.zeros((dim, dim), dtype=np.float64)
    A[rows, cols] = x
    A[cols, rows] = -x
    return A


def matrix_norm(A, norm="frobenius"):
    """Norm of a dense operator.

    :param A: 2D ndarray.
    :param norm: 'frobenius' (Hilbert-Schmidt) or 'spectral' (largest singular value).
    :return: The norm (float).
    """
    if norm == "frobenius":
        return float(np.linalg.norm(A, "fro"))
    elif norm == "spectral":
        return float(np.linalg.norm(A, 2))
    else:
        raise ValueError("Unknown norm: {}".format(norm))
