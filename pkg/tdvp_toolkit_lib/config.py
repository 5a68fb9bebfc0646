"""Configuration of the TDVP Toolkit."""

import os


######## Basic ########

# Folder for experiment outputs (trajectory files, manifests, reports).
if "TDVP_OUTPUT_PATH" in os.environ:
    output_path = os.environ["TDVP_OUTPUT_PATH"]
else:
    output_path = r"./tdvp_output"

# Largest number of fermionic modes represented densely (Hilbert space 2^N).
dense_max_modes = 12

######## Integration ########

# Fixed RK4 step and sampling interval (time in units of 1/kappa).
default_dt = 1e-3
default_sample_interval = 0.05
default_t_final = 20.0

######## Tolerances ########

# Density-matrix invariants.
hermitian_atol = 1e-12
trace_atol = 1e-10
psd_atol = 1e-9
trace_drift_atol = 1e-9

# Lowest eigenvalue gap below which a ground state counts as degenerate.
degeneracy_atol = 1e-10

# Spectral floor of rho for the metric superoperators.
eigenvalue_floor = 1e-10

# Relative cutoff of the Gram pseudo-inverse and the abort bound of its condition number.
pinv_rcond = 1e-10
gram_max_condition = 1e12

# Eigenvalue excursions of i*Gamma beyond 1: clipped up to the first bound with a
# warning, aborted beyond the second.
physicality_clip = 1e-6
physicality_abort = 1e-3

# Operations needing rho^-1 reject Gaussian states with 1 - |lambda_j| below this.
near_pure_margin = 1e-8

# Central finite-difference step of numeric chart tangents.
fd_step = 1e-5

# Polynomial coefficients with a smaller modulus are dropped.
coefficient_atol = 1e-14

# Residual allowed when bringing a covariance matrix to standard form.
standard_form_atol = 1e-9

######## Output ########

# Norm used for d_rho and d_Gamma. Options: 'frobenius', 'spectral'.
default_norm = "frobenius"

csv_significant_digits = 17

# Output format of trajectory files. Options: 'csv', 'json-lines'.
default_output_format = "csv"
