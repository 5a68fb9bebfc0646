"""Runs an exact, Gaussified, TDVP or comparison experiment, or the TDVP
verification report.

Examples:
  python scripts/run_experiment.py compare --out out/hubbard
  python scripts/run_experiment.py tdvp --config my.ini --alpha 0.25,0.5,0.75
  python scripts/run_experiment.py verify-theorem1 --seed 7

See docs/output_format.md for a description of the written files.
"""

import os
import sys

from tdvp_toolkit_lib import experiment
from tdvp_toolkit_lib import misc

# Get the base name of the file without the .py extension
file_name = os.path.splitext(os.path.basename(__file__))[0]
logger = misc.get_logger(file_name)

# PARAMETERS (can be overwritten by the command line arguments below).
################################################################################
p = {
    # Experiment config file (INI-like). None = Hubbard model with L=4, J=1,
    # u=4, mu=-2, kappa=1.
    "config": None,
    # Output folder; None = [output] directory of the config file, or
    # config.output_path without one.
    "out": None,
    # Seed of random models, states and verification cases.
    "seed": None,
    # Comma-separated list of alphas of the TDVP metric.
    "alpha": None,
    # Time step and final time (None = values of the config file).
    "dt": None,
    "t_final": None,
}
################################################################################


# Command line arguments.
# ------------------------------------------------------------------------------
parser = experiment.get_parser(p)
args = parser.parse_args()
p.update(vars(args))

misc.log("-----------")
misc.log("Parameters:")
for k, v in p.items():
    misc.log("- {}: {}".format(k, v))
misc.log("-----------")

status = experiment.run_params(p)
logger.info("Exit status: {}".format(status))
sys.exit(status)
