import os

# Path to the root directory
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Path to outputs
OUTPUT_DIR = os.path.join(ROOT_DIR, "outputs")
# Path to design optimisation results directory inside outputs directory
DESIGN_OUTPUTS_DIR = os.path.join(OUTPUT_DIR, "design_outputs")
# Name of the design optimisation results file
DESIGN_RESULTS_FILE_PATH = os.path.join(DESIGN_OUTPUTS_DIR, "design_trials.csv")

# Path to errors directory inside outputs directory
ERRORS_DIR_NAME = "errors"
ERRORS_DIR = os.path.join(OUTPUT_DIR, ERRORS_DIR_NAME)
# Error file name written by the command line front end
CLI_ERROR_FILE_NAME = "cli_error.txt"
CLI_ERROR_FILE_PATH = os.path.join(ERRORS_DIR, CLI_ERROR_FILE_NAME)

# Paths inside the source directory
# Path to source directory
SRC_DIR = os.path.join(ROOT_DIR, "src")
# Path to config directory
CONFIG_DIR = os.path.join(SRC_DIR, "config")
# Path to the bundled reference device configuration
SYSTEM_CONFIG_FILE_PATH = os.path.join(CONFIG_DIR, "reference_device.cfg")
# Path to run settings (seed, Monte-Carlo and sweep defaults)
RUN_CONFIG_FILE_PATH = os.path.join(CONFIG_DIR, "run_config.json")
# Path to geometry design search-space spec
DESIGN_TUNING_CONFIG_FILE_PATH = os.path.join(CONFIG_DIR, "design_tuning.json")
