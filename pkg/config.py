"""
Configuration settings for TiltStress
"""

import os


class Config:
    APP_NAME = "TiltStress"

    # Distribution construction
    NORMALIZATION_TOL = 1e-12

    # Tilt / solver tolerances
    KL_TOL = 1e-10
    FSD_TOL = 1e-12
    BOUNDARY_TOL = 1e-8

    # Root bracketing for lambda: start narrow, expand geometrically
    LAMBDA_BRACKET = (1e-3, 1e3)
    LAMBDA_BRACKET_LIMIT = (1e-6, 1e6)
    BRACKET_GROWTH = 10.0
    MAX_ITERATIONS = 200
    ROOT_XTOL = 1e-15
    ROOT_RTOL = 4e-15
    RATE_XTOL = 1e-300

    # Oracle scale
    ORACLE_MAX_ATOMS = 64
    BRUTE_FORCE_MAX_ATOMS = 4
    GRID_STEP_RANGE = (1e-4, 1e-1)
    FLOW_SATURATION_TOL = 1e-12

    # CLI defaults
    DEFAULT_SEED = 0
    DEFAULT_SCENARIOS = 1000
    DEFAULT_GRID = 0.01
    DEFAULT_INSTANCES = 100
    DEFAULT_EPS_TOL = 1e-6
    DEFAULT_LEVEL = 0.5

    # Logging
    LOG_LEVEL = os.environ.get("TILTSTRESS_LOG_LEVEL", "WARNING").upper()
    LOG_FILE = os.environ.get("TILTSTRESS_LOG_FILE")
    LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
