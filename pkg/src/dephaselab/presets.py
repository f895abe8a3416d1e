"""Configuration presets for the seven published figures and special schemes.

Each figure preset is a configuration record (see :mod:`dephaselab.config`)
holding the caption parameters verbatim in ratio form.  Sampling densities
of the sweep axes are not given by the captions and are chosen here; the
``--grid`` option overrides them.
"""
from __future__ import annotations

import copy

CAPTION_DENSITY = {"type": "OhmicLike", "alpha": "1/2", "omega_s": 1.0}

_FIG12_SCHEME = {"theta0": "pi/8", "q": "Q", "theta1": "pi/2"}
_FIG12_CONTEXT = {"omega0_over_T": "1/100", "omega_s_over_T": "1/10"}
_OPEN_DZ = {"range": ["-2*pi", "2*pi"], "points": 719, "exclude": ["lo", "hi"]}

_FIGURES = {
    1: {
        "command": "evolve",
        "description": "|rho(t)/rho(0)| versus omega_s t for q = Q(1/100, pi/8)",
        "spectral": CAPTION_DENSITY,
        "context": _FIG12_CONTEXT,
        "scheme": _FIG12_SCHEME,
        "curves": [{"label": "a", "delta_zeta": 3.12}, {"label": "b", "delta_zeta": 3.11},
                   {"label": "c", "delta_zeta": 3.09}, {"label": "d", "delta_zeta": 3.20},
                   {"label": "e", "delta_zeta": 3.25}],
        "time": {"t_max": 0.6, "points": 601},
    },
    2: {
        "command": "evolve",
        "description": "short-time |rho(t)/rho(0)| for q = Q(1/100, pi/8)",
        "spectral": CAPTION_DENSITY,
        "context": _FIG12_CONTEXT,
        "scheme": _FIG12_SCHEME,
        "curves": [{"label": "a", "delta_zeta": 3.12}, {"label": "b", "delta_zeta": 3.11},
                   {"label": "c", "delta_zeta": 3.09}, {"label": "d", "delta_zeta": 3.20},
                   {"label": "e", "delta_zeta": 3.17}, {"label": "f", "delta_zeta": 3.16},
                   {"label": "g", "delta_zeta": 3.15}],
        "time": {"t_max": 0.005, "points": 501},
    },
    3: {
        "command": "initial",
        "description": "|rho(0)| over theta0 and delta_zeta, theta1 = theta2 = pi/2",
        "context": {"omega0_over_T": "1/1000", "omega_s_over_T": 1.0},
        "scheme": {"theta0": 0.0, "theta1": "pi/2", "theta2": "pi/2", "delta_zeta": 0.0},
        "sweep": {"theta0": {"range": [0.0, "pi"], "points": 181},
                  "delta_zeta": _OPEN_DZ},
    },
    4: {
        "command": "initial",
        "description": "|rho(0)| over omega0/T and theta0, theta1 = pi/2, theta2 in {0, pi}",
        "context": {"omega0_over_T": 1.0, "omega_s_over_T": 1.0},
        "scheme": {"theta0": 0.0, "theta1": "pi/2", "theta2": 0.0, "delta_zeta": "pi/4"},
        "curves": [{"label": "theta2=0", "theta2": 0.0}, {"label": "theta2=pi", "theta2": "pi"}],
        "sweep": {"omega0_over_T": {"range": [0.0, 10.0], "points": 200, "exclude": ["lo"]},
                  "theta0": {"range": [0.0, "pi"], "points": 181}},
    },
    5: {
        "command": "velocity",
        "description": "V/eta_{-1,0} of the maximal-velocity schemes over omega0/T and theta0",
        "context": {"omega0_over_T": 1.0, "omega_s_over_T": 1.0},
        "scheme": {"theta0": 0.0, "family": "SMV"},
        "sweep": {"omega0_over_T": {"range": [0.0, 5.0], "points": 200, "exclude": ["lo"]},
                  "theta0": {"range": [0.0, "pi/2"], "points": 90, "exclude": ["hi"]}},
    },
    6: {
        "command": "velocity",
        "description": "V/eta_{-1,0} over sin(theta1) and delta_zeta at theta0 = 9 pi/10",
        "context": {"omega0_over_T": "1/10000", "omega_s_over_T": 1.0},
        "scheme": {"theta0": "9*pi/10", "theta1": "pi/2", "theta2": "pi/2", "delta_zeta": 0.0},
        "sweep": {"sin_theta1": {"range": [0.0, 1.0], "points": 101},
                  "delta_zeta": _OPEN_DZ},
    },
    7: {
        "command": "velocity",
        "description": "V/eta_{-1,0} versus delta_zeta for several q at theta0 = 9 pi/10",
        "context": {"omega0_over_T": "1/10000", "omega_s_over_T": 1.0},
        "scheme": {"theta0": "9*pi/10", "theta2": "pi/2", "q": "Q", "delta_zeta": 0.0},
        "curves": [{"label": "a", "q": "Q"}, {"label": "b", "q": "4/5"},
                   {"label": "c", "q": "1/2"}, {"label": "d", "q": "1/10"}],
        "sweep": {"delta_zeta": _OPEN_DZ},
    },
}

FIGURE_COMMANDS = {n: rec["command"] for n, rec in _FIGURES.items()}


def figure_config(number):
    """Configuration record of figure ``number`` (1 to 7)."""
    try:
        rec = _FIGURES[int(number)]
    except (KeyError, ValueError):
        raise KeyError(f"no preset for figure {number!r}; choose 1-7") from None
    out = copy.deepcopy(rec)
    out["figure"] = int(number)
    return out


# maximal initial coherence: both postmeasurement states on the equator, dzeta = 0
SM_PRESETS = tuple(
    {"label": f"SM theta0={t}", "theta0": t, "theta1": "pi/2", "theta2": "pi/2",
     "delta_zeta": 0.0}
    for t in (0.0, "pi/8", "pi/3", "pi/2", "7*pi/8", "pi")
)

# low-temperature maximizers; the free angles take representative values
SMPRIME_PRESETS = (
    {"label": "SM' theta0=0 equator", "theta0": 0.0, "theta1": "pi/2", "theta2": "pi/2",
     "delta_zeta": "pi/3"},
    {"label": "SM' theta0=pi equator", "theta0": "pi", "theta1": "pi/2", "theta2": "pi/2",
     "delta_zeta": "-2*pi/3"},
    {"label": "SM' theta0=0 theta2=pi/2", "theta0": 0.0, "theta1": "pi/5", "theta2": "pi/2",
     "delta_zeta": 1.0},
    {"label": "SM' theta0=0 theta2=pi/2 theta1=0", "theta0": 0.0, "theta1": 0.0,
     "theta2": "pi/2", "delta_zeta": 0.0},
    {"label": "SM' theta0=pi theta1=pi/2", "theta0": "pi", "theta1": "pi/2",
     "theta2": "2*pi/7", "delta_zeta": -2.5},
    {"label": "SM' theta0=pi theta1=pi/2 theta2=pi", "theta0": "pi", "theta1": "pi/2",
     "theta2": "pi", "delta_zeta": 0.5},
)

# two-mode environment (Hamiltonian couplings g, frequencies) for the Fock oracle
ORACLE_MODES = ((0.3, 1.0), (0.2, 1.7))
