"""Named two-axis grids, one or more panels per preset.

Ranges are chosen to contain the features of interest (peaks, sign changes,
regime boundaries); resolutions keep every preset to a few seconds.
"""
from __future__ import annotations

from .analysis import SweepSpec
from .model import ModelParams

# eps - mu = -k_B T, Delta = 10 k_B T, Omega = k_B T, Gamma = 0.1 k_B T / hbar
BASE = ModelParams(eps=-1.0, delta=10.0, omega=1.0, gamma_l=0.1, gamma_c=0.1, gamma_r=0.1,
                   meas=0.5, mu_l=0.0, mu_c=0.0, mu_r=0.0, t_l=1.0, t_c=1.0, t_r=1.0)
GAMMA = 0.1

_FIG4_AXES = (("eps_minus_mu", -4.0, 4.0, 201), ("mu_c_minus_mu", -15.0, 15.0, 201))
_FIG4_OUT = ("power", "j_l", "j_c", "j_r", "j_det")
_FIG6_AXES = (("eps_minus_mu", 0.0, 8.0, 161), ("delta", -10.0, 10.0, 201))
_FIG6_BASE = BASE.replace(t_l=1.1)


def _fig4(meas: float) -> SweepSpec:
    return SweepSpec(*_FIG4_AXES, fixed=BASE.replace(meas=meas), outputs=_FIG4_OUT)


PRESETS = {
    "fig2a": {
        "fig2a": SweepSpec(("eps_minus_mu", -4.0, 4.0, 161), ("delta", -10.0, 10.0, 201),
                           fixed=BASE.replace(meas=5 * GAMMA), outputs=("i_c", "rho_cc")),
    },
    "fig2b": {
        "fig2b": SweepSpec(("mu_c_minus_mu", -5.0, 15.0, 401), ("meas", 0.0, 5 * GAMMA, 6),
                           fixed=BASE, outputs=("i_c", "pp", "pm")),
    },
    "fig3": {
        "fig3": SweepSpec(("meas", 0.0, 20 * GAMMA, 101), ("mu_c_minus_mu", 0.0, 15.0, 301),
                          fixed=BASE, outputs=("power", "j_det", "eta")),
    },
    "fig4a": {"fig4a": _fig4(0.0)},
    "fig4b": {"fig4b": _fig4(GAMMA / 5)},
    "fig4c": {"fig4c": _fig4(GAMMA)},
    "fig5": {
        "fig5": SweepSpec(("eps_minus_mu", -10.0, 10.0, 201), ("meas", 0.0, 10 * GAMMA, 51),
                          fixed=BASE, outputs=("i_c", "purity", "p0", "pd")),
    },
    "fig6": {
        "fig6a": SweepSpec(*_FIG6_AXES, fixed=_FIG6_BASE.replace(meas=GAMMA), outputs=("j_r",)),
        "fig6b": SweepSpec(*_FIG6_AXES, fixed=_FIG6_BASE.replace(meas=10 * GAMMA), outputs=("j_r",)),
        "fig6c": SweepSpec(*_FIG6_AXES, fixed=_FIG6_BASE.replace(meas=GAMMA), outputs=("j_c",)),
        "fig6d": SweepSpec(*_FIG6_AXES, fixed=_FIG6_BASE.replace(meas=10 * GAMMA), outputs=("j_c",)),
    },
    "figA1": {
        "figA1": SweepSpec(("mu_c", -5.0, 15.0, 201), ("eps", -5.0, 5.0, 101),
                           fixed=BASE.replace(meas=GAMMA),
                           outputs=("i_c", "i_c_minus_i_c0", "power", "j_det", "pp", "pm")),
    },
}


class UnknownPreset(KeyError):
    pass


def preset(name: str) -> dict:
    """Panel name -> SweepSpec for a named preset."""
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
