"""Bundled experiment presets (reference parameter sets)."""

from __future__ import annotations

_SYSTEM = {
    "epsilon": 0.1,
    "omega1": 1.0,
    "omega2": 0.5,
    "Omega1": 0.5,
    "Omega2": 0.5,
    "Lambda1": 0.05,
    "Lambda2": 0.05,
}


def _steering_case(interaction: str, T: float, N: int, alpha_hat: float) -> dict:
    return {
        "system": dict(_SYSTEM, interaction=interaction),
        "rho0": [0.0, 1.0, 0.0, 0.0],
        "rho_target": [0.0, 0.0, 1.0, 0.0],
        "objective": {"kind": "smoothed_deviation", "setpoint": 0.5,
                      "smoothing": 1e-4},
        "T": T,
        "N": N,
        "initial_controls": {
            "u": {"function": "sin", "sampling": "left_endpoint"},
            "n1": 0.0, "n2": 0.0},
        "optimizer": {"method": "gpm2", "alpha_hat": alpha_hat, "sigma": 1.5,
                      "beta": 0.92, "eps_stop1": 1e-8, "eps_stop2": 1e-4,
                      "eps_stop3": 1e-4, "max_iters": 800},
    }


PRESETS: dict = {
    # Overlap maximization onto a mixed target from the completely mixed state.
    "sec6_1": {
        "system": dict(_SYSTEM, interaction="V1"),
        "rho0": [0.25, 0.25, 0.25, 0.25],
        "rho_target": [0.7, 0.1, 0.1, 0.1],
        "objective": {"kind": "maximize_overlap", "upper_bound": 0.6995},
        "T": 70.0,
        "N": 1000,
        "initial_controls": {"u": 0.0, "n1": 10.0, "n2": 10.0},
        "optimizer": {"method": "gpm2", "alpha": 1e5, "beta": 0.9,
                      "eps_stop1": 1e-8, "max_iters": 800},
    },
    # Overlap maximization onto a pure target (approximate purification).
    "sec6_2": {
        "system": dict(_SYSTEM, interaction="V1"),
        "rho0": [0.25, 0.25, 0.25, 0.25],
        "rho_target": [1.0, 0.0, 0.0, 0.0],
        "objective": {"kind": "maximize_overlap", "upper_bound": 1.0},
        "T": 100.0,
        "N": 1000,
        "initial_controls": {"u": 0.0, "n1": 10.0, "n2": 10.0},
        "optimizer": {"method": "gpm2", "alpha": 1e5, "beta": 0.9,
                      "eps_stop1": 1e-8, "max_iters": 600},
    },
    # Steering the overlap to 0.5, four (interaction, horizon) cases.
    "sec6_3_v1_t05": _steering_case("V1", 0.5, 500, 1.0),
    "sec6_3_v1_t01": _steering_case("V1", 0.1, 100, 100.0),
    "sec6_3_v2_t05": _steering_case("V2", 0.5, 500, 1.0),
    "sec6_3_v2_t01": _steering_case("V2", 0.1, 100, 5.0),
}

# Verification preset: zero controls are a stationary point and exactly
# globally minimal for this target; a strong sinusoidal probe beats the
# stationary value for the maximization problem.
SEC4_6_CHECK = {
    "system": dict(_SYSTEM, interaction="V1"),
    "rho0": [1.0, 0.0, 0.0, 0.0],
    "rho_target": [0.2, 0.2, 0.2, 0.4],
    "T": 2.0,
    "N": 400,
    "probe_amplitude": 10.0,
}

PRESET_NAMES = tuple(sorted(PRESETS)) + ("sec4_6_check",)
