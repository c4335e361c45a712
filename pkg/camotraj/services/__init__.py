"""Service layer exports."""

from camotraj.services.elode import OdeConfig, solve_el_ode
from camotraj.services.energy import compare_energy, energy_of, infer_engagement
from camotraj.services.guidance import simulate_mcpn
from camotraj.services.kpath_analytic import Engagement, reconstruct_shadower
from camotraj.services.scenario_runner import run_batch, run_scenario

__all__ = [
    "Engagement",
    "OdeConfig",
    "compare_energy",
    "energy_of",
    "infer_engagement",
    "reconstruct_shadower",
    "run_batch",
    "run_scenario",
    "simulate_mcpn",
    "solve_el_ode",
]
