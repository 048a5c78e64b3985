"""Time stepping of the regularized Galerkin approximation."""
from .config import SCHEMES, ApproxConfig
from .ledger import (EnergyLedger, dissipation_rate, energy_ledger_update, energy_parts,
                     initial_ledger, kinetic_energy)
from .monitors import MinPrincipleRecord, check_min_principle
from .problems import RECIPES, default_config, make_initial
from .run import (RunResult, Trajectory, ledger_header, prepare_initial, run,
                  write_ledger_csv)
from .scheme import CFLWarning, Stepper, step
from .state import MixtureState

__all__ = [
    "SCHEMES", "ApproxConfig", "EnergyLedger", "dissipation_rate", "energy_ledger_update",
    "energy_parts", "initial_ledger", "kinetic_energy", "MinPrincipleRecord",
    "check_min_principle", "RECIPES", "default_config", "make_initial", "RunResult",
    "Trajectory", "ledger_header", "prepare_initial", "run", "write_ledger_csv", "CFLWarning",
    "Stepper", "step", "MixtureState",
]
