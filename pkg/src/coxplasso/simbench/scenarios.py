"""Simulation scenario definitions loaded from JSON files."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..utils.logging import get_logger

logger = get_logger(__name__)

SCENARIO_DIR = Path(__file__).parent / "definitions"

MODEL_PROPORTIONAL = "proportional"
MODEL_TIMEVARYING = "timevarying"


class ScenarioNotFoundError(FileNotFoundError):
    """Raised when no scenario file exists for a name or path."""
    pass


class ScenarioSpec:
    """
    Coefficient pattern and data laws of one simulation scenario.

    Indices in the JSON file are 1-based, as in x_1 ... x_p and z_1 ... z_nz.
    For time-varying scenarios the true log hazard is
    eta(t) = x' beta + t * x' slope, with beta and slope read from
    `main_effects` and `time_effects`.
    """

    def __init__(self, scenario_path: Union[str, Path]):
        """
        Initialize a scenario from its JSON file.

        Args:
            scenario_path: Path to JSON file, e.g. ".../definitions/prop_hier.json"
        """
        self.scenario_path = Path(scenario_path)
        self.config = self.load()

    @classmethod
    def named(cls, name: str, directory: Optional[Path] = None) -> 'ScenarioSpec':
        """Load a bundled scenario by name (file stem)."""
        return cls((directory or SCENARIO_DIR) / f"{name}.json")

    def load(self) -> Dict[str, Any]:
        """Load scenario configuration from JSON."""
        if not self.scenario_path.exists():
            raise ScenarioNotFoundError(f"Scenario file not found: {self.scenario_path}")

        with open(self.scenario_path, 'r', encoding='utf-8') as f:
            return json.load(f)

    @property
    def name(self) -> str:
        return self.config['scenario']

    @property
    def model(self) -> str:
        return self.config['model']

    @property
    def is_timevarying(self) -> bool:
        return self.model == MODEL_TIMEVARYING

    @property
    def covariate_law(self) -> str:
        default = 'uniform' if self.is_timevarying else 'normal'
        return self.config.get('covariate_law', default)

    @property
    def modifier_prob(self) -> float:
        return float(self.config.get('modifier_prob', 0.5))

    @property
    def min_p(self) -> int:
        return int(self.config.get('min_p', 1))

    @property
    def min_nz(self) -> int:
        return int(self.config.get('min_nz', 0))

    def defaults(self) -> Dict[str, Any]:
        """Default sizes and fitting choices (n, p, nz, alpha, basis, sample)."""
        return dict(self.config.get('defaults', {}))

    def main_effects(self, p: int) -> np.ndarray:
        """True beta (p,)."""
        beta = np.zeros(p)
        for term in self.config.get('main_effects', []):
            beta[term['x'] - 1] = term['coef']
        return beta

    def interactions(self, p: int, nz: int) -> np.ndarray:
        """True Theta (p, nz) for the fixed modifiers."""
        Theta = np.zeros((p, nz))
        for term in self.config.get('interactions', []):
            Theta[term['x'] - 1, term['z'] - 1] = term['coef']
        return Theta

    def time_effects(self, p: int) -> np.ndarray:
        """True slope of the linear time interaction per covariate (p,)."""
        slope = np.zeros(p)
        for term in self.config.get('time_effects', []):
            slope[term['x'] - 1] = term['coef']
        return slope

    def interaction_support(self, p: int, nz: int) -> np.ndarray:
        """
        Boolean (p, nz + 1) map of true interaction units.

        Columns 0..nz-1 are the fixed modifiers, the last column the time
        effect as one unit per covariate.
        """
        support = np.zeros((p, nz + 1), dtype=bool)
        support[:, :nz] = self.interactions(p, nz) != 0
        support[:, nz] = self.time_effects(p) != 0
        return support

    def __repr__(self) -> str:
        return f"ScenarioSpec('{self.name}', {self.model})"


def available_scenarios(directory: Optional[Path] = None) -> List[str]:
    """Names of the bundled scenarios."""
    return sorted(path.stem for path in (directory or SCENARIO_DIR).glob("*.json"))
