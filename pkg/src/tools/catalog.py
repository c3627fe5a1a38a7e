"""
Catalog access tool for SDE problems.
Provides a clean interface to the preset catalog and parameterized families.
"""
import logging
from typing import Dict, List, Optional

from ..data.models import SdeProblem
from ..data.presets import PRESET_CATALOG, build_preset, catalog_names

logger = logging.getLogger(__name__)


class ProblemCatalog:
    """
    Tool for looking up SDE problems by name.
    Built problems are cached; SdeProblem values are immutable so sharing is safe.
    """

    def __init__(self, extra: Optional[Dict[str, SdeProblem]] = None):
        """Initialize with the preset catalog plus optional custom problems."""
        self._cache: Dict[str, SdeProblem] = {}
        self._custom: Dict[str, SdeProblem] = dict(extra or {})

    def get_problem(self, name: str) -> SdeProblem:
        """Retrieve a problem by preset name, family expression or custom name."""
        if name in self._custom:
            return self._custom[name]
        if name not in self._cache:
            self._cache[name] = build_preset(name)
            logger.debug("Built preset %s", name)
        return self._cache[name]

    def register(self, problem: SdeProblem):
        """Add a custom problem built in code."""
        self._custom[problem.name] = problem

    def list_problems(self) -> List[str]:
        """List fixed presets, families and custom problems."""
        return catalog_names() + sorted(self._custom)

    def describe(self, name: str) -> str:
        problem = self.get_problem(name)
        return f"{problem.name} (d={problem.dim_d}, T={problem.horizon_T}): {problem.description}"

    def fixed_presets(self) -> List[SdeProblem]:
        """All presets without parameters."""
        return [self.get_problem(name) for name in PRESET_CATALOG]


_DEFAULT_CATALOG = ProblemCatalog()


def preset(name: str) -> SdeProblem:
    """Return the catalog problem `name` (CatalogError lists valid names)."""
    return _DEFAULT_CATALOG.get_problem(name)
