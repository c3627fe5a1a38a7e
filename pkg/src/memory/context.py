"""
Memory system for storing experiment context and report history.
Kept in process; nothing is persisted beyond the output files.
"""
from datetime import datetime
from typing import Dict, List, Optional, Tuple

from ..data.models import RateReport


class RunMemory:
    """
    In-memory store for run contexts and historical rate reports, keyed by
    experiment (problem / scheme / norm / moment).
    """

    def __init__(self):
        """Initialize empty memory store."""
        self._contexts: Dict[str, Dict] = {}
        self._reports: Dict[str, List[Dict]] = {}

    def store_run_context(self, key: str, context: Dict):
        """Store run parameters for future reference."""
        if key not in self._contexts:
            self._contexts[key] = {}

        self._contexts[key].update(context)
        self._contexts[key]["last_updated"] = datetime.now()

    def get_run_context(self, key: str) -> Dict:
        """Retrieve stored run context."""
        return self._contexts.get(key, {})

    def store_report(self, key: str, report: RateReport):
        """Append a report to the experiment's history."""
        self._reports.setdefault(key, []).append({
            "timestamp": datetime.now(),
            "report": report,
        })

    def get_history(self, key: str, limit: int = 5) -> List[Dict]:
        """Get the most recent reports for an experiment."""
        return self._reports.get(key, [])[-limit:]

    def compare_last(self, key: str) -> Optional[List[Tuple[int, float, float, float]]]:
        """
        Per common n: (n, previous error, latest error, latest std error)
        for the two most recent reports, or None with fewer than two.
        """
        history = self.get_history(key, limit=2)
        if len(history) < 2:
            return None

        previous = {point.n: point for point in history[-2]["report"].per_n}
        latest = history[-1]["report"].per_n
        return [
            (point.n, previous[point.n].error, point.error, point.std_error)
            for point in latest
            if point.n in previous
        ]
