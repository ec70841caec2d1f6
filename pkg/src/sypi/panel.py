"""Container for an observed multivariate time-series panel.

A panel holds the candidate series as a (T, d) matrix together with the
target series as a length-T vector. It is the single input type consumed
by lag detection, discovery and the Granger baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_RECOMMENDED_LENGTH = 50


@dataclass
class TimeSeriesPanel:
    """Observed candidate matrix plus target vector.

    Parameters
    ----------
    candidates : ndarray of shape (T, d)
        One column per candidate series.
    target : ndarray of shape (T,)
        The series whose causes are sought.
    names : list of str
        Column names for the candidates, length d.
    target_name : str
        Name of the target series.
    time_labels : list of str, optional
        Row labels (e.g. dates). Ignored by all numeric operations.
    """

    candidates: np.ndarray
    target: np.ndarray
    names: list[str]
    target_name: str = "Y"
    time_labels: list[str] | None = None
    near_constant: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.candidates = np.asarray(self.candidates, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        if self.candidates.ndim != 2:
            raise ValueError("candidates must be a 2-d array (T, d)")
        if self.target.ndim != 1:
            raise ValueError("target must be a 1-d array")
        if self.candidates.shape[0] != self.target.shape[0]:
            raise ValueError(
                "candidates and target disagree on length: "
                f"{self.candidates.shape[0]} vs {self.target.shape[0]}"
            )
        if self.candidates.shape[1] < 1:
            raise ValueError("panel needs at least one candidate series")
        if len(self.names) != self.candidates.shape[1]:
            raise ValueError("names length must match number of candidate columns")
        if not np.all(np.isfinite(self.candidates)) or not np.all(
            np.isfinite(self.target)
        ):
            raise ValueError("panel contains non-finite values")

    @property
    def n_samples(self) -> int:
        return self.candidates.shape[0]

    @property
    def n_candidates(self) -> int:
        return self.candidates.shape[1]

    def series(self, index: int) -> np.ndarray:
        """Candidate column by index."""
        return self.candidates[:, index]

    def with_columns_permuted(self, order: list[int]) -> "TimeSeriesPanel":
        """Return a copy with candidate columns reordered."""
        return TimeSeriesPanel(
            candidates=self.candidates[:, order],
            target=self.target.copy(),
            names=[self.names[i] for i in order],
            target_name=self.target_name,
            time_labels=self.time_labels,
        )
