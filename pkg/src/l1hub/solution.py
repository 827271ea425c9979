"""Hub solutions shared by every solver, with a JSON round-trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np


@dataclass(frozen=True)
class HubSolution:
    """An ordered set of hubs with an objective value and the method that produced it.

    ``open_candidates`` holds 0-based candidate indices when a discrete
    solver produced the solution; it is empty otherwise.
    """

    hubs: tuple[tuple[float, ...], ...]
    objective: float
    method: str = ""
    open_candidates: tuple[int, ...] = ()
    iterations: int = 0
    cuts: int = 0
    nodes: int = 0

    def __post_init__(self):
        hubs = tuple(tuple(float(c) for c in h) for h in self.hubs)
        if not hubs:
            raise ValueError("a solution needs at least one hub")
        if len({len(h) for h in hubs}) != 1 or len(hubs[0]) not in (1, 2):
            raise ValueError("hubs must share one dimension (1 or 2)")
        object.__setattr__(self, "hubs", hubs)
        object.__setattr__(self, "objective", float(self.objective))
        object.__setattr__(self, "open_candidates", tuple(int(k) for k in self.open_candidates))

    @property
    def n(self) -> int:
        return len(self.hubs)

    def as_array(self) -> np.ndarray:
        return np.array(self.hubs, dtype=float)

    @classmethod
    def from_array(cls, hubs: np.ndarray | Sequence[Sequence[float]], objective: float, **kw) -> "HubSolution":
        arr = np.asarray(hubs, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 2)
        return cls(tuple(map(tuple, arr)), objective, **kw)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["hubs"] = [list(h) for h in self.hubs]
        d["open_candidates"] = list(self.open_candidates)
        d["n"] = self.n
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HubSolution":
        if "hubs" not in d or "objective" not in d:
            raise ValueError("solution JSON needs 'hubs' and 'objective'")
        sol = cls(
            hubs=tuple(tuple(h) for h in d["hubs"]),
            objective=d["objective"],
            method=d.get("method", ""),
            open_candidates=tuple(d.get("open_candidates", ())),
            iterations=int(d.get("iterations", 0)),
            cuts=int(d.get("cuts", 0)),
            nodes=int(d.get("nodes", 0)),
        )
        if "n" in d and int(d["n"]) != sol.n:
            raise ValueError(f"solution declares n={d['n']} but lists {sol.n} hubs")
        return sol


def save_solution(sol: HubSolution, path: str | Path) -> None:
    Path(path).write_text(json.dumps(sol.to_dict(), indent=2) + "\n")


def load_solution(path: str | Path) -> HubSolution:
    return HubSolution.from_dict(json.loads(Path(path).read_text()))
