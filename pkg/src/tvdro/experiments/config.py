"""JSON experiment configuration.

A config file is one JSON object.  Every key is optional unless a command
needs it; unknown keys are rejected so typos fail loudly.

    {
      "name": "coverage-run",            # free-form label, default "experiment"
      "scenario": "three_point",         # three_point | flip | lending | lending_records
      "support": {"grid": [[1,5],[1,5],[1,7]]}
                 or {"points": [[0],[1],[2]]},
      "truth": [0.5, 0.3, 0.2]           # mass vector over the support
               or "lending",             # built-in lending ground truth
      "channel": {"kind": "ldp", "epsilon": 3.0, "norm": "euclidean"}
                 or {"kind": "identity"}
                 or {"kind": "matrix", "path": "channel.csv"},
      "loss": {"kind": "table", "rows": [[...], ...], "labels": ["a", "b"]}
              or {"kind": "regression", "lower": [...], "upper": [...]},
      "radius": {"alpha": 0.05}          # fixed confidence level
               or {"schedule": "one_over_n_squared"}
               or {"epsilon": 0.1},      # bypass the concentration bound
      "n_grid": [100, 1000, 10000],      # sample sizes, strictly increasing
      "seeds": [0, 1, 2],                # distinct non-negative trial seeds
      "trials": 1000,
      "alphas": [0.05],
      "channel_epsilons": [3.0, 10.0],   # privacy sweep for fig1-style runs
      "solver": {"max_iter": 5000, "improvement_tol": 1e-7, "window": 50},
      "output": "results.csv"            # resolved against the config's dir
    }

A "scenario" entry fills support/truth/channel/loss; explicit entries
override the corresponding piece.  Relative paths inside the file resolve
against the directory containing it.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..channels import NoiseChannel, identity_channel, ldp_channel, load_channel_csv
from ..distributions import DiscreteDistribution, Support, grid_support
from ..solver import RegressionLoss, TableLoss

_KNOWN_KEYS = {
    "name",
    "scenario",
    "support",
    "truth",
    "channel",
    "loss",
    "radius",
    "n_grid",
    "seeds",
    "trials",
    "alphas",
    "channel_epsilons",
    "solver",
    "output",
}

_SCENARIOS = ("three_point", "flip", "lending", "lending_records")
_SOLVER_KEYS = {"max_iter", "improvement_tol", "window"}


def _require_keys(mapping: dict, allowed: set[str], where: str) -> None:
    extra = set(mapping) - allowed
    if extra:
        raise ValueError(f"unknown {where} keys: {sorted(extra)}")


@dataclass
class ExperimentConfig:
    """Validated, JSON-round-trippable experiment description."""

    name: str = "experiment"
    scenario: str | None = None
    support: dict[str, Any] | None = None
    truth: list[float] | str | None = None
    channel: dict[str, Any] | None = None
    loss: dict[str, Any] | None = None
    radius: dict[str, Any] = field(default_factory=lambda: {"alpha": 0.05})
    n_grid: list[int] = field(default_factory=lambda: [100, 1000, 10000])
    seeds: list[int] = field(default_factory=lambda: [0])
    trials: int = 1000
    alphas: list[float] = field(default_factory=lambda: [0.05])
    channel_epsilons: list[float] = field(default_factory=lambda: [3.0, 10.0])
    solver: dict[str, Any] = field(default_factory=dict)
    output: str | None = None
    base_dir: str = "."

    def __post_init__(self) -> None:
        if self.scenario is not None and self.scenario not in _SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}, expected one of {_SCENARIOS}"
            )
        self._check_radius()
        self._check_grid()
        self._check_seeds()
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        for alpha in self.alphas:
            if not 0.0 < alpha < 1.0:
                raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        for eps in self.channel_epsilons:
            if math.isnan(eps) or eps < 0.0:
                raise ValueError(f"channel epsilon must be >= 0, got {eps}")
        _require_keys(self.solver, _SOLVER_KEYS, "solver")
        if self.support is not None:
            _require_keys(self.support, {"grid", "points"}, "support")
            if ("grid" in self.support) == ("points" in self.support):
                raise ValueError("support needs exactly one of 'grid' or 'points'")
        if self.channel is not None:
            kind = self.channel.get("kind")
            if kind == "ldp":
                _require_keys(self.channel, {"kind", "epsilon", "norm"}, "channel")
            elif kind == "identity":
                _require_keys(self.channel, {"kind"}, "channel")
            elif kind == "matrix":
                _require_keys(self.channel, {"kind", "path"}, "channel")
                path = self._resolve(self.channel["path"])
                if not os.path.exists(path):
                    raise FileNotFoundError(f"channel matrix file not found: {path}")
            else:
                raise ValueError(f"unknown channel kind {kind!r}")
        if self.loss is not None:
            kind = self.loss.get("kind")
            if kind == "table":
                _require_keys(self.loss, {"kind", "rows", "labels"}, "loss")
            elif kind == "regression":
                _require_keys(self.loss, {"kind", "lower", "upper"}, "loss")
            else:
                raise ValueError(f"unknown loss kind {kind!r}")
        if isinstance(self.truth, str) and self.truth != "lending":
            raise ValueError(f"unknown named truth {self.truth!r}")

    def _check_radius(self) -> None:
        _require_keys(self.radius, {"alpha", "schedule", "epsilon"}, "radius")
        if len(self.radius) != 1:
            raise ValueError(
                "radius needs exactly one of 'alpha', 'schedule', 'epsilon'"
            )
        if "alpha" in self.radius and not 0.0 < self.radius["alpha"] < 1.0:
            raise ValueError(f"radius alpha must lie in (0, 1), got {self.radius}")
        if "epsilon" in self.radius and self.radius["epsilon"] < 0.0:
            raise ValueError(f"radius epsilon must be >= 0, got {self.radius}")
        if "schedule" in self.radius and self.radius["schedule"] != "one_over_n_squared":
            raise ValueError(f"unknown radius schedule {self.radius['schedule']!r}")

    def _check_grid(self) -> None:
        if not self.n_grid:
            raise ValueError("n_grid must not be empty")
        previous = 0
        for n in self.n_grid:
            if n <= previous:
                raise ValueError(
                    f"n_grid must be strictly increasing positives, got {self.n_grid}"
                )
            previous = n

    def _check_seeds(self) -> None:
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"seeds must be distinct, got {self.seeds}")
        for seed in self.seeds:
            if seed < 0:
                raise ValueError(f"seeds must be non-negative, got {seed}")

    def _resolve(self, path: str) -> str:
        if os.path.isabs(path):
            return path
        return os.path.join(self.base_dir, path)

    # -- construction of model objects ------------------------------------

    def _scenario_parts(self):
        from . import synthetic

        if self.scenario in ("lending", "lending_records") and not self.channel_epsilons:
            raise ValueError(
                f"scenario {self.scenario!r} needs at least one channel epsilon"
            )
        if self.scenario == "three_point":
            return synthetic.three_point_scenario()
        if self.scenario == "flip":
            return synthetic.flip_scenario()
        if self.scenario == "lending":
            return synthetic.lending_scenario(self.channel_epsilons[0])
        if self.scenario == "lending_records":
            return synthetic.lending_records_scenario(self.channel_epsilons[0])
        return None

    def build_support(self) -> Support:
        if self.support is not None:
            if "grid" in self.support:
                ranges = [(int(lo), int(hi)) for lo, hi in self.support["grid"]]
                return grid_support(ranges)
            return Support(np.asarray(self.support["points"]))
        base = self._scenario_parts()
        if base is None:
            raise ValueError("config has neither 'support' nor 'scenario'")
        return base.support

    def build_truth(self, support: Support) -> DiscreteDistribution:
        if self.truth == "lending":
            from .synthetic import lending_truth

            return lending_truth(support)
        if self.truth is not None:
            return DiscreteDistribution(support, np.asarray(self.truth, dtype=float))
        base = self._scenario_parts()
        if base is None:
            raise ValueError("config has neither 'truth' nor 'scenario'")
        if base.support != support:
            raise ValueError("explicit support conflicts with scenario truth")
        return base.truth

    def build_channel(
        self, support: Support, epsilon_override: float | None = None
    ) -> NoiseChannel:
        if self.channel is None:
            base = self._scenario_parts()
            if base is None:
                raise ValueError("config has neither 'channel' nor 'scenario'")
            if epsilon_override is not None:
                return ldp_channel(support, epsilon_override)
            if base.support != support:
                raise ValueError("explicit support conflicts with scenario channel")
            return base.channel
        kind = self.channel["kind"]
        if kind == "ldp":
            epsilon = (
                epsilon_override
                if epsilon_override is not None
                else float(self.channel["epsilon"])
            )
            return ldp_channel(
                support, epsilon, norm=self.channel.get("norm", "euclidean")
            )
        # identity and matrix channels have no privacy level to sweep, so a
        # lane override would silently run the same channel twice
        if epsilon_override is not None:
            raise ValueError(f"channel kind '{kind}' cannot take a privacy override")
        if kind == "identity":
            return identity_channel(support)
        return load_channel_csv(self._resolve(self.channel["path"]))

    def build_loss(self, support: Support) -> TableLoss | RegressionLoss:
        if self.loss is None:
            base = self._scenario_parts()
            if base is None:
                raise ValueError("config has neither 'loss' nor 'scenario'")
            return base.loss
        if self.loss["kind"] == "regression":
            return RegressionLoss(
                lower=np.asarray(self.loss["lower"], dtype=float),
                upper=np.asarray(self.loss["upper"], dtype=float),
            )
        rows = np.asarray(self.loss["rows"], dtype=float)
        labels = self.loss.get("labels")
        return TableLoss(support, rows, decision_labels=labels)

    def radius_epsilon(self, n: int, cardinality: int, alpha: float | None = None):
        """Resolve the radius entry to a concrete epsilon for sample size n."""
        from ..ambiguity import RadiusPolicy, radius_tv

        if "epsilon" in self.radius:
            return float(self.radius["epsilon"])
        if alpha is None and "alpha" in self.radius:
            alpha = float(self.radius["alpha"])
        if alpha is not None:
            policy = RadiusPolicy(cardinality, n, alpha=alpha)
        else:
            policy = RadiusPolicy(cardinality, n, schedule=self.radius["schedule"])
        return radius_tv(policy)

    def solver_kwargs(self) -> dict[str, Any]:
        out = dict(self.solver)
        if "max_iter" in out:
            out["max_iter"] = int(out["max_iter"])
        if "improvement_tol" in out:
            out["improvement_tol"] = float(out["improvement_tol"])
        if "window" in out:
            out["window"] = int(out["window"])
        return out

    def output_path(self) -> str | None:
        if self.output is None:
            return None
        return self._resolve(self.output)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "radius": self.radius,
            "n_grid": self.n_grid,
            "seeds": self.seeds,
            "trials": self.trials,
            "alphas": self.alphas,
            "channel_epsilons": self.channel_epsilons,
        }
        for key in ("scenario", "support", "truth", "channel", "loss", "output"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.solver:
            out["solver"] = self.solver
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: str = ".") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValueError(f"config root must be a JSON object, got {type(data)}")
        _require_keys(data, _KNOWN_KEYS, "config")
        kwargs = dict(data)
        kwargs["base_dir"] = base_dir
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
