"""
Experiment records. These are plain immutable values, not ORM models: runs
are written to CSV/SVG/PGM files and nothing is stored in a database.
"""
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __str__(self):
        details = ", ".join(f"{key}={value}" for key, value in sorted(self.params.items()))
        return f"{self.name}({details})"


@dataclass(frozen=True)
class SolverSpec:
    name: str
    ell: int = 0


@dataclass(frozen=True)
class GridPoint:
    index: int
    solver: SolverSpec
    noise_percent: float
    assumed_noise_percent: float
    seed: int

    @property
    def run_id(self):
        return (
            f"{self.solver.name}_l{self.solver.ell}_v{self.noise_percent:g}"
            f"_a{self.assumed_noise_percent:g}_s{self.seed}"
        )


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    solvers: tuple
    noise_levels_percent: tuple
    seeds: tuple
    eta: float
    max_iter: int
    output_dir: str
    assumed_noise_levels_percent: Optional[tuple] = None
    write_plots: bool = True

    def noise_pairs(self):
        """(actual, assumed) noise levels; assumed defaults to actual."""
        assumed = self.assumed_noise_levels_percent or self.noise_levels_percent
        return list(zip(self.noise_levels_percent, assumed))

    def grid(self):
        points = []
        for solver in self.solvers:
            for actual, assumed in self.noise_pairs():
                for seed in self.seeds:
                    points.append(GridPoint(len(points), solver, actual, assumed, seed))
        return points


CSV_HEADER = (
    "problem",
    "solver",
    "shift",
    "noise_percent",
    "assumed_noise_percent",
    "seed",
    "iterations",
    "stop_reason",
    "relative_error",
    "relative_residual",
    "min_error_iteration",
    "min_error",
)


@dataclass(frozen=True)
class ExperimentRecord:
    problem: str
    solver: str
    shift: int
    noise_percent: float
    assumed_noise_percent: float
    seed: int
    iterations: int
    stop_reason: str
    relative_error: float
    relative_residual: float
    min_error_iteration: int
    min_error: float

    def as_row(self):
        return [
            self.problem,
            self.solver,
            str(self.shift),
            f"{self.noise_percent:.5e}",
            f"{self.assumed_noise_percent:.5e}",
            str(self.seed),
            str(self.iterations),
            self.stop_reason,
            f"{self.relative_error:.5e}",
            f"{self.relative_residual:.5e}",
            str(self.min_error_iteration),
            f"{self.min_error:.5e}",
        ]
