"""Body-axis wind: steady mean, step gusts, and seeded colored turbulence.

Turbulence is a first-order Gauss-Markov process realized once on a fixed
internal grid and sampled with a zero-order hold, so a given seed produces
the same wind history regardless of the simulation step size.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

TURBULENCE_GRID_DT = 0.01  # internal realization step (s)


@dataclass(frozen=True)
class Gust:
    start: float
    end: float
    delta: np.ndarray  # body-axis wind step (m/s)

    def validate(self) -> "Gust":
        if self.end <= self.start:
            raise ConfigError(f"gust interval [{self.start}, {self.end}] is empty")
        return self


@dataclass(frozen=True)
class WindModel:
    mean: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gusts: tuple = ()
    sigma: float = 0.0       # turbulence intensity (m/s)
    tau_c: float = 2.0       # turbulence correlation time (s)

    def validate(self) -> "WindModel":
        if self.sigma < 0.0:
            raise ConfigError("turbulence intensity must be >= 0")
        if self.tau_c <= 0.0:
            raise ConfigError("turbulence correlation time must be > 0")
        for g in self.gusts:
            g.validate()
        return self

    def realize(self, duration: float, seed: int) -> "WindSequence":
        """Draw the turbulence sample path for a run of the given length."""
        n = int(np.ceil(duration / TURBULENCE_GRID_DT)) + 2
        if self.sigma > 0.0:
            rng = np.random.default_rng(seed)
            a = np.exp(-TURBULENCE_GRID_DT / self.tau_c)
            b = self.sigma * np.sqrt(1.0 - a * a)
            noise = np.empty((n, 3))
            noise[0] = self.sigma * rng.standard_normal(3)  # stationary start
            shocks = rng.standard_normal((n - 1, 3))
            for k in range(1, n):
                noise[k] = a * noise[k - 1] + b * shocks[k - 1]
        else:
            noise = np.zeros((n, 3))
        return WindSequence(model=self, turbulence=noise)


@dataclass(frozen=True)
class WindSequence:
    model: WindModel
    turbulence: np.ndarray

    def at(self, t: float) -> np.ndarray:
        """Body-axis wind at time t; turbulence is held between grid points."""
        w = self.model.mean.copy()
        for g in self.model.gusts:
            if g.start <= t < g.end:
                w = w + g.delta
        idx = int(np.floor((t + 1e-12) / TURBULENCE_GRID_DT))
        idx = min(max(idx, 0), self.turbulence.shape[0] - 1)
        return w + self.turbulence[idx]
