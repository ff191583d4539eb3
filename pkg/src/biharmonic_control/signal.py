"""Boundary controls stored as finite exponential sums f(t) = sum_m beta_m exp(i lambda_m t)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True, eq=False)
class ControlSignal:
    lambdas: np.ndarray
    betas: np.ndarray
    T: float

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        b = np.array(self.betas, dtype=complex).reshape(-1)
        if lam.shape != b.shape:
            raise ValueError("lambdas and betas must have the same length")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "T", float(self.T))

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return kernels.expsum(self.lambdas, self.betas, np.ascontiguousarray(t))

    def moments(self, lams) -> np.ndarray:
        """int_0^T exp(-i lam_n s) f(s) ds for each lam_n, in closed form."""
        lams = np.ascontiguousarray(lams, dtype=float)
        return kernels.cross_gram(lams, self.lambdas, self.T) @ self.betas

    def l2_norm(self) -> float:
        G = kernels.cross_gram(self.lambdas, self.lambdas, self.T)
        return math.sqrt(max(0.0, float(np.real(np.vdot(self.betas, G @ self.betas)))))

    def sample(self, num: int = 1001):
        t = np.linspace(0.0, self.T, num)
        return t, self(t)

    def scaled(self, alpha) -> "ControlSignal":
        return ControlSignal(self.lambdas, alpha * self.betas, self.T)

    @classmethod
    def zero(cls, T: float) -> "ControlSignal":
        return cls(np.zeros(0), np.zeros(0, dtype=complex), T)
