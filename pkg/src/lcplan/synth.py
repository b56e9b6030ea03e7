"""Synthetic experiment campaigns drawn around a known power-law curve.

Each noise draw is keyed by ``(rng_seed, pathology, model, n, seed)``
through BLAKE2b into a Philox counter-based generator, so any single point
can be regenerated on its own and generation order does not matter.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import List

import numpy as np

from .curve import PowerLawCurve, evaluate
from .errors import DomainError
from .experiments import ExperimentPoint
from .planner import DEFAULT_SCHEDULE, SamplingSchedule

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SynthSpec:
    true_curve: PowerLawCurve
    schedule: SamplingSchedule = DEFAULT_SCHEDULE
    n_seeds: int = 10
    noise_sigma: float = 0.02
    rng_seed: int = 0
    clamp: bool = True

    def __post_init__(self):
        if self.n_seeds < 1:
            raise DomainError(f"n_seeds must be >= 1, got {self.n_seeds}")
        if not self.noise_sigma >= 0:
            raise DomainError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        if not 0 <= self.rng_seed <= _U64:
            raise DomainError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")


def _key(rng_seed: int, pathology: str, model: str, n: int, seed: int) -> int:
    h = hashlib.blake2b(digest_size=16, person=b"lcplan-synth")
    h.update(struct.pack("<Q", rng_seed))
    for ident in (pathology, model):
        raw = ident.encode("utf-8")
        h.update(struct.pack("<Q", len(raw)))
        h.update(raw)
    h.update(struct.pack("<QQ", n, seed))
    return int.from_bytes(h.digest(), "little")


def noise(rng_seed: int, pathology: str, model: str, n: int, seed: int) -> float:
    """Standard normal deviate for one (series, size, replicate) cell."""
    gen = np.random.Generator(np.random.Philox(key=_key(rng_seed, pathology, model, n, seed)))
    return float(gen.standard_normal())


def generate(spec: SynthSpec, pathology: str = "synthetic", model: str = "synthetic") -> List[ExperimentPoint]:
    """One ExperimentPoint per (schedule size, replicate), size-major order."""
    pathology = pathology.strip().lower()
    model = model.strip().lower()
    out = []
    for n in spec.schedule:
        mean = evaluate(spec.true_curve, n)
        for s in range(spec.n_seeds):
            value = mean
            if spec.noise_sigma > 0:
                value = mean + spec.noise_sigma * noise(spec.rng_seed, pathology, model, n, s)
            if spec.clamp:
                value = min(max(value, 0.0), 1.0)
            out.append(ExperimentPoint(pathology, model, n, s, value))
    return out
