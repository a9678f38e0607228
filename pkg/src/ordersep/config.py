"""Run budgets and determinism knobs shared across the engine."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .errors import ParseError


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    max_vertices: int = 10 ** 6
    max_iterations: int = 64
    max_repairs: int | None = None  # defaults to (target count)^2
    oracle_degree: int = 8
    modulus_bound: int = 10 ** 6
    lemma1_attempts: int = 10_000
    lemma1_grow_every: int = 1_000
    lemma2_retries: int = 4
    lemma2_triple_rounds: int = 12
    lemma2_scan_rounds: int = 64
    lemma3_retries: int = 3
    dot_vertex_cap: int = 5_000
    threads: int = 1

    def __post_init__(self):
        for name in (
            "max_vertices",
            "max_iterations",
            "oracle_degree",
            "modulus_bound",
            "lemma1_attempts",
            "lemma1_grow_every",
            "lemma2_retries",
            "lemma2_triple_rounds",
            "lemma2_scan_rounds",
            "lemma3_retries",
            "dot_vertex_cap",
            "threads",
        ):
            if getattr(self, name) <= 0:
                raise ParseError(f"budget {name} must be positive")

    @classmethod
    def from_json(cls, data: dict) -> RunConfig:
        known = {f for f in cls.__dataclass_fields__}
        bad = set(data) - known
        if bad:
            raise ParseError(f"unknown config keys {sorted(bad)}")
        try:
            return replace(cls(), **data)
        except (TypeError, ParseError) as exc:
            raise ParseError(f"bad config: {exc}") from exc


def sub_seed(seed: int, *tags: object) -> int:
    """Deterministic sub-seed; avoids str hash randomization."""
    payload = repr((seed, tags)).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")
