"""Discrete-level system model.

A :class:`LevelSystem` is an immutable bundle of level energies and a
symmetric transition-dipole matrix, both in atomic units. Only energy
*differences* enter any computation, so energies may be given relative to
an arbitrary zero. Derived transition quantities (sign, magnitude,
coupling ratio, perturber sets) are plain functions over the system.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import BinaryIO, Iterable

import numpy as np

from .errors import DegeneracyError, SystemLoadError


@dataclass(frozen=True)
class Level:
    id: int
    label: str
    energy: float  # a.u., arbitrary zero


@dataclass(frozen=True)
class LevelSystem:
    """N-level system: ordered levels plus a symmetric dipole matrix.

    Instances are immutable (the dipole array is marked read-only) and safe
    to share across threads or processes.
    """

    levels: tuple[Level, ...]
    dipoles: np.ndarray  # (N, N) symmetric, zero diagonal, a.u.

    def __post_init__(self):
        self.dipoles.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        e = np.array([lv.energy for lv in self.levels])
        e.setflags(write=False)
        return e

    def mu(self, i: int, j: int) -> float:
        return float(self.dipoles[i, j])

    def label(self, i: int) -> str:
        return self.levels[i].label


@dataclass(frozen=True)
class TransitionPair:
    """The two selected levels between which population is transferred."""

    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha == self.beta:
            raise ValueError("alpha and beta must be distinct levels")


def validate_pair(sys: LevelSystem, pair: TransitionPair) -> None:
    """Check the pair against a system: ids in range and directly coupled."""
    for lid in (pair.alpha, pair.beta):
        if not 0 <= lid < sys.n:
            raise ValueError(f"level id {lid} out of range for {sys.n}-level system")
    if sys.mu(pair.alpha, pair.beta) == 0.0:
        raise ValueError(
            f"levels {pair.alpha} and {pair.beta} are not dipole-coupled "
            "(mu_ab = 0); the pair cannot be driven"
        )


def _build(levels: list[Level], entries: Iterable[tuple[int, int, float]]) -> LevelSystem:
    """Assemble and validate a LevelSystem from parsed pieces."""
    n = len(levels)
    if n < 2:
        raise SystemLoadError(f"need at least 2 levels, got {n}")

    ids = [lv.id for lv in levels]
    if sorted(ids) != list(range(n)):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        if dup:
            raise SystemLoadError(f"duplicate level id(s): {dup}")
        raise SystemLoadError(f"level ids must be 0..{n - 1}, got {sorted(ids)}")

    for lv in levels:
        if not math.isfinite(lv.energy):
            raise SystemLoadError(f"level {lv.id} ({lv.label!r}) has non-finite energy")

    mu = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for i, j, val in entries:
        if not (0 <= i < n and 0 <= j < n):
            raise SystemLoadError(f"dipole entry ({i},{j}) references an unknown level")
        if not math.isfinite(val):
            raise SystemLoadError(f"dipole entry ({i},{j}) has non-finite value")
        if i == j:
            if val != 0.0:
                raise SystemLoadError(
                    f"dipole entry ({i},{i}) is diagonal with mu={val}; permanent "
                    "dipole moments are not supported"
                )
            continue
        key = (min(i, j), max(i, j))
        if key in seen:
            # both orders may be listed, but they must agree
            prev = mu[i, j]
            if prev != val:
                raise SystemLoadError(
                    f"dipole entry ({i},{j}) has mu={val} but the pair was already "
                    f"given as mu={prev}: asymmetric dipole matrix"
                )
            continue
        seen.add(key)
        mu[i, j] = val
        mu[j, i] = val

    levels_sorted = tuple(sorted(levels, key=lambda lv: lv.id))
    return LevelSystem(levels=levels_sorted, dipoles=mu)


def load_system(source: BinaryIO | str | bytes, fmt: str = "json") -> LevelSystem:
    """Parse a level-system document.

    Format ``json``::

        {"levels":  [{"id": 0, "label": "v0j2", "energy_au": 0.0}, ...],
         "dipoles": [{"i": 0, "j": 1, "mu_au": 0.073}, ...]}

    Unlisted dipole pairs are zero. Raises :class:`SystemLoadError` with the
    offending entry named.
    """
    if fmt != "json":
        raise SystemLoadError(f"unknown system format {fmt!r}")
    data = source if isinstance(source, (str, bytes)) else source.read()
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SystemLoadError(f"system file is not valid JSON: {exc}") from exc

    try:
        levels = [
            Level(id=int(item["id"]), label=str(item.get("label", f"level{item['id']}")),
                  energy=float(item["energy_au"]))
            for item in doc["levels"]
        ]
        entries = [(int(d["i"]), int(d["j"]), float(d["mu_au"])) for d in doc.get("dipoles", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise SystemLoadError(f"malformed system document: {exc!r}") from exc

    return _build(levels, entries)


def load_system_file(path) -> LevelSystem:
    with open(path, "rb") as fh:
        return load_system(fh)


def transition_sign_and_freq(sys: LevelSystem, i: int, j: int) -> tuple[int, float]:
    """Sign s_ij = sign(E_i - E_j) and magnitude w_ij = |E_i - E_j|.

    Degenerate levels have no defined sign and poison the design formulas
    downstream, so they raise instead of returning 0.
    """
    if i == j:
        raise ValueError("transition requires two distinct levels")
    ei, ej = sys.levels[i].energy, sys.levels[j].energy
    if ei == ej:
        raise DegeneracyError(
            f"levels {i} and {j} are degenerate (E = {ei}); transition sign undefined"
        )
    return (1 if ei > ej else -1), abs(ei - ej)


def coupling_ratio(sys: LevelSystem, pair: TransitionPair, i: int, j: int) -> float:
    """R_ij = mu_ij / mu_ab, the coupling strength relative to the driven pair."""
    validate_pair(sys, pair)
    return sys.mu(i, j) / sys.mu(pair.alpha, pair.beta)


def perturber_sets(sys: LevelSystem, pair: TransitionPair) -> tuple[list[int], list[int]]:
    """Levels dipole-coupled to each selected level, excluding the pair itself.

    Returns ``(Q, P)`` where Q are coupled to alpha (excluding beta) and P are
    coupled to beta (excluding alpha), each sorted by level id. A level coupled
    to both selected levels appears in both sets. Members degenerate with
    their selected level, or whose transition frequency coincides with the
    driven frequency w_ab, raise (the perturbation-strength denominator
    vanishes there).
    """
    validate_pair(sys, pair)
    a, b = pair.alpha, pair.beta
    _, w_ab = transition_sign_and_freq(sys, a, b)

    def members(sel: int, other: int) -> list[int]:
        out = []
        for k in range(sys.n):
            if k in (sel, other) or sys.mu(sel, k) == 0.0:
                continue
            _, w_sel_k = transition_sign_and_freq(sys, sel, k)  # degenerate -> raises
            if w_sel_k == w_ab:
                raise DegeneracyError(
                    f"transition {sel}-{k} is degenerate with the driven transition "
                    f"(w = {w_ab}); perturbation strength is undefined"
                )
            out.append(k)
        return out

    return members(a, b), members(b, a)
