"""Zeroth-order Takagi-Sugeno-Kang inference for the six planner parameters.

Each system has four inputs with five triangular membership functions per
input (outer two are shoulders) and one constant consequent per rule, so
5**4 = 625 rules. Adjacent triangles have their feet at the neighbouring
peaks, which makes the memberships of every input sum to one. Under that
partition the weighted-average defuzzifier reduces to multilinear
interpolation over the 5x5x5x5 grid of consequents.

Rule ordering: index = i1*125 + i2*25 + i3*5 + i4, where i_k is the MF
index of input k and inputs are ordered as in `INPUT_NAMES`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

N_INPUTS = 4
N_MF = 5
N_RULES = N_MF**N_INPUTS
PEAK_PARAMS = 3 * N_INPUTS
PARAMS_PER_FIS = PEAK_PARAMS + N_RULES
N_OUTPUTS = 6
GENOME_LENGTH = N_OUTPUTS * PARAMS_PER_FIS

TWO_PI = 2.0 * math.pi
MAX_DIST = 0.6

INPUT_NAMES = ("angle_to_obstacle", "dist_to_obstacle", "angle_to_goal", "dist_to_goal")
INPUT_RANGES = ((0.0, TWO_PI), (0.0, MAX_DIST), (0.0, TWO_PI), (0.0, MAX_DIST))
OUTPUT_NAMES = ("bound1", "bound2", "bound3", "bound4", "step_size", "goal_bias")
OUTPUT_RANGES = (
    (-180.0, 180.0),
    (-180.0, 180.0),
    (-180.0, 180.0),
    (-180.0, 180.0),
    (0.0, 10.0),
    (0.0, 1.0),
)
PEAK_SEPARATION = 1e-3  # minimum peak gap, as a fraction of the universe width
MODEL_FORMAT_VERSION = 1


class GenomeError(ValueError):
    """Structural problem with a genome (wrong length, non-finite genes)."""


class ModelFormatError(ValueError):
    """A trained-model file failed validation."""


@dataclass(frozen=True)
class InputUniverse:
    lo: float
    hi: float
    interior_peaks: tuple[float, float, float]

    def __post_init__(self) -> None:
        p = tuple(float(v) for v in self.interior_peaks)
        object.__setattr__(self, "interior_peaks", p)
        if len(p) != 3 or not (self.lo < p[0] < p[1] < p[2] < self.hi):
            raise ValueError(f"peaks must satisfy lo < p1 < p2 < p3 < hi, got {self.lo}, {p}, {self.hi}")

    @property
    def peaks(self) -> tuple[float, ...]:
        return (self.lo, *self.interior_peaks, self.hi)

    def clip(self, x: float) -> float:
        return self.lo if x < self.lo else self.hi if x > self.hi else x

    def locate(self, x: float) -> tuple[int, float]:
        """Return (k, t): MF k has membership 1 - t and MF k+1 has membership t."""
        x = self.clip(x)
        peaks = self.peaks
        for k in range(N_MF - 2):
            if x <= peaks[k + 1]:
                lo, hi = peaks[k], peaks[k + 1]
                return k, (x - lo) / (hi - lo)
        return N_MF - 2, (x - peaks[3]) / (peaks[4] - peaks[3])


def membership(u: InputUniverse, mf_index: int, x: float) -> float:
    """Degree of membership of x in MF `mf_index` of universe u."""
    if not 0 <= mf_index < N_MF:
        raise IndexError(f"mf_index must be in 0..{N_MF - 1}")
    x = u.clip(x)
    peaks = u.peaks
    pk = peaks[mf_index]
    if x < pk:
        if mf_index == 0:
            return 1.0
        left = peaks[mf_index - 1]
        return 0.0 if x <= left else (x - left) / (pk - left)
    if x > pk:
        if mf_index == N_MF - 1:
            return 1.0
        right = peaks[mf_index + 1]
        return 0.0 if x >= right else (right - x) / (right - pk)
    return 1.0


@dataclass(frozen=True)
class TskFis:
    universes: tuple[InputUniverse, ...]
    consequents: tuple[float, ...]
    output_range: tuple[float, float]
    name: str = ""

    def __post_init__(self) -> None:
        cons = tuple(float(c) for c in self.consequents)
        object.__setattr__(self, "consequents", cons)
        object.__setattr__(self, "universes", tuple(self.universes))
        if len(self.universes) != N_INPUTS:
            raise ValueError(f"expected {N_INPUTS} input universes, got {len(self.universes)}")
        if len(cons) != N_RULES:
            raise ValueError(f"expected {N_RULES} consequents, got {len(cons)}")
        lo, hi = self.output_range
        if not all(lo <= c <= hi for c in cons):
            raise ValueError(f"consequents of {self.name or 'fis'} must lie in [{lo}, {hi}]")


def rule_index(i1: int, i2: int, i3: int, i4: int) -> int:
    return ((i1 * N_MF + i2) * N_MF + i3) * N_MF + i4


def infer(f: TskFis, x: Sequence[float]) -> float:
    """Weighted-average output of the 625-rule system at inputs x.

    Only the 2**4 rules adjacent to x have nonzero weight and the weights sum
    to one, so the weighted average is computed as nested linear
    interpolation, innermost over the last input. The a + t*(b - a) form
    returns a constant exactly when all firing consequents are equal.
    """
    u = f.universes
    k1, t1 = u[0].locate(x[0])
    k2, t2 = u[1].locate(x[1])
    k3, t3 = u[2].locate(x[2])
    k4, t4 = u[3].locate(x[3])
    c = f.consequents
    v1 = []
    for i1 in (k1, k1 + 1):
        v2 = []
        for i2 in (k2, k2 + 1):
            v3 = []
            for i3 in (k3, k3 + 1):
                base = ((i1 * N_MF + i2) * N_MF + i3) * N_MF + k4
                a = c[base]
                v3.append(a + t4 * (c[base + 1] - a))
            v2.append(v3[0] + t3 * (v3[1] - v3[0]))
        v1.append(v2[0] + t2 * (v2[1] - v2[0]))
    out = v1[0] + t1 * (v1[1] - v1[0])
    lo, hi = f.output_range
    return lo if out < lo else hi if out > hi else out


@dataclass(frozen=True)
class EnvInputs:
    angle_to_goal: float
    dist_to_goal: float
    angle_to_obstacle: float
    dist_to_obstacle: float

    def as_fis_inputs(self) -> tuple[float, float, float, float]:
        # infinite obstacle distance is clipped to the universe edge inside infer
        return (self.angle_to_obstacle, self.dist_to_obstacle, self.angle_to_goal, self.dist_to_goal)


@dataclass(frozen=True)
class FuzzyParams:
    """Per-iteration planner settings; bounds are (lo, hi) intervals per joint."""

    bias: float
    bounds: tuple[tuple[float, float], tuple[float, float]]
    step: float

    @classmethod
    def from_outputs(cls, b1: float, b2: float, b3: float, b4: float, step: float, bias: float) -> FuzzyParams:
        # independent FISs cannot guarantee ordering: swap instead of discarding
        ax1 = (b1, b2) if b1 <= b2 else (b2, b1)
        ax2 = (b3, b4) if b3 <= b4 else (b4, b3)
        return cls(bias, (ax1, ax2), step)


@dataclass(frozen=True)
class FisBank:
    fis: tuple[TskFis, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fis", tuple(self.fis))
        if len(self.fis) != N_OUTPUTS:
            raise ValueError(f"a bank holds exactly {N_OUTPUTS} systems, got {len(self.fis)}")
        for f, name, rng in zip(self.fis, OUTPUT_NAMES, OUTPUT_RANGES):
            if tuple(f.output_range) != rng:
                raise ValueError(f"{name} must have output range {rng}, got {f.output_range}")

    def outputs(self, x: Sequence[float]) -> tuple[float, ...]:
        return tuple(infer(f, x) for f in self.fis)


def evaluate_bank(bank: FisBank, e: EnvInputs) -> FuzzyParams:
    x = e.as_fis_inputs()
    b1, b2, b3, b4, step, bias = bank.outputs(x)
    return FuzzyParams.from_outputs(b1, b2, b3, b4, step, bias)


# --- genome encoding ------------------------------------------------------


def _decode_peaks(genes: np.ndarray, lo: float, hi: float) -> tuple[float, float, float]:
    width = hi - lo
    eps = PEAK_SEPARATION * width
    a, b, c = sorted(lo + float(g) * width for g in genes)
    b = min(max(b, lo + 2 * eps), hi - 2 * eps)
    a = max(min(a, b - eps), lo + eps)
    c = min(max(c, b + eps), hi - eps)
    return (a, b, c)


def decode(genes: Sequence[float] | np.ndarray) -> FisBank:
    """Map a normalized 3,822-gene vector to a FisBank.

    Per system: 12 peak genes (three per input, in input order) followed by
    625 consequent genes in rule-index order. Peak genes are mapped affinely
    into the input universe, sorted, and pushed apart to a minimum gap;
    consequent genes map affinely into the output range.
    """
    g = np.asarray(genes, dtype=float)
    if g.ndim != 1 or g.shape[0] != GENOME_LENGTH:
        raise GenomeError(f"genome must have length {GENOME_LENGTH}, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise GenomeError("genome contains non-finite genes")
    g = np.clip(g, 0.0, 1.0)
    systems = []
    for j, (name, (olo, ohi)) in enumerate(zip(OUTPUT_NAMES, OUTPUT_RANGES)):
        block = g[j * PARAMS_PER_FIS:(j + 1) * PARAMS_PER_FIS]
        universes = tuple(
            InputUniverse(lo, hi, _decode_peaks(block[3 * i:3 * i + 3], lo, hi))
            for i, (lo, hi) in enumerate(INPUT_RANGES)
        )
        cons = olo + block[PEAK_PARAMS:] * (ohi - olo)
        cons = np.clip(cons, olo, ohi)
        systems.append(TskFis(universes, tuple(cons.tolist()), (olo, ohi), name))
    return FisBank(tuple(systems))


def encode(bank: FisBank) -> np.ndarray:
    """Inverse of `decode` for banks whose peaks already respect the minimum gap."""
    out = np.empty(GENOME_LENGTH)
    for j, f in enumerate(bank.fis):
        block = out[j * PARAMS_PER_FIS:(j + 1) * PARAMS_PER_FIS]
        for i, u in enumerate(f.universes):
            block[3 * i:3 * i + 3] = [(p - u.lo) / (u.hi - u.lo) for p in u.interior_peaks]
        olo, ohi = f.output_range
        block[PEAK_PARAMS:] = (np.asarray(f.consequents) - olo) / (ohi - olo)
    return out


def random_genome(rng: np.random.Generator) -> np.ndarray:
    return rng.random(GENOME_LENGTH)


def constant_bank(b1: float, b2: float, b3: float, b4: float, step: float, bias: float) -> FisBank:
    """Bank whose six outputs are constant regardless of the inputs."""
    values = (b1, b2, b3, b4, step, bias)
    default_peaks = [(lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo), lo + 0.75 * (hi - lo)) for lo, hi in INPUT_RANGES]
    universes = tuple(InputUniverse(lo, hi, p) for (lo, hi), p in zip(INPUT_RANGES, default_peaks))
    return FisBank(tuple(
        TskFis(universes, (v,) * N_RULES, rng, name)
        for v, rng, name in zip(values, OUTPUT_RANGES, OUTPUT_NAMES)
    ))


# --- model files ----------------------------------------------------------

_MODEL_KEYS = {"format_version", "inputs", "outputs"}
_INPUT_KEYS = {"name", "range"}
_OUTPUT_KEYS = {"name", "range", "peaks", "consequents"}


def bank_to_dict(bank: FisBank) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "inputs": [{"name": n, "range": list(r)} for n, r in zip(INPUT_NAMES, INPUT_RANGES)],
        "outputs": [
            {
                "name": f.name or OUTPUT_NAMES[j],
                "range": list(f.output_range),
                "peaks": [list(u.interior_peaks) for u in f.universes],
                "consequents": list(f.consequents),
            }
            for j, f in enumerate(bank.fis)
        ],
    }


def _check_keys(obj, expected: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ModelFormatError(f"{where} must be an object")
    if set(obj) != expected:
        raise ModelFormatError(f"{where} must have keys {sorted(expected)}, got {sorted(obj)}")


def bank_from_dict(data: dict) -> FisBank:
    _check_keys(data, _MODEL_KEYS, "model")
    if data["format_version"] != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format_version {data['format_version']!r}")
    inputs = data["inputs"]
    if not isinstance(inputs, list) or len(inputs) != N_INPUTS:
        raise ModelFormatError(f"model must declare {N_INPUTS} inputs")
    for item, name, rng in zip(inputs, INPUT_NAMES, INPUT_RANGES):
        _check_keys(item, _INPUT_KEYS, "input")
        if item["name"] != name or tuple(item["range"]) != rng:
            raise ModelFormatError(f"input {item['name']!r} does not match expected {name} {rng}")
    outputs = data["outputs"]
    if not isinstance(outputs, list) or len(outputs) != N_OUTPUTS:
        raise ModelFormatError(f"model must declare {N_OUTPUTS} outputs")
    systems = []
    for item, name, rng in zip(outputs, OUTPUT_NAMES, OUTPUT_RANGES):
        _check_keys(item, _OUTPUT_KEYS, "output")
        if item["name"] != name or tuple(item["range"]) != rng:
            raise ModelFormatError(f"output {item['name']!r} does not match expected {name} {rng}")
        peaks = item["peaks"]
        if not isinstance(peaks, list) or len(peaks) != N_INPUTS:
            raise ModelFormatError(f"{name}: expected {N_INPUTS} peak triples")
        try:
            universes = tuple(
                InputUniverse(lo, hi, tuple(p)) for (lo, hi), p in zip(INPUT_RANGES, peaks)
            )
            systems.append(TskFis(universes, tuple(item["consequents"]), rng, name))
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"{name}: {exc}") from exc
    return FisBank(tuple(systems))


def save_bank(bank: FisBank, path: str | Path) -> None:
    # json writes floats with repr, which round-trips exactly
    Path(path).write_text(json.dumps(bank_to_dict(bank), indent=1) + "\n")


def load_bank(path: str | Path) -> FisBank:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    return bank_from_dict(data)
