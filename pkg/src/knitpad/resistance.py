"""Pairwise-resistance analysis of the fabric between its connection points.

Covers the DC characterization workflow: six pairwise resistances between
the corners, the Kirchhoff-style conductivity matrix built from them, and
percent resistance change across wash/dry cycles.
"""

from dataclasses import dataclass

import numpy as np

from .mesh import CORNERS, CornerId, MeshConfig, effective_resistance

PAIR_KEYS = ("AB", "AC", "AD", "BC", "BD", "CD")


def pair_key(i, j) -> str:
    """Canonical unordered pair key from two corners (ids or letters)."""
    a = i.value if isinstance(i, CornerId) else str(i)
    b = j.value if isinstance(j, CornerId) else str(j)
    key = "".join(sorted((a, b)))
    if key not in PAIR_KEYS:
        raise ValueError(f"not a corner pair: {i!r}, {j!r}")
    return key


@dataclass(frozen=True)
class PairwiseResistance:
    """Resistances for the six unordered corner pairs, in ohms."""

    values: dict

    def __post_init__(self):
        vals = {}
        for k, v in self.values.items():
            key = pair_key(k[0], k[1]) if isinstance(k, str) and len(k) == 2 else pair_key(*k)
            vals[key] = float(v)
        missing = [k for k in PAIR_KEYS if k not in vals]
        if missing:
            raise ValueError(f"missing pairs: {missing}")
        for k in PAIR_KEYS:
            if not (vals[k] > 0 and np.isfinite(vals[k])):
                raise ValueError(f"resistance for {k} must be finite and > 0")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, pair) -> float:
        if isinstance(pair, str) and len(pair) == 2:
            return self.values[pair_key(pair[0], pair[1])]
        return self.values[pair_key(*pair)]


@dataclass(frozen=True)
class ConductivityMatrix:
    """4x4 Kirchhoff conductivity matrix, rows/cols ordered A,B,C,D."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("conductivity matrix must be 4x4")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12):
            raise ValueError("conductivity matrix must be symmetric")
        off = m[~np.eye(4, dtype=bool)]
        if np.any(off < 0):
            raise ValueError("off-diagonal conductances must be >= 0")
        if not np.allclose(m.sum(axis=1), 0.0, atol=1e-9 * max(1.0, np.abs(m).max())):
            raise ValueError("rows must sum to zero")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __getitem__(self, pair) -> float:
        i, j = pair
        return float(self.matrix[CORNERS.index(i), CORNERS.index(j)])


@dataclass(frozen=True)
class WashDryRecord:
    """Baseline pairwise resistances plus measurements after each cycle."""

    baseline: PairwiseResistance
    after_cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "after_cycle", tuple(self.after_cycle))
        for rec in self.after_cycle:
            if not isinstance(rec, PairwiseResistance):
                raise ValueError("after_cycle entries must be PairwiseResistance")

    @property
    def n_cycles(self) -> int:
        return len(self.after_cycle)


def conductivity_matrix(pairs: PairwiseResistance) -> ConductivityMatrix:
    """Kirchhoff conductivity matrix from six pairwise resistances.

    Off-diagonal (i, j) is 1/R_ij; the diagonal carries the negated row
    sum, so every row sums to zero.
    """
    m = np.zeros((4, 4))
    for a in range(4):
        for b in range(a + 1, 4):
            g = 1.0 / pairs[(CORNERS[a], CORNERS[b])]
            m[a, b] = g
            m[b, a] = g
    np.fill_diagonal(m, -m.sum(axis=1))
    return ConductivityMatrix(matrix=m)


def percent_delta_r(record: WashDryRecord, cycle: int):
    """Fractional resistance change after a wash/dry cycle.

    cycle is the 1-based cycle number n. Returns (per_pair, cumulative):
    per_pair maps each pair key to (R_dn - R_b) / R_b, and cumulative is
    the arithmetic mean of the six per-pair fractions.
    """
    if not (1 <= cycle <= record.n_cycles):
        raise ValueError(f"cycle {cycle} out of range (record has {record.n_cycles})")
    after = record.after_cycle[cycle - 1]
    per_pair = {
        k: (after[k] - record.baseline[k]) / record.baseline[k] for k in PAIR_KEYS
    }
    cumulative = sum(per_pair.values()) / len(PAIR_KEYS)
    return per_pair, cumulative


def pairwise_from_mesh(config: MeshConfig) -> PairwiseResistance:
    """Six pairwise DC resistances of a simulated mesh's fabric grid."""
    vals = {}
    for a in range(4):
        for b in range(a + 1, 4):
            i, j = CORNERS[a], CORNERS[b]
            vals[pair_key(i, j)] = effective_resistance(config, i, j)
    return PairwiseResistance(values=vals)
