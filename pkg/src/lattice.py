# src/lattice.py
"""
Monolayer hBN honeycomb around a boron vacancy at the origin.

Sites are generated on integer coordinates: a boron at lattice vector
(m, n) has X = 2m + n, Y = 3n and sits at a0 * (sqrt(3) X / 2, Y / 2); its
nitrogen partner is one bond up, at Y + 2. The squared distance from the
vacancy is then a0^2 * (3 X^2 + Y^2) / 4, so rings are grouped on an exact
integer key rather than on floats.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.config import DEFAULT_CONFIG, TWO_PI
from src.errors import ConfigError, LatticeExtentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpeciesParams:
    label: str
    spin: float
    gamma: float  # rad/s/T


BORON_11 = SpeciesParams("B11", 1.5, TWO_PI * 13.66e6)
NITROGEN_14 = SpeciesParams("N14", 1.0, TWO_PI * 3.078e6)
SPECIES = {p.label: p for p in (BORON_11, NITROGEN_14)}


@dataclass(frozen=True)
class Site:
    index: int
    position: Tuple[float, float]  # m
    species: SpeciesParams
    ring: int
    key: int = 0  # 4 |r|^2 / a0^2

    @property
    def distance(self) -> float:
        return math.hypot(*self.position)

    @property
    def angle(self) -> float:
        return math.atan2(self.position[1], self.position[0]) % TWO_PI


@dataclass(frozen=True)
class LatticeSpec:
    """Either ring_count, or one or both of n_boron / n_nitrogen."""
    a0: float = DEFAULT_CONFIG["lattice"]["bond_length"]
    ring_count: Optional[int] = None
    n_boron: Optional[int] = None
    n_nitrogen: Optional[int] = None
    extent: int = DEFAULT_CONFIG["lattice"]["extent"]

    def __post_init__(self):
        if not self.a0 > 0:
            raise ConfigError(f"bond_length must be positive, got {self.a0}")
        if self.extent < 1:
            raise ConfigError(f"lattice_extent must be >= 1, got {self.extent}")
        by_count = self.n_boron is not None or self.n_nitrogen is not None
        if self.ring_count is not None and by_count:
            raise ConfigError("ring_count and per-species counts are mutually exclusive")
        if self.ring_count is not None:
            if self.ring_count < 1:
                raise ConfigError(f"ring_count must be >= 1, got {self.ring_count}")
        elif by_count:
            nb, nn = self.n_boron or 0, self.n_nitrogen or 0
            if nb < 0 or nn < 0 or nb + nn == 0:
                raise ConfigError(f"n_boron/n_nitrogen must select at least one site, got ({nb}, {nn})")
        else:
            raise ConfigError("lattice selection is empty: set ring_count or n_boron/n_nitrogen")


def _enumerate_sites(a0: float, extent: int) -> List[Tuple[int, float, SpeciesParams, Tuple[float, float]]]:
    """All sites whose ring is completely contained in the generated patch."""
    # Points outside the |m|, |n| <= extent patch lie at key >= this bound.
    key_bound = min((3 * extent + 1) ** 2, 3 * (extent + 2) ** 2)
    half_sqrt3 = math.sqrt(3.0) / 2.0
    raw = []
    for n in range(-extent, extent + 1):
        for m in range(-extent, extent + 1):
            X, Y = 2 * m + n, 3 * n
            for species, y_int in ((BORON_11, Y), (NITROGEN_14, Y + 2)):
                key = 3 * X * X + y_int * y_int
                if key == 0 or key >= key_bound:
                    continue
                pos = (a0 * half_sqrt3 * X, a0 * 0.5 * y_int)
                angle = math.atan2(pos[1], pos[0]) % TWO_PI
                raw.append((key, angle, species, pos))
    raw.sort(key=lambda r: (r[0], r[1]))
    return raw


def _lattice_rings(a0: float, extent: int) -> List[Site]:
    raw = _enumerate_sites(a0, extent)
    sites, ring, last_key = [], 0, None
    for i, (key, _, species, pos) in enumerate(raw):
        if key != last_key:
            ring += 1
            last_key = key
        sites.append(Site(index=i, position=pos, species=species, ring=ring, key=key))
    return sites


def _reindex(sites: Sequence[Site]) -> List[Site]:
    return [Site(index=i, position=s.position, species=s.species, ring=s.ring, key=s.key)
            for i, s in enumerate(sites)]


def build_lattice(spec: LatticeSpec) -> List[Site]:
    """
    Nuclear sites around the vacancy, sorted by (distance, polar angle).

    Ring numbers count distinct distances over both sublattices. With
    per-species counts the nearest n_boron borons and n_nitrogen nitrogens
    are kept, ties on a shared ring broken by polar angle.
    """
    sites = _lattice_rings(spec.a0, spec.extent)
    n_rings = sites[-1].ring if sites else 0

    if spec.ring_count is not None:
        if spec.ring_count > n_rings:
            raise LatticeExtentError(
                f"insufficient lattice extent: {spec.ring_count} rings requested, "
                f"{n_rings} complete rings generated (increase lattice_extent)")
        chosen = [s for s in sites if s.ring <= spec.ring_count]
    else:
        wanted = {BORON_11.label: spec.n_boron or 0, NITROGEN_14.label: spec.n_nitrogen or 0}
        available = {label: sum(1 for s in sites if s.species.label == label) for label in wanted}
        for label, count in wanted.items():
            if count > available[label]:
                raise LatticeExtentError(
                    f"insufficient lattice extent: {count} {label} sites requested, "
                    f"{available[label]} generated (increase lattice_extent)")
        taken = {label: 0 for label in wanted}
        chosen = []
        for s in sites:
            label = s.species.label
            if taken[label] < wanted[label]:
                chosen.append(s)
                taken[label] += 1

    logger.debug("Built lattice: %d sites, %d rings available", len(chosen), n_rings)
    return _reindex(chosen)


def ring_sites(ring: int, a0: float = DEFAULT_CONFIG["lattice"]["bond_length"],
               extent: int = DEFAULT_CONFIG["lattice"]["extent"]) -> List[Site]:
    return [s for s in build_lattice(LatticeSpec(a0=a0, ring_count=ring, extent=extent)) if s.ring == ring]


def _ring_triple(ring: int, a0: float, extent: int) -> List[Site]:
    """Three same-ring sites related by the C3 rotation about the vacancy."""
    members = ring_sites(ring, a0, extent)
    if len(members) == 6:
        members = members[0::2]
    return _reindex(members)


STANDARD_BATHS = ("fig1-n-ring1", "fig1-n-ring7", "fig1-b-ring2", "fig1-b-ring5", "fig2-30", "fig3-240")


def standard_bath(name: str, a0: float = DEFAULT_CONFIG["lattice"]["bond_length"],
                  extent: int = DEFAULT_CONFIG["lattice"]["extent"]) -> List[Site]:
    if name == "fig2-30":
        return build_lattice(LatticeSpec(a0=a0, ring_count=6, extent=extent))
    if name == "fig3-240":
        return build_lattice(LatticeSpec(a0=a0, n_boron=120, n_nitrogen=120, extent=extent))
    if name.startswith("fig1-") and name in STANDARD_BATHS:
        return _ring_triple(int(name.rsplit("ring", 1)[1]), a0, extent)
    raise ConfigError(f"bath: unknown preset {name!r} (expected one of {', '.join(STANDARD_BATHS)})")


def positions_array(sites: Sequence[Site]) -> np.ndarray:
    return np.array([s.position for s in sites], dtype=float).reshape(-1, 2)


def species_counts(sites: Sequence[Site]) -> dict:
    counts = {label: 0 for label in SPECIES}
    for s in sites:
        counts[s.species.label] += 1
    return counts


def sites_to_csv(sites: Sequence[Site]) -> str:
    lines = ["index,species,x_m,y_m,ring"]
    for s in sites:
        lines.append(f"{s.index},{s.species.label},{s.position[0]:.12g},{s.position[1]:.12g},{s.ring}")
    return "\n".join(lines) + "\n"
