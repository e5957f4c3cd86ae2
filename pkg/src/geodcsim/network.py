"""Inter-datacenter transmission penalties: monetary cost, energy, carbon, delay.

Cost comes from a provider-style region-to-region USD/GB matrix; delay from
empirical throughput/RTT between geographic macro-clusters (US, EU, AP, SA),
with fast intra-cluster defaults. Energy uses a flat kWh/GB intensity and
emissions are booked against the origin grid at dispatch time.

The shipped delay and cost tables are placeholders in the documented format;
replace them with measured values for serious studies.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import numpy as np

from .errors import ConfigError, DataError, DataFormatError

TRANSMISSION_KWH_PER_GB = 0.06
STEP_SECONDS = 900.0
DEFAULT_INTRA_THROUGHPUT_MBPS = 1000.0
DEFAULT_INTRA_RTT_MS = 10.0


class MacroCluster(Enum):
    US = "US"
    EU = "EU"
    AP = "AP"
    SA = "SA"


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Square USD/GB matrix over named provider regions; zero on the diagonal."""

    regions: tuple
    cost_per_gb: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.cost_per_gb, dtype=np.float64)
        n = len(self.regions)
        if mat.shape != (n, n):
            raise DataError(f"cost matrix must be {n}x{n}, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise DataError("cost matrix entries must be finite")
        if np.any(mat < 0):
            raise DataError("cost matrix entries must be >= 0")
        if np.any(np.diagonal(mat) != 0.0):
            raise DataError("cost matrix diagonal must be 0")
        mat.flags.writeable = False
        object.__setattr__(self, "cost_per_gb", mat)
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "_index", {r: i for i, r in enumerate(self.regions)})

    def rate(self, origin_region: str, dest_region: str) -> float:
        try:
            i = self._index[origin_region]
            j = self._index[dest_region]
        except KeyError as exc:
            raise ConfigError(f"region {exc.args[0]!r} not in cost matrix") from exc
        return float(self.cost_per_gb[i, j])

    @classmethod
    def from_csv(cls, path) -> "CostMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or len(rows[0]) < 2:
            raise DataFormatError(f"{path}: expected a header row of region names")
        regions = [r.strip() for r in rows[0][1:]]
        mat = np.zeros((len(regions), len(regions)))
        if len(rows) - 1 != len(regions):
            raise DataFormatError(f"{path}: expected {len(regions)} data rows")
        for i, row in enumerate(rows[1:]):
            if row[0].strip() != regions[i]:
                raise DataFormatError(
                    f"{path}: row label {row[0]!r} does not match column order"
                )
            try:
                mat[i, :] = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}: unparsable cost in row {i + 2}") from exc
        return cls(tuple(regions), mat)


@dataclass
class DelayTable:
    """Throughput (Mbps) and RTT (ms) between macro-clusters, with intra defaults."""

    throughput_mbps: dict
    rtt_ms: dict
    intra_throughput_mbps: float = DEFAULT_INTRA_THROUGHPUT_MBPS
    intra_rtt_ms: float = DEFAULT_INTRA_RTT_MS

    def __post_init__(self):
        for (a, b), thr in self.throughput_mbps.items():
            if thr <= 0:
                raise DataError(f"throughput for {a.value}->{b.value} must be > 0")
        for (a, b), rtt in self.rtt_ms.items():
            if rtt < 0:
                raise DataError(f"RTT for {a.value}->{b.value} must be >= 0")
        if self.intra_throughput_mbps <= 0 or self.intra_rtt_ms < 0:
            raise DataError("intra-cluster defaults out of range")

    def lookup(self, origin: MacroCluster, dest: MacroCluster) -> tuple[float, float]:
        if origin is dest:
            return self.intra_throughput_mbps, self.intra_rtt_ms
        key = (origin, dest)
        if key not in self.throughput_mbps or key not in self.rtt_ms:
            raise ConfigError(f"no delay parameters for {origin.value}->{dest.value}")
        return self.throughput_mbps[key], self.rtt_ms[key]

    @classmethod
    def from_csv(cls, path, intra_throughput_mbps=DEFAULT_INTRA_THROUGHPUT_MBPS,
                 intra_rtt_ms=DEFAULT_INTRA_RTT_MS) -> "DelayTable":
        throughput, rtt = {}, {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            needed = {"origin_cluster", "dest_cluster", "throughput_mbps", "rtt_ms"}
            if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
                raise DataFormatError(f"{path}: expected columns {sorted(needed)}")
            for i, row in enumerate(reader, start=2):
                try:
                    a = MacroCluster(row["origin_cluster"].strip())
                    b = MacroCluster(row["dest_cluster"].strip())
                    throughput[(a, b)] = float(row["throughput_mbps"])
                    rtt[(a, b)] = float(row["rtt_ms"])
                except ValueError as exc:
                    raise DataError(f"{path}: bad row {i}: {exc}") from exc
        return cls(throughput, rtt, intra_throughput_mbps, intra_rtt_ms)


@dataclass
class RegionMap:
    """Location code -> (cloud region, macro-cluster)."""

    mapping: dict

    def region_of(self, location_code: str) -> str:
        return self._entry(location_code)[0]

    def cluster_of(self, location_code: str) -> MacroCluster:
        return self._entry(location_code)[1]

    def _entry(self, location_code: str):
        try:
            return self.mapping[location_code]
        except KeyError as exc:
            raise ConfigError(f"location {location_code!r} has no region mapping") from exc

    @classmethod
    def from_csv(cls, path) -> "RegionMap":
        mapping = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            needed = {"location_code", "cloud_region", "macro_cluster"}
            if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
                raise DataFormatError(f"{path}: expected columns {sorted(needed)}")
            for i, row in enumerate(reader, start=2):
                try:
                    cluster = MacroCluster(row["macro_cluster"].strip())
                except ValueError as exc:
                    raise DataError(f"{path}: bad macro_cluster in row {i}") from exc
                mapping[row["location_code"].strip()] = (row["cloud_region"].strip(), cluster)
        return cls(mapping)


def transmission_cost(matrix: CostMatrix, region_map: RegionMap,
                      s_bw_gb: float, origin_loc: str, dest_loc: str) -> float:
    """USD to move ``s_bw_gb`` between locations; zero within one provider region."""
    if s_bw_gb < 0:
        raise ValueError("s_bw_gb must be >= 0")
    r_orig = region_map.region_of(origin_loc)
    r_dest = region_map.region_of(dest_loc)
    if r_orig == r_dest:
        return 0.0
    return s_bw_gb * matrix.rate(r_orig, r_dest)


def transmission_energy_kwh(s_bw_gb: float, kwh_per_gb: float = TRANSMISSION_KWH_PER_GB) -> float:
    """Network energy for a transfer at a flat electricity-intensity factor."""
    if s_bw_gb < 0:
        raise ValueError("s_bw_gb must be >= 0")
    return s_bw_gb * kwh_per_gb


def transmission_emissions_kg(energy_kwh: float, ci_origin_g_per_kwh: float) -> float:
    """Transfer emissions booked against the origin grid (kgCO2eq)."""
    return energy_kwh * ci_origin_g_per_kwh / 1000.0


def transmission_delay_s(table: DelayTable, region_map: RegionMap,
                         s_bw_gb: float, origin_loc: str, dest_loc: str) -> float:
    """Serialization plus propagation delay in seconds."""
    if s_bw_gb < 0:
        raise ValueError("s_bw_gb must be >= 0")
    throughput, rtt = table.lookup(
        region_map.cluster_of(origin_loc), region_map.cluster_of(dest_loc)
    )
    return s_bw_gb * 8000.0 / throughput + rtt / 1000.0


def delay_steps(delay_s: float, step_seconds: float = STEP_SECONDS) -> int:
    """Whole simulation steps a transfer stays in transit."""
    if delay_s < 0:
        raise ValueError("delay must be >= 0")
    return math.ceil(delay_s / step_seconds)


def _data_path(name: str):
    return resources.files("geodcsim").joinpath("data", name)


def default_cost_matrix() -> CostMatrix:
    with resources.as_file(_data_path("cost_matrix.csv")) as p:
        return CostMatrix.from_csv(p)


def default_delay_table() -> DelayTable:
    with resources.as_file(_data_path("delay_params.csv")) as p:
        return DelayTable.from_csv(p)


def default_region_map() -> RegionMap:
    with resources.as_file(_data_path("region_map.csv")) as p:
        return RegionMap.from_csv(p)
