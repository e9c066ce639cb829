"""Instance files and synthetic instance generation.

An instance lives in three CSV files. Column names are part of the
format; a header row is mandatory; timestamps are integer seconds from
midnight; coordinates are decimal degrees written with repr so a
serialize/parse round trip is exact.

    stores.csv    store_id,lat,lon
    couriers.csv  courier_id,vehicle,lat,lon,on_time,off_time
    orders.csv    order_id,store_id,lat,lon,placement_time,prep_start_time,
                  ready_time,pickup_service,dropoff_service,deadline

The generator produces reproducible synthetic days: uniform locations in
a city-scale box, order placements from a two-peak lunch/dinner mixture,
preparation starting at placement, and uniform prep/window/service draws.
"""

from __future__ import annotations

import csv
import os
import random
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .model import DAY_S, Courier, GeoPoint, Instance, Order, Restaurant, VehicleKind

STORES_COLUMNS = ["store_id", "lat", "lon"]
COURIERS_COLUMNS = ["courier_id", "vehicle", "lat", "lon", "on_time", "off_time"]
ORDERS_COLUMNS = [
    "order_id",
    "store_id",
    "lat",
    "lon",
    "placement_time",
    "prep_start_time",
    "ready_time",
    "pickup_service",
    "dropoff_service",
    "deadline",
]

STORES_FILE = "stores.csv"
COURIERS_FILE = "couriers.csv"
ORDERS_FILE = "orders.csv"


class InstanceFormatError(ValueError):
    """Base class for instance file problems; carries file/line context."""

    def __init__(self, file: str, line: int, column: str, message: str) -> None:
        self.file = file
        self.line = line
        self.column = column
        super().__init__(f"{file}:{line}: column {column!r}: {message}")


class MalformedRowError(InstanceFormatError):
    """A cell is missing or fails to parse as its declared type."""


class UnknownVehicleError(InstanceFormatError):
    """A courier row names a vehicle kind that does not exist."""


class DanglingStoreError(InstanceFormatError):
    """An order references a store_id absent from stores.csv."""


class InvertedTimesError(InstanceFormatError):
    """A row's time fields violate their required ordering."""


def _read_rows(path: str, columns: Sequence[str]) -> List[Tuple[int, Dict[str, str]]]:
    fname = os.path.basename(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRowError(fname, 1, columns[0], "missing header row") from None
        if header != list(columns):
            raise MalformedRowError(
                fname, 1, columns[0], f"header must be {','.join(columns)}, got {','.join(header)}"
            )
        rows: List[Tuple[int, Dict[str, str]]] = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(columns):
                raise MalformedRowError(
                    fname, lineno, columns[min(len(raw), len(columns) - 1)],
                    f"expected {len(columns)} cells, got {len(raw)}",
                )
            rows.append((lineno, dict(zip(columns, raw))))
        return rows


def _parse_float(fname: str, lineno: int, column: str, cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise MalformedRowError(fname, lineno, column, f"not a number: {cell!r}") from None


def _parse_int(fname: str, lineno: int, column: str, cell: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise MalformedRowError(fname, lineno, column, f"not an integer: {cell!r}") from None


def _require_id(fname: str, lineno: int, column: str, cell: str) -> str:
    if not cell:
        raise MalformedRowError(fname, lineno, column, "empty id")
    return cell


def parse_instance(stores_path: str, couriers_path: str, orders_path: str) -> Instance:
    """Load and cross-validate the three files into an Instance."""
    sname = os.path.basename(stores_path)
    restaurants: List[Restaurant] = []
    for lineno, rec in _read_rows(stores_path, STORES_COLUMNS):
        restaurants.append(
            Restaurant(
                id=_require_id(sname, lineno, "store_id", rec["store_id"]),
                location=GeoPoint(
                    _parse_float(sname, lineno, "lat", rec["lat"]),
                    _parse_float(sname, lineno, "lon", rec["lon"]),
                ),
            )
        )

    cname = os.path.basename(couriers_path)
    couriers: List[Courier] = []
    for lineno, rec in _read_rows(couriers_path, COURIERS_COLUMNS):
        try:
            vehicle = VehicleKind(rec["vehicle"])
        except ValueError:
            raise UnknownVehicleError(
                cname, lineno, "vehicle", f"unknown vehicle kind {rec['vehicle']!r}"
            ) from None
        on_t = _parse_int(cname, lineno, "on_time", rec["on_time"])
        off_t = _parse_int(cname, lineno, "off_time", rec["off_time"])
        if off_t <= on_t:
            raise InvertedTimesError(
                cname, lineno, "off_time", f"off_time {off_t} must exceed on_time {on_t}"
            )
        couriers.append(
            Courier(
                id=_require_id(cname, lineno, "courier_id", rec["courier_id"]),
                vehicle=vehicle,
                start_location=GeoPoint(
                    _parse_float(cname, lineno, "lat", rec["lat"]),
                    _parse_float(cname, lineno, "lon", rec["lon"]),
                ),
                on_time=on_t,
                off_time=off_t,
            )
        )

    oname = os.path.basename(orders_path)
    store_ids = {r.id for r in restaurants}
    orders: List[Order] = []
    for lineno, rec in _read_rows(orders_path, ORDERS_COLUMNS):
        store_id = _require_id(oname, lineno, "store_id", rec["store_id"])
        if store_id not in store_ids:
            raise DanglingStoreError(
                oname, lineno, "store_id", f"order references unknown store {store_id!r}"
            )
        placement = _parse_int(oname, lineno, "placement_time", rec["placement_time"])
        prep_start = _parse_int(oname, lineno, "prep_start_time", rec["prep_start_time"])
        ready = _parse_int(oname, lineno, "ready_time", rec["ready_time"])
        deadline = _parse_int(oname, lineno, "deadline", rec["deadline"])
        for col, lo, hi in (
            ("prep_start_time", placement, prep_start),
            ("ready_time", prep_start, ready),
            ("deadline", ready, deadline),
        ):
            if hi < lo:
                raise InvertedTimesError(
                    oname, lineno, col, f"time fields out of order ({lo} > {hi})"
                )
        orders.append(
            Order(
                id=_require_id(oname, lineno, "order_id", rec["order_id"]),
                restaurant_id=store_id,
                user_dropoff=GeoPoint(
                    _parse_float(oname, lineno, "lat", rec["lat"]),
                    _parse_float(oname, lineno, "lon", rec["lon"]),
                ),
                placement_time=placement,
                prep_start_time=prep_start,
                ready_time=ready,
                deadline=deadline,
                pickup_service_s=_parse_int(oname, lineno, "pickup_service", rec["pickup_service"]),
                dropoff_service_s=_parse_int(oname, lineno, "dropoff_service", rec["dropoff_service"]),
            )
        )
    return Instance(restaurants=tuple(restaurants), couriers=tuple(couriers), orders=tuple(orders))


def serialize_instance(instance: Instance, out_dir: str) -> Tuple[str, str, str]:
    """Write the three CSV files under out_dir; returns their paths.

    Floats are written with repr, so parse_instance(serialize_instance(x))
    reproduces every field bit-exactly.
    """
    os.makedirs(out_dir, exist_ok=True)
    stores_path = os.path.join(out_dir, STORES_FILE)
    couriers_path = os.path.join(out_dir, COURIERS_FILE)
    orders_path = os.path.join(out_dir, ORDERS_FILE)

    with open(stores_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(STORES_COLUMNS)
        for r in instance.restaurants:
            w.writerow([r.id, repr(r.location.lat), repr(r.location.lon)])

    with open(couriers_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COURIERS_COLUMNS)
        for c in instance.couriers:
            w.writerow(
                [
                    c.id,
                    c.vehicle.value,
                    repr(c.start_location.lat),
                    repr(c.start_location.lon),
                    c.on_time,
                    c.off_time,
                ]
            )

    with open(orders_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ORDERS_COLUMNS)
        for o in instance.orders:
            w.writerow(
                [
                    o.id,
                    o.restaurant_id,
                    repr(o.user_dropoff.lat),
                    repr(o.user_dropoff.lon),
                    o.placement_time,
                    o.prep_start_time,
                    o.ready_time,
                    o.pickup_service_s,
                    o.dropoff_service_s,
                    o.deadline,
                ]
            )
    return stores_path, couriers_path, orders_path


def instance_paths(directory: str) -> Tuple[str, str, str]:
    """The conventional (stores, couriers, orders) paths under a directory."""
    return (
        os.path.join(directory, STORES_FILE),
        os.path.join(directory, COURIERS_FILE),
        os.path.join(directory, ORDERS_FILE),
    )


def load_instance_dir(directory: str) -> Instance:
    return parse_instance(*instance_paths(directory))


# ---------------------------------------------------------------------------
# Synthetic generation


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for synthetic day generation; a pure function of these plus seed.

    bbox is (min_lat, min_lon, max_lat, max_lon); the default spans about
    10 x 10 km. vehicle_mix fractions must sum to 1 and are converted to
    exact counts by largest remainder. window_length is deadline minus
    ready_time. Courier shifts cover the whole horizon.
    """

    n_orders: int = 100
    n_couriers: int = 30
    n_restaurants: int = 12
    bbox: Tuple[float, float, float, float] = (4.55, -74.15, 4.64, -74.06)
    horizon_s: int = 43200
    vehicle_mix: Dict[VehicleKind, float] = field(
        default_factory=lambda: {
            VehicleKind.MOTORCYCLE: 0.5,
            VehicleKind.CAR: 0.2,
            VehicleKind.BICYCLE: 0.2,
            VehicleKind.WALKING: 0.1,
        }
    )
    prep_time_range_s: Tuple[int, int] = (300, 1500)
    window_length_range_s: Tuple[int, int] = (1800, 3600)
    pickup_service_range_s: Tuple[int, int] = (60, 240)
    dropoff_service_range_s: Tuple[int, int] = (60, 240)
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n_orders, self.n_couriers, self.n_restaurants) < 0:
            raise ValueError("counts must be >= 0")
        if self.n_orders > 0 and self.n_restaurants == 0:
            raise ValueError("orders need at least one restaurant")
        lat0, lon0, lat1, lon1 = self.bbox
        if not (lat0 < lat1 and lon0 < lon1):
            raise ValueError("bbox must be (min_lat, min_lon, max_lat, max_lon)")
        if not 1 <= self.horizon_s <= DAY_S:
            raise ValueError(f"horizon_s must be in [1, {DAY_S}]")
        mix_sum = sum(self.vehicle_mix.values())
        if abs(mix_sum - 1.0) > 1e-9:
            raise ValueError(f"vehicle_mix fractions sum to {mix_sum}, expected 1")
        if any(f < 0 for f in self.vehicle_mix.values()):
            raise ValueError("vehicle_mix fractions must be non-negative")
        for name, rng in (
            ("prep_time_range_s", self.prep_time_range_s),
            ("window_length_range_s", self.window_length_range_s),
            ("pickup_service_range_s", self.pickup_service_range_s),
            ("dropoff_service_range_s", self.dropoff_service_range_s),
        ):
            if rng[0] < 0 or rng[1] < rng[0]:
                raise ValueError(f"{name} must be a non-negative ordered range")


def _vehicle_counts(mix: Dict[VehicleKind, float], n: int) -> List[VehicleKind]:
    """Largest-remainder rounding of fractions to exactly n vehicles."""
    kinds = sorted(mix, key=lambda k: k.value)
    exact = [(mix[k] * n, k) for k in kinds]
    counts = {k: int(x) for x, k in exact}
    short = n - sum(counts.values())
    by_remainder = sorted(exact, key=lambda pair: (-(pair[0] - int(pair[0])), pair[1].value))
    for i in range(short):
        counts[by_remainder[i % len(by_remainder)][1]] += 1
    out: List[VehicleKind] = []
    for k in kinds:
        out.extend([k] * counts[k])
    return out


def _point(rng: random.Random, bbox: Tuple[float, float, float, float]) -> GeoPoint:
    lat0, lon0, lat1, lon1 = bbox
    return GeoPoint(rng.uniform(lat0, lat1), rng.uniform(lon0, lon1))


def _placement_times(rng: random.Random, n: int, horizon_s: int) -> List[int]:
    """Two-peak mealtime mixture: 60% around lunch, 40% around dinner.

    Peaks sit at 40% and 80% of the horizon with a spread of 8% of it;
    draws are clamped into [0, horizon).
    """
    lunch_t, dinner_t = 0.4 * horizon_s, 0.8 * horizon_s
    spread = 0.08 * horizon_s
    out: List[int] = []
    for _ in range(n):
        mu = lunch_t if rng.random() < 0.6 else dinner_t
        t = int(rng.gauss(mu, spread))
        out.append(min(max(t, 0), horizon_s - 1))
    return out


def _id_width(n: int) -> int:
    # Zero-padded ids keep lexicographic order equal to numeric order.
    return max(3, len(str(max(n - 1, 0))))


def generate_instance(params: GeneratorParams) -> Instance:
    """Reproducible synthetic day at the requested scale."""
    rng = random.Random(params.seed)

    rw = _id_width(params.n_restaurants)
    restaurants = tuple(
        Restaurant(id=f"r{i:0{rw}d}", location=_point(rng, params.bbox))
        for i in range(params.n_restaurants)
    )

    vehicles = _vehicle_counts(params.vehicle_mix, params.n_couriers)
    cw = _id_width(params.n_couriers)
    couriers = tuple(
        Courier(
            id=f"c{i:0{cw}d}",
            vehicle=vehicles[i],
            start_location=_point(rng, params.bbox),
            on_time=0,
            off_time=params.horizon_s,
        )
        for i in range(params.n_couriers)
    )

    placements = _placement_times(rng, params.n_orders, params.horizon_s)
    ow = _id_width(params.n_orders)
    orders = []
    for i in range(params.n_orders):
        placement = placements[i]
        ready = placement + rng.randint(*params.prep_time_range_s)
        deadline = ready + rng.randint(*params.window_length_range_s)
        orders.append(
            Order(
                id=f"o{i:0{ow}d}",
                restaurant_id=restaurants[rng.randrange(params.n_restaurants)].id,
                user_dropoff=_point(rng, params.bbox),
                placement_time=placement,
                prep_start_time=placement,
                ready_time=min(ready, DAY_S - 1),
                deadline=min(deadline, DAY_S - 1),
                pickup_service_s=rng.randint(*params.pickup_service_range_s),
                dropoff_service_s=rng.randint(*params.dropoff_service_range_s),
            )
        )
    return Instance(restaurants=restaurants, couriers=couriers, orders=tuple(orders))
