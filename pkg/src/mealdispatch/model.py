"""Core data model: locations, vehicles, restaurants, couriers, orders.

All timestamps are integer seconds since local midnight, so a full day is
the half-open interval [0, 86400). Durations are integer seconds as well.
Travel times round up to whole seconds; optimistic rounding would let a
schedule promise a delivery it cannot physically make.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

EARTH_RADIUS_KM = 6371.0
DAY_S = 86400


class VehicleKind(Enum):
    """Courier vehicle type, each with a fixed average speed in km/h."""

    WALKING = "walking"
    BICYCLE = "bicycle"
    CAR = "car"
    MOTORCYCLE = "motorcycle"

    @property
    def speed_kmh(self) -> float:
        return _SPEED_KMH[self]


_SPEED_KMH = {
    VehicleKind.WALKING: 5.0,
    VehicleKind.BICYCLE: 12.0,
    VehicleKind.CAR: 15.0,
    VehicleKind.MOTORCYCLE: 20.0,
}


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate pair in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in kilometers.

    Uses the atan2 form of the haversine formula, which is numerically
    stable for both antipodal and nearly identical points.
    """
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    # squares as plain products, not libm pow, so the compiled matrix
    # builder reproduces this function bit for bit
    sp = math.sin(dphi / 2.0)
    sl = math.sin(dlam / 2.0)
    h = sp * sp + math.cos(phi1) * math.cos(phi2) * (sl * sl)
    return 2.0 * EARTH_RADIUS_KM * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def travel_seconds(dist_km: float, speed_kmh: float) -> int:
    # Whole seconds, rounded up: a 900.2 s leg takes 901 s on the street.
    return math.ceil(dist_km * 3600.0 / speed_kmh)


def travel_time_s(a: GeoPoint, b: GeoPoint, vehicle: VehicleKind) -> int:
    """Travel time in whole seconds between two points for a vehicle kind."""
    return travel_seconds(haversine_km(a, b), vehicle.speed_kmh)


def _check_time(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer second count, got {value!r}")
    if not 0 <= value < DAY_S:
        raise ValueError(f"{name}={value} outside the day horizon [0, {DAY_S})")


@dataclass(frozen=True)
class Restaurant:
    id: str
    location: GeoPoint


@dataclass(frozen=True)
class Courier:
    """A courier with a fixed vehicle and a single daily shift."""

    id: str
    vehicle: VehicleKind
    start_location: GeoPoint
    on_time: int
    off_time: int

    def __post_init__(self) -> None:
        _check_time("on_time", self.on_time)
        _check_time("off_time", self.off_time)
        if self.off_time <= self.on_time:
            raise ValueError(
                f"courier {self.id}: off_time {self.off_time} must exceed on_time {self.on_time}"
            )

    @property
    def speed_kmh(self) -> float:
        return self.vehicle.speed_kmh


@dataclass(frozen=True)
class Order:
    """One customer order: a pickup at a restaurant, a drop-off at the user.

    Times must satisfy placement <= prep_start <= ready <= deadline.
    Service times are the fixed handover durations at each end.
    """

    id: str
    restaurant_id: str
    user_dropoff: GeoPoint
    placement_time: int
    prep_start_time: int
    ready_time: int
    deadline: int
    pickup_service_s: int
    dropoff_service_s: int

    def __post_init__(self) -> None:
        for name in ("placement_time", "prep_start_time", "ready_time", "deadline"):
            _check_time(name, getattr(self, name))
        if not self.placement_time <= self.prep_start_time <= self.ready_time <= self.deadline:
            raise ValueError(
                f"order {self.id}: requires placement <= prep_start <= ready <= deadline, got "
                f"{self.placement_time} <= {self.prep_start_time} <= "
                f"{self.ready_time} <= {self.deadline}"
            )
        if self.pickup_service_s < 0 or self.dropoff_service_s < 0:
            raise ValueError(f"order {self.id}: service times must be non-negative")


@dataclass(frozen=True)
class Instance:
    """A full problem instance: restaurants, couriers, and orders for one day.

    Collections keep their construction order (which round-trips through
    serialization); lookups go through the id maps built at init.
    """

    restaurants: Tuple[Restaurant, ...]
    couriers: Tuple[Courier, ...]
    orders: Tuple[Order, ...]
    restaurants_by_id: Dict[str, Restaurant] = field(init=False, repr=False, compare=False)
    couriers_by_id: Dict[str, Courier] = field(init=False, repr=False, compare=False)
    orders_by_id: Dict[str, Order] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "restaurants_by_id", {r.id: r for r in self.restaurants})
        object.__setattr__(self, "couriers_by_id", {c.id: c for c in self.couriers})
        object.__setattr__(self, "orders_by_id", {o.id: o for o in self.orders})
        for coll, by_id, what in (
            (self.restaurants, self.restaurants_by_id, "restaurant"),
            (self.couriers, self.couriers_by_id, "courier"),
            (self.orders, self.orders_by_id, "order"),
        ):
            if len(by_id) != len(coll):
                seen = set()
                for item in coll:
                    if item.id in seen:
                        raise ValueError(f"duplicate {what} id {item.id!r}")
                    seen.add(item.id)
        for o in self.orders:
            if o.restaurant_id not in self.restaurants_by_id:
                raise ValueError(f"order {o.id} references unknown restaurant {o.restaurant_id!r}")

    def restaurant_of(self, order: Order) -> Restaurant:
        return self.restaurants_by_id[order.restaurant_id]
