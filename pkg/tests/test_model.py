"""Geometry, travel times, and the typed instance model."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mealdispatch.model import (
    DAY_S,
    Courier,
    GeoPoint,
    Instance,
    Order,
    Restaurant,
    VehicleKind,
    haversine_km,
    travel_seconds,
    travel_time_s,
)

import oracles


BOGOTA_A = GeoPoint(4.6097, -74.0817)
BOGOTA_B = GeoPoint(4.6482, -74.0648)


def mp_haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """High-precision reference, 50 significant digits."""
    import mpmath as mp

    with mp.workdps(50):
        la1, lo1 = mp.radians(a.lat), mp.radians(a.lon)
        la2, lo2 = mp.radians(b.lat), mp.radians(b.lon)
        h = mp.sin((la2 - la1) / 2) ** 2 + mp.cos(la1) * mp.cos(la2) * mp.sin(
            (lo2 - lo1) / 2
        ) ** 2
        return float(2 * mp.mpf(6371) * mp.atan2(mp.sqrt(h), mp.sqrt(1 - h)))


class TestHaversine:
    def test_identity_is_zero(self):
        assert haversine_km(BOGOTA_A, BOGOTA_A) == 0.0

    def test_bogota_pair_against_frozen_reference(self):
        # mpmath at 50 dps gives 4.672833454124134...; spec asks ~4.67 +- 0.05
        d = haversine_km(BOGOTA_A, BOGOTA_B)
        assert d == pytest.approx(4.6728334541241347, abs=1e-9)
        assert d == pytest.approx(4.67, abs=0.05)

    def test_against_high_precision_reference_grid(self):
        pts = [
            GeoPoint(4.60, -74.08),
            GeoPoint(4.614, -74.066),
            GeoPoint(4.5339, -74.1325),
            GeoPoint(4.7110, -74.0721),
            GeoPoint(-33.4489, -70.6693),
            GeoPoint(40.4168, -3.7038),
        ]
        for i, a in enumerate(pts):
            for b in pts[i + 1 :]:
                assert haversine_km(a, b) == pytest.approx(
                    mp_haversine_km(a, b), abs=1e-9
                )

    @given(
        st.floats(-85, 85),
        st.floats(-179, 179),
        st.floats(-85, 85),
        st.floats(-179, 179),
    )
    @settings(max_examples=150, deadline=None)
    def test_symmetric_and_nonnegative(self, la1, lo1, la2, lo2):
        a, b = GeoPoint(la1, lo1), GeoPoint(la2, lo2)
        assert haversine_km(a, b) >= 0.0
        assert haversine_km(a, b) == haversine_km(b, a)

    @given(
        st.tuples(st.floats(4.0, 5.0), st.floats(-75.0, -74.0)),
        st.tuples(st.floats(4.0, 5.0), st.floats(-75.0, -74.0)),
        st.tuples(st.floats(4.0, 5.0), st.floats(-75.0, -74.0)),
    )
    @settings(max_examples=150, deadline=None)
    def test_triangle_inequality(self, p, q, r):
        a, b, c = (GeoPoint(*t) for t in (p, q, r))
        assert haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9

    def test_matches_independent_oracle(self):
        import random

        rnd = random.Random(7)
        for _ in range(100):
            a = GeoPoint(rnd.uniform(-80, 80), rnd.uniform(-179, 179))
            b = GeoPoint(rnd.uniform(-80, 80), rnd.uniform(-179, 179))
            assert haversine_km(a, b) == pytest.approx(
                oracles.o_haversine_km(a, b), rel=1e-12, abs=1e-12
            )


class TestTravelTime:
    def test_zero_distance_zero_seconds(self):
        assert travel_seconds(0.0, 20.0) == 0
        assert travel_time_s(BOGOTA_A, BOGOTA_A, VehicleKind.CAR) == 0

    def test_five_km_by_motorcycle_is_900s(self):
        assert travel_seconds(5.0, VehicleKind.MOTORCYCLE.speed_kmh) == 900

    def test_five_km_walking_is_3600s(self):
        assert travel_seconds(5.0, VehicleKind.WALKING.speed_kmh) == 3600

    def test_rounds_up_to_whole_seconds(self):
        # 1 km at 12 km/h = 300 s exactly; 1.001 km must round up
        assert travel_seconds(1.0, 12.0) == 300
        assert travel_seconds(1.001, 12.0) == 301

    def test_speed_table(self):
        assert VehicleKind.WALKING.speed_kmh == 5.0
        assert VehicleKind.BICYCLE.speed_kmh == 12.0
        assert VehicleKind.CAR.speed_kmh == 15.0
        assert VehicleKind.MOTORCYCLE.speed_kmh == 20.0

    @given(st.floats(0, 50), st.sampled_from(list(VehicleKind)))
    @settings(max_examples=100, deadline=None)
    def test_never_negative_and_monotone_in_distance(self, km, vehicle):
        t = travel_seconds(km, vehicle.speed_kmh)
        assert t >= 0
        assert travel_seconds(km + 1.0, vehicle.speed_kmh) >= t


class TestValidation:
    def test_geopoint_bounds(self):
        with pytest.raises(ValueError):
            GeoPoint(91.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 181.0)
        with pytest.raises(ValueError):
            GeoPoint(float("nan"), 0.0)

    def test_courier_shift_must_be_ordered(self):
        with pytest.raises(ValueError):
            Courier("c0", VehicleKind.CAR, BOGOTA_A, 3600, 3600)
        with pytest.raises(ValueError):
            Courier("c0", VehicleKind.CAR, BOGOTA_A, 7200, 3600)

    def test_order_time_ordering_enforced(self):
        ok = dict(
            id="o0",
            restaurant_id="r0",
            user_dropoff=BOGOTA_B,
            placement_time=0,
            prep_start_time=10,
            ready_time=20,
            deadline=30,
            pickup_service_s=0,
            dropoff_service_s=0,
        )
        Order(**ok)
        with pytest.raises(ValueError):
            Order(**{**ok, "ready_time": 5})
        with pytest.raises(ValueError):
            Order(**{**ok, "deadline": 15})
        with pytest.raises(ValueError):
            Order(**{**ok, "pickup_service_s": -1})

    def test_times_stay_inside_one_day(self):
        with pytest.raises(ValueError):
            Courier("c0", VehicleKind.CAR, BOGOTA_A, 0, DAY_S)

    def test_instance_rejects_duplicates_and_dangling_ids(self):
        rest = Restaurant("r0", BOGOTA_A)
        cou = Courier("c0", VehicleKind.CAR, BOGOTA_B, 0, 7200)
        order = Order("o0", "r0", BOGOTA_B, 0, 0, 0, 3600, 60, 60)
        Instance((rest,), (cou,), (order,))
        with pytest.raises(ValueError):
            Instance((rest, rest), (cou,), (order,))
        with pytest.raises(ValueError):
            Instance((rest,), (cou,), (Order("o0", "rX", BOGOTA_B, 0, 0, 0, 3600, 60, 60),))

    def test_instance_lookup_maps(self):
        inst = oracles.tiny_instance(3)
        for o in inst.orders:
            assert inst.orders_by_id[o.id] is o
            assert inst.restaurant_of(o).id == o.restaurant_id
        for c in inst.couriers:
            assert inst.couriers_by_id[c.id] is c
