"""Reading and writing the competition-style CSV files.

One measurement row per broadcast: aircraft id, server time, the (possibly
withheld) reported position, barometric altitude, and a JSON array of
[sensorId, timestampNs, rssi] reception triples. Sensor metadata lives in a
separate CSV. Empty string denotes a missing value throughout.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import EmptyDataError, IntegrityError, ParseError
from .geo import GeodeticPosition
from .scoring import PredictedPosition, PredictionSet

SENSOR_COLUMNS = ["serial", "latitude", "longitude", "height", "type"]
MEASUREMENT_COLUMNS = [
    "id",
    "timeAtServer",
    "aircraft",
    "latitude",
    "longitude",
    "baroAltitude",
    "geoAltitude",
    "numMeasurements",
    "measurements",
]
SUBMISSION_COLUMNS = ["id", "latitude", "longitude", "geoAltitude"]
TRUTH_COLUMNS = ["id", "aircraft", "latitude", "longitude", "geoAltitude"]

# Receiver types with GPS-disciplined timestamps.
DEFAULT_SYNCHRONIZED_TYPES = frozenset({"GRX1090", "Radarcape"})


@dataclass(frozen=True)
class Sensor:
    sensor_id: int
    position: GeodeticPosition
    synchronized: bool
    sensor_type: str = ""


@dataclass
class SensorTable:
    sensors: dict[int, Sensor] = field(default_factory=dict)

    def add(self, sensor: Sensor) -> None:
        if sensor.sensor_id in self.sensors:
            raise IntegrityError(f"duplicate sensor id {sensor.sensor_id}")
        self.sensors[sensor.sensor_id] = sensor

    def __len__(self) -> int:
        return len(self.sensors)

    def __contains__(self, sensor_id: int) -> bool:
        return sensor_id in self.sensors

    def get(self, sensor_id: int) -> Sensor:
        return self.sensors[sensor_id]

    def ids(self) -> list[int]:
        return sorted(self.sensors)

    def synchronized_ids(self) -> list[int]:
        return sorted(s for s, v in self.sensors.items() if v.synchronized)


@dataclass(frozen=True)
class Reception:
    sensor_id: int
    toa_ns: float  # nanoseconds; integer-valued when read from file
    rssi: float


@dataclass
class MeasurementRecord:
    record_id: int
    aircraft_id: int
    server_time: float
    receptions: list[Reception]
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    geo_altitude: Optional[float] = None
    baro_altitude: Optional[float] = None

    def __post_init__(self):
        if not self.receptions:
            raise ValueError(f"record {self.record_id} has no receptions")
        ids = [r.sensor_id for r in self.receptions]
        if len(set(ids)) != len(ids):
            raise ValueError(f"record {self.record_id} has duplicate sensor ids")
        if any(r.toa_ns < 0 for r in self.receptions):
            raise ValueError(f"record {self.record_id} has negative timestamps")

    @property
    def has_truth(self) -> bool:
        return self.latitude is not None and self.longitude is not None

    @property
    def truth(self) -> Optional[GeodeticPosition]:
        """Reported position, with barometric altitude as the fallback."""
        if not self.has_truth:
            return None
        alt = self.geo_altitude
        if alt is None:
            alt = self.baro_altitude
        if alt is None:
            alt = 0.0
        return GeodeticPosition(self.latitude, self.longitude, alt)


@dataclass
class MeasurementSet:
    records: list[MeasurementRecord]
    sensors: SensorTable
    dropped_receptions: int = 0
    dropped_records: int = 0

    def __post_init__(self):
        self.records.sort(key=lambda r: (r.server_time, r.record_id))

    def aircraft_ids(self) -> list[int]:
        return sorted({r.aircraft_id for r in self.records})

    def records_for(self, aircraft_id: int) -> list[MeasurementRecord]:
        return [r for r in self.records if r.aircraft_id == aircraft_id]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


def _parse_float(text: str, what: str, path, line) -> Optional[float]:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"bad {what}: {text!r}", path=path, line=line) from None


def load_sensors(path, synchronized_types=DEFAULT_SYNCHRONIZED_TYPES) -> SensorTable:
    """Load the sensor CSV; duplicate serials are an integrity error."""
    table = SensorTable()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(SENSOR_COLUMNS) - set(reader.fieldnames):
            raise ParseError(
                f"sensor file must have columns {SENSOR_COLUMNS}", path=path, line=1
            )
        for line, row in enumerate(reader, start=2):
            try:
                serial = int(row["serial"])
            except (ValueError, TypeError):
                raise ParseError(
                    f"bad serial: {row['serial']!r}", path=path, line=line
                ) from None
            lat = _parse_float(row["latitude"], "latitude", path, line)
            lon = _parse_float(row["longitude"], "longitude", path, line)
            height = _parse_float(row["height"], "height", path, line)
            if lat is None or lon is None:
                raise ParseError("sensor row missing position", path=path, line=line)
            sensor_type = (row["type"] or "").strip()
            table.add(
                Sensor(
                    sensor_id=serial,
                    position=GeodeticPosition(lat, lon, height or 0.0),
                    synchronized=sensor_type in synchronized_types,
                    sensor_type=sensor_type,
                )
            )
    return table


def load_measurements(path, sensors: SensorTable) -> MeasurementSet:
    """Load a measurement CSV against a sensor table.

    Receptions naming unknown sensors are dropped (counted on the returned
    set); records left without receptions are dropped too. Raises
    EmptyDataError when no usable rows remain.
    """
    records: list[MeasurementRecord] = []
    dropped_receptions = 0
    dropped_records = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(MEASUREMENT_COLUMNS) - set(
            reader.fieldnames
        ):
            raise ParseError(
                f"measurement file must have columns {MEASUREMENT_COLUMNS}",
                path=path,
                line=1,
            )
        for line, row in enumerate(reader, start=2):
            try:
                record_id = int(row["id"])
                aircraft = int(row["aircraft"])
                server_time = float(row["timeAtServer"])
                n_meas = int(row["numMeasurements"])
                triples = json.loads(row["measurements"])
            except (ValueError, TypeError, json.JSONDecodeError) as exc:
                raise ParseError(f"bad row: {exc}", path=path, line=line) from None
            if not isinstance(triples, list) or len(triples) != n_meas:
                raise ParseError(
                    f"numMeasurements={n_meas} does not match the measurements array",
                    path=path,
                    line=line,
                )
            receptions = []
            for triple in triples:
                if not (isinstance(triple, list) and len(triple) == 3):
                    raise ParseError(
                        f"bad reception triple: {triple!r}", path=path, line=line
                    )
                sid = int(triple[0])
                if sid not in sensors:
                    dropped_receptions += 1
                    continue
                receptions.append(
                    Reception(sensor_id=sid, toa_ns=float(triple[1]), rssi=float(triple[2]))
                )
            if not receptions:
                dropped_records += 1
                continue
            records.append(
                MeasurementRecord(
                    record_id=record_id,
                    aircraft_id=aircraft,
                    server_time=server_time,
                    receptions=receptions,
                    latitude=_parse_float(row["latitude"], "latitude", path, line),
                    longitude=_parse_float(row["longitude"], "longitude", path, line),
                    geo_altitude=_parse_float(
                        row["geoAltitude"], "geoAltitude", path, line
                    ),
                    baro_altitude=_parse_float(
                        row["baroAltitude"], "baroAltitude", path, line
                    ),
                )
            )
    if not records:
        raise EmptyDataError("no usable measurement rows", path=path)
    return MeasurementSet(
        records=records,
        sensors=sensors,
        dropped_receptions=dropped_receptions,
        dropped_records=dropped_records,
    )


def write_sensors(table: SensorTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SENSOR_COLUMNS)
        for sid in table.ids():
            s = table.get(sid)
            writer.writerow(
                [
                    sid,
                    _fmt(s.position.latitude),
                    _fmt(s.position.longitude),
                    _fmt(s.position.altitude),
                    s.sensor_type,
                ]
            )


def write_measurements(mset: MeasurementSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MEASUREMENT_COLUMNS)
        for r in mset.records:
            triples = [
                [
                    rec.sensor_id,
                    int(rec.toa_ns) if float(rec.toa_ns).is_integer() else rec.toa_ns,
                    rec.rssi,
                ]
                for rec in r.receptions
            ]
            writer.writerow(
                [
                    r.record_id,
                    _fmt(r.server_time),
                    r.aircraft_id,
                    _fmt(r.latitude),
                    _fmt(r.longitude),
                    _fmt(r.baro_altitude),
                    _fmt(r.geo_altitude),
                    len(triples),
                    json.dumps(triples, separators=(",", ":")),
                ]
            )


def mask_flights(
    mset: MeasurementSet, fraction: float, seed: int
) -> tuple[MeasurementSet, PredictionSet]:
    """Withhold the positions of round(fraction * n_flights) whole flights.

    Barometric altitude is retained on masked rows. Returns the masked set
    and the withheld truth keyed by record id (with flight membership, so the
    public scoring split can operate). Deterministic for a fixed seed.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError("fraction must be in (0, 1)")
    flights = mset.aircraft_ids()
    if not flights:
        raise ValueError("measurement set has no flights")
    n_masked = int(round(fraction * len(flights)))
    rng = np.random.default_rng(seed)
    chosen = set(
        int(flights[i]) for i in rng.choice(len(flights), size=n_masked, replace=False)
    )

    masked_records = []
    truth = PredictionSet(flights={})
    for r in mset.records:
        if r.aircraft_id in chosen and r.has_truth:
            truth.entries[r.record_id] = PredictedPosition(
                latitude=r.latitude,
                longitude=r.longitude,
                altitude=r.geo_altitude,
            )
            truth.flights[r.record_id] = r.aircraft_id
            masked_records.append(
                replace(
                    r,
                    latitude=None,
                    longitude=None,
                    geo_altitude=None,
                    receptions=list(r.receptions),
                )
            )
        else:
            masked_records.append(replace(r, receptions=list(r.receptions)))
    truth.universe = frozenset(truth.entries)
    masked = MeasurementSet(records=masked_records, sensors=mset.sensors)
    return masked, truth


def write_submission(preds: PredictionSet, path) -> None:
    """Write a submission CSV; unpredicted records get empty position fields.

    The row universe is preds.universe when set, else the predicted ids.
    """
    ids = sorted(preds.universe) if preds.universe is not None else sorted(preds.entries)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUBMISSION_COLUMNS)
        for rid in ids:
            p = preds.entries.get(rid)
            if p is None:
                writer.writerow([rid, "", "", ""])
            else:
                writer.writerow(
                    [rid, _fmt(p.latitude), _fmt(p.longitude), _fmt(p.altitude)]
                )


def read_submission(path) -> PredictionSet:
    preds = PredictionSet()
    ids = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(SUBMISSION_COLUMNS) - set(
            reader.fieldnames
        ):
            raise ParseError(
                f"submission must have columns {SUBMISSION_COLUMNS}", path=path, line=1
            )
        for line, row in enumerate(reader, start=2):
            try:
                rid = int(row["id"])
            except (ValueError, TypeError):
                raise ParseError(f"bad id: {row['id']!r}", path=path, line=line) from None
            if rid in ids:
                raise IntegrityError(f"duplicate submission row for record {rid}")
            ids.add(rid)
            lat = _parse_float(row["latitude"], "latitude", path, line)
            lon = _parse_float(row["longitude"], "longitude", path, line)
            alt = _parse_float(row["geoAltitude"], "geoAltitude", path, line)
            if lat is not None and lon is not None:
                preds.entries[rid] = PredictedPosition(lat, lon, alt)
    preds.universe = frozenset(ids)
    return preds


def write_truth(truth: PredictionSet, path) -> None:
    """Persist withheld truth (toolkit sidecar, not a competition format)."""
    flights = truth.flights or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRUTH_COLUMNS)
        for rid in sorted(truth.entries):
            p = truth.entries[rid]
            writer.writerow(
                [
                    rid,
                    flights.get(rid, ""),
                    _fmt(p.latitude),
                    _fmt(p.longitude),
                    _fmt(p.altitude),
                ]
            )


def read_truth(path) -> PredictionSet:
    truth = PredictionSet(flights={})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(TRUTH_COLUMNS) - set(reader.fieldnames):
            raise ParseError(f"truth must have columns {TRUTH_COLUMNS}", path=path, line=1)
        for line, row in enumerate(reader, start=2):
            rid = int(row["id"])
            lat = _parse_float(row["latitude"], "latitude", path, line)
            lon = _parse_float(row["longitude"], "longitude", path, line)
            alt = _parse_float(row["geoAltitude"], "geoAltitude", path, line)
            if lat is None or lon is None:
                raise ParseError("truth row missing position", path=path, line=line)
            truth.entries[rid] = PredictedPosition(lat, lon, alt)
            if row["aircraft"]:
                truth.flights[rid] = int(row["aircraft"])
    truth.universe = frozenset(truth.entries)
    return truth
