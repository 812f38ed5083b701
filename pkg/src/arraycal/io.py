"""Persistent file formats.

Bundle layout (single file, little-endian throughout):

    offset 0   magic b"GPTC"
    offset 4   u32 format version
    offset 8   u32 L, u32 D, u32 N_sub
    offset 20  u64 metadata length, then that many bytes of UTF-8 JSON
    then       measurement tensor payload: complex128 interleaved
               (real, imag), row-major L x D per subcarrier, subcarriers
               contiguous in ascending n
    then       optional ideal tensor payload (same layout, presence
               declared in the metadata)

Calibration records use magic b"GPCL" with a u64-length-prefixed JSON
section (human-readable) followed by an optional per-subcarrier gains
payload in the same complex128 layout.
"""

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import __version__ as _tool_version
from .config import (ArrayGeometry, ImpairmentProfile, RadioConfig,
                     TransmitPhases, TransmitterTrack)
from .errors import FormatError, TruncationError, ValidationError

BUNDLE_MAGIC = b"GPTC"
CALIBRATION_MAGIC = b"GPCL"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIIII")
_U64 = struct.Struct("<Q")


@dataclass
class DatasetBundle:
    """Measurement tensor plus everything needed to calibrate it."""

    config: RadioConfig
    geometry: ArrayGeometry
    track: TransmitterTrack
    measurements: np.ndarray
    ideal: np.ndarray = None
    profile: ImpairmentProfile = None
    transmit_phases: TransmitPhases = None

    def __post_init__(self):
        self.measurements = np.asarray(self.measurements, dtype=complex)
        shape = (self.config.num_subcarriers, self.geometry.num_antennas,
                 self.track.num_positions)
        if self.measurements.shape != shape:
            raise ValidationError(
                f"measurement tensor shape {self.measurements.shape} does not "
                f"match metadata {shape}")
        if not np.all(np.isfinite(self.measurements)):
            raise ValidationError("measurement tensor contains non-finite entries")
        if self.ideal is not None:
            self.ideal = np.asarray(self.ideal, dtype=complex)
            if self.ideal.shape != shape:
                raise ValidationError("ideal tensor shape does not match metadata")
        if self.profile is not None and self.profile.num_antennas != shape[1]:
            raise ValidationError("ground-truth profile length does not match geometry")
        if self.transmit_phases is not None and self.transmit_phases.num_positions != shape[2]:
            raise ValidationError("ground-truth transmit phases do not match track length")

    @property
    def shape(self):
        return self.measurements.shape


def _complex_list(arr):
    return [[float(v.real), float(v.imag)] for v in np.asarray(arr).ravel()]


def _bundle_metadata(bundle):
    meta = {
        "format_version": FORMAT_VERSION,
        "tool_version": _tool_version,
        "radio": {
            "carrier_freq_hz": bundle.config.carrier_freq_hz,
            "subcarrier_spacing_hz": bundle.config.subcarrier_spacing_hz,
            "num_subcarriers": bundle.config.num_subcarriers,
            "speed_of_light": bundle.config.speed_of_light,
        },
        "geometry": {
            "antenna_positions": bundle.geometry.antenna_positions.tolist(),
            "subarray_labels": {k: [int(i) for i in v]
                                for k, v in bundle.geometry.subarray_labels.items()}
            if bundle.geometry.subarray_labels else None,
        },
        "track": {"positions": bundle.track.positions.tolist()},
        "has_ideal": bundle.ideal is not None,
        "truth": None,
    }
    if bundle.profile is not None:
        meta["truth"] = {
            "phase_offsets": bundle.profile.phase_offsets.tolist(),
            "time_offsets": bundle.profile.time_offsets.tolist(),
            "amplitudes": bundle.profile.amplitudes.tolist(),
            "transmit_phases": _complex_list(bundle.transmit_phases.values)
            if bundle.transmit_phases is not None else None,
        }
    return meta


def _tensor_bytes(tensor):
    return np.ascontiguousarray(tensor, dtype="<c16").tobytes()


def write_bundle(bundle, path):
    """Serialize a bundle; the round trip is bit-exact for every numeric field."""
    meta = json.dumps(_bundle_metadata(bundle)).encode("utf-8")
    n_sub, L, D = bundle.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(BUNDLE_MAGIC, FORMAT_VERSION, L, D, n_sub))
        fh.write(_U64.pack(len(meta)))
        fh.write(meta)
        fh.write(_tensor_bytes(bundle.measurements))
        if bundle.ideal is not None:
            fh.write(_tensor_bytes(bundle.ideal))


def _read_exact(fh, count, what):
    data = fh.read(count)
    if len(data) != count:
        offset = fh.tell() - len(data)
        raise TruncationError(
            f"truncated while reading {what}: expected {count} bytes at offset "
            f"{offset}, got {len(data)}",
            expected_bytes=offset + count, actual_bytes=offset + len(data))
    return data


def _read_tensor(fh, shape, what):
    count = int(np.prod(shape)) * 16
    data = _read_exact(fh, count, what)
    return np.frombuffer(data, dtype="<c16").reshape(shape).astype(complex)


def read_bundle(path):
    with open(path, "rb") as fh:
        raw = _read_exact(fh, _HEADER.size, "header")
        magic, version, L, D, n_sub = _HEADER.unpack(raw)
        if magic != BUNDLE_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {BUNDLE_MAGIC!r}", offset=0)
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported bundle version {version}", offset=4)
        (meta_len,) = _U64.unpack(_read_exact(fh, _U64.size, "metadata length"))
        meta_start = fh.tell()
        try:
            meta = json.loads(_read_exact(fh, meta_len, "metadata").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"malformed metadata JSON: {exc}", offset=meta_start) from exc

        radio = meta["radio"]
        config = RadioConfig(radio["carrier_freq_hz"], radio["subcarrier_spacing_hz"],
                             radio["num_subcarriers"], radio["speed_of_light"])
        geo_meta = meta["geometry"]
        geometry = ArrayGeometry(np.asarray(geo_meta["antenna_positions"]),
                                 geo_meta.get("subarray_labels"))
        track = TransmitterTrack(np.asarray(meta["track"]["positions"]))
        if (config.num_subcarriers, geometry.num_antennas, track.num_positions) \
                != (n_sub, L, D):
            raise FormatError(
                f"header dimensions (L={L}, D={D}, N_sub={n_sub}) disagree with metadata",
                offset=8)

        shape = (n_sub, L, D)
        measurements = _read_tensor(fh, shape, "measurement payload")
        ideal = _read_tensor(fh, shape, "ideal payload") if meta["has_ideal"] else None

        profile = None
        phases = None
        if meta.get("truth"):
            truth = meta["truth"]
            profile = ImpairmentProfile(
                np.asarray(truth["phase_offsets"]),
                np.asarray(truth["time_offsets"]),
                np.asarray(truth["amplitudes"]))
            if truth.get("transmit_phases") is not None:
                pairs = np.asarray(truth["transmit_phases"], dtype=float)
                phases = TransmitPhases(pairs[:, 0] + 1j * pairs[:, 1])
        return DatasetBundle(config=config, geometry=geometry, track=track,
                             measurements=measurements, ideal=ideal,
                             profile=profile, transmit_phases=phases)


def file_digest(path):
    """SHA-256 hex digest of a file, used to tie calibration records to bundles."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class CalibrationRecord:
    """Per-antenna offsets plus provenance; optionally the full
    per-subcarrier gain matrix."""

    phase_offsets: np.ndarray
    time_offsets: np.ndarray
    fit_residuals: np.ndarray
    algorithm: str
    max_iterations: int
    seed: int
    input_digest: str
    gains: np.ndarray = None
    tool_version: str = _tool_version

    def __post_init__(self):
        self.phase_offsets = np.asarray(self.phase_offsets, dtype=float)
        self.time_offsets = np.asarray(self.time_offsets, dtype=float)
        self.fit_residuals = np.asarray(self.fit_residuals, dtype=float)
        L = self.phase_offsets.shape[0]
        if self.time_offsets.shape != (L,) or self.fit_residuals.shape != (L,):
            raise ValidationError("per-antenna offset arrays must have equal length")
        if self.gains is not None:
            self.gains = np.asarray(self.gains, dtype=complex)
            if self.gains.ndim != 2 or self.gains.shape[1] != L:
                raise ValidationError(
                    f"gains must have shape (num_subcarriers, {L}), got "
                    f"{self.gains.shape}")

    @property
    def num_antennas(self):
        return self.phase_offsets.shape[0]


def write_calibration(record, path):
    meta = {
        "format_version": FORMAT_VERSION,
        "tool_version": record.tool_version,
        "algorithm": record.algorithm,
        "max_iterations": record.max_iterations,
        "seed": record.seed,
        "input_digest": record.input_digest,
        "phase_offsets_rad": record.phase_offsets.tolist(),
        "time_offsets_s": record.time_offsets.tolist(),
        "fit_residuals_rad": record.fit_residuals.tolist(),
        "gains_shape": list(record.gains.shape) if record.gains is not None else None,
    }
    blob = json.dumps(meta, indent=2).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CALIBRATION_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(_U64.pack(len(blob)))
        fh.write(blob)
        if record.gains is not None:
            fh.write(_tensor_bytes(record.gains))


def read_calibration(path):
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != CALIBRATION_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {CALIBRATION_MAGIC!r}", offset=0)
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported calibration version {version}", offset=4)
        (meta_len,) = _U64.unpack(_read_exact(fh, _U64.size, "metadata length"))
        meta_start = fh.tell()
        try:
            meta = json.loads(_read_exact(fh, meta_len, "metadata").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"malformed metadata JSON: {exc}", offset=meta_start) from exc
        gains = None
        if meta.get("gains_shape") is not None:
            gains = _read_tensor(fh, tuple(meta["gains_shape"]), "gains payload")
        return CalibrationRecord(
            phase_offsets=np.asarray(meta["phase_offsets_rad"]),
            time_offsets=np.asarray(meta["time_offsets_s"]),
            fit_residuals=np.asarray(meta["fit_residuals_rad"]),
            algorithm=meta["algorithm"], max_iterations=meta["max_iterations"],
            seed=meta["seed"], input_digest=meta["input_digest"], gains=gains,
            tool_version=meta.get("tool_version", "unknown"))


def import_positions(path):
    """Read positions from delimiter-separated text: one `index, x, y, z`
    line per position (comma or whitespace separated, '#' comments).

    Returns the positions ordered by index as an (N, 3) float array.
    """
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            fields = [f for f in stripped.replace(",", " ").split() if f]
            if len(fields) != 4:
                raise FormatError(
                    f"line {lineno}: expected 'index, x, y, z', got {len(fields)} fields")
            try:
                idx = int(fields[0])
                coords = [float(f) for f in fields[1:]]
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from exc
            if not all(np.isfinite(coords)):
                raise FormatError(f"line {lineno}: non-finite coordinate")
            if idx in entries:
                raise FormatError(f"line {lineno}: duplicate index {idx}")
            entries[idx] = coords
    if not entries:
        raise FormatError("no positions found in file")
    order = sorted(entries)
    return np.asarray([entries[i] for i in order], dtype=float)
