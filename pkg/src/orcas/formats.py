"""JSON profile files and CSV result rows."""

from __future__ import annotations

import csv
import io
import json
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .polar import PolarSpec
from .simulator import TrialRecord
from .tree import MalformedProfile, RateProfile, supported_length

FORMAT_VERSION = 1
RESULT_COLUMNS = ("code_id", "eb_n0_db", "frames", "frame_errors", "bler", "ber", "elapsed_s", "seed")
ANALYZE_COLUMNS = ("eb_n0_db", "bler_analytic")


@dataclass(frozen=True)
class OrcasProfile:
    profile: RateProfile
    design_snr_db: float | None = None

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def k(self) -> int:
        return self.profile.k

    @property
    def code_id(self) -> str:
        return f"orcas-{self.n}-{self.k}"


ProfileFile = Union[OrcasProfile, PolarSpec]


def code_id(obj: ProfileFile) -> str:
    if isinstance(obj, PolarSpec):
        tag = "" if obj.matching == "none" else f"-{obj.matching}-{obj.order}"
        return f"polar-{obj.n}-{obj.k}{tag}"
    return obj.code_id


def _bits(mask) -> str:
    return "".join("1" if b else "0" for b in np.asarray(mask).ravel())


def _checksum(n: int, k: int, bits: str) -> str:
    return f"{zlib.crc32(f'{n}:{k}:{bits}'.encode()):08x}"


def to_dict(obj: ProfileFile) -> dict:
    if isinstance(obj, PolarSpec):
        bits = _bits(obj.frozen)
        return {
            "format_version": FORMAT_VERSION,
            "family": "polar",
            "n": obj.n,
            "k": obj.k,
            "design_snr_db": obj.design_snr_db,
            "mother_n": obj.mother_n,
            "matching": obj.matching,
            "order": obj.order,
            "frozen": bits,
            "removed": [int(i) for i in obj.removed],
            "checksum": _checksum(obj.n, obj.k, bits),
        }
    bits = obj.profile.to_string()
    return {
        "format_version": FORMAT_VERSION,
        "family": "orcas",
        "n": obj.n,
        "k": obj.k,
        "design_snr_db": obj.design_snr_db,
        "rate_profile": bits,
        "checksum": _checksum(obj.n, obj.k, bits),
    }


def dumps(obj: ProfileFile) -> str:
    return json.dumps(to_dict(obj), indent=2, sort_keys=True) + "\n"


def from_dict(d: dict) -> ProfileFile:
    try:
        version = d["format_version"]
        family = d["family"]
        n, k = int(d["n"]), int(d["k"])
        snr = d.get("design_snr_db")
        snr = None if snr is None else float(snr)
        if version != FORMAT_VERSION:
            raise MalformedProfile(f"unsupported format_version {version}")
        if family == "orcas":
            bits = d["rate_profile"]
            _verify(d, n, k, bits)
            prof = RateProfile.from_string(bits)
            if prof.n != n or prof.k != k:
                raise MalformedProfile(f"rate profile has (n, k) = ({prof.n}, {prof.k}), header says ({n}, {k})")
            if not supported_length(n):
                raise MalformedProfile(f"unsupported length {n}")
            return OrcasProfile(prof, snr)
        if family == "polar":
            bits = d["frozen"]
            _verify(d, n, k, bits)
            if set(bits) - {"0", "1"}:
                raise MalformedProfile("frozen mask must be a 0/1 string")
            frozen = np.array([c == "1" for c in bits])
            return PolarSpec(int(d["mother_n"]), n, k, frozen, d["matching"], d["order"],
                             np.array(d["removed"], dtype=np.int64), snr)
        raise MalformedProfile(f"unknown family {family!r}")
    except (KeyError, TypeError) as exc:
        raise MalformedProfile(f"incomplete profile file: {exc}") from exc
    except MalformedProfile:
        raise
    except ValueError as exc:
        raise MalformedProfile(str(exc)) from exc


def _verify(d: dict, n: int, k: int, bits: str) -> None:
    if "checksum" in d and d["checksum"] != _checksum(n, k, bits):
        raise MalformedProfile("checksum mismatch")


def loads(text: str) -> ProfileFile:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedProfile(f"not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise MalformedProfile("profile file must hold a JSON object")
    return from_dict(d)


def save(obj: ProfileFile, path) -> None:
    Path(path).write_text(dumps(obj))


def load(path) -> ProfileFile:
    return loads(Path(path).read_text())


def fmt_float(x: float) -> str:
    """Shortest round-trip text, after trimming binary noise from range arithmetic."""
    return repr(round(float(x), 12))


def result_rows(records: Iterable[TrialRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([r.code_id, fmt_float(r.eb_n0_db), r.frames, r.frame_errors, repr(r.bler), repr(r.ber),
                    f"{r.elapsed:.6f}" if timing else "", r.seed])
    return buf.getvalue()


def analyze_rows(points: Iterable[tuple[float, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ANALYZE_COLUMNS)
    for eb, p in points:
        w.writerow([fmt_float(eb), repr(float(p))])
    return buf.getvalue()


def parse_range(text: str) -> list[float]:
    """``start:step:stop`` (inclusive), a comma list, or a single value, in dB."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} is not start:step:stop")
        start, step, stop = map(float, parts)
        if step <= 0 or stop < start:
            raise ValueError(f"range {text!r} needs step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]
