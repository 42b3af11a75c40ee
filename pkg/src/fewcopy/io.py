"""JSON / JSONL / CSV file formats. Every file carries ``"format": 1``."""
from __future__ import annotations

import base64
import csv
import hashlib
import json
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .errors import ConfigError, NonBinaryOutcome, PauliParseError, UnknownSettingId
from .observables import BinaryObservable
from .pauli import HermitianOperator, PauliString
from .witness import MeasurementSet, WitnessSpec, projector_terms

FORMAT = 1


def _check_header(d: dict, kind: str, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    if d.get("format", FORMAT) != FORMAT:
        raise ConfigError(f"{where}: unsupported format {d.get('format')!r}")
    if "type" in d and d["type"] != kind:
        raise ConfigError(f"{where}: expected type {kind!r}, found {d['type']!r}")


def load_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _parse_pauli(text: Any, where: str) -> PauliString:
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected a Pauli string, got {text!r}")
    try:
        return PauliString.parse(text)
    except PauliParseError as exc:
        raise ConfigError(f"{where}: {exc}") from None


# --- matrices -----------------------------------------------------------------

def encode_matrix(m: np.ndarray) -> dict:
    m = np.ascontiguousarray(m, dtype="<c16")
    return {"shape": list(m.shape), "dtype": "complex128",
            "data": base64.b64encode(m.tobytes()).decode("ascii")}


def decode_matrix(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype="<c16").reshape(d["shape"]).copy()


# --- measurement sets ---------------------------------------------------------

def set_to_dict(mset: MeasurementSet) -> dict:
    obs = []
    for m in mset.observables:
        if m.factors is not None:
            obs.append({"factors": [str(f) for f in m.factors]})
        else:
            obs.append({"matrix": encode_matrix(m.matrix)})
    return {
        "format": FORMAT,
        "type": "measurement-set",
        "provenance": mset.provenance,
        "n": mset.n,
        "weights": [float(w) for w in mset.weights],
        "p_s_full": mset.p_s_full,
        "p_s_bisep": mset.p_s_bisep,
        "p_e": mset.p_e,
        "tau": mset.tau,
        "shift": mset.shift,
        "observables": obs,
    }


def set_from_dict(d: dict, where: str = "measurement set") -> MeasurementSet:
    _check_header(d, "measurement-set", where)
    try:
        observables = []
        for i, o in enumerate(d["observables"]):
            if "factors" in o:
                factors = [_parse_pauli(f, f"{where}: observables[{i}].factors[{j}]")
                           for j, f in enumerate(o["factors"])]
                observables.append(BinaryObservable.from_factors(factors))
            else:
                observables.append(BinaryObservable.from_matrix(decode_matrix(o["matrix"])))
        return MeasurementSet(
            observables=tuple(observables),
            weights=np.array(d["weights"], dtype=float),
            p_s_full=float(d["p_s_full"]),
            p_e=None if d.get("p_e") is None else float(d["p_e"]),
            p_s_bisep=None if d.get("p_s_bisep") is None else float(d["p_s_bisep"]),
            provenance=d.get("provenance", "translated"),
            tau=d.get("tau"),
            shift=d.get("shift"),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc.args[0]!r}") from None


def set_id(mset: MeasurementSet) -> str:
    """Provenance tag plus a content digest, used to match records to sets."""
    blob = json.dumps(set_to_dict(mset), sort_keys=True).encode()
    return f"{mset.provenance}:{hashlib.sha256(blob).hexdigest()[:16]}"


def save_set(mset: MeasurementSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(set_to_dict(mset), indent=1) + "\n")


def load_set(path: str | Path) -> MeasurementSet:
    return set_from_dict(load_json(path), str(path))


# --- witnesses ----------------------------------------------------------------

def witness_from_dict(d: dict, where: str = "witness") -> WitnessSpec:
    """Parse a witness description.

    ``terms`` is a list of local terms W_k; each is either a list of
    ``[coefficient, "pauli"]`` pairs or ``{"projector": [...], "coefficient": c}``
    meaning c * prod (1 + G)/2.
    """
    _check_header(d, "witness", where)
    for key in ("g_s", "terms"):
        if key not in d:
            raise ConfigError(f"{where}: missing field {key!r}")
    terms = []
    for k, term in enumerate(d["terms"]):
        loc = f"{where}: terms[{k}]"
        if isinstance(term, dict):
            if "projector" not in term:
                raise ConfigError(f"{loc}: object terms need a 'projector' list")
            factors = [_parse_pauli(p, f"{loc}.projector[{j}]") for j, p in enumerate(term["projector"])]
            terms.append(projector_terms(factors, float(term.get("coefficient", 1.0))))
            continue
        pairs = []
        for j, pair in enumerate(term):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError(f"{loc}[{j}]: expected [coefficient, pauli]")
            coef, text = pair
            if not isinstance(coef, (int, float)):
                raise ConfigError(f"{loc}[{j}][0]: coefficient must be a number, got {coef!r}")
            pairs.append((float(coef), _parse_pauli(text, f"{loc}[{j}][1]")))
        if not pairs:
            raise ConfigError(f"{loc}: empty term")
        terms.append(HermitianOperator.from_terms(pairs))
    if not terms:
        raise ConfigError(f"{where}: no terms")
    n = int(d.get("n", terms[0].n))
    try:
        return WitnessSpec(
            n=n,
            g_s=float(d["g_s"]),
            local_terms=tuple(terms),
            g_e=None if d.get("g_e") is None else float(d["g_e"]),
            p_s_bisep=None if d.get("p_s_bisep") is None else float(d["p_s_bisep"]),
            threshold_class=d.get("threshold_class", "full"),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def witness_to_dict(w: WitnessSpec) -> dict:
    return {
        "format": FORMAT,
        "type": "witness",
        "n": w.n,
        "g_s": w.g_s,
        "g_e": w.g_e,
        "p_s_bisep": w.p_s_bisep,
        "threshold_class": w.threshold_class,
        "terms": [[[c, str(p)] for c, p in t.terms] for t in w.local_terms],
    }


def load_witness(path: str | Path) -> WitnessSpec:
    return witness_from_dict(load_json(path), str(path))


# --- outcome records ----------------------------------------------------------

def record_lines(header: dict, settings: Iterable[int], outcomes: Iterable[int]) -> str:
    lines = [json.dumps(header, sort_keys=True)]
    for t, (k, b) in enumerate(zip(settings, outcomes)):
        lines.append(json.dumps({"round": t, "setting": int(k), "outcome": int(b)}))
    return "\n".join(lines) + "\n"


def parse_record_lines(text: str, where: str = "record"):
    """Return (header, settings, outcomes) from JSONL text."""
    header = None
    settings, outcomes = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{where}: line {lineno}: {exc.msg}") from None
        if header is None:
            _check_header(obj, "outcome-record", f"{where}: line {lineno}")
            header = obj
            continue
        try:
            t, k, b = obj["round"], obj["setting"], obj["outcome"]
        except KeyError as exc:
            raise ConfigError(f"{where}: line {lineno}: missing field {exc.args[0]!r}") from None
        if t != len(settings):
            raise ConfigError(f"{where}: line {lineno}: expected round {len(settings)}, got {t}")
        if b not in (0, 1):
            raise NonBinaryOutcome(f"{where}: line {lineno}: outcome {b!r} is not 0 or 1")
        settings.append(int(k))
        outcomes.append(int(b))
    if header is None:
        raise ConfigError(f"{where}: no header line")
    return header, settings, outcomes


# --- external CSV -------------------------------------------------------------

def read_external_csv(path: str | Path, n_settings: int):
    """Read ``setting_id,outcome[,timestamp]`` rows.

    Rows with an empty outcome (no coincidence registered) are skipped.
    Returns (settings, outcomes, timestamps or None, skipped count).
    """
    settings, outcomes, stamps = [], [], []
    skipped = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        for col in ("setting_id", "outcome"):
            if col not in cols:
                raise ConfigError(f"{path}: missing column {col!r} (have {cols})")
        has_ts = "timestamp" in cols
        for row in reader:
            line = reader.line_num
            out = (row.get("outcome") or "").strip()
            if out == "":
                skipped += 1
                continue
            try:
                k = int(row["setting_id"])
            except (TypeError, ValueError):
                raise UnknownSettingId(f"{path}: line {line}: bad setting id {row['setting_id']!r}") from None
            if not 0 <= k < n_settings:
                raise UnknownSettingId(f"{path}: line {line}: setting {k} not in [0, {n_settings})")
            if out not in ("0", "1"):
                raise NonBinaryOutcome(f"{path}: line {line}: outcome {out!r} is not 0 or 1")
            settings.append(k)
            outcomes.append(int(out))
            if has_ts:
                stamps.append(row.get("timestamp"))
    return settings, outcomes, (stamps if has_ts else None), skipped


def write_curve_csv(path: str | Path, curve) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "S", "C_min_full", "C_min_bisep"])
        for row in curve:
            w.writerow([row[0], row[1], repr(float(row[2])), "" if row[3] is None else repr(float(row[3]))])
