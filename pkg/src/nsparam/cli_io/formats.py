"""Signal CSV and model JSON formats.

Signals are CSV with a ``n,re,im`` (complex) or ``n,value`` (real) header,
optionally preceded by ``# key=value`` metadata lines.  Models are JSON
documents naming the model kind, its components by field name, and the
frequency unit.  Writes are atomic: a temporary file is renamed over the
target only after it has been written completely.
"""

import contextlib
import csv
import io
import json
import math
import os
import tempfile
from dataclasses import fields
from importlib import resources

import numpy as np

from ..errors import FormatError, ParseError, ValidationError
from ..models import COMPONENT_TYPES, ModelSpec
from ..signal import ComplexSignal

RAD_PER_SAMPLE = "rad_per_sample"
RAD_PER_SECOND = "rad_per_second"
FREQUENCY_UNITS = (RAD_PER_SAMPLE, RAD_PER_SECOND)

# component fields measured in rad/sample (or 1/sample for damping)
RATE_FIELDS = {
    "exponential": ("damping", "frequency"),
    "am": ("mod_frequency", "carrier"),
    "fm": ("mod_frequency", "carrier"),
    "exp_am": ("carrier",),
}

# samples whose imaginary part is this small relative to the peak are saved as real
REAL_TOLERANCE = 1e-10


@contextlib.contextmanager
def atomic_write(path):
    """Open a text stream whose content replaces ``path`` only on success."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _number(text):
    # repr round-trips a double exactly and is stable across runs
    return repr(float(text))


def is_effectively_real(samples, tol=REAL_TOLERANCE):
    x = np.asarray(samples)
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    return bool(np.all(np.abs(x.imag) <= tol * peak))


def save_signal(signal, path, real=None):
    """Write ``signal`` as CSV.

    ``real=None`` writes the one-column form when the imaginary parts are
    negligible (conjugate-paired syntheses carry rounding residue there).
    """
    x = signal.samples
    if real is None:
        real = is_effectively_real(x)
    n = signal.n
    buf = io.StringIO()
    if signal.sample_rate is not None:
        buf.write(f"# sample_rate_hz={_number(signal.sample_rate)}\n")
    buf.write(f"# center={signal.center}\n")
    if real:
        buf.write("n,value\n")
        for k, v in zip(n, x):
            buf.write(f"{k},{_number(v.real)}\n")
    else:
        buf.write("n,re,im\n")
        for k, v in zip(n, x):
            buf.write(f"{k},{_number(v.real)},{_number(v.imag)}\n")
    with atomic_write(path) as fh:
        fh.write(buf.getvalue())


def _parse_float(text, line):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(line, f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(line, f"non-finite value {text!r}")
    return v


def parse_signal(text):
    """Parse signal CSV text into a :class:`ComplexSignal`."""
    meta = {}
    rows = []
    header = None
    header_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header is not None:
                raise ParseError(lineno, "metadata comment after the header")
            key, sep, value = line[1:].partition("=")
            if sep:
                meta[key.strip()] = (value.strip(), lineno)
            continue
        cells = next(csv.reader([line]))
        if header is None:
            cols = [c.strip() for c in cells]
            if cols not in (["n", "re", "im"], ["n", "value"]):
                raise ParseError(lineno, "expected header 'n,re,im' or 'n,value'")
            header, header_line = cols, lineno
            continue
        if len(cells) != len(header):
            raise ParseError(lineno, f"expected {len(header)} fields, got {len(cells)}")
        try:
            k = int(cells[0])
        except ValueError:
            raise ParseError(lineno, f"sample index {cells[0]!r} is not an integer") from None
        vals = [_parse_float(c, lineno) for c in cells[1:]]
        rows.append((lineno, k, complex(vals[0], vals[1] if len(vals) > 1 else 0.0)))
    if header is None:
        raise ParseError(1, "missing header 'n,re,im' or 'n,value'")
    if not rows:
        raise ParseError(header_line + 1, "no samples after the header")
    for (_, prev, _), (lineno, k, _) in zip(rows, rows[1:]):
        if k != prev + 1:
            raise FormatError(f"line {lineno}: sample index {k} does not follow {prev}")

    first = rows[0][1]
    center = -first
    if "center" in meta:
        value, lineno = meta["center"]
        try:
            declared = int(value)
        except ValueError:
            raise ParseError(lineno, f"center {value!r} is not an integer") from None
        if first != 0 and declared != center:
            raise FormatError(f"declared center {declared} disagrees with first index {first}")
        center = declared
    rate = None
    if "sample_rate_hz" in meta:
        value, lineno = meta["sample_rate_hz"]
        rate = _parse_float(value, lineno)
        if rate <= 0:
            raise ParseError(lineno, "sample_rate_hz must be positive")
    if not 0 <= center < len(rows):
        raise FormatError(f"center {center} outside the {len(rows)} samples")
    x = np.array([v for _, _, v in rows], dtype=np.complex128)
    return ComplexSignal(x, center, rate)


def load_signal(path):
    with open(path, encoding="utf-8") as fh:
        return parse_signal(fh.read())


def _component_from_dict(kind, data, index):
    cls = COMPONENT_TYPES[kind]
    names = [f.name for f in fields(cls)]
    if not isinstance(data, dict):
        raise ValidationError(f"components[{index}]", "expected an object")
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ValidationError(f"components[{index}].{unknown[0]}", "unknown field")
    missing = [n for n in names if n not in data]
    if missing:
        raise ValidationError(f"components[{index}].{missing[0]}", "missing field")
    values = {}
    for n in names:
        v = data[n]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"components[{index}].{n}", f"expected a number, got {v!r}")
        values[n] = float(v)
    return cls(**values)


def model_from_dict(doc):
    """Build a :class:`ModelSpec` from a parsed model document.

    Frequencies in rad/s are divided by ``sample_rate_hz``.  Keys other than
    the model's own (``diagnostics`` for instance) are ignored.
    """
    if not isinstance(doc, dict):
        raise ValidationError("document", "expected a JSON object")
    kind = doc.get("kind")
    if kind not in COMPONENT_TYPES:
        raise ValidationError("kind", f"unknown model kind {kind!r}")
    unit = doc.get("frequency_unit", RAD_PER_SAMPLE)
    if unit not in FREQUENCY_UNITS:
        raise ValidationError("frequency_unit", f"expected one of {FREQUENCY_UNITS}")
    rate = doc.get("sample_rate_hz")
    if rate is not None and (isinstance(rate, bool) or not isinstance(rate, (int, float)) or rate <= 0):
        raise ValidationError("sample_rate_hz", "must be a positive number")
    if unit == RAD_PER_SECOND and rate is None:
        raise ValidationError("sample_rate_hz", "required when frequency_unit is rad_per_second")
    comps = doc.get("components")
    if not isinstance(comps, list):
        raise ValidationError("components", "expected an array")
    scale = 1.0 / rate if unit == RAD_PER_SECOND else 1.0
    converted = []
    for i, c in enumerate(comps):
        if isinstance(c, dict) and scale != 1.0:
            c = dict(c)
            for name in RATE_FIELDS[kind]:
                if isinstance(c.get(name), (int, float)) and not isinstance(c.get(name), bool):
                    c[name] = c[name] * scale
        converted.append(_component_from_dict(kind, c, i))
    xi = doc.get("shared_xi")
    if xi is not None:
        if isinstance(xi, bool) or not isinstance(xi, (int, float)):
            raise ValidationError("shared_xi", "expected a number")
        xi = float(xi) * scale
    extras = {"frequency_unit": unit}
    if rate is not None:
        extras["sample_rate_hz"] = float(rate)
    if "center" in doc:
        center = doc["center"]
        if isinstance(center, bool) or not isinstance(center, int) or center < 0:
            raise ValidationError("center", "must be a nonnegative integer")
        extras["center"] = center
    return ModelSpec(kind, converted, shared_xi=xi, extras=extras)


def model_to_dict(spec, center=None):
    """Model document in rad/sample, noting the unit the model was read in."""
    doc = {"kind": spec.kind, "frequency_unit": RAD_PER_SAMPLE}
    original = spec.extras.get("frequency_unit")
    if original and original != RAD_PER_SAMPLE:
        doc["original_frequency_unit"] = original
    if "sample_rate_hz" in spec.extras:
        doc["sample_rate_hz"] = spec.extras["sample_rate_hz"]
    if center is None:
        center = spec.extras.get("center")
    if center is not None:
        doc["center"] = int(center)
    if spec.shared_xi is not None:
        doc["shared_xi"] = float(spec.shared_xi)
    doc["components"] = [{f.name: float(getattr(c, f.name)) for f in fields(c)}
                         for c in spec.components]
    return doc


def to_jsonable(obj):
    """Plain JSON types for numpy scalars, arrays, complex numbers and tuples."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_json(doc, path):
    text = json.dumps(to_jsonable(doc), indent=2, allow_nan=False) + "\n"
    with atomic_write(path) as fh:
        fh.write(text)


def save_model(spec, path, center=None, diagnostics=None):
    doc = model_to_dict(spec, center)
    if diagnostics is not None:
        doc["diagnostics"] = diagnostics
    dump_json(doc, path)


def parse_model(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    return model_from_dict(doc)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


FIXTURES = {
    "transient": "transient_exponential.json",
    "vowel": "vowel_am.json",
    "fricative": "fricative_fm.json",
    "ecg": "ecg_exp_am.json",
}


def load_fixture(name):
    """One of the bundled parameter tables: transient, vowel, fricative, ecg."""
    try:
        filename = FIXTURES[name]
    except KeyError:
        raise ValidationError("fixture", f"unknown fixture {name!r}; have {sorted(FIXTURES)}") from None
    text = resources.files("nsparam.data").joinpath(filename).read_text(encoding="utf-8")
    return parse_model(text)
