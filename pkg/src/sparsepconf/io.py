"""CSV ingestion, model files and key=value config files."""

import csv
import hashlib
import json
import os
import re
import tempfile

import numpy as np

from .exceptions import IngestionError

MODEL_FORMAT = "sparsepconf-model"
MODEL_VERSION = 1
_FEATURE = re.compile(r"^f(\d+)$")


def read_table(path, target=None):
    """Read a CSV with header ``f1..fd`` and optionally a ``target`` column.

    Returns ``(X, t)`` where ``t`` is None when ``target`` is None. Row numbers
    in error messages count the header as row 1.
    """
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise IngestionError(f"{path}: empty file or missing header")
        header = [h.strip() for h in header]
        features = {}
        for pos, name in enumerate(header):
            m = _FEATURE.match(name)
            if m:
                features[int(m.group(1))] = pos
        d = len(features)
        if d == 0 or sorted(features) != list(range(1, d + 1)):
            raise IngestionError(f"{path}: header must contain feature columns f1..fd")
        cols = [features[j] for j in range(1, d + 1)]
        tcol = None
        if target is not None:
            if target not in header:
                raise IngestionError(f"{path}: missing required column {target!r}")
            tcol = header.index(target)
        X, t = [], []
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise IngestionError(f"{path}: row {rownum}: expected {len(header)} fields, got {len(row)}")
            X.append([_number(row[c], path, rownum, header[c]) for c in cols])
            if tcol is not None:
                t.append(_number(row[tcol], path, rownum, target))
    if not X:
        raise IngestionError(f"{path}: no data rows")
    return np.array(X), (np.array(t) if tcol is not None else None)


def _number(cell, path, rownum, column):
    try:
        value = float(cell)
    except ValueError:
        raise IngestionError(f"{path}: row {rownum}: non-numeric value {cell!r} in column {column}") from None
    if not np.isfinite(value):
        raise IngestionError(f"{path}: row {rownum}: non-finite value in column {column}")
    return value


def check_confidence_column(r, path):
    bad = np.flatnonzero((r <= 0) | (r > 1))
    if bad.size:
        raise IngestionError(f"{path}: row {bad[0] + 2}: confidence r={r[bad[0]]} outside (0, 1]")
    return r


def check_label_column(y, path):
    values = set(np.unique(y).tolist())
    if values <= {-1.0, 1.0}:
        return y, False
    if values <= {0.0, 1.0}:
        return np.where(y == 1, 1.0, -1.0), True
    bad = np.flatnonzero(~np.isin(y, (-1.0, 0.0, 1.0)))
    row = bad[0] + 2 if bad.size else 2
    raise IngestionError(f"{path}: row {row}: labels must be +/-1 or 0/1")


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fingerprint(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def dump_model(model):
    """Serialize a model dict (already containing plain Python values) to text."""
    doc = {"format": MODEL_FORMAT, "version": MODEL_VERSION, **model}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{path}: not a model file ({exc.msg})") from None
    if doc.get("format") != MODEL_FORMAT:
        raise IngestionError(f"{path}: not a sparsepconf model file")
    if doc.get("version") != MODEL_VERSION:
        raise IngestionError(f"{path}: unsupported model version {doc.get('version')}")
    for key in ("beta", "n_features", "fingerprint", "config"):
        if key not in doc:
            raise IngestionError(f"{path}: model file lacks {key!r}")
    if len(doc["beta"]) != doc["n_features"] or fingerprint(doc["config"]) != doc["fingerprint"]:
        raise IngestionError(f"{path}: model fingerprint does not match its contents")
    return doc


def read_config(path):
    """Parse a flat ``key = value`` file. ``#`` starts a comment."""
    out = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IngestionError(f"{path}: line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out
