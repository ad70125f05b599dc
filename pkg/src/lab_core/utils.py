# The core application of the Toda laboratory.
#   by imacat <imacat@mail.imacat.idv.tw>, 2026/10/18

#  Copyright (c) 2026 imacat.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""The utilities of the core application: atomic file output, checksums,
number formatting and the plain-text writers of the reports.

"""
import csv
import hashlib
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

import numpy as np
import titlecase
from django.core.serializers.json import DjangoJSONEncoder

PathLike = Union[str, Path]


def format_number(value: Any) -> str:
    """Formats a number with 17 significant digits, which round-trips a
    64-bit float exactly.  Integers, booleans and strings are kept as is.

    Args:
        value: The value.

    Returns:
        The formatted value.
    """
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return F"{float(value):.17g}"
    if value is None:
        return ""
    return str(value)


class LabJSONEncoder(DjangoJSONEncoder):
    """The JSON encoder of the reports.  It extends the Django encoder with
    NumPy scalars and arrays, fractions and paths."""

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, Path):
            return o.as_posix()
        return super().default(o)


def _finite(data: Any) -> Any:
    """Replaces the infinite and the NaN floats with None, recursively."""
    if isinstance(data, dict):
        return {x: _finite(data[x]) for x in data}
    if isinstance(data, (list, tuple)):
        return [_finite(x) for x in data]
    if isinstance(data, np.ndarray):
        return _finite(data.tolist())
    if isinstance(data, (float, np.floating)):
        return float(data) if math.isfinite(data) else None
    return data


def to_json(data: Any) -> str:
    """Serializes data as deterministic JSON, with sorted keys and the
    shortest round-trip representation of the floats.  The infinite and
    the NaN floats become null.

    Args:
        data: The data.

    Returns:
        The JSON text, ending with a new line.
    """
    return json.dumps(_finite(data), cls=LabJSONEncoder, sort_keys=True,
                      indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write(path: PathLike, content: Union[str, bytes]) -> Path:
    """Writes a file atomically, through a temporary file in the same
    directory that is renamed over the target.

    Args:
        path: The target path.
        content: The text or the bytes to write.

    Returns:
        The target path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = content.encode("utf-8") if isinstance(content, str) else content
    fd, temp_name = tempfile.mkstemp(dir=path.parent,
                                     prefix=F".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def sha256_file(path: PathLike) -> str:
    """Returns the SHA-256 checksum of a file.

    Args:
        path: The file path.

    Returns:
        The hexadecimal checksum.
    """
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_json(path: PathLike, data: Any) -> Path:
    """Writes deterministic JSON atomically.

    Args:
        path: The target path.
        data: The data.

    Returns:
        The target path.
    """
    return atomic_write(path, to_json(data))


def csv_text(headings: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Returns the CSV text of a table, with the numbers in 17 significant
    digits.

    Args:
        headings: The column headings.
        rows: The rows.

    Returns:
        The CSV text.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headings)
    for row in rows:
        writer.writerow([format_number(x) for x in row])
    return buffer.getvalue()


def columns_text(rows: Iterable[Sequence[Any]],
                 comment: str = None) -> str:
    """Returns whitespace-separated columns for the plotting tools.  An empty
    row becomes a blank line, which separates the scan lines of a surface.

    Args:
        rows: The rows.
        comment: The leading comment line, if any.

    Returns:
        The text.
    """
    lines = [] if comment is None else [F"# {comment}"]
    for row in rows:
        lines.append(" ".join(format_number(x) for x in row))
    return "\n".join(lines) + "\n"


def text_table(headings: Sequence[str], rows: Sequence[Sequence[Any]]) \
        -> str:
    """Returns an aligned plain-text table, with the headings in title case.

    Args:
        headings: The column headings, as identifiers like "lambda_max".
        rows: The rows.

    Returns:
        The table text.
    """
    titles = [titlecase.titlecase(x.replace("_", " ")) for x in headings]
    cells: List[List[str]] = [[format_number(x) for x in row] for row in rows]
    widths = [len(x) for x in titles]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(x.ljust(widths[i]) for i, x in enumerate(titles)),
             "  ".join("-" * x for x in widths)]
    for row in cells:
        lines.append("  ".join(x.rjust(widths[i])
                               for i, x in enumerate(row)))
    return "\n".join(x.rstrip() for x in lines) + "\n"
