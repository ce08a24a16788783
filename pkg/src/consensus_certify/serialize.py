"""Canonical JSON, digests, atomic file writes, and report emitters."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from xml.sax.saxutils import escape


def canonical_json(obj) -> str:
    """Serialize with sorted keys and compact separators; digest-stable."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def sha256_digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip any IEEE double."""
    return format(float(x), ".17g")


def _current_umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write_text(path: str, text: str) -> None:
    """Write via temp file + rename so readers never see partial output."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_current_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj, indent: int = 2) -> None:
    atomic_write_text(path, json.dumps(obj, indent=indent, sort_keys=True) + "\n")


def write_junit_xml(path: str, suite_name: str, cases) -> None:
    """Minimal JUnit-style XML: cases are (name, ok, message) triples."""
    failures = sum(1 for _, ok, _ in cases if not ok)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<testsuite name="{escape(suite_name)}" tests="{len(cases)}" failures="{failures}">',
    ]
    for name, ok, message in cases:
        if ok:
            lines.append(f'  <testcase name="{escape(name)}"/>')
        else:
            lines.append(f'  <testcase name="{escape(name)}">')
            lines.append(f'    <failure message="{escape(message)}"/>')
            lines.append("  </testcase>")
    lines.append("</testsuite>")
    atomic_write_text(path, "\n".join(lines) + "\n")
