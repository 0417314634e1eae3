"""
Helper utilities for the Nielsen Orbit Lab.
"""

import json
from typing import Any, Iterable, List, Optional, Sequence, TextIO

import numpy as np
from pydantic import BaseModel
from sympy import Rational, SympifyError

from app.exceptions import ParseError
from app.models.field_models import FieldSpec
from app.services import localfield as lf
from app.services import psl2
from app.services.nielsen import MarkedTuple


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """
    Independent generator for one trial of a seeded run.

    Args:
        seed: Run seed
        trial: Trial index

    Returns:
        Generator drawn from the trial's own SeedSequence substream
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def trial_seed(seed: int, trial: int) -> int:
    """A 64-bit integer identifying the trial substream, for records."""
    state = np.random.SeedSequence(entropy=seed, spawn_key=(trial,)).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def to_json_line(record: Any) -> str:
    """
    Serialize one record as a compact JSON line.

    Args:
        record: Pydantic model or plain mapping

    Returns:
        JSON text without trailing newline
    """
    if isinstance(record, BaseModel):
        record = record.model_dump(mode="json")
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_json_lines(records: Iterable[Any], stream: TextIO) -> int:
    count = 0
    for record in records:
        stream.write(to_json_line(record) + "\n")
        count += 1
    stream.flush()
    return count


def parse_tuple(spec: FieldSpec, entries: Sequence[str], check: bool = True) -> MarkedTuple:
    """
    Parse matrix encodings into a marked tuple.

    Args:
        spec: Field of the entries
        entries: One matrix encoding per entry
        check: Verify det = 1 at precision

    Returns:
        MarkedTuple of ProjectiveMatrix entries
    """
    return MarkedTuple(tuple(psl2.decode(spec, text, check=check) for text in entries))


def split_entries(text: str) -> List[str]:
    """One matrix encoding per non-empty line."""
    return [line.strip() for line in text.splitlines() if line.strip()]


def parse_rational_matrix(spec: FieldSpec, text: str) -> psl2.ProjectiveMatrix:
    """
    Parse four comma-separated rationals such as ``5,0,0,1/5``.

    Raises:
        ParseError: On malformed input
    """
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 4:
        raise ParseError("a matrix is four comma-separated rationals", text=text)
    try:
        values = [Rational(part) for part in parts]
    except (TypeError, ValueError, SympifyError) as e:
        raise ParseError(f"not a rational: {text!r}") from e
    return psl2.from_entries(spec, [lf.from_fraction(spec, int(x.p), int(x.q)) for x in values])


def fraction(successes: int, trials: int) -> float:
    return successes / trials if trials else 0.0


def read_text(path: Optional[str], default: str = "") -> str:
    if path is None:
        return default
    with open(path, "r", encoding="utf-8") as f:
        return f.read()
