"""Observed lifetimes and their plain-text file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np


@dataclass(frozen=True)
class SampleData:
    """Sorted, finite observations with a free-text provenance string.

    ``values`` is stored as a read-only float array sorted ascending.
    Single observations are representable (``sample(spec, 1, seed)`` is
    legal); estimators that need spread raise ``DegenerateSample``.
    """

    values: np.ndarray
    origin: str = ""
    n: int = field(init=False)

    def __post_init__(self):
        arr = np.sort(np.asarray(self.values, dtype=float).ravel())
        if arr.size < 1:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "n", int(arr.size))

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, SampleData):
            return NotImplemented
        return self.origin == other.origin and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.origin, self.values.tobytes()))

    def rescaled_to_unit(self) -> "SampleData":
        """Divide by (1 + tiny) * max so every value lands strictly inside (0, 1)."""
        top = float(self.values[-1])
        if top <= 0:
            raise ValueError("max-rescaling needs a positive sample maximum")
        scale = math.nextafter(top, math.inf)
        return SampleData(self.values / scale, origin=f"{self.origin} (max-rescaled)")


def parse_sample_lines(lines: Iterable[str], origin: str = "") -> SampleData:
    values = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"line {lineno}: not a number: {line!r}") from None
    if not values:
        raise ValueError("no numeric values found in sample input")
    return SampleData(np.array(values), origin=origin)


def read_sample(path: str | Path) -> SampleData:
    path = Path(path)
    with path.open() as fh:
        return parse_sample_lines(fh, origin=str(path))


def write_sample(sample: SampleData, fh: TextIO) -> None:
    if sample.origin:
        fh.write(f"# origin={sample.origin}\n")
    for v in sample.values:
        fh.write(f"{float(v)!r}\n")
