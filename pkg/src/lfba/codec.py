"""Switch-state vectors, control vectors, and the label bijection.

A room has n wall switches (n <= 10) and n controlled facilities.  Every
combination of switch states corresponds to exactly one integer class label
in [0, 2^n).  Bit 1 is the most significant bit, so the integer label reads
the same as the printed bit string "c1c2c3c4" in logs and tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

MAX_SWITCHES = 10
DEFAULT_SWITCH_COUNT = 4


def _validate_bits(bits: Tuple[int, ...]) -> None:
    n = len(bits)
    if n < 1 or n > MAX_SWITCHES:
        raise ValueError(f"switch count must be in 1..{MAX_SWITCHES}, got {n}")
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {i + 1} must be 0 or 1, got {b!r}")


@dataclass(frozen=True)
class SwitchVector:
    """Ordered binary states of the n wall switches."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        _validate_bits(self.bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return format_bits(self)


@dataclass(frozen=True)
class ControlVector:
    """Ordered binary actuation signals for the n facilities."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        _validate_bits(self.bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class ClassLabel:
    """Integer class index in [0, 2^n), bijective with switch combinations."""

    value: int
    n: int

    def __post_init__(self):
        if not (1 <= self.n <= MAX_SWITCHES):
            raise ValueError(f"switch count must be in 1..{MAX_SWITCHES}, got {self.n}")
        if not (0 <= self.value < (1 << self.n)):
            raise ValueError(f"label {self.value} out of range for {self.n} switches")


def encode_label(s: SwitchVector) -> ClassLabel:
    """Map a switch vector to its class label; bit 1 is the MSB."""
    value = 0
    for b in s.bits:
        value = (value << 1) | b
    return ClassLabel(value=value, n=s.n)


def decode_label(y: ClassLabel) -> ControlVector:
    """Inverse of encode_label: class label back to control signals."""
    bits = tuple((y.value >> (y.n - 1 - i)) & 1 for i in range(y.n))
    return ControlVector(bits=bits)


def toggle(s: SwitchVector, i: int) -> SwitchVector:
    """Flip switch i (1-based); all other bits unchanged."""
    if not (1 <= i <= s.n):
        raise ValueError(f"switch index {i} out of range 1..{s.n}")
    bits = list(s.bits)
    bits[i - 1] ^= 1
    return SwitchVector(bits=tuple(bits))


def parse_bits(text: str) -> SwitchVector:
    """Parse a textual bit string like "0010" into a switch vector."""
    if not isinstance(text, str) or text == "":
        raise ValueError("bit string must be a non-empty string")
    if len(text) > MAX_SWITCHES:
        raise ValueError(f"bit string longer than {MAX_SWITCHES}: {text!r}")
    if any(ch not in "01" for ch in text):
        raise ValueError(f"bit string must contain only 0/1: {text!r}")
    return SwitchVector(bits=tuple(int(ch) for ch in text))


def format_bits(s: SwitchVector) -> str:
    """Render a switch vector as its textual bit string."""
    return "".join(str(b) for b in s.bits)


def controls_from_switches(s: SwitchVector) -> ControlVector:
    """The manual-mode bypass: control signals mirroring the switch states."""
    return ControlVector(bits=s.bits)
