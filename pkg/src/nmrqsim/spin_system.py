"""Spin-system description and its Pauli-encoded Hamiltonian.

Input file format (YAML)::

    field_mhz: 400.0          # spectrometer frequency, > 0
    offset_ppm: 5.0           # carrier / reference offset
    nuclei:                   # one entry per spin-1/2 nucleus, in qubit order
      - {label: H1, shift_ppm: 3.44}
      - {label: H2, shift_ppm: 7.40}
    couplings:                # optional; 1-based nucleus indices, i != j
      - {i: 1, j: 2, j_hz: 2.32}

Nucleus ``k`` (0-based) lives on qubit ``k``. A pair may be listed in both
orders only if the two J values agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np
import yaml

from .errors import InvalidInputError, SpecParseError
from .pauli import PauliString, PauliSum, canonicalize


@dataclass(frozen=True)
class SpinSystemSpec:
    shifts_ppm: tuple[float, ...]
    couplings_hz: Mapping[tuple[int, int], float]
    field_mhz: float
    offset_ppm: float = 0.0
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        shifts = tuple(float(s) for s in self.shifts_ppm)
        if not shifts:
            raise InvalidInputError("at least one nucleus is required")
        if not self.field_mhz > 0:
            raise InvalidInputError("field_mhz must be positive")
        n = len(shifts)
        couplings = {}
        for (i, j), val in dict(self.couplings_hz).items():
            i, j = int(i), int(j)
            if i == j:
                raise InvalidInputError(f"self-coupling ({i}, {j})")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInputError(f"coupling ({i}, {j}) out of range for {n} nuclei")
            key = (min(i, j), max(i, j))
            if key in couplings and couplings[key] != float(val):
                raise InvalidInputError(f"asymmetric coupling for pair {key}")
            couplings[key] = float(val)
        labels = tuple(self.labels) or tuple(f"H{k + 1}" for k in range(n))
        if len(labels) != n:
            raise InvalidInputError("labels must match the number of nuclei")
        object.__setattr__(self, "shifts_ppm", shifts)
        object.__setattr__(self, "couplings_hz", dict(sorted(couplings.items())))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "field_mhz", float(self.field_mhz))
        object.__setattr__(self, "offset_ppm", float(self.offset_ppm))

    @property
    def n_spins(self) -> int:
        return len(self.shifts_ppm)

    def coupling(self, i: int, j: int) -> float:
        return self.couplings_hz.get((min(i, j), max(i, j)), 0.0)

    def permuted(self, perm) -> SpinSystemSpec:
        """Relabel so that new nucleus ``k`` is old nucleus ``perm[k]``."""
        inv = {old: new for new, old in enumerate(perm)}
        return SpinSystemSpec(
            [self.shifts_ppm[p] for p in perm],
            {(inv[i], inv[j]): v for (i, j), v in self.couplings_hz.items()},
            self.field_mhz,
            self.offset_ppm,
            [self.labels[p] for p in perm],
        )


def angular_frequencies(spec: SpinSystemSpec) -> np.ndarray:
    """Per-nucleus offsets ``2*pi*B*(delta - offset)`` in rad/s (B in MHz, delta in ppm)."""
    shifts = np.asarray(spec.shifts_ppm)
    return 2 * math.pi * spec.field_mhz * (shifts - spec.offset_ppm)


def build_hamiltonian(spec: SpinSystemSpec) -> PauliSum:
    """Zeeman plus isotropic scalar coupling Hamiltonian in rad/s.

    ``S = sigma/2`` (hbar = 1): each nucleus gives ``(w_k/2) Z_k`` and each
    unordered pair gives ``(2*pi*J/4) (XX + YY + ZZ)`` exactly once.
    """
    n = spec.n_spins
    w = angular_frequencies(spec)
    terms = []
    for k in range(n):
        terms.append(PauliString(_place({k: "Z"}, n), w[k] / 2))
    for (i, j), jhz in spec.couplings_hz.items():
        c = 2 * math.pi * jhz / 4
        for axis in "XYZ":
            terms.append(PauliString(_place({i: axis, j: axis}, n), c))
    return canonicalize(PauliSum(terms, n))


def _place(ops: dict[int, str], n: int) -> str:
    return "".join(ops.get(k, "I") for k in range(n))


class _LineLoader(yaml.SafeLoader):
    """SafeLoader that records the source line of each mapping as ``__line__``."""


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=deep)
    mapping["__line__"] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _number(entry, key, line, *, integer=False):
    if key not in entry:
        raise SpecParseError("missing field", line, key)
    val = entry[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SpecParseError(f"expected a number, got {val!r}", line, key)
    if integer and (not float(val).is_integer()):
        raise SpecParseError(f"expected an integer, got {val!r}", line, key)
    if not math.isfinite(val):
        raise SpecParseError("value must be finite", line, key)
    return int(val) if integer else float(val)


def parse_spec(text: bytes | str) -> SpinSystemSpec:
    """Parse and validate a spin-system YAML document."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SpecParseError(f"not valid UTF-8: {exc}") from None
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise SpecParseError(f"syntax error: {getattr(exc, 'problem', exc)}", line) from None
    if not isinstance(doc, dict):
        raise SpecParseError("top level must be a mapping")
    top = doc.get("__line__", 1)
    known = {"field_mhz", "offset_ppm", "nuclei", "couplings", "__line__"}
    for key in doc:
        if key not in known:
            raise SpecParseError("unknown field", top, str(key))
    field_mhz = _number(doc, "field_mhz", top)
    if field_mhz <= 0:
        raise SpecParseError("must be positive", top, "field_mhz")
    offset = _number(doc, "offset_ppm", top) if "offset_ppm" in doc else 0.0

    nuclei = doc.get("nuclei")
    if nuclei is None:
        raise SpecParseError("missing field", top, "nuclei")
    if not isinstance(nuclei, list) or not nuclei:
        raise SpecParseError("must be a non-empty list", top, "nuclei")
    shifts, labels = [], []
    for k, entry in enumerate(nuclei):
        if not isinstance(entry, dict):
            raise SpecParseError(f"entry {k + 1} must be a mapping", top, "nuclei")
        line = entry.get("__line__")
        shifts.append(_number(entry, "shift_ppm", line))
        labels.append(str(entry.get("label", f"H{k + 1}")))

    couplings: dict[tuple[int, int], float] = {}
    raw = doc.get("couplings") or []
    if not isinstance(raw, list):
        raise SpecParseError("must be a list", top, "couplings")
    n = len(shifts)
    for entry in raw:
        if not isinstance(entry, dict):
            raise SpecParseError("entry must be a mapping", top, "couplings")
        line = entry.get("__line__")
        i = _number(entry, "i", line, integer=True)
        j = _number(entry, "j", line, integer=True)
        jhz = _number(entry, "j_hz", line)
        for name, idx in (("i", i), ("j", j)):
            if not 1 <= idx <= n:
                raise SpecParseError(f"nucleus {idx} does not exist ({n} nuclei)", line, name)
        if i == j:
            raise SpecParseError("self-coupling is not allowed", line, "j")
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in couplings and couplings[key] != jhz:
            raise SpecParseError(
                f"asymmetric coupling: J({i},{j}) = {jhz} conflicts with {couplings[key]}",
                line, "j_hz")
        couplings[key] = jhz
    return SpinSystemSpec(shifts, couplings, field_mhz, offset, labels)


def load_spec(path: str | Path) -> SpinSystemSpec:
    return parse_spec(Path(path).read_bytes())


def sulfanol_spec() -> SpinSystemSpec:
    """The bundled two-proton sulfanol system (3.44 / 7.40 ppm, J = 2.32 Hz, 400 MHz)."""
    return parse_spec(resources.files("nmrqsim").joinpath("data/sulfanol.yaml").read_bytes())


def sulfanol_spec_path() -> Path:
    return Path(str(resources.files("nmrqsim").joinpath("data/sulfanol.yaml")))


# Reference sulfanol matrix in rad/s, given to three decimals.
# Its entries correspond to shifts of about 3.44478 / 7.39759 ppm, which round
# to the quoted 3.44 / 7.40.
SULFANOL_REFERENCE_MATRIX = np.array([
    [1062.215, 0.0, 0.0, 0.0],
    [0.0, -4970.921, 7.288, 0.0],
    [0.0, 7.288, 4963.633, 0.0],
    [0.0, 0.0, 0.0, -1054.927],
])


def sulfanol_reference_hamiltonian() -> PauliSum:
    """Pauli decomposition of :data:`SULFANOL_REFERENCE_MATRIX`."""
    return PauliSum.from_dense(SULFANOL_REFERENCE_MATRIX)
