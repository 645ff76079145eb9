"""Aldebaran .aut reading/writing, alphabet manifests, and DOT export.

The .aut format carries no observability information, so the alphabet
partition comes from a JSON sidecar manifest: labels listed under
"unobservable" (and its subset "faults") are hidden, everything else is
observable.  An optional "alphabet" array pins the full action set, which
matters for components whose alphabet is larger than the set of labels
actually used (e.g. fault-free reductions).
"""

from __future__ import annotations

import io
import json
import re
import warnings
from dataclasses import dataclass
from typing import TextIO, Union

from .lts import Alphabet, AlphabetError, Lts, LtsError

_HEADER_RE = re.compile(r"^des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_TRANS_RE = re.compile(
    r"^\(\s*(\d+)\s*,\s*(?:\"([^\"]+)\"|([A-Za-z0-9_]+))\s*,\s*(\d+)\s*\)\s*$"
)
_BARE_LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")


class AutParseError(LtsError):
    """Syntax or consistency error in a .aut stream, with a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class AutFormatWarning(UserWarning):
    """Recoverable .aut oddity, e.g. a header transition-count mismatch."""


class ManifestError(LtsError):
    """Malformed or inconsistent alphabet manifest."""


@dataclass(frozen=True)
class Manifest:
    """Alphabet partition sidecar for one or more .aut components."""

    unobservable: tuple[str, ...] = ()
    faults: tuple[str, ...] = ()
    name: str | None = None
    alphabet: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "unobservable", tuple(self.unobservable))
        object.__setattr__(self, "faults", tuple(self.faults))
        if self.alphabet is not None:
            object.__setattr__(self, "alphabet", tuple(self.alphabet))
        missing = set(self.faults) - set(self.unobservable)
        if missing:
            raise ManifestError(
                f"fault labels must be listed unobservable: {sorted(missing)}"
            )
        if self.alphabet is not None:
            stray = set(self.unobservable) - set(self.alphabet)
            if stray:
                raise ManifestError(
                    f"unobservable labels missing from declared alphabet: {sorted(stray)}"
                )

    def partition(self, used_labels: set[str]) -> Alphabet:
        """Alphabet for a component using `used_labels` in its transitions."""
        if self.alphabet is not None:
            undeclared = used_labels - set(self.alphabet)
            if undeclared:
                raise ManifestError(
                    f"labels not in declared alphabet: {sorted(undeclared)}"
                )
            labels = set(self.alphabet)
        else:
            labels = set(used_labels)
        unob = labels & set(self.unobservable)
        return Alphabet(
            observable=frozenset(labels - unob),
            unobservable=frozenset(unob),
            faults=frozenset(labels & set(self.faults)),
        )


def load_manifest(source: Union[str, TextIO]) -> Manifest:
    """Parse a JSON manifest document."""
    text = source.read() if hasattr(source, "read") else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"malformed manifest JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    known = {"unobservable", "faults", "name", "alphabet"}
    unknown = set(doc) - known
    if unknown:
        raise ManifestError(f"unknown manifest keys: {sorted(unknown)}")

    def str_list(key: str) -> tuple[str, ...]:
        val = doc.get(key, [])
        if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
            raise ManifestError(f"manifest field {key!r} must be a list of strings")
        return tuple(val)

    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ManifestError("manifest field 'name' must be a string")
    alphabet = tuple(str_list("alphabet")) if "alphabet" in doc else None
    return Manifest(
        unobservable=str_list("unobservable"),
        faults=str_list("faults"),
        name=name,
        alphabet=alphabet,
    )


def manifest_for(lts: Lts) -> Manifest:
    """Manifest that reproduces this LTS's alphabet partition exactly."""
    return Manifest(
        unobservable=tuple(sorted(lts.alphabet.unobservable)),
        faults=tuple(sorted(lts.alphabet.faults)),
        name=lts.name,
        alphabet=tuple(sorted(lts.alphabet.actions)),
    )


def manifest_to_json(manifest: Manifest) -> str:
    doc: dict = {
        "unobservable": list(manifest.unobservable),
        "faults": list(manifest.faults),
    }
    if manifest.name is not None:
        doc["name"] = manifest.name
    if manifest.alphabet is not None:
        doc["alphabet"] = list(manifest.alphabet)
    return json.dumps(doc, indent=2) + "\n"


def parse_aut(source: Union[str, TextIO], manifest: Manifest) -> Lts:
    """Parse `des (<init>, <#trans>, <#states>)` plus transition lines.

    Transition lines are `(<from>,"<label>",<to>)`; quotes may be dropped
    for labels matching [A-Za-z0-9_]+.  Duplicate lines are collapsed.  A
    header transition count that disagrees with the body is reported as an
    AutFormatWarning; state indices beyond the declared count are fatal.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    lines = stream.read().splitlines()
    header_idx = None
    for idx, raw in enumerate(lines):
        if raw.strip():
            header_idx = idx
            break
    if header_idx is None:
        raise AutParseError("empty input, expected a des(...) header")
    m = _HEADER_RE.match(lines[header_idx].strip())
    if not m:
        raise AutParseError(
            f"malformed header {lines[header_idx].strip()!r}, "
            "expected des (<initial>, <transitions>, <states>)",
            header_idx + 1,
        )
    initial, declared_trans, n_states = (int(g) for g in m.groups())
    if n_states == 0:
        raise AutParseError("state count must be positive", header_idx + 1)
    if initial >= n_states:
        raise AutParseError(
            f"initial state {initial} out of range (state count {n_states})",
            header_idx + 1,
        )

    transitions: set[tuple[int, str, int]] = set()
    for offset, raw in enumerate(lines[header_idx + 1 :], start=header_idx + 2):
        line = raw.strip()
        if not line:
            continue
        tm = _TRANS_RE.match(line)
        if not tm:
            raise AutParseError(f"malformed transition {line!r}", offset)
        src = int(tm.group(1))
        label = tm.group(2) if tm.group(2) is not None else tm.group(3)
        dst = int(tm.group(4))
        for state in (src, dst):
            if state >= n_states:
                raise AutParseError(
                    f"state index {state} out of range (state count {n_states})", offset
                )
        transitions.add((src, label, dst))

    if len(transitions) != declared_trans:
        warnings.warn(
            f"header declares {declared_trans} transitions, "
            f"found {len(transitions)} distinct",
            AutFormatWarning,
            stacklevel=2,
        )

    used = {a for (_, a, _) in transitions}
    try:
        alphabet = manifest.partition(used)
    except ManifestError as exc:
        raise AutParseError(str(exc)) from exc
    return Lts(
        n_states=n_states,
        alphabet=alphabet,
        transitions=tuple(transitions),
        initial=initial,
        name=manifest.name,
    )


def write_aut(lts: Lts) -> str:
    """Serialize deterministically: sorted transitions, one per line."""
    rows = sorted(lts.transitions)
    out = [f"des ({lts.initial}, {len(rows)}, {lts.n_states})"]
    for (s, a, t) in rows:
        label = a if _BARE_LABEL_RE.match(a) else f'"{a}"'
        out.append(f"({s},{label},{t})")
    return "\n".join(out) + "\n"


def to_dot(lts: Lts) -> str:
    """Directed-graph rendering: doubled initial state, styled fault edges.

    Observable edges are solid, unobservable ones dashed, fault edges
    additionally red and bold.  Output ordering is deterministic.
    """
    title = lts.name or "lts"
    out = [f'digraph "{_dot_escape(title)}" {{', "  rankdir=LR;"]
    for q in range(lts.n_states):
        shape = "doublecircle" if q == lts.initial else "circle"
        label = _dot_escape(lts.state_label(q))
        out.append(f'  q{q} [shape={shape}, label="{label}"];')
    for (s, a, t) in sorted(lts.transitions):
        attrs = [f'label="{_dot_escape(a)}"']
        if a in lts.alphabet.faults:
            attrs.append("color=red")
            attrs.append("style=bold")
        elif a in lts.alphabet.unobservable:
            attrs.append("style=dashed")
        out.append(f"  q{s} -> q{t} [{', '.join(attrs)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
