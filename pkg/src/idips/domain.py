"""Domain definitions: action sets, typed inputs, and operator signatures.

Operator signatures may be dimension-polymorphic.  A signature argument
or result is written with either a concrete dimension or the single
dimension variable ``d``, which is unified across the signature at check
time (e.g. ``norm : vector(d) -> scalar(d)``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dims import DIMENSIONLESS, LENGTH, SPEED, AspType, Dimension, Kind, scalar, vector
from .errors import SchemaError

# A pattern dimension is a concrete Dimension or the polymorphic variable.
DIM_VAR = "d"


@dataclass(frozen=True)
class TypePattern:
    kind: Kind
    dim: Dimension | str  # Dimension, or DIM_VAR

    def match(self, t: AspType, binding: dict[str, Dimension]) -> bool:
        if t.kind is not self.kind:
            return False
        if isinstance(self.dim, str):
            bound = binding.get(self.dim)
            if bound is None:
                binding[self.dim] = t.dim
                return True
            return bound == t.dim
        return self.dim == t.dim

    def instantiate(self, binding: dict[str, Dimension]) -> AspType:
        dim = binding[self.dim] if isinstance(self.dim, str) else self.dim
        return AspType(self.kind, dim)


@dataclass(frozen=True)
class OpSignature:
    args: tuple[TypePattern, ...]
    result: TypePattern

    @property
    def arity(self) -> int:
        return len(self.args)

    def apply(self, arg_types: tuple[AspType, ...]) -> AspType | None:
        """Result type for these argument types, or None if they do not fit."""
        if len(arg_types) != len(self.args):
            return None
        binding: dict[str, Dimension] = {}
        for pat, t in zip(self.args, arg_types):
            if not pat.match(t, binding):
                return None
        return self.result.instantiate(binding)


@dataclass(frozen=True)
class DomainDefinition:
    name: str
    actions: tuple[str, ...]
    inputs: tuple[tuple[str, AspType], ...]
    unary_ops: dict[str, OpSignature] = field(default_factory=dict)
    binary_ops: dict[str, OpSignature] = field(default_factory=dict)

    def input_type(self, name: str) -> AspType | None:
        for n, t in self.inputs:
            if n == name:
                return t
        return None

    def op_signature(self, op: str, arity: int) -> OpSignature | None:
        table = self.unary_ops if arity == 1 else self.binary_ops
        return table.get(op)


def _pat(kind: str, dim) -> TypePattern:
    k = Kind(kind)
    d = dim if isinstance(dim, str) else Dimension.of(dim)
    return TypePattern(k, d)


def social_domain() -> DomainDefinition:
    """The social-navigation domain: four motion actions, robot-frame inputs
    for goal/waypoint/door and the three nearest front humans, and the
    geometric operator set."""
    sv = lambda: _pat("vector", DIM_VAR)
    sd = lambda: _pat("scalar", DIM_VAR)
    s0 = _pat("scalar", (0, 0, 0))
    return DomainDefinition(
        name="social",
        actions=("GoAlone", "Pass", "Follow", "Halt"),
        inputs=(
            ("p_g", vector(LENGTH)),
            ("p_l", vector(LENGTH)),
            ("p_d", vector(LENGTH)),
            ("s_d", scalar(DIMENSIONLESS)),
            ("p_h", vector(LENGTH)),
            ("v_h", vector(SPEED)),
            ("p_hl", vector(LENGTH)),
            ("v_hl", vector(SPEED)),
            ("p_hr", vector(LENGTH)),
            ("v_hr", vector(SPEED)),
        ),
        unary_ops={
            "abs": OpSignature((sd(),), sd()),
            "norm": OpSignature((sv(),), sd()),
            "v_x": OpSignature((sv(),), sd()),
            "v_y": OpSignature((sv(),), sd()),
            "freePathLength": OpSignature((_pat("vector", (1, 0, 0)),), _pat("scalar", (1, 0, 0))),
            "angle": OpSignature((sv(),), s0),
        },
        binary_ops={
            "angleDist": OpSignature((s0, s0), s0),
            "dist": OpSignature((sv(), sv()), sd()),
        },
    )


# --- domain.json -----------------------------------------------------------


def _type_to_json(t: AspType) -> dict:
    return {"kind": t.kind.value, "dim": list(t.dim.exps())}


def _type_from_json(obj, where: str) -> AspType:
    try:
        kind = Kind(obj["kind"])
        dim = Dimension.of(obj["dim"])
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(where, f"bad type object: {obj!r}") from exc
    return AspType(kind, dim)


def _pattern_to_json(p: TypePattern) -> dict:
    dim = p.dim if isinstance(p.dim, str) else list(p.dim.exps())
    return {"kind": p.kind.value, "dim": dim}


def _pattern_from_json(obj, where: str) -> TypePattern:
    try:
        kind = Kind(obj["kind"])
        dim = obj["dim"]
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(where, f"bad type pattern: {obj!r}") from exc
    if not isinstance(dim, str):
        dim = Dimension.of(dim)
    return TypePattern(kind, dim)


def _sig_to_json(sig: OpSignature) -> dict:
    return {
        "args": [_pattern_to_json(a) for a in sig.args],
        "result": _pattern_to_json(sig.result),
    }


def _sig_from_json(obj, where: str) -> OpSignature:
    if not isinstance(obj, dict) or "args" not in obj or "result" not in obj:
        raise SchemaError(where, "operator signature needs 'args' and 'result'")
    args = tuple(_pattern_from_json(a, where) for a in obj["args"])
    return OpSignature(args, _pattern_from_json(obj["result"], where))


def domain_to_json(dom: DomainDefinition) -> dict:
    return {
        "v": 1,
        "name": dom.name,
        "actions": list(dom.actions),
        "inputs": [{"name": n, **_type_to_json(t)} for n, t in dom.inputs],
        "unary_ops": {op: _sig_to_json(sig) for op, sig in dom.unary_ops.items()},
        "binary_ops": {op: _sig_to_json(sig) for op, sig in dom.binary_ops.items()},
    }


def domain_from_json(obj: dict) -> DomainDefinition:
    for key in ("name", "actions", "inputs"):
        if key not in obj:
            raise SchemaError(key, "missing required domain field")
    inputs = []
    for item in obj["inputs"]:
        if "name" not in item:
            raise SchemaError("inputs", "input entry missing 'name'")
        inputs.append((item["name"], _type_from_json(item, f"inputs.{item['name']}")))
    unary = {
        op: _sig_from_json(sig, f"unary_ops.{op}")
        for op, sig in obj.get("unary_ops", {}).items()
    }
    binary = {
        op: _sig_from_json(sig, f"binary_ops.{op}")
        for op, sig in obj.get("binary_ops", {}).items()
    }
    for op, sig in unary.items():
        if sig.arity != 1:
            raise SchemaError(f"unary_ops.{op}", "unary operator must take one argument")
    for op, sig in binary.items():
        if sig.arity != 2:
            raise SchemaError(f"binary_ops.{op}", "binary operator must take two arguments")
    return DomainDefinition(
        name=obj["name"],
        actions=tuple(obj["actions"]),
        inputs=tuple(inputs),
        unary_ops=unary,
        binary_ops=binary,
    )


def load_domain(path: str | Path) -> DomainDefinition:
    with open(path, "r", encoding="utf-8") as fh:
        return domain_from_json(json.load(fh))


def save_domain(dom: DomainDefinition, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(domain_to_json(dom), fh, indent=2)
        fh.write("\n")
