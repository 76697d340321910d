"""Boolean circuit netlists: parsing, plain evaluation, homomorphic evaluation.

The netlist format is line-oriented:

    # comment (also allowed at end of line)
    in a
    in b
    t0 = AND a b
    t1 = XOR t0 b
    out t1

Identifiers match [a-z0-9_]+.  Wires must be defined before use, which
makes file order a topological order and rules out cycles; every violation
is reported with its line number.  XOR gates are free; AND gates consume
multiplicative depth.

Two depth measures matter:

* ``depth``      — the maximum number of AND gates on any input-to-output
                   path; this is the quantity a parameter set's L budgets.
* ``level_need`` — the depth ledger the homomorphic evaluator actually
                   accumulates, where a product of ciphertexts at levels
                   l1, l2 lands at l1 + l2 + 1.  For multiplication chains
                   the two coincide; for trees that multiply two
                   already-multiplied values, level_need is larger (the
                   accounting is deliberately conservative).

``eval_homomorphic`` pre-checks level_need against params.L and fails fast
before touching any ciphertext, so a circuit either evaluates completely or
not at all.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from random import Random
from typing import Sequence

from .errors import DepthError, FormatError, ParameterError
from .keys import EvalKey
from .she import Ciphertext, eval_add, eval_mult

__all__ = ["Gate", "Circuit", "parse_circuit", "eval_plain", "eval_homomorphic",
           "random_circuit"]

_ID = re.compile(r"[a-z0-9_]+\Z")


@dataclass(frozen=True)
class Gate:
    out: str
    op: str          # "XOR" or "AND"
    a: str
    b: str


@dataclass
class Circuit:
    inputs: list[str]
    gates: list[Gate]          # in definition order (already topological)
    outputs: list[str]
    depth: int                 # max AND count on any path
    level_need: int            # depth ledger under l1 + l2 + 1 accounting

    @property
    def wires(self) -> set[str]:
        return set(self.inputs) | {g.out for g in self.gates}


def parse_circuit(text: str) -> Circuit:
    """Parse a netlist, raising FormatError with a line number on any problem."""
    inputs: list[str] = []
    gates: list[Gate] = []
    outputs: list[str] = []
    depth: dict[str, int] = {}
    level: dict[str, int] = {}
    defined: set[str] = set()

    def err(lineno: int, msg: str):
        raise FormatError(f"line {lineno}: {msg}")

    def check_id(lineno: int, name: str) -> str:
        if not _ID.match(name):
            err(lineno, f"bad identifier {name!r}")
        return name

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "in":
            if len(tok) != 2:
                err(lineno, "expected 'in <id>'")
            name = check_id(lineno, tok[1])
            if name in defined:
                err(lineno, f"duplicate definition of {name!r}")
            if gates or outputs:
                err(lineno, "inputs must precede gates and outputs")
            inputs.append(name)
            defined.add(name)
            depth[name] = 0
            level[name] = 0
        elif tok[0] == "out":
            if len(tok) != 2:
                err(lineno, "expected 'out <id>'")
            name = check_id(lineno, tok[1])
            if name not in defined:
                err(lineno, f"output {name!r} is not defined")
            outputs.append(name)
        elif len(tok) == 5 and tok[1] == "=":
            name = check_id(lineno, tok[0])
            op = tok[2]
            if op not in ("XOR", "AND"):
                err(lineno, f"unknown gate type {op!r}")
            if name in defined:
                err(lineno, f"duplicate definition of {name!r}")
            a, b = check_id(lineno, tok[3]), check_id(lineno, tok[4])
            for arg in (a, b):
                if arg not in defined:
                    err(lineno, f"{arg!r} used before definition "
                                "(forward references and cycles are not allowed)")
            gates.append(Gate(out=name, op=op, a=a, b=b))
            defined.add(name)
            if op == "AND":
                depth[name] = max(depth[a], depth[b]) + 1
                level[name] = level[a] + level[b] + 1
            else:
                depth[name] = max(depth[a], depth[b])
                level[name] = max(level[a], level[b])
        else:
            err(lineno, f"cannot parse {line!r}")
    if not inputs:
        raise FormatError("circuit has no inputs")
    if not outputs:
        raise FormatError("circuit has no outputs")
    return Circuit(
        inputs=inputs,
        gates=gates,
        outputs=outputs,
        depth=max(depth[w] for w in outputs),
        level_need=max(level[w] for w in outputs),
    )


def eval_plain(circ: Circuit, inputs: Sequence[Sequence[int]]) -> list[list[int]]:
    """Evaluate on bit vectors (slot-wise XOR/AND); the reference semantics."""
    if len(inputs) != len(circ.inputs):
        raise ParameterError(
            f"circuit has {len(circ.inputs)} inputs, got {len(inputs)}"
        )
    width = len(inputs[0]) if inputs else 0
    env: dict[str, list[int]] = {}
    for name, vec in zip(circ.inputs, inputs):
        vec = list(vec)
        if len(vec) != width:
            raise ParameterError("all input vectors must have the same width")
        if any(b not in (0, 1) for b in vec):
            raise ParameterError("input bits must be 0 or 1")
        env[name] = vec
    for g in circ.gates:
        a, b = env[g.a], env[g.b]
        if g.op == "AND":
            env[g.out] = [x & y for x, y in zip(a, b)]
        else:
            env[g.out] = [x ^ y for x, y in zip(a, b)]
    return [env[w][:] for w in circ.outputs]


def eval_homomorphic(evk: EvalKey, circ: Circuit,
                     inputs: Sequence[Ciphertext]) -> list[Ciphertext]:
    """Evaluate gate by gate on ciphertexts.

    Fails fast — before any homomorphic work — if the circuit's depth
    ledger exceeds the parameter set's budget L.
    """
    p = evk.params
    if circ.level_need > p.L:
        raise DepthError(
            f"circuit needs depth {circ.level_need} (AND-path depth "
            f"{circ.depth}) but parameters support L = {p.L}"
        )
    if len(inputs) != len(circ.inputs):
        raise ParameterError(
            f"circuit has {len(circ.inputs)} inputs, got {len(inputs)}"
        )
    env: dict[str, Ciphertext] = dict(zip(circ.inputs, inputs))
    for g in circ.gates:
        if g.op == "AND":
            env[g.out] = eval_mult(evk, env[g.a], env[g.b])
        else:
            env[g.out] = eval_add(env[g.a], env[g.b])
    return [env[w] for w in circ.outputs]


def random_circuit(rng: Random, n_inputs: int, n_gates: int, L: int) -> Circuit:
    """Random netlist whose depth ledger fits within L (for testing).

    Gates pick random earlier wires; an AND is only emitted when some pair
    of available wires respects the level budget, otherwise the gate
    becomes an XOR.
    """
    if n_inputs < 2 or n_gates < 1 or L < 0:
        raise ParameterError("need at least 2 inputs, 1 gate, and L >= 0")
    lines = [f"in x{i}" for i in range(n_inputs)]
    wires = [f"x{i}" for i in range(n_inputs)]
    level = {w: 0 for w in wires}
    for k in range(n_gates):
        name = f"w{k}"
        want_and = L > 0 and rng.random() < 0.5
        a = rng.choice(wires)
        b = rng.choice(wires)
        if want_and and level[a] + level[b] + 1 <= L:
            lines.append(f"{name} = AND {a} {b}")
            level[name] = level[a] + level[b] + 1
        else:
            lines.append(f"{name} = XOR {a} {b}")
            level[name] = max(level[a], level[b])
        wires.append(name)
    # expose a couple of late wires as outputs
    outs = {wires[-1], rng.choice(wires[n_inputs:])}
    lines.extend(f"out {w}" for w in sorted(outs))
    return parse_circuit("\n".join(lines))
