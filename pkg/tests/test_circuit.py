"""Netlist parsing, plain evaluation, and homomorphic evaluation."""

import itertools
from random import Random

import pytest

from mvphe import (
    decrypt,
    encrypt,
    eval_homomorphic,
    eval_plain,
    parse_circuit,
)
from mvphe.circuit import random_circuit
from mvphe.errors import DepthError, FormatError, ParameterError

SIMPLE = """
in a
in b
t = AND a b
out t
"""

FULL_ADDER = """
# one-bit full adder: sum and carry-out
in a
in b
in cin
ab   = XOR a b
s    = XOR ab cin    # sum
ab2  = AND a b
abc  = AND ab cin
cout = XOR ab2 abc   # carry
out s
out cout
"""


# --- parsing ----------------------------------------------------------------

def test_parse_simple():
    c = parse_circuit(SIMPLE)
    assert c.inputs == ["a", "b"]
    assert c.outputs == ["t"]
    assert [g.op for g in c.gates] == ["AND"]
    assert c.depth == 1 and c.level_need == 1
    assert c.wires == {"a", "b", "t"}


def test_parse_full_adder():
    c = parse_circuit(FULL_ADDER)
    assert c.inputs == ["a", "b", "cin"]
    assert c.outputs == ["s", "cout"]
    assert len(c.gates) == 5
    # the deepest output path crosses one AND (cout); sum crosses none
    assert c.depth == 1 and c.level_need == 1


def test_parse_comments_and_blanks():
    c = parse_circuit("\n\n# header\nin a\nin b   # trailing\n\nt = XOR a b\nout t\n")
    assert c.inputs == ["a", "b"] and c.outputs == ["t"]


def test_parse_error_line_numbers():
    with pytest.raises(FormatError, match="line 3"):
        parse_circuit("in a\nin b\nt = NAND a b\nout t")
    with pytest.raises(FormatError, match="bad identifier 'A'"):
        parse_circuit("in A\nout A")
    with pytest.raises(FormatError, match="line 2: duplicate definition"):
        parse_circuit("in a\nin a\nout a")
    with pytest.raises(FormatError, match="forward references"):
        parse_circuit("in a\nt = XOR a u\nu = XOR a a\nout t")
    with pytest.raises(FormatError, match="line 3: inputs must precede"):
        parse_circuit("in a\nt = XOR a a\nin b\nout t")
    with pytest.raises(FormatError, match="not defined"):
        parse_circuit("in a\nout missing")
    with pytest.raises(FormatError, match="cannot parse"):
        parse_circuit("in a\nt = XOR a\nout t")


def test_parse_requires_io():
    with pytest.raises(FormatError, match="no inputs"):
        parse_circuit("# empty\n")
    with pytest.raises(FormatError, match="no outputs"):
        parse_circuit("in a\nt = XOR a a\n")


def test_level_need_exceeds_depth_on_trees():
    # balanced product tree of 4 inputs: AND-depth 2, ledger 1+1+1 = 3
    tree = """
in a
in b
in c
in d
ab = AND a b
cd = AND c d
r  = AND ab cd
out r
"""
    c = parse_circuit(tree)
    assert c.depth == 2
    assert c.level_need == 3


# --- plain evaluation -------------------------------------------------------

def test_eval_plain_full_adder_truth_table():
    c = parse_circuit(FULL_ADDER)
    for a, b, cin in itertools.product((0, 1), repeat=3):
        s, cout = eval_plain(c, [[a], [b], [cin]])
        assert s == [(a + b + cin) % 2]
        assert cout == [(a + b + cin) // 2]


def test_eval_plain_is_slotwise():
    c = parse_circuit(FULL_ADDER)
    a, b, cin = [0, 1, 1, 0], [1, 1, 0, 0], [1, 0, 1, 0]
    s, cout = eval_plain(c, [a, b, cin])
    for k in range(4):
        assert s[k] == (a[k] + b[k] + cin[k]) % 2
        assert cout[k] == (a[k] + b[k] + cin[k]) // 2


def test_eval_plain_xor_self_cancels():
    c = parse_circuit("in a\nz = XOR a a\nout z\nout a")
    z, a = eval_plain(c, [[1, 0, 1]])
    assert z == [0, 0, 0]
    assert a == [1, 0, 1]  # identity wire comes back untouched


def test_eval_plain_validates_inputs():
    c = parse_circuit(SIMPLE)
    with pytest.raises(ParameterError):
        eval_plain(c, [[0, 1]])  # arity
    with pytest.raises(ParameterError):
        eval_plain(c, [[0, 1], [0]])  # ragged widths
    with pytest.raises(ParameterError):
        eval_plain(c, [[0, 2], [0, 1]])  # non-bit


# --- homomorphic evaluation --------------------------------------------------

def test_homomorphic_matches_plain(toy_sk, toy_evk):
    p = toy_sk.params
    c = parse_circuit(FULL_ADDER)
    rng = Random(131)
    for _ in range(5):
        plains = [[rng.randrange(2) for _ in range(p.message_bits)]
                  for _ in c.inputs]
        cts = [encrypt(toy_sk, m, rng) for m in plains]
        want = eval_plain(c, plains)
        got = eval_homomorphic(toy_evk, c, cts)
        assert [decrypt(toy_sk, ct) for ct in got] == want


def test_homomorphic_depth_precheck(toy_sk, toy_evk):
    """A circuit whose ledger exceeds L is rejected before any evaluation."""
    deep = parse_circuit("""
in a
in b
t0 = AND a b
t1 = AND t0 b
t2 = AND t1 b
out t2
""")
    assert deep.level_need == 3 > toy_sk.params.L
    cts = [encrypt(toy_sk, [0, 1], Random(132)) for _ in range(2)]
    with pytest.raises(DepthError, match="support L = 2"):
        eval_homomorphic(toy_evk, deep, cts)


def test_homomorphic_arity_check(toy_sk, toy_evk):
    c = parse_circuit(SIMPLE)
    ct = encrypt(toy_sk, [0, 1], Random(133))
    with pytest.raises(ParameterError):
        eval_homomorphic(toy_evk, c, [ct])


def test_xor_only_circuit_hint_telescopes(toy_sk, toy_evk):
    """XOR gates add hints plus one; an XOR-only circuit's output hint is
    bounded by the sum of input hints plus the gate count."""
    text = "in a\nin b\nin c\nt0 = XOR a b\nt1 = XOR t0 c\nt2 = XOR t1 a\nout t2"
    c = parse_circuit(text)
    rng = Random(134)
    cts = [encrypt(toy_sk, [1, 0], rng) for _ in range(3)]
    (out,) = eval_homomorphic(toy_evk, c, cts)
    # a feeds two gates, b and c one each: hint = 4B + (number of gates)
    assert out.noise_hint == 4 * toy_sk.params.B + len(c.gates)
    assert out.level == 0


def test_gate_order_and_depth_examples():
    # depth only counts ANDs, independent of XOR interleaving
    c = parse_circuit(
        "in a\nin b\nx = XOR a b\ny = AND x a\nz = XOR y b\nw = AND z y\nout w")
    assert c.depth == 2
    assert c.level_need == 1 + 1 + 1  # y at 1, z at 1, w = 1+1+1


# --- random circuits ---------------------------------------------------------

def test_random_circuit_respects_budget():
    rng = Random(135)
    for _ in range(50):
        c = random_circuit(rng, n_inputs=rng.randrange(2, 6),
                           n_gates=rng.randrange(1, 40), L=2)
        assert c.level_need <= 2
        assert c.depth <= c.level_need
        assert c.outputs and set(c.outputs) <= c.wires


def test_random_circuit_rejects_degenerate():
    with pytest.raises(ParameterError):
        random_circuit(Random(136), n_inputs=1, n_gates=3, L=1)


def test_random_circuit_end_to_end(toy_sk, toy_evk):
    p = toy_sk.params
    rng = Random(137)
    for _ in range(3):
        c = random_circuit(rng, n_inputs=3, n_gates=12, L=p.L)
        plains = [[rng.randrange(2) for _ in range(p.message_bits)]
                  for _ in c.inputs]
        cts = [encrypt(toy_sk, m, rng) for m in plains]
        got = eval_homomorphic(toy_evk, c, cts)
        assert [decrypt(toy_sk, ct) for ct in got] == eval_plain(c, plains)
