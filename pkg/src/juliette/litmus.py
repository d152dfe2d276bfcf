"""The nine world-age litmus cases, encoded as calculus programs.

Encoding conventions (Julia on the left):

* ``eval(:(e))`` at any depth is ``(evalg e)``.
* ``Base.invokelatest(f)`` is ``(evalg (mcall f))``: a call made from the latest world.
* A top-level global ``x = v`` is a nullary method ``x() = v`` and a read is ``(mcall x)``.
* A case with several top-level assertions is a sequence of statements; assertion k
  is checked by running the setup followed by statements 1..k and inspecting the
  final value, so every assertion sees the world left behind by the previous ones.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import IntVal
from .evaluator import DEFAULT_FUEL, ErrKind, run
from .parser import parse_program, print_value


@dataclass(frozen=True)
class Expect:
    value: object = None
    error: ErrKind | None = None

    def matches(self, outcome) -> bool:
        if self.error is not None:
            return outcome.status == "error" and outcome.error.kind == self.error
        return outcome.status == "value" and outcome.value == self.value

    def describe(self) -> str:
        if self.error is not None:
            return f"error: {self.error.value}"
        return f"=> {print_value(self.value)}"


@dataclass(frozen=True)
class LitmusCase:
    id: str
    description: str
    setup: tuple  # statements, as source text
    assertions: tuple  # (statement source, Expect)

    def program_text(self, k: int) -> str:
        """Setup plus the first k+1 assertion statements, as one program."""
        stmts = list(self.setup) + [a for a, _ in self.assertions[:k + 1]]
        body = stmts[-1]
        for s in reversed(stmts[:-1]):
            body = f"(seq {s}\n  {body})"
        return f"(evalg {body})"


def _int(n):
    return Expect(value=IntVal(n))


NO_METHOD = Expect(error=ErrKind.NO_METHOD)

CASES = (
    LitmusCase(
        "a", "too-new methods cannot be called using a normal invocation",
        ('(mdef "g" () (seq (evalg (mdef "k" () 2)) (mcall k)))',),
        (("(mcall g)", NO_METHOD),),
    ),
    LitmusCase(
        "b", "invokelatest uses the latest world age",
        ('(mdef "h" () (seq (evalg (mdef "j" () 2)) (evalg (mcall j))))',),
        (("(mcall h)", _int(2)),),
    ),
    LitmusCase(
        "c", "eval uses the latest world age",
        ('(mdef "h" () (seq (evalg (mdef "p" () 2)) (evalg (mcall p))))',),
        (("(mcall h)", _int(2)),),
    ),
    LitmusCase(
        "d", "successive eval statements run in the latest world age",
        ('(mdef "r2" () (mcall r1))',
         '(mdef "i" () (seq (evalg (mdef "r1" () 2)) (mcall r2)))'),
        (("(mcall i)", NO_METHOD),),
    ),
    LitmusCase(
        "e", "only age at the top level is relevant for invocation visibility",
        ('(mdef "r4" () (mcall r3))',
         '(mdef "m" () (seq (evalg (mdef "r3" () 2)) (evalg (mcall r4))))'),
        (("(mcall m)", _int(2)),),
    ),
    LitmusCase(
        # the quoted block is itself evaluated globally: nested evalg, no staging
        "f", "latest calls propagate the new world age",
        ('(mdef "l" () (evalg (seq (evalg (mdef "f1" () 2)) (mcall f1))))',),
        (("(mcall l)", _int(2)),),
    ),
    LitmusCase(
        "g", "eval executes in the top-level scope",
        ('(mdef "x" () 1)',
         '(mdef "f" ((x)) (seq (evalg (mdef "x" () 0)) (pcall * x 2)))'),
        (("(mcall f 42)", _int(84)), ("(mcall x)", _int(0))),
    ),
    LitmusCase(
        "h", "normal invocation uses the overridden method if the new one is too new",
        ('(mdef "g" () 2)',
         '(mdef "f" ((x)) (seq (evalg (mdef "g" () x)) (pcall * x (mcall g))))'),
        (("(mcall f 42)", _int(84)), ("(mcall g)", _int(42)), ("(mcall f 42)", _int(1764))),
    ),
    LitmusCase(
        "i", "eval uses the latest definition of an overridden method",
        ('(mdef "g" () 2)',
         '(mdef "f" ((x)) (seq (evalg (mdef "g" () x)) (pcall * x (evalg (mcall g)))))'),
        (("(mcall f 42)", _int(1764)),),
    ),
)


@dataclass(frozen=True)
class AssertionResult:
    case: str
    index: int
    expected: str
    actual: str
    ok: bool


def run_case(case: LitmusCase, fuel: int = DEFAULT_FUEL) -> list:
    results = []
    for k, (_, expect) in enumerate(case.assertions):
        outcome = run(parse_program(case.program_text(k)), fuel)
        results.append(AssertionResult(case.id, k, expect.describe(), outcome.render(),
                                       expect.matches(outcome)))
    return results


def run_suite(fuel: int = DEFAULT_FUEL) -> dict:
    """case id -> list of AssertionResult."""
    return {case.id: run_case(case, fuel) for case in CASES}
