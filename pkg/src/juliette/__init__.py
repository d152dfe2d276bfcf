"""An executable world-age calculus: evaluator, dispatch, typing and optimizer."""
from .core import (
    EMPTY_TABLE, TOP, BoolTag, BoolVal, Call, EvalGlobal, EvalTable, FloatTag, FloatVal,
    FnTag, FnVal, IntTag, IntVal, MethodDef, MethodTable, PrimCall, Seq, StrTag, StrVal,
    UnitTag, UnitVal, Val, Var, typeof,
)
from .dispatch import DispatchError, getmd
from .evaluator import ErrKind, MachineState, Outcome, decompose, run, step, trace
from .optimizer import OptEntry, certify, check_expr_opt, check_table_opt, optimize
from .parser import ParseError, parse_expr, parse_program, print_expr
from .typecheck import concrete_type

__version__ = "0.1.0"
