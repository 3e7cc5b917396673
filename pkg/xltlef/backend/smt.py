"""SMT Encoding - Node formulas as pysmt formulas at a given step

A state variable v at step i becomes the constant "v@i", next(u) at step i
is u at step i + 1, parameters and functions are rigid and keep their
names. `time` is the state variable "time" once clocks are normalized.

INVARIANTS:
1. Symbol names are stable, so two encodings of one node at one step are the same FNode
2. Integer and real operands are mixed only through ToReal
3. Uninterpreted sorts are encoded as Int; only equality is used on them
"""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pysmt.environment import Environment
from pysmt.fnode import FNode
from pysmt.typing import BOOL as SMT_BOOL, INT as SMT_INT, REAL as SMT_REAL, FunctionType

from core import logic as L
from core.errors import StageError
from core.logic import Kind, Node, Signature, Sort, SortKind

TIME_VAR = "time"


def smt_type(sort: Sort):
    if sort.kind is SortKind.BOOL:
        return SMT_BOOL
    if sort.kind is SortKind.REAL:
        return SMT_REAL
    return SMT_INT


def step_name(name: str, step: int) -> str:
    return f"{name}@{step}"


class StepEncoder:
    """Encoder bound to one pysmt environment and one signature."""

    def __init__(self, env: Environment, sig: Signature):
        self.env = env
        self.mgr = env.formula_manager
        self.sig = sig
        self._memo: Dict[Tuple[int, int], FNode] = {}
        self.applications: Dict[str, Dict[FNode, None]] = {}

    # -- symbols ------------------------------------------------------------

    def state(self, name: str, step: int, sort: Optional[Sort] = None) -> FNode:
        if sort is None:
            sort = L.REAL if name == TIME_VAR else self.sig.state_vars[name]
        return self.mgr.Symbol(step_name(name, step), smt_type(sort))

    def rigid(self, name: str, sort: Sort) -> FNode:
        return self.mgr.Symbol(name, smt_type(sort))

    def function(self, name: str) -> FNode:
        decl = self.sig.functions[name]
        ftype = FunctionType(smt_type(decl.result), [smt_type(s) for s in decl.arg_sorts])
        return self.mgr.Symbol(name, ftype)

    def states(self, state_vars: Dict[str, Sort], step: int) -> List[FNode]:
        return [self.state(name, step, sort) for name, sort in state_vars.items()]

    def rigids(self, params: Dict[str, Sort], functions) -> List[FNode]:
        return [self.rigid(name, sort) for name, sort in params.items()] + [self.function(name) for name in functions]

    # -- encoding -----------------------------------------------------------

    def formula(self, node: Node, step: int) -> FNode:
        return self._encode(node, step)

    def term(self, node: Node, step: int) -> FNode:
        return self._encode(node, step)

    def _encode(self, node: Node, step: int) -> FNode:
        key = (node.id, step)
        done = self._memo.get(key)
        if done is None:
            done = self._convert(node, step)
            self._memo[key] = done
        return done

    def _convert(self, node: Node, step: int) -> FNode:
        mgr = self.mgr
        kind = node.kind
        if kind is Kind.TRUE:
            return mgr.TRUE()
        if kind is Kind.FALSE:
            return mgr.FALSE()
        if kind is Kind.NOT:
            return mgr.Not(self._encode(node.args[0], step))
        if kind is Kind.AND:
            return mgr.And(self._encode(node.args[0], step), self._encode(node.args[1], step))
        if kind is Kind.OR:
            return mgr.Or(self._encode(node.args[0], step), self._encode(node.args[1], step))
        if kind is Kind.IMPLIES:
            return mgr.Implies(self._encode(node.args[0], step), self._encode(node.args[1], step))
        if kind is Kind.IFF:
            return mgr.Iff(self._encode(node.args[0], step), self._encode(node.args[1], step))
        if kind is Kind.PRED:
            return self._pred(node.payload, self._encode(node.args[0], step),
                              self._encode(node.args[1], step))
        if kind is Kind.NUM:
            value = node.payload
            if node.sort.kind is not SortKind.REAL and value.denominator == 1:
                return mgr.Int(int(value))
            return mgr.Real(value)
        if kind is Kind.VAR:
            return self.state(node.payload, step, node.sort)
        if kind is Kind.TIME:
            return self.state(TIME_VAR, step, L.REAL)
        if kind is Kind.PARAM:
            return self.rigid(node.payload, node.sort)
        if kind is Kind.NEXT:
            return self._encode(node.args[0], step + 1)
        if kind is Kind.ITE:
            cond = self._encode(node.args[0], step)
            a, b = self._unify(self._encode(node.args[1], step), self._encode(node.args[2], step))
            return mgr.Ite(cond, a, b)
        if kind is Kind.APPLY:
            return self._apply(node, step)
        raise StageError(f"no SMT encoding for {kind.value}; run the pipeline first")

    def _apply(self, node: Node, step: int) -> FNode:
        mgr = self.mgr
        op = node.payload
        args = [self._encode(a, step) for a in node.args]
        if op == "neg":
            (a,) = args
            zero = mgr.Int(0) if self.env.stc.get_type(a) is SMT_INT else mgr.Real(0)
            return mgr.Minus(zero, a)
        if op in L.ARITH_OPS:
            a, b = self._unify(*args)
            if op == "+":
                return mgr.Plus(a, b)
            if op == "-":
                return mgr.Minus(a, b)
            return mgr.Times(a, b)
        decl = self.sig.functions.get(op)
        if decl is None:
            raise StageError(f"undeclared function '{op}'")
        coerced = [self._coerce(arg, smt_type(s)) for arg, s in zip(args, decl.arg_sorts)]
        application = mgr.Function(self.function(op), coerced)
        self.applications.setdefault(op, {})[application] = None
        return application

    def _pred(self, op: str, a: FNode, b: FNode) -> FNode:
        mgr = self.mgr
        if self.env.stc.get_type(a) is SMT_BOOL:
            if op != "=":
                raise StageError(f"ordering '{op}' on booleans")
            return mgr.Iff(a, b)
        a, b = self._unify(a, b)
        return {
            "=": mgr.Equals, "<": mgr.LT, "<=": mgr.LE, ">": mgr.GT, ">=": mgr.GE,
        }[op](a, b)

    def _unify(self, a: FNode, b: FNode) -> Tuple[FNode, FNode]:
        ta, tb = self.env.stc.get_type(a), self.env.stc.get_type(b)
        if ta is tb:
            return a, b
        if ta is SMT_INT and tb is SMT_REAL:
            return self._coerce(a, SMT_REAL), b
        if ta is SMT_REAL and tb is SMT_INT:
            return a, self._coerce(b, SMT_REAL)
        return a, b

    def _coerce(self, term: FNode, target) -> FNode:
        actual = self.env.stc.get_type(term)
        if actual is target:
            return term
        if actual is SMT_INT and target is SMT_REAL:
            if term.is_int_constant():
                return self.mgr.Real(Fraction(term.constant_value()))
            return self.mgr.ToReal(term)
        if actual is SMT_REAL and target is SMT_INT and term.is_real_constant():
            value = term.constant_value()
            if value.denominator == 1:
                return self.mgr.Int(int(value))
        raise StageError(f"cannot use a {actual} value where {target} is expected")


def py_value(value: FNode):
    """Python value of a constant FNode: bool, or Fraction for numbers."""
    if value.is_bool_constant():
        return value.constant_value()
    return Fraction(value.constant_value())

def function_tables(encoder: StepEncoder, session) -> Dict[str, Dict[Tuple[object, ...], object]]:
    """Function tables read from the model for every application that was encoded.

    Applications are asked for in one get-value; their arguments are
    evaluated here from the values of the symbols they mention.
    """
    env = encoder.env
    applications = [(name, a) for name, found in encoder.applications.items() for a in found]
    if not applications:
        return {}
    symbols = sorted({s for _, a in applications for arg in a.args()
                      for s in env.fvo.get_free_variables(arg)
                      if not s.symbol_type().is_function_type()},
                     key=lambda s: s.symbol_name())
    terms = [a for _, a in applications]
    model = dict(zip(symbols + terms, session.get_values(symbols + terms)))
    tables: Dict[str, Dict[Tuple[object, ...], object]] = {}
    for name, application in applications:
        args = tuple(py_value(env.simplifier.simplify(env.substituter.substitute(arg, model)))
                     for arg in application.args())
        tables.setdefault(name, {})[args] = py_value(model[application])
    return tables
