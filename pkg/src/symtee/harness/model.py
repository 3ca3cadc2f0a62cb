"""Structured description of a harness built around one slice."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import tee
from ..cparse import parse_unit
from ..cparse.nodes import (
    Call, Conditional, DoWhile, For, FunctionDef, Goto, Identifier, If, IntLiteral, Member,
    Return, TypeSpec, VarDecl, While, walk,
)
from ..cparse.printer import type_spec as print_type_spec
from ..cparse.semantics import UnitIndex, local_decls
from ..slicer import Slice, SinkCandidate, collect_references, expr_key, length_aliases

DEFAULT_DOMAIN_BOUND = 4096
DEFAULT_CAPACITY = 512
DEFAULT_ERROR = "TEE_ERROR_BAD_PARAMETERS"
FLAG_NAME = "g_checked"
ORACLE_MESSAGE = "Missing input validation"
STATUS_TYPES = ("TEE_Result", "TEEC_Result")


@dataclass(frozen=True)
class HarnessConfig:
    domain_bound: int = DEFAULT_DOMAIN_BOUND
    default_capacity: int = DEFAULT_CAPACITY
    unroll_limit: int = 8
    max_retries: int = 3

    def __post_init__(self):
        if self.domain_bound < 0 or self.default_capacity <= 0:
            raise ValueError("domain bound must be >= 0 and default capacity > 0")


@dataclass(frozen=True)
class SymbolicInput:
    name: str
    width_bits: int
    domain_upper_bound: Optional[int]  # None: unconstrained auxiliary input
    c_type: str = "unsigned long"


@dataclass(frozen=True)
class Assumption:
    symbol: str
    op: str
    bound: int

    def c_text(self) -> str:
        return f"{self.symbol} {self.op} {self.bound}UL"


@dataclass(frozen=True)
class OracleSpec:
    kind: str  # "return_value" | "flag"
    length_text: str  # C expression compared in the trigger
    capacity_bytes: int
    expected_error: Optional[str] = None
    flag_name: Optional[str] = None

    def trigger_text(self) -> str:
        return f"{self.length_text} > {self.capacity_bytes}UL"


@dataclass(frozen=True)
class Stub:
    name: str
    kind: str  # "function" | "type" | "constant" | "flag"
    text: str


@dataclass(frozen=True)
class ArgPlan:
    """How ``main`` produces one argument of the sliced function."""

    decls: tuple[str, ...] = ()
    setup: tuple[str, ...] = ()
    expr: str = "0"


@dataclass
class HarnessModel:
    slice: Slice
    stubs: list[Stub]
    symbolic_inputs: list[SymbolicInput]
    assumptions: list[Assumption]
    oracle: OracleSpec
    capacity_bytes: int
    domain_bound: int
    args: list[ArgPlan] = field(default_factory=list)
    instrumented_text: bytes = b""
    returns_status: bool = False

    @property
    def function_name(self) -> str:
        return self.slice.function_name

    def stub_kinds(self) -> dict[str, str]:
        return {s.name: s.kind for s in self.stubs}


# -- helpers ----------------------------------------------------------------

_INT_WORDS = {"char", "short", "int", "long", "signed", "unsigned", "_Bool"}


def _is_integer_type(spec: TypeSpec, index: UnitIndex) -> bool:
    names = spec.names
    if not names:
        return False
    if names[0] == "enum" or set(names) <= _INT_WORDS:
        return True
    if len(names) == 1:
        n = names[0]
        if n in tee.STD_TYPES or n in tee.TEE_INT_TYPES:
            return True
        if n in index.typedefs:
            td = index.typedefs[n][1]
            return not td.pointers and not td.array_dims and _is_integer_type(td.type, index)
    return False


def _width_bits(spec: TypeSpec, index: UnitIndex) -> int:
    return 8 * min(8, max(1, index.sizeof_spec(spec)))


def _type_text(spec: TypeSpec) -> str:
    text = print_type_spec(spec)
    return " ".join(text.split())


def _fresh(name: str, taken: set[str]) -> str:
    out = name
    n = 1
    while out in taken:
        out = f"{name}_{n}"
        n += 1
    taken.add(out)
    return out


def _status_returning(func: FunctionDef) -> bool:
    return not func.ret_pointers and func.ret.names in ((t,) for t in STATUS_TYPES)


def _error_name(value_node, index: UnitIndex) -> Optional[str]:
    if isinstance(value_node, Identifier) and tee.is_vendor_constant(value_node.name) \
            and value_node.name.startswith("TEE_ERROR_"):
        return value_node.name
    if isinstance(value_node, IntLiteral) and value_node.macro and value_node.macro.startswith("TEE_ERROR_"):
        return value_node.macro
    return None


def _mentions(node, aliases: set[str]) -> bool:
    return any(expr_key(n) in aliases for n in walk(node) if not isinstance(n, (IntLiteral,)))


def validating_exits(cand: SinkCandidate) -> list:
    """Return/goto statements on a length-checking branch that precede the sink."""
    aliases = length_aliases(cand)
    sink_start = cand.call_span.start_byte
    found = []
    seen = set()
    for node in walk(cand.function.body):
        if isinstance(node, If) and _mentions(node.cond, aliases):
            for branch in (node.then, node.orelse):
                if branch is None:
                    continue
                for s in walk(branch):
                    if isinstance(s, (Return, Goto)) and s.span.start_byte < sink_start and id(s) not in seen:
                        seen.add(id(s))
                        found.append(s)
    found.sort(key=lambda s: s.span.start_byte)
    return found


def _condition_names(func: FunctionDef) -> set[str]:
    names = set()
    for node in walk(func.body):
        conds = []
        if isinstance(node, (If, While, DoWhile, Conditional)):
            conds.append(node.cond)
        elif isinstance(node, For) and node.cond is not None:
            conds.append(node.cond)
        for c in conds:
            names.update(n.name for n in walk(c) if isinstance(n, Identifier))
    return names


# -- stubs ------------------------------------------------------------------

def _type_stub(name: str, uses_value_field: bool, taken: set[str]) -> list[Stub]:
    if name == "TEE_Param":
        out = []
        if "memref_t" not in taken:
            out.append(Stub("memref_t", "type",
                            "typedef struct { void* buffer; unsigned long size; } memref_t;"))
        if uses_value_field:
            text = ("typedef union { memref_t memref; struct { uint32_t a; uint32_t b; } value; } TEE_Param;")
        else:
            text = "typedef struct { memref_t memref; } TEE_Param;"
        return out + [Stub(name, "type", text)]
    if name in tee.TEE_INT_TYPES:
        return [Stub(name, "type", f"typedef uint32_t {name};")]
    if name in tee.TEE_HANDLE_TYPES or name.endswith("Handle"):
        return [Stub(name, "type", f"typedef void* {name};")]
    if name in tee.TEE_RECORD_TYPES:
        return [Stub(name, "type", f"typedef struct {{ uint32_t opaque[4]; }} {name};")]
    return [Stub(name, "type", f"typedef unsigned long {name};")]


def _constant_stub(name: str) -> Stub:
    if name in tee.TEE_CONSTANTS:
        value = tee.TEE_CONSTANTS[name]
    elif name.startswith("TEE_ERROR_"):
        value = tee.TEE_CONSTANTS["TEE_ERROR_GENERIC"]
    else:
        value = 0
    text = f"#define {name} 0x{value:08X}" if value > 0xFFFF else f"#define {name} {value}"
    return Stub(name, "constant", text)


def _param_names(params: str) -> list[str]:
    names = []
    for part in params.split(","):
        part = part.strip()
        if not part or part == "...":
            continue
        names.append(part.replace("*", " ").split()[-1])
    return names


def function_stub(name: str) -> Stub:
    comment = "/* Stubbed: do nothing to avoid actual memory side effects */"
    if name in tee.KNOWN_API_SIGNATURES:
        ret, params = tee.KNOWN_API_SIGNATURES[name]
        lines = []
        if name in tee.KNOWN_API_BODIES:
            lines.append(tee.KNOWN_API_BODIES[name])
        else:
            voids = " ".join(f"(void){p};" for p in _param_names(params))
            if voids:
                lines.append(voids)
            lines.append(comment)
            if ret != "void":
                lines.append(f"return ({ret})0;" if "*" in ret else "return 0;")
        body = "".join(f"    {line}\n" for line in lines)
        return Stub(name, "function", f"{ret} {name}({params or 'void'}) {{\n{body}}}")
    return Stub(name, "function", f"static unsigned long {name}() {{\n    {comment}\n    return 0;\n}}")


def compute_stubs(slice_: Slice, flag: bool) -> list[Stub]:
    """One stub per external name the slice uses but does not define."""
    unit = parse_unit(slice_.text(), slice_.file_id)
    index = UnitIndex(unit)
    defined = set(index.typedefs) | set(index.globals) | set(index.enum_values) | set(index.defines) \
        | {f.name for f in unit.functions()}
    types: set[str] = set()
    values: set[str] = set()
    calls: set[str] = set()
    value_field = False
    for item in unit.items:
        bound = set(local_decls(item)) if isinstance(item, FunctionDef) else set()
        refs = collect_references(item, bound)
        types |= refs.type_names
        values |= refs.values
        calls |= refs.calls
        value_field |= any(isinstance(n, Member) and n.name == "value" for n in walk(item))
    stubs: list[Stub] = []
    taken = set(defined)
    for name in sorted(types - defined):
        if name in tee.STD_TYPES:
            continue
        for s in _type_stub(name, value_field, taken):
            if s.name not in taken:
                taken.add(s.name)
                stubs.append(s)
    for name in sorted(values - defined - calls):
        if name in ("NULL",) or name in taken:
            continue
        if name in slice_.extra_names:
            continue  # function used as a value; stubbed below
        stubs.append(_constant_stub(name))
        taken.add(name)
    if flag:
        stubs.append(Stub(FLAG_NAME, "flag", f"volatile int {FLAG_NAME} = 0;"))
    for name in sorted((calls | (values & set(slice_.extra_names))) - defined):
        if name in taken:
            continue
        stubs.append(function_stub(name))
        taken.add(name)
    return stubs


# -- model ------------------------------------------------------------------

def build_model(slice_: Slice, config: Optional[HarnessConfig] = None) -> HarnessModel:
    config = config or HarnessConfig()
    cand = slice_.origin
    func = cand.function
    unit = parse_unit(slice_.text(), slice_.file_id)
    index = UnitIndex(unit)
    capacity = cand.capacity.bytes if cand.capacity is not None and cand.capacity.fixed else config.default_capacity
    origin = cand.length.base
    returns_status = _status_returning(func)

    exits = validating_exits(cand)
    error_returns = [_error_name(n.value, index) for n in walk(func.body) if isinstance(n, Return) and n.value is not None]
    error_returns = [e for e in error_returns if e]
    use_return_oracle = returns_status and bool(error_returns)
    expected = None
    if use_return_oracle:
        guarded = [_error_name(s.value, index) for s in exits if isinstance(s, Return) and s.value is not None]
        guarded = [g for g in guarded if g]
        expected = guarded[0] if guarded else DEFAULT_ERROR

    # main has its own scope, so only file-scope names can collide with its symbols
    own = set(local_decls(func)) | {p.name for p in func.params if p.name}
    file_scope = set(index.typedefs) | set(index.globals) | set(index.functions) | set(index.enum_values) \
        | set(index.defines)
    taken = ({n.name for n in walk(unit) if isinstance(n, Identifier)} - own) | file_scope \
        | {f.name for f in unit.functions()} | {"main", "buf", "params", "res", FLAG_NAME}
    symbols: list[SymbolicInput] = []
    assumptions: list[Assumption] = []
    cond_names = _condition_names(func)

    root_param = origin.param_name if origin.kind in ("param", "param_field") else None
    root_sym = None
    if origin.kind == "param":
        root_sym = _fresh(origin.param_name, set(taken) - {origin.param_name})
    elif origin.kind == "param_field":
        last = [p for p in origin.field_path if p != "*"]
        root_sym = _fresh(last[-1] if last else origin.param_name, taken)
    if root_sym is not None:
        taken.add(root_sym)
        symbols.append(SymbolicInput(root_sym, 64, config.domain_bound))
        assumptions.append(Assumption(root_sym, "<=", config.domain_bound))

    args: list[ArgPlan] = []
    for pos, p in enumerate(func.params):
        args.append(_arg_plan(p, pos, origin, root_param, root_sym, cond_names, index, config, taken, symbols))

    if origin.kind == "constant":
        length_text = f"{origin.value}UL"
    else:
        length_text = root_sym or "0UL"
    oracle = OracleSpec(
        kind="return_value" if use_return_oracle else "flag",
        length_text=length_text,
        capacity_bytes=capacity,
        expected_error=expected,
        flag_name=None if use_return_oracle else FLAG_NAME,
    )
    stubs = compute_stubs(slice_, flag=not use_return_oracle)
    if expected and expected not in {s.name for s in stubs} and expected not in index.defines:
        stubs.insert(0, _constant_stub(expected))
        stubs.sort(key=lambda s: ("type", "constant", "flag", "function").index(s.kind))
    text = slice_.function_text
    if not use_return_oracle and exits:
        text = _instrument(text, func.span.start_byte, exits)
    return HarnessModel(
        slice=slice_, stubs=stubs, symbolic_inputs=symbols, assumptions=assumptions,
        oracle=oracle, capacity_bytes=capacity, domain_bound=config.domain_bound,
        args=args, instrumented_text=text, returns_status=returns_status,
    )


def _instrument(text: bytes, base: int, exits: list) -> bytes:
    for s in sorted(exits, key=lambda s: s.span.start_byte, reverse=True):
        a, b = s.span.start_byte - base, s.span.end_byte - base
        text = text[:a] + b"{ " + FLAG_NAME.encode() + b" = 1; " + text[a:b] + b" }" + text[b:]
    return text


def _arg_plan(p: VarDecl, pos: int, origin, root_param, root_sym, cond_names, index: UnitIndex,
              config: HarnessConfig, taken: set[str], symbols: list[SymbolicInput]) -> ArgPlan:
    ttext = _type_text(p.type)
    is_root = p.name is not None and p.name == root_param
    tee_params = p.type.names == ("TEE_Param",) and (p.pointers == 1 or (p.array_dims and not p.pointers))
    if tee_params:
        setup = ()
        if is_root and origin.kind == "param_field":
            slot = origin.param_index
            path = ".".join(origin.field_path)
            lines = []
            if origin.field_path and origin.field_path[0] == "memref":
                lines.append(f"params[{slot}].memref.buffer = buf;")
            lines.append(f"params[{slot}].{path} = {root_sym};")
            setup = tuple(lines)
        return ArgPlan(decls=("TEE_Param params[4];",), setup=setup, expr="params")
    if p.fnptr_params is not None:
        return ArgPlan(expr="0")
    if is_root and origin.kind == "param":
        return ArgPlan(expr=root_sym)
    if not p.pointers and not p.array_dims:
        if _is_integer_type(p.type, index):
            if p.name and p.name in cond_names:
                name = _fresh(p.name, taken)
                symbols.append(SymbolicInput(name, _width_bits(p.type, index), None, ttext))
                return ArgPlan(expr=name)
            return ArgPlan(expr="0")
        obj = _fresh(f"{p.name or 'arg'}_obj", taken)
        setup = ()
        if is_root and origin.kind == "param_field" and "*" not in origin.field_path:
            setup = (f"{obj}.{'.'.join(origin.field_path)} = {root_sym};",)
        return ArgPlan(decls=(f"{ttext} {obj};",), setup=setup, expr=obj)
    if is_root and origin.kind == "param_field" and p.pointers == 1 and not p.array_dims \
            and origin.field_path[:1] == ("*",) and "*" not in origin.field_path[1:] \
            and not _is_integer_type(p.type, index) and p.type.names != ("void",):
        obj = _fresh(f"{p.name}_obj", taken)
        return ArgPlan(decls=(f"{ttext} {obj};",),
                       setup=(f"{obj}.{'.'.join(origin.field_path[1:])} = {root_sym};",),
                       expr=f"&{obj}")
    buf = _fresh(f"{p.name or 'arg'}_buf", taken)
    ptrs = p.pointers + (1 if p.array_dims else 0)
    return ArgPlan(decls=(f"char {buf}[{config.domain_bound}];",),
                   expr=f"({ttext} {'*' * ptrs}){buf}")
