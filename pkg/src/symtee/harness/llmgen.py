"""LLM-backed harness generation with a validate-and-retry loop."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import PurePosixPath
from typing import Optional

from ..cparse import parse_unit
from ..cparse.lexer import LexError
from ..cparse.parser import DuplicateDefinition, NotFound, ParseError, find_function
from ..cparse.printer import expr as print_expr
from ..llm import CompletionRequest, LlmClient, UsageRecord, sum_usage
from .lower import LoweringError, lift_source_to_hir
from .model import HarnessConfig, HarnessModel, build_model

_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.S)


class GenError(Exception):
    def __init__(self, message: str, errors: list[str], usage: UsageRecord):
        super().__init__(message)
        self.errors = errors
        self.usage = usage


def _prompt(name: str) -> str:
    return resources.files("symtee").joinpath("prompts", name).read_text(encoding="utf-8")


def _oracle_text(model: HarnessModel) -> str:
    o = model.oracle
    trigger = o.trigger_text()
    if o.kind == "return_value":
        return (f"Store the call's result in `TEE_Result res`. When `{trigger}` holds, assert "
                f'`klee_assert(res == {o.expected_error} && "Missing input validation");`.')
    return (f"Declare `int {o.flag_name} = 0;` globally and set `{o.flag_name} = 1;` right before every early "
            f"exit that rejects an oversized length. When `{trigger}` holds after the call, assert "
            f'`klee_assert({o.flag_name} && "Missing input validation");`.')


def build_request(model: HarnessModel) -> CompletionRequest:
    cand = model.slice.origin
    symbols = "\n".join(
        f"- {s.name}: {s.c_type}" + (f", assume {s.name} <= {s.domain_upper_bound}UL" if s.domain_upper_bound is not None else "")
        for s in model.symbolic_inputs) or "- none"
    user = _prompt("user.txt").format(
        file=PurePosixPath(model.slice.file_id).name,
        function=model.function_name,
        slice=model.slice.text().decode().rstrip("\n"),
        sink_line=cand.line,
        sink_api=cand.spec.api_name,
        length_expr=print_expr(cand.len_expr),
        capacity=model.capacity_bytes,
        stubs=", ".join(s.name for s in model.stubs if s.kind != "flag") or "none",
        symbols=symbols,
        oracle=_oracle_text(model),
    )
    return CompletionRequest(_prompt("system.txt"), user)


def retry_request(base: CompletionRequest, error: str) -> CompletionRequest:
    return CompletionRequest(base.system_prompt, base.user_prompt + _prompt("retry.txt").format(error=error),
                             base.max_output_tokens, base.temperature)


def extract_code(reply: str) -> str:
    m = _FENCE.search(reply)
    text = m.group(1) if m else reply
    return text.strip("\n") + "\n"


def check_harness(source: str, function_name: str, config: HarnessConfig) -> None:
    """Raise a descriptive error when a generated harness is unusable."""
    unit = parse_unit(source, "<llm-harness>")
    try:
        find_function(unit, function_name)
    except NotFound:
        raise LoweringError(f"harness does not define {function_name}") from None
    except DuplicateDefinition:
        raise LoweringError(f"harness defines {function_name} twice") from None
    lift_source_to_hir(source, config)


@dataclass
class Generated:
    source: bytes
    usage: UsageRecord
    attempts: int
    errors: list[str] = field(default_factory=list)


def generate_via_llm(slice_, client: LlmClient, config: Optional[HarnessConfig] = None,
                     model: Optional[HarnessModel] = None) -> Generated:
    config = config or HarnessConfig()
    model = model or build_model(slice_, config)
    base = build_request(model)
    req = base
    usages: list[UsageRecord] = []
    errors: list[str] = []
    for attempt in range(1, config.max_retries + 1):
        reply, usage = client.complete(req)
        usages.append(usage)
        source = extract_code(reply)
        try:
            check_harness(source, model.function_name, config)
        except (ParseError, LexError, LoweringError) as e:
            errors.append(f"{type(e).__name__}: {e}")
            req = retry_request(base, errors[-1])
            continue
        return Generated(source.encode(), sum_usage(usages), attempt, errors)
    raise GenError(f"no valid harness after {config.max_retries} attempts", errors, sum_usage(usages))
