"""Regenerate the committed LLM replay fixtures.

No live model is contacted. Each reply is authored offline: the elided golden
harness text for the ``produce`` slice, and for the other corpus slices a
restyled copy of the template harness wrapped the way chat models usually
answer. ``pbkdf2_vuln`` gets a two-turn exchange whose first reply lacks the
oracle. Token counts are estimated at four characters per token.

    python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import math
import re
import sys
from pathlib import Path

from symtee.bench import bundled_corpus_root, load_corpus
from symtee.harness.llmgen import build_request, check_harness, retry_request
from symtee.harness.model import HarnessConfig, build_model
from symtee.harness.render import render_source
from symtee.slicer import slice_source

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "src" / "symtee" / "data" / "fixtures"
TEST_OUT = ROOT / "tests" / "data" / "fixtures"
ELIDED_TEXT = ROOT / "tests" / "data" / "produce_harness_elided.c"


def tokens(text: str) -> int:
    return max(1, math.ceil(len(text) / 4))


def entry(req, reply: str) -> dict:
    return {"prompt_hash": req.prompt_hash, "response_text": reply,
            "input_tokens": tokens(req.system_prompt + req.user_prompt), "output_tokens": tokens(reply)}


def chat_reply(source: str, function: str) -> str:
    body = source.replace("#include <klee/klee.h>\n",
                          f"#include <klee/klee.h>\n\n/* Mock environment and harness for {function}. */\n", 1)
    return f"Here is a self-contained KLEE harness for `{function}`:\n\n```c\n{body}```\n"


def without_oracle(source: str) -> str:
    return re.sub(r"\n    if \([^\n]*\) \{\n        klee_assert\([^\n]*\n    \}", "", source)


def exchanges(case_name: str, slice_, config: HarnessConfig) -> list[dict]:
    model = build_model(slice_, config)
    req = build_request(model)
    template = render_source(model).decode()
    if model.function_name == "produce":
        return [entry(req, "```c\n" + ELIDED_TEXT.read_text() + "```\n")]
    if case_name == "real/pbkdf2_vuln":
        first = chat_reply(without_oracle(template), model.function_name)
        try:
            check_harness(re.search(r"```c\n(.*?)```", first, re.S).group(1), model.function_name, config)
        except Exception as e:  # the rejection message becomes part of the retry prompt
            error = f"{type(e).__name__}: {e}"
        else:
            sys.exit("first pbkdf2 reply was expected to fail validation")
        return [entry(req, first), entry(retry_request(req, error), chat_reply(template, model.function_name))]
    return [entry(req, chat_reply(template, model.function_name))]


def write(path: Path, entries: list[dict]) -> None:
    path.write_text(json.dumps(entries, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def garbage(slice_, config: HarnessConfig) -> list[dict]:
    """Three non-C replies; each retry prompt carries the previous rejection."""
    req = build_request(build_model(slice_, config))
    out = []
    for i in range(config.max_retries):
        reply = f"I'm sorry, I can't help with generating that harness (attempt {i + 1})."
        out.append(entry(req, reply))
        try:
            check_harness(reply, slice_.function_name, config)
        except Exception as e:
            req = retry_request(build_request(build_model(slice_, config)), f"{type(e).__name__}: {e}")
    return out


def main() -> None:
    config = HarnessConfig()
    OUT.mkdir(parents=True, exist_ok=True)
    TEST_OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.json"):
        old.unlink()
    produce_slice = None
    for case in load_corpus(bundled_corpus_root()):
        entries = []
        for fname, data in case.sources.items():
            for o in slice_source(data, fname):
                if o.slice is None:
                    continue
                if o.slice.function_name == "produce":
                    produce_slice = o.slice
                entries += exchanges(case.name, o.slice, config)
        if entries:
            name = "produce" if case.name == "synth/produce" else case.name.replace("/", "__")
            write(OUT / f"{name}.json", entries)
    write(TEST_OUT / "garbage_produce.json", garbage(produce_slice, config))


if __name__ == "__main__":
    main()
