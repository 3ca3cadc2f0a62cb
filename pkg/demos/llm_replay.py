"""Generate harnesses from recorded model replies and compare with templates.

    python3 demos/llm_replay.py
"""

from importlib import resources
from pathlib import Path

from symtee.bench import bundled_corpus_root, load_corpus, run_bench, score
from symtee.llm import LlmClient, ReplayTransport
from symtee.pipeline import PipelineConfig

fixtures = Path(str(resources.files("symtee").joinpath("data", "fixtures")))
client = LlmClient(ReplayTransport(fixtures))
cases = load_corpus(bundled_corpus_root())

llm = score(run_bench(cases, PipelineConfig(generator="llm", llm_client=client)), price_per_token="0.00000015")
tpl = score(run_bench(cases))
print(f"template: {tpl.tp}/{tpl.vul}   llm replay: {llm.tp}/{llm.vul}")
print(llm.usage.render_text())
