import json
from fractions import Fraction

import httpx
import pytest

from symtee.llm import (
    CompletionRequest, FixtureMiss, LiveTransport, LlmClient, RecordTransport, ReplayTransport, TransportError,
    UsageRecord, client_from_env, complete, prompt_hash, sum_usage, usage_summary,
)


def fixture(tmp_path, entries, name="f.json"):
    p = tmp_path / name
    p.write_text(json.dumps(entries))
    return p


def entry(req, text, i=10, o=5):
    return {"prompt_hash": req.prompt_hash, "response_text": text, "input_tokens": i, "output_tokens": o}


REQ = CompletionRequest("sys", "user")


def test_hash_is_sha256_of_concatenated_prompts():
    import hashlib
    assert REQ.prompt_hash == hashlib.sha256(b"sysuser").hexdigest() == prompt_hash("sys", "user")


def test_empty_prompt_is_rejected():
    with pytest.raises(ValueError):
        CompletionRequest("  ", "x")


def test_replay_returns_recorded_text_and_usage(tmp_path):
    t = ReplayTransport(fixture(tmp_path, [entry(REQ, "hello", 7, 3)]))
    text, usage = complete(REQ, t)
    assert text == "hello" and (usage.input_tokens, usage.output_tokens, usage.total) == (7, 3, 10)


def test_replay_serves_repeats_in_order_then_misses(tmp_path):
    t = ReplayTransport(fixture(tmp_path, [entry(REQ, "one"), entry(REQ, "two")]))
    assert [t.send(REQ)[0] for _ in range(2)] == ["one", "two"]
    with pytest.raises(FixtureMiss):
        t.send(REQ)


def test_unmatched_prompt_is_a_fixture_miss(tmp_path):
    t = ReplayTransport(fixture(tmp_path, [entry(REQ, "x")]))
    with pytest.raises(FixtureMiss):
        t.send(CompletionRequest("sys", "other"))


def test_replay_loads_directories(tmp_path):
    fixture(tmp_path, [entry(REQ, "a")], "a.json")
    fixture(tmp_path, [entry(CompletionRequest("s", "u"), "b")], "b.json")
    t = ReplayTransport(tmp_path)
    assert t.send(CompletionRequest("s", "u"))[0] == "b"


def test_malformed_fixture_is_rejected(tmp_path):
    with pytest.raises(ValueError):
        ReplayTransport(fixture(tmp_path, [{"prompt_hash": "x"}]))


def _live(handler, key="k"):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return LiveTransport("https://llm.invalid/v1/chat/completions", key, "m", client=client)


def test_live_rejected_credentials_is_auth_error():
    t = _live(lambda req: httpx.Response(401, json={"error": "bad key"}))
    with pytest.raises(TransportError) as info:
        t.send(REQ)
    assert info.value.kind == "auth"


def test_live_without_key_is_auth_error():
    with pytest.raises(TransportError) as info:
        _live(lambda req: httpx.Response(200), key=None).send(REQ)
    assert info.value.kind == "auth"


def test_live_success_parses_choices_and_usage():
    seen = {}

    def handler(req):
        seen.update(json.loads(req.content), auth=req.headers["authorization"])
        return httpx.Response(200, json={"id": "r1", "choices": [{"message": {"content": "code"}}],
                                         "usage": {"prompt_tokens": 12, "completion_tokens": 8}})
    text, usage = _live(handler).send(REQ)
    assert text == "code" and usage == UsageRecord(12, 8, "r1")
    assert seen["auth"] == "Bearer k" and seen["temperature"] == 0.0
    assert [m["role"] for m in seen["messages"]] == ["system", "user"]


def test_live_network_failure():
    def handler(req):
        raise httpx.ConnectError("refused")
    with pytest.raises(TransportError) as info:
        _live(handler).send(REQ)
    assert info.value.kind == "network"


def test_live_bad_shape_is_protocol_error():
    with pytest.raises(TransportError) as info:
        _live(lambda req: httpx.Response(200, json={"nope": 1})).send(REQ)
    assert info.value.kind == "protocol"


def test_record_then_replay(tmp_path):
    live = _live(lambda req: httpx.Response(200, json={"choices": [{"message": {"content": "rec"}}],
                                                       "usage": {"prompt_tokens": 4, "completion_tokens": 2}}))
    path = tmp_path / "rec" / "out.json"
    RecordTransport(live, path).send(REQ)
    assert ReplayTransport(path).send(REQ)[0] == "rec"


def test_client_from_env_requires_endpoint():
    with pytest.raises(TransportError) as info:
        client_from_env(environ={})
    assert info.value.kind == "config"


def test_client_from_env_prefers_replay(tmp_path):
    c = client_from_env([fixture(tmp_path, [entry(REQ, "r")])], environ={})
    assert isinstance(c, LlmClient) and c.complete(REQ)[0] == "r"


def test_average_of_two_cases():
    rep = usage_summary([("a", [UsageRecord(4000, 0)]), ("b", [UsageRecord(3000, 5000)])])
    assert rep.average_tokens == 6000 and rep.total_tokens == 12000


def test_single_case_thousands_separator():
    rep = usage_summary([("a", [UsageRecord(5000, 931)])])
    assert rep.average_text() == "5,931"


def test_empty_usage_is_dash():
    rep = usage_summary([])
    assert rep.per_case == () and rep.average_tokens is None
    assert rep.average_text() == "—" and rep.average_cost_text() == "—"


def test_average_is_exact_not_rounded_early():
    rep = usage_summary([("a", [UsageRecord(1, 0)]), ("b", [UsageRecord(2, 0)]), ("c", [UsageRecord(2, 0)])])
    assert rep.average_tokens == Fraction(5, 3)


def test_cost_is_tokens_times_price():
    rep = usage_summary([("a", [UsageRecord(5000, 931)])], Fraction(1, 100000))
    assert rep.estimated_cost == Fraction(5931, 100000)
    assert rep.average_cost_text() == "$0.06"
    assert usage_summary([("a", [UsageRecord(100, 0)])], "0.00001").average_cost_text() == "$0.0010"


def test_sum_usage():
    s = sum_usage([UsageRecord(1, 2, "a"), UsageRecord(3, 4, "b")])
    assert (s.input_tokens, s.output_tokens, s.request_id) == (4, 6, "a+b")


def test_negative_tokens_rejected():
    with pytest.raises(ValueError):
        UsageRecord(-1, 0)
