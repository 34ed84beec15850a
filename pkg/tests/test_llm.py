import urllib.error

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webgym.errors import ConfigurationError
from webgym.llm import (
    HttpChatModel,
    HttpModelArgs,
    ModelArgs,
    ScriptedModelArgs,
    ScriptExhaustedError,
    TransportError,
    Usage,
    UsageTracker,
    complete,
    model_args_from_dict,
)


def test_usage_cost_formula():
    args = ModelArgs(price_per_1k_prompt=2.0, price_per_1k_completion=6.0)
    assert args.cost_of(1000, 500) == pytest.approx(2.0 + 3.0)


def test_negative_prices_rejected():
    with pytest.raises(ConfigurationError):
        ModelArgs(price_per_1k_prompt=-1.0)


def test_tracker_totals_additive():
    tracker = UsageTracker()
    assert tracker.totals() == Usage()
    tracker.track(Usage(prompt_tokens=100, completion_tokens=50, cost=0.1))
    tracker.track(Usage(prompt_tokens=200, completion_tokens=10, cost=0.2))
    totals = tracker.totals()
    assert (totals.prompt_tokens, totals.completion_tokens) == (300, 60)
    assert totals.cost == pytest.approx(0.3)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 5000), st.integers(0, 5000), st.floats(0, 10)), max_size=8
    ),
    st.lists(
        st.tuples(st.integers(0, 5000), st.integers(0, 5000), st.floats(0, 10)), max_size=8
    ),
)
def test_tracker_merge_equals_sum_of_parts(left, right):
    a, b, merged = UsageTracker(), UsageTracker(), UsageTracker()
    for p, c, cost in left:
        a.track(Usage(p, c, cost))
        merged.track(Usage(p, c, cost))
    for p, c, cost in right:
        b.track(Usage(p, c, cost))
        merged.track(Usage(p, c, cost))
    a.merge(b)
    assert a.totals().prompt_tokens == merged.totals().prompt_tokens
    assert a.totals().completion_tokens == merged.totals().completion_tokens
    assert a.totals().cost == pytest.approx(merged.totals().cost)
    assert a.n_calls == merged.n_calls


def test_scripted_model_rules_then_queue():
    args = ScriptedModelArgs(
        rules=(("einstein", "<action>send_msg_to_user('1879')</action>"),),
        queue=("first", "second"),
    )
    model = args.make_model()
    hit = model([{"role": "user", "content": "Which year was einstein born?"}])
    assert "1879" in hit.text
    assert model([{"role": "user", "content": "other"}]).text == "first"
    assert model([{"role": "user", "content": "other"}]).text == "second"
    with pytest.raises(ScriptExhaustedError):
        model([{"role": "user", "content": "other"}])


def test_scripted_model_deterministic_and_fresh_per_make_model():
    args = ScriptedModelArgs(queue=("only",))
    assert args.make_model()([{"role": "user", "content": "x"}]).text == "only"
    assert args.make_model()([{"role": "user", "content": "x"}]).text == "only"


def test_scripted_usage_estimated_with_default_counter():
    args = ScriptedModelArgs(queue=("two words",))
    completion = args.make_model()([{"role": "user", "content": "three total tokens"}])
    assert completion.usage.estimated is True
    assert completion.usage.prompt_tokens == 3
    assert completion.usage.completion_tokens == 2


def test_complete_requires_messages():
    model = ScriptedModelArgs(queue=("x",)).make_model()
    with pytest.raises(ValueError):
        complete(model, [])
    assert complete(model, [{"role": "user", "content": "hi"}]).text == "x"


def _ok_response(text="hello", usage=True):
    payload = {"choices": [{"message": {"content": text}}]}
    if usage:
        payload["usage"] = {"prompt_tokens": 7, "completion_tokens": 3}
    return payload


def test_http_model_wire_format_and_usage():
    seen = {}

    def transport(url, payload, timeout):
        seen["url"] = url
        seen["payload"] = payload
        return _ok_response()

    args = HttpModelArgs(
        model_name="m1",
        endpoint="http://llm.internal/v1/chat",
        temperature=0.5,
        max_new_tokens=64,
        price_per_1k_prompt=1.0,
        price_per_1k_completion=2.0,
    )
    model = HttpChatModel(args, transport=transport)
    completion = model([{"role": "user", "content": "hi there"}])
    assert seen["url"] == "http://llm.internal/v1/chat"
    assert seen["payload"] == {
        "model": "m1",
        "messages": [{"role": "user", "content": "hi there"}],
        "temperature": 0.5,
        "max_tokens": 64,
    }
    assert completion.text == "hello"
    assert completion.usage.prompt_tokens == 7
    assert completion.usage.estimated is False
    assert completion.usage.cost == pytest.approx(7 / 1000 * 1.0 + 3 / 1000 * 2.0)


def test_http_model_estimates_usage_when_absent():
    model = HttpChatModel(
        HttpModelArgs(endpoint="http://x"), transport=lambda u, p, t: _ok_response(usage=False)
    )
    completion = model([{"role": "user", "content": "one two"}])
    assert completion.usage.estimated is True
    assert completion.usage.prompt_tokens == 2


def test_http_model_retries_then_succeeds_at_most_once(monkeypatch):
    monkeypatch.setattr("webgym.llm.time.sleep", lambda s: None)
    calls = {"n": 0}

    def flaky(url, payload, timeout):
        calls["n"] += 1
        if calls["n"] <= 2:
            raise urllib.error.URLError("connection refused")
        return _ok_response()

    model = HttpChatModel(HttpModelArgs(endpoint="http://x", max_transport_retries=3), transport=flaky)
    completion = model([{"role": "user", "content": "hi"}])
    assert completion.text == "hello"
    assert calls["n"] == 3  # success is not retried


def test_http_model_exhausts_retries(monkeypatch):
    monkeypatch.setattr("webgym.llm.time.sleep", lambda s: None)
    calls = {"n": 0}

    def dead(url, payload, timeout):
        calls["n"] += 1
        raise urllib.error.URLError("down")

    model = HttpChatModel(HttpModelArgs(endpoint="http://x", max_transport_retries=2), transport=dead)
    with pytest.raises(TransportError):
        model([{"role": "user", "content": "hi"}])
    assert calls["n"] == 3  # initial + 2 retries


def test_model_args_serialization_round_trip():
    args = ScriptedModelArgs(rules=(("a", "b"),), queue=("q",), temperature=0.0)
    data = args.to_dict()
    again = model_args_from_dict(data)
    assert isinstance(again, ScriptedModelArgs)
    assert list(map(tuple, again.rules)) == [("a", "b")]
    assert list(again.queue) == ["q"]
    with pytest.raises(ConfigurationError):
        model_args_from_dict({"kind": "bogus"})
