from __future__ import annotations

import json

import pytest

from fakeserver import FakeChatServer
from lyrecon.analysis import segment
from lyrecon.backend import (
    AuthMissing,
    BackendConfig,
    BackendUnavailable,
    EmptyCompletion,
    LyricsCache,
    cache_key,
    generate,
    mock_generate,
    run_batch,
)
from lyrecon.bow import TrackBow, VocabTable
from lyrecon.evaluation import bow_coverage
from lyrecon.prompt import Prompt, PromptFields


def _prompt(track_id="T1", vocabulary="love, night, fire", mood="happy") -> Prompt:
    fields = PromptFields(
        genre="Rock", artist="Nobody", mood=mood, title="A Title",
        vocabulary=vocabulary,
    )
    return Prompt(text=fields.render(), track_id=track_id, field_values=fields)


def _live_config(server: FakeChatServer, **overrides) -> BackendConfig:
    values = dict(
        kind="live",
        endpoint=server.endpoint,
        model="fake-model",
        max_attempts=3,
        backoff_base=0.01,
        timeout=5.0,
        max_in_flight=2,
    )
    values.update(overrides)
    return BackendConfig(**values)


@pytest.fixture()
def api_key(monkeypatch):
    monkeypatch.setenv("LYRECON_API_KEY", "test-key-123")


# --- cache key --------------------------------------------------------------

def test_cache_key_stable_and_sensitive():
    a = cache_key("p", "m", 0.7, 1024)
    assert a == cache_key("p", "m", 0.7, 1024)
    assert a != cache_key("p", "m", 0.8, 1024)
    assert a != cache_key("p", "other", 0.7, 1024)
    assert a != cache_key("q", "m", 0.7, 1024)
    assert a != cache_key("p", "m", 0.7, 512)


def test_cache_key_is_64_hex():
    digest = cache_key("p", "m", 0.7, 1024)
    assert len(digest) == 64
    assert set(digest) <= set("0123456789abcdef")


# --- mock backend -----------------------------------------------------------

def test_mock_contract():
    prompt = _prompt()
    lyrics = mock_generate(prompt)
    doc = segment(lyrics)
    assert doc.section_count >= 2
    tokens = set(doc.token_stream())
    assert {"love", "night", "fire"} <= tokens
    assert mock_generate(_prompt()) == lyrics  # pure function of the prompt


def test_mock_coverage_is_total():
    prompt = _prompt(vocabulary="night, fire, stone")
    doc = segment(mock_generate(prompt))
    track = TrackBow(track_id="T", source_id="", counts={1: 3, 2: 2, 3: 1})
    vocab = VocabTable(words=("night", "fire", "stone"))
    assert bow_coverage(doc, track, vocab) == 1.0


def test_generate_mock_uses_cache(tmp_path):
    cache = LyricsCache(tmp_path / "cache")
    config = BackendConfig(kind="mock")
    first = generate(_prompt(), config, cache)
    second = generate(_prompt(), config, cache)
    assert first.cached is False
    assert second.cached is True
    assert second.lyrics == first.lyrics
    assert second.created_at == first.created_at
    assert first.prompt_digest == cache_key(
        _prompt().text, config.model, config.temperature, config.max_output_tokens
    )


def test_cache_layout_on_disk(tmp_path):
    cache = LyricsCache(tmp_path / "cache")
    result = generate(_prompt(), BackendConfig(kind="mock"), cache)
    digest = result.prompt_digest
    stored = tmp_path / "cache" / digest[:2] / digest
    assert stored.is_file()
    assert json.loads(stored.read_text())["lyrics"] == result.lyrics


def test_cache_hit_rebinds_track_id(tmp_path):
    cache = LyricsCache(tmp_path / "cache")
    config = BackendConfig(kind="mock")
    generate(_prompt(track_id="T1"), config, cache)
    again = generate(_prompt(track_id="T2"), config, cache)
    assert again.cached is True
    assert again.track_id == "T2"


# --- config validation ------------------------------------------------------

@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="weird"),
        dict(kind="live", endpoint=""),
        dict(temperature=-0.1),
        dict(max_output_tokens=0),
        dict(max_attempts=0),
        dict(max_in_flight=0),
    ],
)
def test_bad_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        BackendConfig(**kwargs)


# --- live backend -----------------------------------------------------------

def test_live_retries_through_429(tmp_path, api_key):
    with FakeChatServer(script=[429, 429, 200]) as server:
        config = _live_config(server)
        result = generate(_prompt(), config, LyricsCache(tmp_path / "c"))
        assert result.lyrics.startswith("fake verse")
        assert server.request_count == 3


def test_live_gives_up_after_max_attempts(tmp_path, api_key):
    with FakeChatServer(script=[429] * 10) as server:
        config = _live_config(server, max_attempts=3)
        with pytest.raises(BackendUnavailable):
            generate(_prompt(), config, LyricsCache(tmp_path / "c"))
        assert server.request_count == 3


def test_live_5xx_retry_then_success(tmp_path, api_key):
    with FakeChatServer(script=[500, 200]) as server:
        result = generate(_prompt(), _live_config(server), LyricsCache(tmp_path / "c"))
        assert result.cached is False
        assert server.request_count == 2


def test_backoff_delays_never_shrink(monkeypatch, api_key):
    import lyrecon.backend as backend_module

    delays: list[float] = []
    monkeypatch.setattr(backend_module.time, "sleep", delays.append)
    with FakeChatServer(script=[429, 429, 429, 429, 200]) as server:
        config = _live_config(server, max_attempts=5, backoff_base=0.5)
        generate(_prompt(), config, None)
    assert delays == [0.5, 1.0, 2.0, 4.0]
    assert all(a <= b for a, b in zip(delays, delays[1:]))


def test_live_4xx_fails_immediately(api_key):
    with FakeChatServer(script=[404]) as server:
        with pytest.raises(BackendUnavailable):
            generate(_prompt(), _live_config(server), None)
        assert server.request_count == 1


def test_live_blank_completion(api_key):
    with FakeChatServer(blank_completion=True) as server:
        with pytest.raises(EmptyCompletion):
            generate(_prompt(), _live_config(server), None)


def test_live_sends_bearer_and_wire_format(api_key):
    with FakeChatServer() as server:
        config = _live_config(server, temperature=0.3, max_output_tokens=77)
        generate(_prompt(), config, None)
        request = server.requests[0]
        assert request["auth"] == "Bearer test-key-123"
        body = request["body"]
        assert body["model"] == "fake-model"
        assert body["temperature"] == 0.3
        assert body["max_tokens"] == 77
        assert body["messages"] == [
            {"role": "user", "content": _prompt().text}
        ]


def test_auth_missing(monkeypatch):
    monkeypatch.delenv("LYRECON_API_KEY", raising=False)
    with FakeChatServer() as server:
        with pytest.raises(AuthMissing):
            generate(_prompt(), _live_config(server), None)
        assert server.request_count == 0


# --- batch ------------------------------------------------------------------

def test_batch_concurrency_bound(tmp_path, api_key):
    prompts = [_prompt(track_id=f"T{i}", vocabulary=f"love, word{i}") for i in range(12)]
    with FakeChatServer(hold_seconds=0.05) as server:
        config = _live_config(server, max_in_flight=3)
        items = run_batch(prompts, config, LyricsCache(tmp_path / "c"))
        assert server.max_in_flight <= 3
        assert server.request_count == 12
    assert [i.track_id for i in items] == [p.track_id for p in prompts]
    assert all(i.ok for i in items)


def test_batch_failures_do_not_abort(tmp_path, api_key):
    prompts = [_prompt(track_id=f"T{i}", vocabulary=f"love, word{i}") for i in range(4)]
    with FakeChatServer(script=[200, 500, 500, 500, 200, 200]) as server:
        config = _live_config(server, max_attempts=1, max_in_flight=1)
        items = run_batch(prompts, config, LyricsCache(tmp_path / "c"))
    flags = [item.ok for item in items]
    assert flags == [True, False, False, False]
    failed = [item for item in items if not item.ok]
    assert all("BackendUnavailable" in item.error for item in failed)


def test_batch_rerun_hits_cache_only(tmp_path, api_key):
    prompts = [_prompt(track_id=f"T{i}", vocabulary=f"love, word{i}") for i in range(6)]
    with FakeChatServer() as server:
        config = _live_config(server)
        cache = LyricsCache(tmp_path / "c")
        first = run_batch(prompts, config, cache)
        assert server.request_count == 6
        server.mark()
        second = run_batch(prompts, config, cache)
        assert server.requests_since_mark == 0
    assert [i.result.lyrics for i in first] == [i.result.lyrics for i in second]
    assert [i.result.created_at for i in first] == [i.result.created_at for i in second]
    assert all(i.result.cached for i in second)


def test_batch_auth_checked_before_any_work(monkeypatch):
    monkeypatch.delenv("LYRECON_API_KEY", raising=False)
    with FakeChatServer() as server:
        with pytest.raises(AuthMissing):
            run_batch([_prompt()], _live_config(server), None)
        assert server.request_count == 0
