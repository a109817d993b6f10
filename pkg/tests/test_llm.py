import pytest

from fantasy11.errors import (
    BackendError,
    MalformedAfterRetriesError,
    MissingFixtureError,
)
from fantasy11.llm import (
    ChatRequest,
    Message,
    MockBackend,
    PayloadDescriptor,
    RecordingBackend,
    ScriptedBackend,
    complete_structured,
    extract_payload,
    fingerprint_request,
    make_request,
    send_chat,
)


def req(text="hello", tag="worker", temperature=1.0):
    return make_request(tag, text, system="be brief", temperature=temperature)


class TestFingerprint:
    def test_depends_on_messages_and_tag_only(self):
        a = req(temperature=1.0)
        b = req(temperature=0.0)
        assert fingerprint_request(a) == fingerprint_request(b)
        assert fingerprint_request(req(tag="reviewer")) != fingerprint_request(a)
        assert fingerprint_request(req(text="other")) != fingerprint_request(a)

    def test_stable_across_runs(self):
        # frozen: flags accidental changes to the canonical encoding
        assert fingerprint_request(req()) == fingerprint_request(req())
        assert len(fingerprint_request(req())) == 16


class TestMockBackend:
    def test_keyed_lookup(self, tmp_path):
        request = req()
        fp = fingerprint_request(request)
        (tmp_path / f"{fp}.txt").write_text("hello back")
        got = send_chat(request, MockBackend(tmp_path))
        assert got.content == "hello back"
        assert got.model_used == "mock:worker"

    def test_deterministic(self, tmp_path):
        request = req()
        (tmp_path / f"{fingerprint_request(request)}.txt").write_text("same")
        backend = MockBackend(tmp_path)
        assert backend.send(request) == backend.send(request)

    def test_missing_fixture_fails_loudly(self, tmp_path):
        with pytest.raises(MissingFixtureError):
            MockBackend(tmp_path).send(req())


class TestRecordReplay:
    def test_round_trip(self, tmp_path):
        live_stand_in = ScriptedBackend(["first answer", "second answer"])
        recorder = RecordingBackend(live_stand_in, tmp_path)
        r1, r2 = req("one"), req("two")
        a1 = recorder.send(r1)
        a2 = recorder.send(r2)
        replay = MockBackend(tmp_path)
        assert replay.send(r1).content == a1.content
        assert replay.send(r2).content == a2.content
        index = (tmp_path / "index.tsv").read_text()
        assert fingerprint_request(r1) in index


class TestExtractPayload:
    def test_bare_object(self):
        assert extract_payload('{"a": 1}') == {"a": 1}

    def test_fenced_with_prose(self):
        text = 'Sure! Here you go:\n```json\n{"a": 2}\n```\nAnything else?'
        assert extract_payload(text) == {"a": 2}

    def test_prose_around_bare_json(self):
        text = 'The answer is {"a": 3, "b": [1, 2]} as requested.'
        assert extract_payload(text) == {"a": 3, "b": [1, 2]}

    def test_no_payload(self):
        assert extract_payload("no structure here") is None


class TestCompleteStructured:
    DESC = PayloadDescriptor(
        fields={"rating": int},
        check=lambda p: [] if 1 <= p["rating"] <= 10 else ["rating must be in 1..10"],
    )

    def test_clean_first_attempt(self):
        backend = ScriptedBackend(['{"rating": 7}'])
        got = complete_structured(req(), self.DESC, backend)
        assert got == {"rating": 7}

    def test_fail_once_then_succeed(self):
        backend = ScriptedBackend(["not json at all", '{"rating": 11}', '{"rating": 4}'])
        got = complete_structured(req(), self.DESC, backend, max_attempts=3)
        assert got == {"rating": 4}
        assert len(backend.requests) == 3
        # the re-prompt carries the validation error forward
        follow_up = backend.requests[2].messages[-1].content
        assert "rating must be in 1..10" in follow_up

    def test_attempt_bound(self):
        backend = ScriptedBackend(["junk"] * 5)
        with pytest.raises(MalformedAfterRetriesError) as err:
            complete_structured(req(), self.DESC, backend, max_attempts=3)
        assert len(backend.requests) == 3
        assert len(err.value.raw_responses) == 3

    def test_retry_gate_limits_calls(self):
        backend = ScriptedBackend(["junk"] * 5)
        with pytest.raises(MalformedAfterRetriesError):
            complete_structured(
                req(), self.DESC, backend, max_attempts=5, retry_gate=lambda: False
            )
        assert len(backend.requests) == 1

    def test_extra_fields_pass_through(self):
        backend = ScriptedBackend(['{"rating": 2, "notes": "fine"}'])
        got = complete_structured(req(), self.DESC, backend)
        assert got["notes"] == "fine"

    def test_bool_is_not_an_int(self):
        backend = ScriptedBackend(['{"rating": true}', '{"rating": 3}'])
        got = complete_structured(req(), self.DESC, backend)
        assert got == {"rating": 3}


class TestRequestInvariants:
    def test_needs_messages(self):
        with pytest.raises(BackendError):
            ChatRequest("worker", ())

    def test_first_role(self):
        with pytest.raises(BackendError):
            ChatRequest("worker", (Message("assistant", "hi"),))
