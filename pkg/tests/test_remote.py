import json

import httpx
import pytest

from autoreview.core import NOT_PROVIDED
from autoreview.fields import GROUP_NUMBER
from autoreview.remote import (
    RemoteBackendError,
    RemoteCorrectionBackend,
    RemoteExtractionBackend,
    RemoteModelClient,
    RemoteSelectionBackend,
    parse_output_envelope,
)


def make_client(handler, max_attempts=3):
    return RemoteModelClient(
        endpoint="http://model.test/complete",
        auth_token="tok",
        max_attempts=max_attempts,
        transport=httpx.MockTransport(handler),
    )


def completion_response(payload: str) -> httpx.Response:
    return httpx.Response(200, json={"completion": payload})


class TestClient:
    def test_success_passes_auth_header(self):
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("Authorization")
            seen["body"] = json.loads(request.content)
            return completion_response("hello")

        client = make_client(handler)
        assert client.complete("prompt text") == "hello"
        assert seen["auth"] == "Bearer tok"
        assert seen["body"]["prompt"] == "prompt text"

    def test_retries_then_succeeds(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(500)
            return completion_response("ok")

        client = make_client(handler)
        assert client.complete("p") == "ok"
        assert calls["n"] == 3

    def test_bounded_attempts_then_error(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(503)

        client = make_client(handler, max_attempts=2)
        with pytest.raises(RemoteBackendError):
            client.complete("p")
        assert calls["n"] == 2

    def test_timeout_counts_as_failure(self):
        def handler(request):
            raise httpx.ConnectTimeout("timed out")

        client = make_client(handler, max_attempts=2)
        with pytest.raises(RemoteBackendError):
            client.complete("p")

    def test_shared_token_bucket_paces_requests(self):
        from autoreview.remote import TokenBucket

        clock = {"now": 0.0}
        slept: list[float] = []

        def sleep(duration: float) -> None:
            slept.append(duration)
            clock["now"] += duration

        bucket = TokenBucket(
            rate_per_second=2.0, burst=2, clock=lambda: clock["now"], sleep=sleep
        )
        for _ in range(2):
            bucket.acquire()  # burst drains without waiting
        assert slept == []
        bucket.acquire()
        assert slept and abs(sum(slept) - 0.5) < 1e-9

        # wired through the client: every attempt takes a token
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return completion_response("ok")

        client = RemoteModelClient(
            endpoint="http://model.test/complete",
            transport=httpx.MockTransport(handler),
            rate_limiter=TokenBucket(
                rate_per_second=1000.0, burst=1, clock=lambda: clock["now"], sleep=sleep
            ),
        )
        assert client.complete("a") == "ok"
        assert client.complete("b") == "ok"
        assert calls["n"] == 2


class TestEnvelope:
    def test_valid(self):
        assert parse_output_envelope('{"Output": "AD0156"}') == "AD0156"

    def test_not_json(self):
        assert parse_output_envelope("AD0156") is None

    def test_missing_key(self):
        assert parse_output_envelope('{"value": "AD0156"}') is None

    def test_non_string_output(self):
        assert parse_output_envelope('{"Output": 42}') is None


class TestExtractionBackend:
    def test_remote_value_normalized(self, specs):
        client = make_client(lambda r: completion_response('{"Output": "ad 0156"}'))
        backend = RemoteExtractionBackend(client)
        value = backend.extract(["the group number is a d 0 1 5 6"], specs[GROUP_NUMBER])
        assert value == "AD0156"

    def test_malformed_response_falls_back_to_parser(self, specs):
        client = make_client(lambda r: completion_response("not an envelope"))
        backend = RemoteExtractionBackend(client)
        value = backend.extract(["the group number is a d 0 1 5 6"], specs[GROUP_NUMBER])
        assert value == "AD0156"

    def test_unreachable_endpoint_falls_back(self, specs):
        def handler(request):
            raise httpx.ConnectError("no route")

        client = make_client(handler, max_attempts=2)
        backend = RemoteExtractionBackend(client)
        value = backend.extract(["the group number is a d 0 1 5 6"], specs[GROUP_NUMBER])
        assert value == "AD0156"

    def test_not_provided_variants(self, specs):
        client = make_client(lambda r: completion_response('{"Output": "not provided"}'))
        backend = RemoteExtractionBackend(client)
        assert backend.extract(["whatever"], specs[GROUP_NUMBER]) == NOT_PROVIDED


class TestSelectionAndCorrectionBackends:
    def test_selection_maps_text_to_index(self):
        client = make_client(
            lambda r: completion_response('{"Output": "my name is sabrina a"}')
        )
        backend = RemoteSelectionBackend(client)
        index = backend.select(["my name is rina a", "my name is sabrina a"], "Sabrina A")
        assert index == 1

    def test_selection_unknown_text_gives_none(self):
        client = make_client(lambda r: completion_response('{"Output": "something else"}'))
        backend = RemoteSelectionBackend(client)
        assert backend.select(["a", "b"], "Gold") is None

    def test_correction_round_trip(self):
        client = make_client(
            lambda r: completion_response('{"Output": "my name is sabrina a"}')
        )
        backend = RemoteCorrectionBackend(client)
        assert backend.correct("my name is rina a", "Sabrina A") == "my name is sabrina a"

    def test_correction_failure_gives_none(self):
        def handler(request):
            return httpx.Response(500)

        backend = RemoteCorrectionBackend(make_client(handler, max_attempts=1))
        assert backend.correct("text", "Gold") is None
