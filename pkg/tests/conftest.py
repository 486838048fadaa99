from __future__ import annotations

import json

import pytest

from fixture_server import FixtureServer


@pytest.fixture
def fixture_server():
    server = FixtureServer().start()
    yield server
    server.stop()


def chat_completions_reply(content: str) -> bytes:
    return json.dumps(
        {"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}
    ).encode("utf-8")
