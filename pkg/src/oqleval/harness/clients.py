"""Text generation clients."""

import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Union

import requests

from oqleval.errors import ConfigError, GenerationError
from oqleval.utils.file_utils import calculate_text_hash


class GenerationClient(Protocol):
    def generate(self, prompt: str, stop: Sequence[str], max_length: int) -> str:
        ...


def prompt_key(prompt: str) -> str:
    """Fixture map key of a prompt."""
    return calculate_text_hash(prompt)


class CompletionsClient:
    """
    OpenAI-style `/completions` HTTP client.

    Sends `model`, `prompt`, `max_tokens`, `stop` and `temperature=0`; reads
    `choices[0].text`.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        token: Optional[str] = None,
        session: Optional[requests.Session] = None,
        timeout: float = 120.0,
    ) -> None:
        if not endpoint:
            raise ConfigError("client.endpoint is required for the completions client")
        self.endpoint = endpoint
        self.model = model
        self.token = token
        self.session = session or requests.Session()
        self.timeout = timeout
        self.logger = logging.getLogger(__name__)

    def generate(self, prompt: str, stop: Sequence[str], max_length: int) -> str:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        body = {
            "model": self.model,
            "prompt": prompt,
            "max_tokens": max_length,
            "stop": list(stop),
            "temperature": 0,
        }

        try:
            response = self.session.post(
                self.endpoint, json=body, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as e:
            raise GenerationError(f"Completion request failed: {e}")

        if response.status_code != 200:
            raise GenerationError(
                "Completion request failed: "
                f"HTTP {response.status_code} {response.text[:200]}"
            )
        try:
            return str(response.json()["choices"][0]["text"])
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise GenerationError(f"Malformed completion response: {e}")


class FixtureClient:
    """Replays completions from a JSON map of prompt sha256 -> completion."""

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)
        self.logger = logging.getLogger(__name__)
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                self.completions: Dict[str, str] = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read completion fixture {self.path}: {e}")

    def generate(self, prompt: str, stop: Sequence[str], max_length: int) -> str:
        key = prompt_key(prompt)
        if key not in self.completions:
            raise GenerationError(f"No fixture completion for prompt {key[:12]}")
        return self.completions[key]


class ScriptedClient:
    """Answers with a callable; records every prompt it receives."""

    def __init__(self, respond: Callable[[str], str]) -> None:
        self.respond = respond
        self.prompts: List[str] = []

    def generate(self, prompt: str, stop: Sequence[str], max_length: int) -> str:
        self.prompts.append(prompt)
        return self.respond(prompt)


def build_client(
    kind: str,
    endpoint: Optional[str] = None,
    model: Optional[str] = None,
    path: Optional[str] = None,
    token: Optional[str] = None,
) -> GenerationClient:
    """Client from its configured kind: `completions` or `fixture`."""
    if kind == "completions":
        return CompletionsClient(endpoint or "", model or "", token=token)
    if kind == "fixture":
        if not path:
            raise ConfigError("client.path is required for the fixture client")
        return FixtureClient(path)
    raise ConfigError(f"Unknown generation client {kind!r}")
