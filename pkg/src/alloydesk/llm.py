"""Prompt construction, transports, answer extraction, and the retry protocol.

Three task kinds: write a formula from an English description, write a
formula equivalent to a given formula, or fill the holes of a sketch.
Prompts are built deterministically from a corpus entry; answers come back
through a pluggable transport (real HTTP endpoint or canned replay), get
split into candidate bodies, and each candidate is classified against the
ground truth by bounded equivalence checking.
"""

from __future__ import annotations

import json
import os
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .checker import CheckConfig, Verdict, classify
from .formulas import Formula
from .schema import Schema

# Candidate-set definition line inside a sketch, e.g. "e := {| ... |}".
_DEF_LINE_RE = re.compile(r"^\s*[A-Za-z_]\w*\s*:=")
_NUMBERED_RE = re.compile(r"^\s*(\d+)[.)]\s*(.*)$")
_FENCE_RE = re.compile(r"^\s*```.*$")
_COMMENT_LINE_RE = re.compile(r"^\s*(--|//)")


class TaskKind(str, Enum):
    ENGLISH_TO_ALLOY = "english-to-alloy"
    ALLOY_TO_ALLOY = "alloy-to-alloy"
    SKETCH_TO_ALLOY = "sketch-to-alloy"


class MissingFieldError(Exception):
    """The corpus entry lacks a field the task kind needs."""


class EmptyResponseError(Exception):
    """No candidate formula could be extracted from a response."""


class TransportError(Exception):
    """Network, auth, or replay-exhaustion failure; carries the request id."""

    def __init__(self, message: str, request_id: str):
        super().__init__(f"{message} (request {request_id})")
        self.request_id = request_id


@dataclass(frozen=True)
class PromptRequest:
    task_kind: TaskKind
    property_id: str
    solution_count: int
    schema_text: str
    rendered_prompt: str


@dataclass(frozen=True)
class LLMResponse:
    raw_text: str
    extracted_candidates: tuple[str, ...]
    model: str
    timestamp: str
    token_usage: dict | None = None


@dataclass(frozen=True)
class ClassifiedCandidate:
    text: str
    verdict: Verdict


@dataclass
class TaskRun:
    request: PromptRequest
    responses: list[LLMResponse]
    classified: list[ClassifiedCandidate]
    retry_count: int = 0

    def verdict_counts(self) -> tuple[int, int, int]:
        """(correct, syntax_error, wrong) over the final classification."""
        kinds = [c.verdict.kind for c in self.classified]
        return (
            kinds.count("correct"),
            kinds.count("syntax_error"),
            kinds.count("wrong"),
        )


_SYNTH_INSTRUCTION = (
    "Give me {n} unique solutions to the problem of synthesizing the body"
    " of the following Alloy predicate (without markdown or comments) with"
    " respect to the property described in the comments:"
)
_SKETCH_INSTRUCTION = (
    "Complete the following sketch of the Alloy predicate (without markdown"
    " or comments) by selecting values for the holes with respect to the"
    " given constraints such that the predicate is correct with respect to"
    " the property described in the comments:"
)


def _split_sketch_text(sketch_text: str) -> tuple[str, str]:
    """Split a sketch into the predicate part and the hole-definition lines."""
    lines = sketch_text.split("\n")
    for i, line in enumerate(lines):
        if _DEF_LINE_RE.match(line):
            return "\n".join(lines[:i]).rstrip("\n"), "\n".join(lines[i:])
    return sketch_text.rstrip("\n"), ""


def build_prompt(task_kind: TaskKind, entry, solution_count: int = 20) -> PromptRequest:
    """Render the prompt for one (task kind, property) pair.

    The layout mirrors the published examples: synthesis prompts put the
    schema and predicate right under the instruction line; sketch prompts
    separate instruction, code, and hole definitions with blank lines.
    """
    schema_text = entry.schema.alloy_text()
    if task_kind is TaskKind.ENGLISH_TO_ALLOY:
        if not entry.description:
            raise MissingFieldError(f"{entry.id}: no description")
        pred = (
            f"pred {entry.id}{{\n"
            f"  // {entry.description}\n"
            "  // your code go here\n"
            "}"
        )
        prompt = (
            _SYNTH_INSTRUCTION.format(n=solution_count)
            + "\n" + schema_text + "\n" + pred
        )
    elif task_kind is TaskKind.ALLOY_TO_ALLOY:
        if not entry.reference_text:
            raise MissingFieldError(f"{entry.id}: no reference formula")
        body = "\n".join("  " + ln for ln in entry.reference_text.split("\n"))
        pred = f"pred {entry.id}{{\n  // {entry.description}\n{body}\n}}"
        prompt = (
            _SYNTH_INSTRUCTION.format(n=solution_count)
            + "\n" + schema_text + "\n" + pred
        )
    elif task_kind is TaskKind.SKETCH_TO_ALLOY:
        if not entry.sketch_text:
            raise MissingFieldError(f"{entry.id}: no sketch")
        pred_part, def_part = _split_sketch_text(entry.sketch_text)
        prompt = (
            _SKETCH_INSTRUCTION
            + "\n\n" + schema_text + "\n" + pred_part + "\n\n" + def_part
        )
    else:
        raise MissingFieldError(f"unknown task kind {task_kind!r}")
    return PromptRequest(
        task_kind=task_kind,
        property_id=entry.id,
        solution_count=solution_count,
        schema_text=schema_text,
        rendered_prompt=prompt,
    )


def _strip_fences(text: str) -> str:
    return "\n".join(ln for ln in text.split("\n") if not _FENCE_RE.match(ln))


def extract_candidates(raw_text: str, task_kind: TaskKind) -> list[str]:
    """Split a raw response into candidate predicate bodies.

    Synthesis answers are either a numbered list (one candidate per item,
    possibly spanning lines) or blank-line-separated blocks. Sketch answers
    are a single completed predicate; the body between the outermost braces
    is the one candidate. Fences and comment-only lines are dropped.
    """
    text = _strip_fences(raw_text).strip("\n")
    if task_kind is TaskKind.SKETCH_TO_ALLOY:
        open_i = text.find("{")
        close_i = text.rfind("}")
        if open_i != -1 and close_i > open_i:
            body = text[open_i + 1 : close_i]
        else:
            body = text
        lines = [
            ln for ln in body.split("\n")
            if ln.strip() and not _COMMENT_LINE_RE.match(ln)
        ]
        candidate = "\n".join(lines).strip()
        if not candidate:
            raise EmptyResponseError("no predicate body in response")
        return [candidate]

    lines = text.split("\n")
    numbered = [(i, _NUMBERED_RE.match(ln)) for i, ln in enumerate(lines)]
    markers = [(i, m) for i, m in numbered if m]
    candidates: list[str] = []
    if markers:
        for pos, (i, m) in enumerate(markers):
            end = markers[pos + 1][0] if pos + 1 < len(markers) else len(lines)
            chunk = [m.group(2)] + lines[i + 1 : end]
            body = "\n".join(ln for ln in chunk if ln.strip()).strip()
            if body:
                candidates.append(body)
    else:
        block: list[str] = []
        for ln in lines + [""]:
            if ln.strip():
                block.append(ln)
            elif block:
                candidates.append("\n".join(block).strip())
                block = []
    if not candidates:
        raise EmptyResponseError("no candidates in response")
    return candidates


@dataclass(frozen=True)
class TransportReply:
    text: str
    model: str
    token_usage: dict | None = None


class Transport(ABC):
    """A way to send one chat conversation and get the assistant's text back."""

    @abstractmethod
    def complete(
        self, messages: list[dict[str, str]], *, request_id: str, key: str
    ) -> TransportReply:
        """messages follow the chat format [{"role": ..., "content": ...}]."""


@dataclass
class HTTPTransportConfig:
    base_url: str
    model: str
    temperature: float = 0.0
    api_key_env: str = "ALLOYDESK_API_KEY"
    timeout_seconds: float = 120.0


class HTTPTransport(Transport):
    """Chat-completions JSON client; the API key is read from an env var."""

    def __init__(self, config: HTTPTransportConfig):
        self.config = config

    def complete(
        self, messages: list[dict[str, str]], *, request_id: str, key: str
    ) -> TransportReply:
        import requests

        api_key = os.environ.get(self.config.api_key_env)
        if not api_key:
            raise TransportError(
                f"env var {self.config.api_key_env} not set", request_id
            )
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        try:
            resp = requests.post(
                url,
                json=payload,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.config.timeout_seconds,
            )
            resp.raise_for_status()
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
        except requests.RequestException as err:
            raise TransportError(str(err), request_id) from err
        except (KeyError, IndexError, ValueError) as err:
            raise TransportError(f"malformed response: {err}", request_id) from err
        return TransportReply(
            text=text,
            model=data.get("model", self.config.model),
            token_usage=data.get("usage"),
        )


class ReplayTransport(Transport):
    """Canned responses for offline runs.

    Either a flat FIFO list consumed across all requests, or a dict keyed
    by "{property}/{task-kind}" whose values are consumed in order per key
    (a second request under the same key gets the second response, which is
    how retries are scripted).
    """

    def __init__(
        self,
        responses: list[str] | dict[str, list[str] | str] | None = None,
        model: str = "replay",
    ):
        self.model = model
        self._fifo: list[str] | None = None
        self._keyed: dict[str, list[str]] | None = None
        if isinstance(responses, dict):
            self._keyed = {
                k: ([v] if isinstance(v, str) else list(v))
                for k, v in responses.items()
            }
        else:
            self._fifo = list(responses or [])

    @classmethod
    def from_file(cls, path: str, model: str = "replay") -> "ReplayTransport":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, (list, dict)):
            raise ValueError(f"replay file {path}: expected JSON list or object")
        return cls(data, model=model)

    def complete(
        self, messages: list[dict[str, str]], *, request_id: str, key: str
    ) -> TransportReply:
        if self._keyed is not None:
            queue = self._keyed.get(key)
            if not queue:
                raise TransportError(f"no replay response for key {key!r}", request_id)
            return TransportReply(text=queue.pop(0), model=self.model)
        if not self._fifo:
            raise TransportError("replay responses exhausted", request_id)
        return TransportReply(text=self._fifo.pop(0), model=self.model)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_task(
    req: PromptRequest,
    transport: Transport,
    ground_truth: Formula,
    schema: Schema,
    cfg: CheckConfig = CheckConfig(),
    retry_on_syntax_error: bool = True,
) -> TaskRun:
    """Send one prompt, classify every extracted candidate, maybe retry.

    The retry applies only to sketch tasks whose single candidate fails to
    parse: the syntax error is quoted back in one follow-up message and the
    second answer replaces the first. At most one retry.
    """
    key = f"{req.property_id}/{req.task_kind.value}"
    request_id = key
    messages = [{"role": "user", "content": req.rendered_prompt}]
    reply = transport.complete(messages, request_id=request_id, key=key)
    response = LLMResponse(
        raw_text=reply.text,
        extracted_candidates=tuple(extract_candidates(reply.text, req.task_kind)),
        model=reply.model,
        timestamp=_now(),
        token_usage=reply.token_usage,
    )
    responses = [response]
    classified = [
        ClassifiedCandidate(c, classify(ground_truth, c, schema, cfg))
        for c in response.extracted_candidates
    ]
    retry_count = 0
    if (
        retry_on_syntax_error
        and req.task_kind is TaskKind.SKETCH_TO_ALLOY
        and len(classified) == 1
        and classified[0].verdict.kind == "syntax_error"
    ):
        error_text = classified[0].verdict.parse_error or "syntax error"
        follow_up = (
            f"Your answer has a syntax error: {error_text}\n"
            "Please try again. Output only the completed predicate"
            " (without markdown or comments)."
        )
        messages.append({"role": "assistant", "content": reply.text})
        messages.append({"role": "user", "content": follow_up})
        retry_reply = transport.complete(
            messages, request_id=request_id + "/retry1", key=key
        )
        retry_response = LLMResponse(
            raw_text=retry_reply.text,
            extracted_candidates=tuple(
                extract_candidates(retry_reply.text, req.task_kind)
            ),
            model=retry_reply.model,
            timestamp=_now(),
            token_usage=retry_reply.token_usage,
        )
        responses.append(retry_response)
        classified = [
            ClassifiedCandidate(c, classify(ground_truth, c, schema, cfg))
            for c in retry_response.extracted_candidates
        ]
        retry_count = 1
    return TaskRun(
        request=req,
        responses=responses,
        classified=classified,
        retry_count=retry_count,
    )
