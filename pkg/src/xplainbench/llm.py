"""Prompt rendering, chat-completions client, and offline replay fixtures.

The two task prompts are byte-stable release artifacts; a format suffix asks
the endpoint to answer with a fenced JSON pipeline spec instead of source
code, so replies stay auditable and executable without running generated
code. Replay transports never touch the network.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field

from .pipeline import PIPELINE_SCHEMA, SpecValidationError, parse_spec

API_KEY_ENV = "XPLAINBENCH_API_KEY"

BINARY_PROMPT_TEMPLATE = """\
chat I have a csv with 200k rows the rows are analyzed
below heart_rate,yawning,looks_straight,eyes_closed,alert
heart_rate = human heart rate (positive integer
usually no more than 160)
yawning = boolean value that indicates if the person is
yawning in each row or not 0 means yes 1 means no
looks_straight = boolean value that indicates if the
person is looking straight ahead or not
, again 0 means no 1 means
yes eyes_closed = boolean that indicates
if the eyes of the
person are closed 0 means yes 1 means no
I want you to train and evaluate (split the dataset
randomly) an {random forest; xgboost; mlp; lstm} model.
for the evaluation I want the accuracy, the precision,
the recall and F1 score that the model achieved"""

MULTICLASS_PROMPT_TEMPLATE = """\
I have a CSV file called yeast.csv.
It has 8 columns and 1484 rows, with the following
characteristics Instances: 1,484 yeast proteins (rows)
Features: 8 numeric features (attributes):
mcg: McGeoch's method for signal sequence recognition
gvh: von Heijne's method
alm: Score for the presence of an Aliphatic region
mit: Score for a mitochondrial targeting sequence
erl, pox, vac, etc.
Label (target): Protein localization site (e.g., CYT,
NUC, MIT, ME1, etc.)
Task: Multi-class classification (predict
protein location from numeric features)
The features are numeric, and the last
column is the target (protein localization site). I want
to build a classification model using
{Random Forest; XGBoost; MLP; LSTM} to predict the
target. Can you help
me with the code to train and evaluate the model?
for the evaluation I want the accuracy, the precision,
the recall and F1 score that the model achieved"""

BINARY_PLACEHOLDER = "{random forest; xgboost; mlp; lstm}"
MULTICLASS_PLACEHOLDER = "{Random Forest; XGBoost; MLP; LSTM}"

FAMILY_DISPLAY = {
    "binary": {
        "random_forest": "random forest",
        "gbt": "xgboost",
        "mlp": "mlp",
        "lstm": "lstm",
    },
    "multiclass": {
        "random_forest": "Random Forest",
        "gbt": "XGBoost",
        "mlp": "MLP",
        "lstm": "LSTM",
    },
}

SPEC_FORMAT_SUFFIX = (
    "\n\nAnswer with exactly one fenced ```json code block containing a"
    " pipeline spec document (no source code, no prose inside the block)"
    " that conforms to the following JSON schema:\n\n```\n{schema}\n```\n"
)


class LlmError(RuntimeError):
    pass


class TransportError(LlmError):
    pass


class ExtractionError(LlmError):
    """No fenced code block in a reply; carries the raw response."""

    def __init__(self, message: str, raw_response: str):
        super().__init__(message)
        self.raw_response = raw_response


class FixtureError(LlmError):
    pass


def render_prompt(task: str, family: str) -> str:
    """Deterministic prompt text for a (task, family) pair. The lstm family
    renders but is rejected later by the spec executor."""
    if task not in FAMILY_DISPLAY:
        raise LlmError(f"unknown task {task!r}; expected 'binary' or 'multiclass'")
    if family not in FAMILY_DISPLAY[task]:
        raise LlmError(f"unknown family {family!r}")
    if task == "binary":
        body = BINARY_PROMPT_TEMPLATE.replace(
            BINARY_PLACEHOLDER, FAMILY_DISPLAY[task][family]
        )
    else:
        body = MULTICLASS_PROMPT_TEMPLATE.replace(
            MULTICLASS_PLACEHOLDER, FAMILY_DISPLAY[task][family]
        )
    suffix = SPEC_FORMAT_SUFFIX.format(
        schema=json.dumps(PIPELINE_SCHEMA, indent=2, sort_keys=True)
    )
    return body + suffix


_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def extract_fenced_block(text: str) -> str:
    """The first fenced code block's contents; surrounding prose is ignored."""
    match = _FENCE_RE.search(text)
    if match is None:
        raise ExtractionError("no fenced code block in response", text)
    return match.group(1)


@dataclass
class ChatExchange:
    endpoint: str
    model: str
    temperature: float
    messages: list[dict]
    response_text: str
    elapsed: float = 0.0
    retry_count: int = 0

    def as_dict(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "model": self.model,
            "temperature": self.temperature,
            "messages": self.messages,
            "response_text": self.response_text,
            "elapsed": self.elapsed,
            "retry_count": self.retry_count,
        }


def request_hash(model: str, temperature: float, messages: list[dict]) -> str:
    body = json.dumps(
        {"model": model, "temperature": temperature, "messages": messages},
        sort_keys=True,
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class HttpChatTransport:
    """De-facto chat-completions wire shape: POST {model, temperature,
    messages}; reply {choices: [{message: {content}}]}. Credentials come from
    the XPLAINBENCH_API_KEY environment variable and are never persisted."""

    def __init__(self, endpoint: str, model: str, timeout: float = 120.0,
                 transport_retries: int = 3, backoff: float = 1.0):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.transport_retries = transport_retries
        self.backoff = backoff

    def send(self, messages: list[dict], temperature: float) -> str:
        import requests  # deferred so replay mode never needs it

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(API_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {"model": self.model, "temperature": temperature,
                "messages": messages}
        last = None
        for attempt in range(self.transport_retries):
            try:
                resp = requests.post(
                    self.endpoint, json=body, headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last = exc
                if attempt + 1 < self.transport_retries:
                    time.sleep(self.backoff * 2**attempt)
        raise TransportError(f"request to {self.endpoint} failed: {last}")


class ReplayTransport:
    """Serves canned responses keyed by request hash; no network access."""

    def __init__(self, fixture: "Fixture", strict: bool = True):
        self.fixture = fixture
        self.strict = strict
        self.endpoint = f"replay:{fixture.source or 'memory'}"
        self.model = fixture.model

    def send(self, messages: list[dict], temperature: float) -> str:
        key = request_hash(self.model, temperature, messages)
        if key not in self.fixture.entries:
            if self.strict:
                raise FixtureError(
                    f"no fixture entry for request hash {key} "
                    f"in {self.fixture.source or 'memory fixture'}"
                )
            return ""
        return self.fixture.entries[key]


@dataclass
class Fixture:
    """Recorded exchanges: request hash -> raw response text."""

    model: str = "replay"
    entries: dict = field(default_factory=dict)
    source: str | None = None

    def record(self, exchange: ChatExchange) -> None:
        key = request_hash(exchange.model, exchange.temperature, exchange.messages)
        self.entries[key] = exchange.response_text

    def save(self, path) -> None:
        doc = {"version": 1, "model": self.model, "entries": self.entries}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Fixture":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise FixtureError(f"cannot load fixture {path}: {exc}") from exc
        if doc.get("version") != 1:
            raise FixtureError(f"{path}: unsupported fixture version")
        return cls(model=doc.get("model", "replay"), entries=doc["entries"],
                   source=str(path))


def request_pipeline(transport, prompt: str, temperature: float = 1.0,
                     max_retries: int = 2):
    """Query the transport for a pipeline spec; on an invalid reply, re-prompt
    with the full validation error list appended, up to max_retries times.

    Returns (spec, exchanges). Raises LlmError with the raw response attached
    when no valid spec is obtained.
    """
    messages = [{"role": "user", "content": prompt}]
    exchanges = []
    last_error = None
    for attempt in range(max_retries + 1):
        t0 = time.perf_counter()
        response = transport.send(messages, temperature)
        exchanges.append(
            ChatExchange(
                endpoint=transport.endpoint,
                model=transport.model,
                temperature=temperature,
                messages=json.loads(json.dumps(messages)),
                response_text=response,
                elapsed=time.perf_counter() - t0,
                retry_count=attempt,
            )
        )
        try:
            block = extract_fenced_block(response)
            return parse_spec(block), exchanges
        except ExtractionError as exc:
            last_error = str(exc)
            feedback = (
                "Your reply contained no fenced code block. Answer with "
                "exactly one fenced ```json block containing the spec."
            )
        except SpecValidationError as exc:
            last_error = str(exc)
            problems = "\n".join(f"- {path}: {msg}" for path, msg in exc.problems)
            feedback = (
                "The spec in your reply failed validation:\n"
                f"{problems}\nAnswer again with a corrected fenced ```json block."
            )
        messages.append({"role": "assistant", "content": response})
        messages.append({"role": "user", "content": feedback})
    err = LlmError(
        f"no valid spec after {max_retries} retries; last error: {last_error}"
    )
    err.raw_response = exchanges[-1].response_text
    raise err
