"""Prompt assembly: activity/theme templating plus LLM keyword padding.

The final generation prompt is assembled from four parts, joined with
"; " exactly:

    <base>; <objects, comma-joined>; <characteristics, comma-joined>; <suffix>

The object and characteristic keywords come from a chat-completion LLM
asked for 4-5 of each; when the LLM is unreachable or returns something
unparseable, a deterministic local table keyed by activity word-stems
takes over and the result is flagged as a fallback. Expansion therefore
never fails for nonempty input.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .errors import EmptyPrompt

# Fixed quality terms appended to every expanded prompt.
PROMPT_SUFFIX = "highly detailed, intricate, sharp focus, smooth"

SYSTEM_PROMPT = (
    "Your task is to help the user create a Stable Diffusion prompt to generate "
    "an environment design. The user will specify an activity to occur in the "
    "environment and/or a theme for the space. You will provide a list of 4-5 "
    "types of objects to put in the environment and 4-5 distinct characteristics "
    "that describe the environment. The characteristics must be detailed and "
    "designed to generate visually appealing and cohesive results. "
    "Here is an example for a brainstorming activity:\n"
    "{\n"
    'Objects: "whiteboards, plants, chairs, small tables",\n'
    'Environment Characteristics: "bright, open space, natural light, '
    'refreshing atmosphere, varied textures"\n'
    "}"
)

INPUT_TEMPLATE = (
    "Provide a list of 4-5 types of objects to put in this environment and 4-5 "
    "characteristics that describe this environment: {base}. Return the output "
    "as comma-separated strings in JSON format: "
    "{{Objects: string, Environment Characteristics: string}}"
)


@dataclass(frozen=True)
class ExpandedPrompt:
    base: str
    objects: tuple[str, ...]
    characteristics: tuple[str, ...]
    assembled: str
    suffix: str = PROMPT_SUFFIX
    fallback: bool = False

    @staticmethod
    def build(
        base: str,
        objects: tuple[str, ...],
        characteristics: tuple[str, ...],
        fallback: bool = False,
    ) -> "ExpandedPrompt":
        assembled = "; ".join(
            [base, ", ".join(objects), ", ".join(characteristics), PROMPT_SUFFIX]
        )
        return ExpandedPrompt(
            base=base,
            objects=tuple(objects),
            characteristics=tuple(characteristics),
            assembled=assembled,
            fallback=fallback,
        )

    @staticmethod
    def plain(text: str) -> "ExpandedPrompt":
        """Unexpanded prompt (region edits): assembled is the text itself."""
        return ExpandedPrompt(base=text, objects=(), characteristics=(), assembled=text, suffix="")


@dataclass(frozen=True)
class LlmProfile:
    endpoint: str
    model: str = "gpt-3.5-turbo"
    system_prompt: str = SYSTEM_PROMPT
    temperature: float = 0.7
    timeout_s: float = 20.0
    api_key: Optional[str] = None


def _capitalize_first(text: str) -> str:
    return text[:1].upper() + text[1:]


def base_prompt(activity: str, theme: str) -> str:
    """Template the two user prompts into the base sentence.

    Theme is capitalized sentence-initially, activity lower-cased.
    """
    activity = activity.strip()
    theme = theme.strip()
    if not activity and not theme:
        raise EmptyPrompt("both activity and theme are empty")
    if theme and activity:
        return f"{_capitalize_first(theme)}-themed environment for a {activity.lower()}"
    if theme:
        return f"{_capitalize_first(theme)}-themed environment"
    return f"Environment for a {activity.lower()}"


class LlmClient(Protocol):
    def complete(self, system: str, user: str) -> str: ...


class HttpLlm:
    """Chat-completion-style HTTP client (system/user message pair)."""

    def __init__(self, profile: LlmProfile):
        self.profile = profile

    def complete(self, system: str, user: str) -> str:
        import httpx

        headers = {}
        if self.profile.api_key:
            headers["Authorization"] = f"Bearer {self.profile.api_key}"
        resp = httpx.post(
            self.profile.endpoint,
            json={
                "model": self.profile.model,
                "messages": [
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
                "temperature": self.profile.temperature,
            },
            headers=headers,
            timeout=self.profile.timeout_s,
        )
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


class MockLlm:
    """Canned responses keyed by the base prompt appearing in the user
    message; raises KeyError for unknown prompts (which triggers the
    caller's local fallback)."""

    def __init__(self):
        self._responses: dict[str, str] = {}

    def register(self, base: str, objects: str, characteristics: str):
        self._responses[base] = json.dumps(
            {"Objects": objects, "Environment Characteristics": characteristics}
        )

    def complete(self, system: str, user: str) -> str:
        for base, response in self._responses.items():
            if base in user:
                return response
        raise KeyError("no canned response matches the user message")


def default_mock_llm() -> MockLlm:
    """Mock pre-loaded with the documented keyword fixtures."""
    m = MockLlm()
    m.register(
        "Mushroom forest-themed environment for a brainstorming session",
        "Giant mushrooms, Fairy houses, Moss-covered rocks, Glowing mushrooms, Enchanted flowers",
        "Enchanting, Magical, Misty, Whimsical, Serene",
    )
    m.register(
        "Hologram-themed environment for a brainstorming session",
        "Interactive Touchscreens, Holographic Whiteboards, Floating Desks",
        "Dynamic Lighting Effects, Seamless Integration of Virtual and Physical Elements, "
        "Collaborative and Hi-tech Atmosphere",
    )
    m.register(
        "Environment for a brainstorming",
        "Whiteboards, Sketching desks, Pin boards, Stools, Plants",
        "Bright, Open, Creative, Natural light, Uncluttered",
    )
    m.register(
        "Library-themed environment",
        "Bookshelves, Reading tables, Armchairs, Desk lamps, Globes",
        "Quiet, Warm wood tones, Soft lighting, Scholarly, Inviting",
    )
    m.register(
        "Environment for a storytelling",
        "A stone castle, Banners, Candles, A storybook, Wooden benches",
        "Fairytale, Warm, Enchanted, Glowing, Timeless",
    )
    m.register(
        "Magic castle, ballroom-themed environment",
        "Chandeliers, Marble columns, Gilded mirrors, Velvet drapes, A grand staircase",
        "Opulent, Shimmering, Majestic, Candlelit, Romantic",
    )
    m.register(
        "Mushroom forest-themed environment",
        "Giant mushrooms, Fairy houses, Moss-covered rocks, Glowing mushrooms, Enchanted flowers",
        "Enchanting, Magical, Misty, Whimsical, Serene",
    )
    return m


# Deterministic offline keyword table, keyed by activity word-stems. This is
# the documented fixture set the engine falls back to when no LLM responds.
FALLBACK_TABLE: tuple[tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]], ...] = (
    (
        ("brainstorm",),
        ("whiteboards", "plants", "chairs", "small tables"),
        ("bright", "open space", "natural light", "refreshing atmosphere", "varied textures"),
    ),
    (
        ("study", "read", "lectur", "seminar", "class", "course"),
        ("bookshelves", "reading tables", "armchairs", "desk lamps"),
        ("quiet", "warm wood tones", "soft lighting", "orderly", "inviting"),
    ),
    (
        ("story", "tale"),
        ("storybooks", "cushions", "lanterns", "a reading nook"),
        ("cozy", "whimsical", "warm", "playful", "gentle lighting"),
    ),
    (
        ("game", "stream", "play"),
        ("monitors", "neon signs", "shelves", "beanbags"),
        ("energetic", "colorful", "dynamic lighting", "modern"),
    ),
)

FALLBACK_DEFAULT: tuple[tuple[str, ...], tuple[str, ...]] = (
    ("a large table", "chairs", "plants", "wall art"),
    ("welcoming", "balanced", "calm", "well lit"),
)


def fallback_keywords(activity: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    text = activity.lower()
    for stems, objects, characteristics in FALLBACK_TABLE:
        if any(stem in text for stem in stems):
            return objects, characteristics
    return FALLBACK_DEFAULT


_OBJECTS_RE = re.compile(r'"?Objects"?\s*:\s*"([^"]+)"', re.IGNORECASE)
_CHARACTERISTICS_RE = re.compile(
    r'"?Environment Characteristics"?\s*:\s*"([^"]+)"', re.IGNORECASE
)


def parse_keyword_response(text: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Parse the structured keyword block, tolerating surrounding prose,
    unquoted keys, and stray punctuation. Raises ValueError when either
    list is missing or empty."""
    objects: tuple[str, ...] = ()
    characteristics: tuple[str, ...] = ()

    brace = re.search(r"\{.*\}", text, re.DOTALL)
    if brace:
        try:
            doc = json.loads(brace.group(0))
            for key, value in doc.items():
                norm = key.strip().lower()
                if norm == "objects" and isinstance(value, str):
                    objects = _split_keywords(value)
                elif norm == "environment characteristics" and isinstance(value, str):
                    characteristics = _split_keywords(value)
        except json.JSONDecodeError:
            pass

    if not objects:
        m = _OBJECTS_RE.search(text)
        if m:
            objects = _split_keywords(m.group(1))
    if not characteristics:
        m = _CHARACTERISTICS_RE.search(text)
        if m:
            characteristics = _split_keywords(m.group(1))

    if not objects or not characteristics:
        raise ValueError("response is missing Objects or Environment Characteristics")
    return objects, characteristics


def _split_keywords(value: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(",") if part.strip())


class PromptStudio:
    """Expands activity/theme prompts, caching by (activity, theme).

    Pure apart from the LLM call; safe for concurrent expansion since the
    cache is only ever written with values derived from its key.
    """

    def __init__(self, llm: Optional[LlmClient] = None, system_prompt: str = SYSTEM_PROMPT):
        self.llm = llm
        self.system_prompt = system_prompt
        self._cache: dict[tuple[str, str], ExpandedPrompt] = {}
        self.last_error: Optional[str] = None

    def invalidate(self):
        self._cache.clear()

    def expand(self, activity: str, theme: str) -> ExpandedPrompt:
        key = (activity, theme)
        cached = self._cache.get(key)
        if cached is not None:
            return cached

        base = base_prompt(activity, theme)
        result = None
        if self.llm is not None:
            try:
                raw = self.llm.complete(self.system_prompt, INPUT_TEMPLATE.format(base=base))
                objects, characteristics = parse_keyword_response(raw)
                result = ExpandedPrompt.build(base, objects, characteristics)
            except Exception as exc:  # fallback guarantee: never surface
                self.last_error = f"llm expansion failed: {exc}"
        if result is None:
            objects, characteristics = fallback_keywords(activity)
            result = ExpandedPrompt.build(base, objects, characteristics, fallback=True)

        self._cache[key] = result
        return result
