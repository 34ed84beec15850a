"""Chat transcript primitives shared by the environment, agents, and tasks."""

from __future__ import annotations

from dataclasses import dataclass, field

CHAT_ROLES = ("user", "assistant", "infeasible", "user_feedback")


@dataclass(frozen=True)
class TextPart:
    text: str
    kind: str = "text"


@dataclass(frozen=True)
class ImagePart:
    """Opaque reference to an image resolved by the trace store; no pixels here."""

    ref: str
    kind: str = "image"


ContentPart = TextPart | ImagePart


@dataclass
class ChatMessage:
    role: str
    parts: list[ContentPart] = field(default_factory=list)

    def __post_init__(self):
        if self.role not in CHAT_ROLES:
            raise ValueError(f"unknown chat role {self.role!r}")
        if not self.parts:
            raise ValueError("chat message must carry at least one content part")
        if self.role == "infeasible":
            if len(self.parts) != 1 or not isinstance(self.parts[0], TextPart):
                raise ValueError("infeasible messages carry exactly one text part")

    @classmethod
    def text(cls, role: str, text: str) -> "ChatMessage":
        return cls(role=role, parts=[TextPart(text)])

    def text_content(self) -> str:
        """Concatenated text parts; image parts are skipped."""
        return "".join(p.text for p in self.parts if isinstance(p, TextPart))

    def to_dict(self) -> dict:
        parts = []
        for p in self.parts:
            if isinstance(p, TextPart):
                parts.append({"kind": "text", "text": p.text})
            else:
                parts.append({"kind": "image", "ref": p.ref})
        return {"role": self.role, "parts": parts}

    @classmethod
    def from_dict(cls, d: dict) -> "ChatMessage":
        parts: list[ContentPart] = []
        for p in d["parts"]:
            if p["kind"] == "text":
                parts.append(TextPart(p["text"]))
            else:
                parts.append(ImagePart(p["ref"]))
        return cls(role=d["role"], parts=parts)


def goal_parts_from(goal) -> list[ContentPart]:
    """Normalize a task goal (plain string or part list) into content parts."""
    if isinstance(goal, str):
        return [TextPart(goal)]
    out: list[ContentPart] = []
    for p in goal:
        if isinstance(p, (TextPart, ImagePart)):
            out.append(p)
        elif isinstance(p, dict) and p.get("kind") == "image":
            out.append(ImagePart(p["ref"]))
        elif isinstance(p, dict):
            out.append(TextPart(p["text"]))
        else:
            raise TypeError(f"unsupported goal part {p!r}")
    return out


def goal_text(parts) -> str:
    return "\n".join(p.text for p in parts if isinstance(p, TextPart))
