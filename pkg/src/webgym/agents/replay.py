"""Playback model for replay: re-emits the recorded think/action pairs so the
reference agent reproduces its original prompts byte-for-byte."""

from __future__ import annotations

from typing import Sequence

from ..llm import AbstractChatModel, Completion, Usage


class PlaybackModel(AbstractChatModel):
    def __init__(self, steps: list[tuple[str, str]]):
        """steps: (think, action_text) per recorded step, in order."""
        self._steps = list(steps)
        self._cursor = 0

    def __call__(self, messages: Sequence) -> Completion:
        if self._cursor >= len(self._steps):
            raise IndexError("playback exhausted: more steps requested than recorded")
        think, action = self._steps[self._cursor]
        self._cursor += 1
        text = f"<think>\n{think}\n</think>\n\n<action>\n{action}\n</action>"
        return Completion(text=text, usage=Usage(estimated=True))
