"""Scripted models for the built-in suite.

``OracleModelArgs`` yields a model that solves every synthetic template from
the prompt text alone (goal, AXTree lines, and its own think/action history),
which makes it a constructive witness that each task instance is solvable
within its step budget. ``RandomModelArgs`` yields a deterministic
uniform-random baseline keyed by the prompt bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from ..llm import AbstractChatModel, Completion, ModelArgs, Usage, register_model_kind
from ..rng import DetRng
from ..tokens import count_tokens


def _render_messages(messages: Sequence) -> str:
    parts = []
    for m in messages:
        content = m["content"] if isinstance(m, dict) else m.text_content()
        parts.append(content)
    return "\n".join(parts)


def _answer(think: str, action: str) -> str:
    return f"<think>\n{think}\n</think>\n\n<action>\n{action}\n</action>"


def _goal_of(prompt: str) -> str:
    match = re.search(r"## Goal:\n\n(.+)", prompt)
    return match.group(1).strip() if match else ""


def _axtree_of(prompt: str) -> str:
    match = re.search(r"## AXTree:\nNote:[^\n]*\n\n(.*?)(?:\n\n#|\Z)", prompt, re.DOTALL)
    return match.group(1) if match else ""


def _history_of(prompt: str) -> tuple[list[str], list[str]]:
    """(actions, thinks) from the history section only."""
    start = prompt.find("# History of interaction with the task:")
    end = prompt.find("# Action space:")
    if start == -1 or end == -1:
        return [], []
    section = prompt[start:end]
    actions = [a.strip() for a in re.findall(r"<action>\n(.*?)\n</action>", section, re.DOTALL)]
    thinks = [t.strip() for t in re.findall(r"<think>\n(.*?)\n</think>", section, re.DOTALL)]
    return actions, thinks


def _find_bid(axtree: str, role: str, name: str) -> str | None:
    match = re.search(rf"\[(\w+)\] {re.escape(role)} '{re.escape(name)}'", axtree)
    return match.group(1) if match else None


def _quoted(text: str, pattern: str) -> str | None:
    match = re.search(pattern, text)
    return match.group(1) if match else None


class OracleModel(AbstractChatModel):
    """Solves the synthetic templates; emits one action per call.

    Relies on the reference agent's default flags: AXTree in the prompt plus
    action and think history (the multi-tab template parks the code it read in
    its think text and retrieves it after switching tabs).
    """

    def __call__(self, messages: Sequence) -> Completion:
        prompt = _render_messages(messages)
        goal = _goal_of(prompt)
        axtree = _axtree_of(prompt)
        actions, thinks = _history_of(prompt)
        think, action = self._solve(goal, axtree, actions, thinks)
        text = _answer(think, action)
        usage = Usage(
            prompt_tokens=count_tokens(prompt),
            completion_tokens=count_tokens(text),
            estimated=True,
        )
        return Completion(text=text, usage=usage)

    def _solve(self, goal, axtree, actions, thinks) -> tuple[str, str]:
        if goal.startswith("Click the button labeled '"):
            target = _quoted(goal, r"labeled '([^']+)'")
            bid = _find_bid(axtree, "button", target)
            if bid:
                return f"The button '{target}' has bid {bid}.", f"click('{bid}')"

        if goal.startswith("Open the link '"):
            target = _quoted(goal, r"link '([^']+)'")
            bid = _find_bid(axtree, "link", target)
            if bid:
                return f"The link '{target}' has bid {bid}.", f"click('{bid}')"

        if goal.startswith("Select '"):
            target = _quoted(goal, r"Select '([^']+)'")
            match = re.search(r"\[(\w+)\] combobox", axtree)
            if match:
                return f"Selecting '{target}' in the list.", f"select_option('{match.group(1)}', '{target}')"

        if goal.startswith("Enter '"):
            phrase = _quoted(goal, r"Enter '(.+)' into")
            match = re.search(r"\[(\w+)\] textbox", axtree)
            if match:
                return "Filling the text field.", f"fill('{match.group(1)}', '{phrase}')"

        if goal.startswith("Set the date field to "):
            date = goal[len("Set the date field to "):].rstrip(".")
            match = re.search(r"\[(\w+)\] textbox", axtree)
            if match:
                return "Filling the date field.", f"fill('{match.group(1)}', '{date}')"

        if goal.startswith("Check exactly these options: "):
            targets = goal[len("Check exactly these options: "):].rstrip(".").split(", ")
            clicked = set(re.findall(r"click\('(\w+)'\)", "\n".join(actions)))
            for target in targets:
                bid = _find_bid(axtree, "checkbox", target)
                if bid and bid not in clicked:
                    return f"Checking '{target}'.", f"click('{bid}')"

        if goal.startswith("Log in as user '"):
            user = _quoted(goal, r"user '([^']+)'")
            password = _quoted(goal, r"password '([^']+)'")
            fills = [a for a in actions if a.startswith("fill(")]
            if not fills:
                bid = _find_bid(axtree, "textbox", "username")
                if bid:
                    return "Entering the username.", f"fill('{bid}', '{user}')"
            elif len(fills) == 1:
                bid = _find_bid(axtree, "textbox", "password")
                if bid:
                    return "Entering the password.", f"fill('{bid}', '{password}')"
            else:
                bid = _find_bid(axtree, "button", "Log in")
                if bid:
                    return "Submitting the form.", f"click('{bid}')"

        if goal.startswith("Copy the code shown on the first tab"):
            code_here = _quoted(axtree, r"StaticText 'Code: ([A-Z]+-\d+)'")
            if code_here and "tab_focus(1)" not in actions:
                return f"The code on the first tab is {code_here}.", "tab_focus(1)"
            code = None
            for think in reversed(thinks):
                code = code or _quoted(think, r"code on the first tab is ([A-Z]+-\d+)")
            match = re.search(r"\[(\w+)\] textbox 'code'", axtree)
            if code and match:
                return "Entering the code I noted earlier.", f"fill('{match.group(1)}', '{code}')"

        if goal.startswith("Find the launch code"):
            code = _quoted(axtree, r"launch code is ([A-Z]+-\d+)")
            if code:
                return "The briefing shows the code.", f"send_msg_to_user('The launch code is {code}.')"
            bid = _find_bid(axtree, "link", "Launch details")
            if bid:
                return "Following the details link.", f"click('{bid}')"

        if goal.startswith("Order a pizza"):
            return (
                "This page only lists team members; there is nothing to order food with.",
                "report_infeasible('This page has no way to order food; it only lists team members.')",
            )

        return "No rule applies; waiting one step.", "noop()"


@dataclass
class OracleModelArgs(ModelArgs):
    model_name: str = "oracle"

    def make_model(self) -> OracleModel:
        return OracleModel()


_RANDOM_WORDS = ["blue", "seven", "apple", "north", "delta", "omega"]


class RandomModel(AbstractChatModel):
    """Uniform-random baseline. The RNG is keyed by the prompt bytes, so the
    same prompt always draws the same action regardless of scheduling."""

    def __call__(self, messages: Sequence) -> Completion:
        prompt = _render_messages(messages)
        rng = DetRng(f"random-model:{prompt}")
        axtree = _axtree_of(prompt)
        bids = re.findall(r"\[(\w+)\]", axtree) or ["0"]
        bid = rng.choice(bids)
        word = rng.choice(_RANDOM_WORDS)
        candidates = [
            f"click('{bid}')",
            f"fill('{bid}', '{word}')",
            f"select_option('{bid}', '{word}')",
            f"press('{bid}', 'Enter')",
            f"scroll(0, {rng.randint(-200, 200)})",
            f"send_msg_to_user('{word}')",
            "report_infeasible('I cannot do this.')",
            "noop()",
            "go_back()",
        ]
        action = rng.choice(candidates)
        text = _answer("Trying something at random.", action)
        usage = Usage(
            prompt_tokens=count_tokens(prompt),
            completion_tokens=count_tokens(text),
            estimated=True,
        )
        return Completion(text=text, usage=usage)


@dataclass
class RandomModelArgs(ModelArgs):
    model_name: str = "random"

    def make_model(self) -> RandomModel:
        return RandomModel()


register_model_kind("oracle", OracleModelArgs)
register_model_kind("random", RandomModelArgs)
