"""Built-in synthetic task suite.

Ten seeded templates covering every action category plus the chat and
termination paths. Each template is a deterministic function of
(task id, seed): `instantiate` derives the goal and the validation target,
`setup` builds the pages, and `validate` reads page/chat state only.

Oracle payloads (the validation targets) are exposed on the task instance for
tests and the scripted solver; they never appear in observations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import commands as cmd
from ..backend import Backend, Node, PageModel
from ..chat import ChatMessage
from ..rng import DetRng
from .registry import TaskSpec, register_task, is_registered

BUTTON_LABELS = ["Submit", "Archive", "Publish", "Refresh", "Export", "Import", "Restore", "Preview"]
LINK_LABELS = ["Pricing", "Careers", "Support", "Downloads", "Changelog", "Security", "Status"]
FRUITS = ["apple", "banana", "cherry", "grape", "kiwi", "mango", "orange", "peach", "plum"]
PHRASES = ["quiet falcon", "amber valley", "crimson harbor", "silver meadow", "violet summit", "golden prairie"]
CHECKBOX_LABELS = ["Alpha", "Bravo", "Charlie", "Delta", "Echo", "Foxtrot"]
USERS = ["bob", "alice", "carol", "dave", "erin"]
TOPPINGS = ["mushrooms", "olives", "pineapple", "basil", "anchovies"]
TEAM_NAMES = ["Ada Tran", "Luis Ortega", "Mina Park", "Noor Haddad", "Petra Kovacs"]
LETTERS = "ABCDEFGHJKMNPQRSTUVWXYZ"


@dataclass(frozen=True)
class TaskInstance:
    spec_id: str
    seed: int
    goal: str
    oracle: dict = field(default_factory=dict)


def _code(rng: DetRng) -> str:
    letters = "".join(rng.choice(LETTERS) for _ in range(3))
    return f"{letters}-{rng.randint(100, 999)}"


def _last_message(chat: list[ChatMessage]) -> ChatMessage | None:
    return chat[-1] if chat else None


class SyntheticTask:
    """Base class: one instance per episode, seeded via a counter-based RNG."""

    template = ""

    def __init__(self, task_id: str):
        self.task_id = task_id
        self.instance: TaskInstance | None = None

    def rng(self, seed: int, stream: str = "") -> DetRng:
        return DetRng(f"{self.task_id}:{seed}:{stream}")

    def instantiate(self, seed: int) -> TaskInstance:
        raise NotImplementedError

    def setup(self, backend: Backend, seed: int):
        self.instance = self.instantiate(seed)
        self._build(backend, self.instance)
        return self.instance.goal

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        raise NotImplementedError

    def validate(self, backend: Backend, chat: list[ChatMessage]):
        raise NotImplementedError

    def _url(self, seed: int, suffix: str = "") -> str:
        base = f"local://{self.task_id}/{seed}"
        return f"{base}/{suffix}" if suffix else base


def _mark_clicked(backend: Backend, node: Node) -> None:
    node.attributes["data-clicked"] = "true"


class ClickButtonTask(SyntheticTask):
    template = "click-button"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        labels = rng.sample(BUTTON_LABELS, rng.randint(3, 5))
        target = rng.choice(labels)
        return TaskInstance(
            self.task_id, seed,
            goal=f"Click the button labeled '{target}'.",
            oracle={"target": target, "labels": labels},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build(url: str) -> PageModel:
            toolbar = Node("div")
            for label in inst.oracle["labels"]:
                toolbar.append(Node("button", text=label, handlers={"on_click": _mark_clicked}))
            root = Node("body", children=[Node("h1", text="Task panel"), toolbar])
            return PageModel(root, url=url, title="Task panel")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        for node in backend.page.root.walk():
            if node.tag == "button" and "data-clicked" in node.attributes:
                ok = node.text == self.instance.oracle["target"]
                return (1.0, True, "Nice click.") if ok else (0.0, True, "")
        return 0.0, False, None


class ClickLinkTask(SyntheticTask):
    template = "click-link"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        labels = rng.sample(LINK_LABELS, rng.randint(3, 5))
        target = rng.choice(labels)
        return TaskInstance(
            self.task_id, seed,
            goal=f"Open the link '{target}'.",
            oracle={"target": target, "labels": labels},
        )

    def _dest(self, seed: int, label: str) -> str:
        return self._url(seed, f"dest/{label.lower()}")

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build_index(url: str) -> PageModel:
            nav = Node("nav")
            for label in inst.oracle["labels"]:
                nav.append(Node("a", {"href": self._dest(inst.seed, label)}, text=label))
            root = Node("body", children=[Node("h1", text="Site map"), nav])
            return PageModel(root, url=url, title="Site map")

        def make_dest(label: str):
            def build(url: str) -> PageModel:
                root = Node("body", children=[Node("h1", text=f"{label} page")])
                return PageModel(root, url=url, title=f"{label} page")

            return build

        backend.register_page(self._url(inst.seed), build_index)
        for label in inst.oracle["labels"]:
            backend.register_page(self._dest(inst.seed, label), make_dest(label))
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        url = backend.page.url
        if url == self._dest(self.instance.seed, self.instance.oracle["target"]):
            return 1.0, True, "You found it."
        if any(url == self._dest(self.instance.seed, label) for label in self.instance.oracle["labels"]):
            return 0.0, True, ""
        return 0.0, False, None


class ChooseListTask(SyntheticTask):
    template = "choose-list"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        options = rng.sample(FRUITS, rng.randint(4, 6))
        target = rng.choice(options)
        return TaskInstance(
            self.task_id, seed,
            goal=f"Select '{target}' from the list.",
            oracle={"target": target, "options": options},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build(url: str) -> PageModel:
            select = Node("select", {"aria-label": "choices"})
            for option in inst.oracle["options"]:
                select.append(Node("option", {"value": option}, text=option.capitalize()))
            root = Node("body", children=[Node("h1", text="Pick one"), select])
            return PageModel(root, url=url, title="Pick one")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        for node in backend.page.root.walk():
            if node.tag == "select":
                if node.attributes.get("value") == self.instance.oracle["target"]:
                    return 1.0, True, "Good choice."
        return 0.0, False, None


class EnterTextTask(SyntheticTask):
    template = "enter-text"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        phrase = rng.choice(PHRASES)
        return TaskInstance(
            self.task_id, seed,
            goal=f"Enter '{phrase}' into the text field.",
            oracle={"phrase": phrase},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build(url: str) -> PageModel:
            root = Node("body", children=[
                Node("h1", text="Transcription"),
                Node("input", {"type": "text", "aria-label": "answer", "value": ""}),
            ])
            return PageModel(root, url=url, title="Transcription")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        for node in backend.page.root.walk():
            if node.tag == "input" and node.attributes.get("value") == self.instance.oracle["phrase"]:
                return 1.0, True, "Saved."
        return 0.0, False, None


class EnterDateTask(SyntheticTask):
    template = "enter-date"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        date = f"{rng.randint(2020, 2026):04d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
        return TaskInstance(
            self.task_id, seed,
            goal=f"Set the date field to {date}.",
            oracle={"date": date},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build(url: str) -> PageModel:
            root = Node("body", children=[
                Node("h1", text="Schedule"),
                Node("input", {"type": "date", "aria-label": "date", "value": ""}),
            ])
            return PageModel(root, url=url, title="Schedule")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        for node in backend.page.root.walk():
            if node.tag == "input" and node.attributes.get("value") == self.instance.oracle["date"]:
                return 1.0, True, "Scheduled."
        return 0.0, False, None


class NumberCheckboxesTask(SyntheticTask):
    template = "number-checkboxes"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        labels = rng.sample(CHECKBOX_LABELS, rng.randint(4, 6))
        targets = sorted(rng.sample(labels, rng.randint(1, 3)))
        return TaskInstance(
            self.task_id, seed,
            goal=f"Check exactly these options: {', '.join(targets)}.",
            oracle={"targets": targets, "labels": labels},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build(url: str) -> PageModel:
            form = Node("form")
            for label in inst.oracle["labels"]:
                form.append(Node("input", {"type": "checkbox", "aria-label": label}))
            root = Node("body", children=[Node("h1", text="Preferences"), form])
            return PageModel(root, url=url, title="Preferences")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        checked = {
            node.attributes.get("aria-label", "")
            for node in backend.page.root.walk()
            if node.tag == "input" and node.attributes.get("type") == "checkbox" and "checked" in node.attributes
        }
        if checked == set(self.instance.oracle["targets"]):
            return 1.0, True, "Exactly right."
        return 0.0, False, None


class LoginFormTask(SyntheticTask):
    template = "login-form"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        user = rng.choice(USERS)
        password = f"{rng.choice(PHRASES).replace(' ', '-')}-{rng.randint(10, 99)}"
        return TaskInstance(
            self.task_id, seed,
            goal=f"Log in as user '{user}' with password '{password}'.",
            oracle={"user": user, "password": password},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        user, password = inst.oracle["user"], inst.oracle["password"]

        def build(url: str) -> PageModel:
            username = Node("input", {"type": "text", "aria-label": "username", "value": ""})
            secret = Node("input", {"type": "password", "aria-label": "password", "value": ""})
            status = Node("p", {"data-role": "status"}, text="Signed out.")

            def submit(_backend: Backend, _node: Node) -> None:
                ok = username.attributes.get("value") == user and secret.attributes.get("value") == password
                status.text = f"Welcome, {user}!" if ok else "Invalid credentials."

            button = Node("button", text="Log in", handlers={"on_click": submit})
            root = Node("body", children=[Node("h1", text="Sign in"), username, secret, button, status])
            return PageModel(root, url=url, title="Sign in")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        for node in backend.page.root.walk():
            if node.attributes.get("data-role") == "status":
                if node.text == f"Welcome, {self.instance.oracle['user']}!":
                    return 1.0, True, "You are in."
        return 0.0, False, None


class MultiTabCopyTask(SyntheticTask):
    template = "multi-tab-copy"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        return TaskInstance(
            self.task_id, seed,
            goal="Copy the code shown on the first tab into the input field on the second tab.",
            oracle={"code": _code(rng)},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        code = inst.oracle["code"]
        code_url = self._url(inst.seed, "code")
        form_url = self._url(inst.seed, "form")

        def build_code(url: str) -> PageModel:
            root = Node("body", children=[
                Node("h1", text="Your access code"),
                Node("p", text=f"Code: {code}"),
            ])
            return PageModel(root, url=url, title="Access code")

        def build_form(url: str) -> PageModel:
            root = Node("body", children=[
                Node("h1", text="Code entry"),
                Node("input", {"type": "text", "aria-label": "code", "value": ""}),
            ])
            return PageModel(root, url=url, title="Code entry")

        backend.register_page(code_url, build_code)
        backend.register_page(form_url, build_form)
        backend.goto(code_url)
        backend.execute(cmd.NewTab())
        backend.goto(form_url)
        backend.execute(cmd.TabFocus(index=0))

    def validate(self, backend: Backend, chat):
        pages = backend.tabs.pages
        if len(pages) > 1:
            for node in pages[1].root.walk():
                if node.tag == "input" and node.attributes.get("value") == self.instance.oracle["code"]:
                    return 1.0, True, "Code transferred."
        return 0.0, False, None


class SearchAndAnswerTask(SyntheticTask):
    template = "search-and-answer"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        return TaskInstance(
            self.task_id, seed,
            goal="Find the launch code and send it to the user.",
            oracle={"code": _code(rng)},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        code = inst.oracle["code"]
        index_url = self._url(inst.seed, "index")
        answer_url = self._url(inst.seed, "briefing")

        def build_index(url: str) -> PageModel:
            root = Node("body", children=[
                Node("h1", text="Mission desk"),
                Node("p", text="The details you need are one link away."),
                Node("a", {"href": answer_url}, text="Launch details"),
            ])
            return PageModel(root, url=url, title="Mission desk")

        def build_answer(url: str) -> PageModel:
            root = Node("body", children=[
                Node("h1", text="Mission briefing"),
                Node("p", text=f"The launch code is {code}."),
            ])
            return PageModel(root, url=url, title="Mission briefing")

        backend.register_page(index_url, build_index)
        backend.register_page(answer_url, build_answer)
        backend.goto(index_url)

    def validate(self, backend: Backend, chat):
        last = _last_message(chat)
        if last is not None and last.role == "assistant":
            if self.instance.oracle["code"] in last.text_content():
                return 1.0, True, "That's correct"
            return 0.0, True, ""
        return 0.0, False, None


class InfeasibleRequestTask(SyntheticTask):
    template = "infeasible-request"

    def instantiate(self, seed: int) -> TaskInstance:
        rng = self.rng(seed)
        topping = rng.choice(TOPPINGS)
        return TaskInstance(
            self.task_id, seed,
            goal=f"Order a pizza with extra {topping} using this page.",
            oracle={"topping": topping},
        )

    def _build(self, backend: Backend, inst: TaskInstance) -> None:
        def build(url: str) -> PageModel:
            team = Node("ul")
            for name in TEAM_NAMES:
                team.append(Node("li", text=name))
            root = Node("body", children=[Node("h1", text="Team directory"), team])
            return PageModel(root, url=url, title="Team directory")

        backend.register_page(self._url(inst.seed), build)
        backend.goto(self._url(inst.seed))

    def validate(self, backend: Backend, chat):
        last = _last_message(chat)
        if last is not None and last.role == "infeasible":
            return 1.0, True, "Understood, thank you for checking."
        if last is not None and last.role == "assistant":
            return 0.0, True, ""
        return 0.0, False, None


TEMPLATES: dict[str, type[SyntheticTask]] = {
    t.template: t
    for t in (
        ClickButtonTask,
        ClickLinkTask,
        ChooseListTask,
        EnterTextTask,
        EnterDateTask,
        NumberCheckboxesTask,
        LoginFormTask,
        MultiTabCopyTask,
        SearchAndAnswerTask,
        InfeasibleRequestTask,
    )
}

CATEGORY_BY_TEMPLATE = {
    "click-button": "pointing",
    "click-link": "pointing",
    "choose-list": "selection",
    "number-checkboxes": "selection",
    "enter-text": "forms",
    "enter-date": "forms",
    "login-form": "forms",
    "multi-tab-copy": "tabs",
    "search-and-answer": "navigation",
    "infeasible-request": "chat",
}

SYNTHETIC_TASK_IDS = [f"synth.{template}" for template in TEMPLATES]

WIDE_TASK_COUNT = 125


def _spec_for(task_id: str, template: str) -> TaskSpec:
    return TaskSpec(
        id=task_id,
        template=template,
        seed_diversity="high",
        default_max_steps=10,
        metadata={"category": CATEGORY_BY_TEMPLATE[template], "split": "test"},
    )


def ensure_synthetic_registered() -> None:
    for template, cls in TEMPLATES.items():
        task_id = f"synth.{template}"
        if not is_registered(task_id):
            register_task(task_id, cls, _spec_for(task_id, template))


def ensure_wide_registered(count: int = WIDE_TASK_COUNT) -> None:
    """Register the wide benchmark's task aliases: the synthetic templates
    cycled over `count` distinct ids, each with its own seed stream."""
    templates = list(TEMPLATES.items())
    for i in range(count):
        template, cls = templates[i % len(templates)]
        task_id = f"wide.t{i:03d}"
        if not is_registered(task_id):
            register_task(task_id, cls, _spec_for(task_id, template))
