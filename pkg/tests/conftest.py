import pytest

from webgym.backend import Box, Node, PageModel
from webgym.chat import ImagePart, TextPart
from webgym.tasks import ensure_synthetic_registered, ensure_wide_registered, is_registered, register_task

ensure_synthetic_registered()
ensure_wide_registered()


def vote_widget_root() -> Node:
    """The three-control vote widget used for the flattener goldens: explicit
    bids with gaps filled by hidden elements, as on a real page."""
    form = Node("form", {"action": "/sv/18838", "bid": "167", "class": "vote"})
    form.append(Node("div", {"bid": "168", "hidden": ""}))
    upvote = Node("button", {"bid": "169", "title": "Upvote", "type": "submit", "value": "1"})
    for bid in range(170, 174):
        upvote.append(Node("span", {"bid": str(bid), "hidden": ""}))
    form.append(upvote)
    form.append(Node("span", {"bid": "174", "class": "vote__net-score", "data-vote-target": "score"}, text="17705"))
    for bid in range(175, 179):
        form.append(Node("div", {"bid": str(bid), "hidden": ""}))
    downvote = Node("button", {"bid": "179", "title": "Downvote", "type": "submit", "value": "-1"})
    for bid in range(180, 184):
        downvote.append(Node("span", {"bid": str(bid), "hidden": ""}))
    form.append(downvote)
    return form


def vote_widget_page(url: str = "local://vote-widget") -> PageModel:
    return PageModel(vote_widget_root(), url=url, title="vote widget")


VOTE_AXTREE_GOLDEN = (
    "[167] Section '', visible\n"
    "  [169] button 'Upvote', clickable, visible\n"
    "  StaticText '17705'\n"
    "  [179] button 'Downvote', clickable, visible"
)

VOTE_HTML_FIRST_LINE = '<form action="/sv/18838" bid="167" class="vote">...'


@pytest.fixture
def vote_page() -> PageModel:
    return vote_widget_page()


def occluded_button_page(url: str = "local://occluded") -> PageModel:
    """A button hidden behind an overlay that intercepts pointer events."""
    button = Node("button", {"bid": "241", "name": "btnK", "type": "submit"}, text="Search")
    overlay = Node(
        "div",
        {"bid": "300", "class": "suggestions"},
        override_box=Box(0, 0, 1280, 200),
        intercepting=True,
    )
    root = Node("body", children=[button, overlay])
    return PageModel(root, url=url, title="occluded")


class QuestionTask:
    """Chat-only question task: one assistant answer decides the episode."""

    ANSWER = "1879"

    def setup(self, backend, seed):
        def build(url):
            root = Node("body", children=[Node("h1", text="Search")])
            return PageModel(root, url=url, title="Search")

        backend.register_page("local://qa/home", build)
        backend.goto("local://qa/home")
        return "Which year was einstein born?"

    def validate(self, backend, chat):
        last = chat[-1]
        done = last.role == "assistant"
        reward = 1.0 if done and self.ANSWER in last.text_content() else 0.0
        message = "That's correct" if reward else ""
        return reward, done, message


class ImageGoalTask(QuestionTask):
    """Goal carries one text part and one image part."""

    def setup(self, backend, seed):
        super().setup(backend, seed)
        return [TextPart("Find a pair of shoes that look like this image"), ImagePart("img-001")]


def _register_fixture_tasks():
    if not is_registered("qa.einstein"):
        register_task("qa.einstein", QuestionTask)
    if not is_registered("qa.image-goal"):
        register_task("qa.image-goal", ImageGoalTask)


_register_fixture_tasks()
