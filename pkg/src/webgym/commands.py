"""Backend command and error shapes.

These are the wire types of the backend seam: each command serializes to a
JSON object with a ``kind`` tag, which is also the shape a remote browser
adapter would speak.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

# error kinds, in the order checks are applied
ERROR_KINDS = (
    "timeout",
    "not_found",
    "not_visible",
    "not_enabled",
    "intercepted",
    "navigation_failed",
    "unsupported",
)


@dataclass
class CommandError(Exception):
    kind: str
    message: str

    def __post_init__(self):
        if self.kind not in ERROR_KINDS:
            raise ValueError(f"unknown error kind {self.kind!r}")
        if not self.message:
            raise ValueError("command errors must carry a message")

    def __str__(self) -> str:
        return self.message

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message}


@dataclass
class BackendCommand:
    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = KIND_BY_TYPE[type(self)]
        return d


@dataclass
class Click(BackendCommand):
    bid: str
    button: str = "left"
    modifiers: list[str] = field(default_factory=list)


@dataclass
class DblClick(BackendCommand):
    bid: str
    button: str = "left"
    modifiers: list[str] = field(default_factory=list)


@dataclass
class Fill(BackendCommand):
    bid: str
    value: str


@dataclass
class SelectOption(BackendCommand):
    bid: str
    options: list[str]


@dataclass
class Press(BackendCommand):
    bid: str
    key_comb: str


@dataclass
class Focus(BackendCommand):
    bid: str


@dataclass
class Clear(BackendCommand):
    bid: str


@dataclass
class Hover(BackendCommand):
    bid: str


@dataclass
class DragAndDrop(BackendCommand):
    from_bid: str
    to_bid: str


@dataclass
class UploadFile(BackendCommand):
    bid: str
    files: list[str]


@dataclass
class MouseMove(BackendCommand):
    x: float
    y: float


@dataclass
class MouseDown(BackendCommand):
    x: float
    y: float
    button: str = "left"


@dataclass
class MouseUp(BackendCommand):
    x: float
    y: float
    button: str = "left"


@dataclass
class MouseClick(BackendCommand):
    x: float
    y: float
    button: str = "left"


@dataclass
class MouseDblClick(BackendCommand):
    x: float
    y: float
    button: str = "left"


@dataclass
class MouseDragAndDrop(BackendCommand):
    from_x: float
    from_y: float
    to_x: float
    to_y: float


@dataclass
class MouseUploadFile(BackendCommand):
    x: float
    y: float
    files: list[str]


@dataclass
class KeyboardDown(BackendCommand):
    key: str


@dataclass
class KeyboardUp(BackendCommand):
    key: str


@dataclass
class KeyboardPress(BackendCommand):
    key_comb: str


@dataclass
class KeyboardType(BackendCommand):
    text: str


@dataclass
class KeyboardInsertText(BackendCommand):
    text: str


@dataclass
class Scroll(BackendCommand):
    dx: float
    dy: float


@dataclass
class Goto(BackendCommand):
    url: str


@dataclass
class GoBack(BackendCommand):
    pass


@dataclass
class GoForward(BackendCommand):
    pass


@dataclass
class NewTab(BackendCommand):
    pass


@dataclass
class TabClose(BackendCommand):
    pass


@dataclass
class TabFocus(BackendCommand):
    index: int


@dataclass
class Wait(BackendCommand):
    ms: float


@dataclass
class AppendChat(BackendCommand):
    """Handled by the environment, not the page backend."""

    role: str
    text: str


KIND_BY_TYPE = {
    Click: "click",
    DblClick: "dblclick",
    Fill: "fill",
    SelectOption: "select_option",
    Press: "press",
    Focus: "focus",
    Clear: "clear",
    Hover: "hover",
    DragAndDrop: "drag_and_drop",
    UploadFile: "upload_file",
    MouseMove: "mouse_move",
    MouseDown: "mouse_down",
    MouseUp: "mouse_up",
    MouseClick: "mouse_click",
    MouseDblClick: "mouse_dblclick",
    MouseDragAndDrop: "mouse_drag_and_drop",
    MouseUploadFile: "mouse_upload_file",
    KeyboardDown: "keyboard_down",
    KeyboardUp: "keyboard_up",
    KeyboardPress: "keyboard_press",
    KeyboardType: "keyboard_type",
    KeyboardInsertText: "keyboard_insert_text",
    Scroll: "scroll",
    Goto: "goto",
    GoBack: "go_back",
    GoForward: "go_forward",
    NewTab: "new_tab",
    TabClose: "tab_close",
    TabFocus: "tab_focus",
    Wait: "wait",
    AppendChat: "append_chat",
}

TYPE_BY_KIND = {v: k for k, v in KIND_BY_TYPE.items()}


def command_from_dict(d: dict) -> BackendCommand:
    d = dict(d)
    kind = d.pop("kind")
    try:
        cls = TYPE_BY_KIND[kind]
    except KeyError:
        raise ValueError(f"unknown command kind {kind!r}") from None
    return cls(**d)
