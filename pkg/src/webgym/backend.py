"""Deterministic in-process page backend.

Simulates just enough of a browser for agent evaluation: a mutable node tree
with a vertical-flow layout, focus, scrolling, tabs with per-tab history, a
URL registry that materializes pages from builder callables, and an
actionability gate that reproduces real automation failure modes (element
missing, hidden, disabled, or covered by an overlay).

Time is virtual: failed waits advance ``Backend.clock_ms`` instead of
sleeping, so identical command sequences always produce identical state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import commands as cmd
from .commands import BackendCommand, CommandError

INLINE_TAGS = {"span", "a", "em", "strong", "b", "i", "code", "label", "small", "sup", "sub"}

# fixed heights used by the flow layout; anything else defaults to 30
TAG_HEIGHTS = {
    "h1": 40,
    "h2": 36,
    "h3": 32,
    "button": 32,
    "input": 28,
    "select": 28,
    "textarea": 64,
    "p": 24,
    "li": 24,
}
DEFAULT_BLOCK_HEIGHT = 30
TEXT_ROW_HEIGHT = 20
INLINE_HEIGHT = 20
CHAR_WIDTH = 8
INLINE_PADDING = 16

FILLABLE_TAGS = {"input", "textarea"}
CLICKABLE_TAGS = {"button", "select", "option", "input", "textarea"}

# virtual cost of one successful command, in ms
COMMAND_COST_MS = 10.0


@dataclass
class Box:
    left: float
    top: float
    width: float
    height: float

    def area(self) -> float:
        return max(self.width, 0.0) * max(self.height, 0.0)

    def center(self) -> tuple[float, float]:
        return (self.left + self.width / 2.0, self.top + self.height / 2.0)

    def contains(self, x: float, y: float) -> bool:
        return self.left <= x <= self.left + self.width and self.top <= y <= self.top + self.height

    def intersection_area(self, other: "Box") -> float:
        w = min(self.left + self.width, other.left + other.width) - max(self.left, other.left)
        h = min(self.top + self.height, other.top + other.height) - max(self.top, other.top)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.width, self.height)


class Node:
    """One element of the simulated page tree."""

    __slots__ = ("tag", "attributes", "text", "children", "parent", "handlers", "box", "override_box", "intercepting")

    def __init__(
        self,
        tag: str,
        attributes: dict[str, str] | None = None,
        text: str = "",
        children: list["Node"] | None = None,
        handlers: dict[str, Callable] | None = None,
        override_box: Box | None = None,
        intercepting: bool = False,
    ):
        self.tag = tag
        self.attributes = dict(attributes or {})
        self.text = text
        self.children: list[Node] = []
        self.parent: Node | None = None
        self.handlers = dict(handlers or {})
        self.box: Box | None = None
        self.override_box = override_box
        self.intercepting = intercepting
        for child in children or []:
            self.append(child)

    def append(self, child: "Node") -> "Node":
        child.parent = self
        self.children.append(child)
        return child

    def remove(self, child: "Node") -> None:
        self.children.remove(child)
        child.parent = None

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    @property
    def bid(self) -> str | None:
        return self.attributes.get("bid")

    @property
    def hidden(self) -> bool:
        return "hidden" in self.attributes

    @property
    def disabled(self) -> bool:
        return "disabled" in self.attributes

    def is_fillable(self) -> bool:
        if self.tag in FILLABLE_TAGS:
            return True
        return "contenteditable" in self.attributes

    def is_interactive(self) -> bool:
        if self.tag in CLICKABLE_TAGS:
            return True
        if self.tag == "a" and "href" in self.attributes:
            return True
        return "on_click" in self.handlers

    def __repr__(self) -> str:
        bid = f" bid={self.bid!r}" if self.bid else ""
        return f"<Node {self.tag}{bid}>"


@dataclass
class Viewport:
    width: float = 1280.0
    height: float = 720.0
    scroll_x: float = 0.0
    scroll_y: float = 0.0

    def rect(self) -> Box:
        return Box(self.scroll_x, self.scroll_y, self.width, self.height)


class PageModel:
    def __init__(self, root: Node, url: str, title: str = ""):
        self.root = root
        self.url = url
        self.title = title
        self.focused: Node | None = None
        self.viewport = Viewport()
        self.bid_counter = 0

    def find_by_bid(self, bid: str) -> Node | None:
        for node in self.root.walk():
            if node.attributes.get("bid") == bid:
                return node
        return None


PageBuilder = Callable[[str], PageModel]


def _blank_page(url: str = "about:blank") -> PageModel:
    return PageModel(Node("body"), url=url, title="")


class Tab:
    def __init__(self, page: PageModel):
        self.history: list[PageModel] = [page]
        self.index = 0

    @property
    def page(self) -> PageModel:
        return self.history[self.index]

    def push(self, page: PageModel) -> None:
        del self.history[self.index + 1 :]
        self.history.append(page)
        self.index += 1


class TabSet:
    def __init__(self, first: PageModel | None = None):
        self.tabs: list[Tab] = [Tab(first or _blank_page())]
        self.active_index = 0

    @property
    def pages(self) -> list[PageModel]:
        return [t.page for t in self.tabs]

    @property
    def active(self) -> Tab:
        return self.tabs[self.active_index]

    @property
    def active_page(self) -> PageModel:
        return self.active.page


def layout(page: PageModel) -> None:
    """Assign layout boxes to the whole tree.

    Block nodes stack top to bottom with fixed per-tag heights; consecutive
    inline nodes share a row flowing left to right. Nodes with an explicit
    ``override_box`` are placed out of flow at that box. Hidden subtrees get
    zero-area boxes so they never count as visible or actionable.
    """
    _layout_block(page.root, 0.0, 0.0, page.viewport.width)


def _zero_boxes(node: Node, x: float, y: float) -> None:
    for n in node.walk():
        n.box = Box(x, y, 0.0, 0.0)


def _layout_block(node: Node, x: float, y: float, width: float) -> float:
    """Lay out ``node`` at (x, y); returns the flow height it consumes."""
    if node.hidden:
        _zero_boxes(node, x, y)
        return 0.0
    if node.override_box is not None:
        ob = node.override_box
        node.box = Box(ob.left, ob.top, ob.width, ob.height)
        _flow_children(node, ob.left, ob.top, ob.width)
        return 0.0  # out of flow
    if node.tag == "option":
        # options render inside their select, not as standalone boxes
        _zero_boxes(node, x, y)
        return 0.0
    if node.tag in INLINE_TAGS:
        w = CHAR_WIDTH * len(node.text) + INLINE_PADDING
        node.box = Box(x, y, w, INLINE_HEIGHT)
        cx = x + w
        for child in node.children:
            cx += _layout_inline(child, cx, y)
        return INLINE_HEIGHT

    content = _flow_children(node, x, y, width)
    height = max(content, TAG_HEIGHTS.get(node.tag, DEFAULT_BLOCK_HEIGHT if not node.children else 0.0))
    node.box = Box(x, y, width, height)
    return height


def _layout_inline(node: Node, x: float, y: float) -> float:
    """Place an inline node at (x, y); returns its width."""
    if node.hidden:
        _zero_boxes(node, x, y)
        return 0.0
    w = CHAR_WIDTH * len(node.text) + INLINE_PADDING
    node.box = Box(x, y, w, INLINE_HEIGHT)
    cx = x + w
    for child in node.children:
        cx += _layout_inline(child, cx, y)
    return cx - x


def _flow_children(node: Node, x: float, y: float, width: float) -> float:
    cur_y = y
    if node.text.strip():
        cur_y += TEXT_ROW_HEIGHT
    cur_x = x
    row_open = False
    for child in node.children:
        if child.hidden:
            _zero_boxes(child, cur_x, cur_y)
        elif child.tag in INLINE_TAGS and child.override_box is None:
            cur_x += _layout_inline(child, cur_x, cur_y)
            row_open = True
        else:
            if row_open:
                cur_y += INLINE_HEIGHT
                cur_x = x
                row_open = False
            cur_y += _layout_block(child, x, cur_y, width)
    if row_open:
        cur_y += INLINE_HEIGHT
    return cur_y - y


def visibility_ratio(box: Box | None, viewport: Viewport) -> float:
    """Fraction of the box inside the viewport; 0.0 for degenerate boxes."""
    if box is None or box.area() == 0.0:
        return 0.0
    return box.intersection_area(viewport.rect()) / box.area()


class Backend:
    """Owns a tab set, the episode's URL registry, and the virtual clock."""

    def __init__(self):
        self.tabs = TabSet()
        self.clock_ms = 0.0
        self._registry: dict[str, PageBuilder] = {}

    # -- page registry -------------------------------------------------

    def register_page(self, url: str, builder: PageBuilder) -> None:
        if url in self._registry:
            raise ValueError(f"url {url!r} already registered for this episode")
        self._registry[url] = builder

    def registered_urls(self) -> list[str]:
        return sorted(self._registry)

    # -- convenience handles -------------------------------------------

    @property
    def page(self) -> PageModel:
        return self.tabs.active_page

    def locate(self, bid: str) -> Node:
        """Resolve a bid on the active page only."""
        node = self.page.find_by_bid(bid)
        if node is None:
            raise CommandError("not_found", f'no element with bid="{bid}" on the active page')
        return node

    def goto(self, url: str) -> None:
        builder = self._registry.get(url)
        if builder is None:
            raise CommandError("navigation_failed", f"navigation to {url!r} failed: url not registered")
        self.tabs.active.push(builder(url))

    def append_chat(self, role: str, text: str) -> None:  # pragma: no cover - overridden by the env
        raise CommandError("unsupported", "chat commands require an environment")

    # -- actionability gate --------------------------------------------

    def _fail(self, op: str, target: str, detail: str, kind: str, timeout_ms: float) -> CommandError:
        self.clock_ms += timeout_ms
        message = (
            f"TimeoutError: {op}: Timeout {int(timeout_ms)}ms exceeded.\n"
            "Call log:\n"
            f'waiting for element {target}\n'
            f"  - attempting {op} action\n"
            "  - waiting for element to be visible, enabled and stable\n"
            f"  - {detail}"
        )
        return CommandError(kind, message)

    def _actionable(self, bid: str, op: str, timeout_ms: float) -> Node:
        target = f'bid="{bid}"'
        node = self.page.find_by_bid(bid)
        if node is None:
            raise self._fail(op, target, "element does not exist", "timeout", timeout_ms)
        layout(self.page)
        if visibility_ratio(node.box, self.page.viewport) <= 0.0:
            raise self._fail(op, target, "element is not visible", "not_visible", timeout_ms)
        if node.disabled:
            raise self._fail(op, target, "element is not enabled", "not_enabled", timeout_ms)
        interceptor = self._interceptor_over(node)
        if interceptor is not None:
            itag = f'<{interceptor.tag} bid="{interceptor.bid}">' if interceptor.bid else f"<{interceptor.tag}>"
            raise self._fail(op, target, f"{itag} intercepts pointer events", "intercepted", timeout_ms)
        return node

    def _interceptor_over(self, node: Node) -> Node | None:
        cx, cy = node.box.center()
        ancestors = set()
        cur = node
        while cur is not None:
            ancestors.add(id(cur))
            cur = cur.parent
        for other in self.page.root.walk():
            if not other.intercepting or id(other) in ancestors or other.box is None:
                continue
            if other.box.contains(cx, cy):
                return other
        return None

    def _hit_test(self, x: float, y: float) -> Node | None:
        """Topmost node at a point: the latest node in document order whose box
        contains the point (later siblings and overlays paint on top)."""
        layout(self.page)
        hit = None
        for node in self.page.root.walk():
            if node.box is not None and node.box.area() > 0 and node.box.contains(x, y):
                hit = node
        return hit

    # -- command execution ----------------------------------------------

    def execute(self, command: BackendCommand, timeout_ms: float = 500.0) -> None:
        """Apply one command to the tab set; raises CommandError on failure."""
        handler = _EXECUTORS.get(type(command))
        if handler is None:
            raise CommandError("unsupported", f"unsupported command {command!r}")
        handler(self, command, timeout_ms)
        self.clock_ms += COMMAND_COST_MS

    # -- element interactions --------------------------------------------

    def _click_node(self, node: Node) -> None:
        if node.is_interactive() and not node.hidden:
            self.page.focused = node
        if node.tag == "input" and node.attributes.get("type") == "checkbox":
            if "checked" in node.attributes:
                del node.attributes["checked"]
            else:
                node.attributes["checked"] = "true"
        elif node.tag == "input" and node.attributes.get("type") == "radio":
            name = node.attributes.get("name", "")
            for other in self.page.root.walk():
                if other.tag == "input" and other.attributes.get("type") == "radio" and other.attributes.get("name", "") == name:
                    other.attributes.pop("checked", None)
            node.attributes["checked"] = "true"
        elif node.tag == "option":
            select = node.parent
            while select is not None and select.tag != "select":
                select = select.parent
            if select is not None:
                self._select_options(select, [node.attributes.get("value", node.text)])
        on_click = node.handlers.get("on_click")
        if on_click is not None:
            on_click(self, node)
        elif node.tag == "a" and "href" in node.attributes:
            self.goto(node.attributes["href"])

    def _fill_node(self, node: Node, value: str) -> None:
        node.attributes["value"] = value
        self.page.focused = node
        on_input = node.handlers.get("on_input")
        if on_input is not None:
            on_input(self, node, value)

    def _select_options(self, select: Node, wanted: list[str]) -> None:
        options = [c for c in select.walk() if c.tag == "option" and c is not select]
        chosen = []
        for want in wanted:
            match = None
            for opt in options:
                if opt.attributes.get("value", opt.text) == want or opt.text == want:
                    match = opt
                    break
            if match is None:
                raise CommandError(
                    "not_found", f'no option {want!r} in select bid="{select.bid}"'
                )
            chosen.append(match)
        for opt in options:
            opt.attributes.pop("selected", None)
        for opt in chosen:
            opt.attributes["selected"] = "true"
        select.attributes["value"] = chosen[0].attributes.get("value", chosen[0].text)
        on_change = select.handlers.get("on_change")
        if on_change is not None:
            on_change(self, select, [c.attributes.get("value", c.text) for c in chosen])

    def _deliver_key(self, node: Node, key_comb: str) -> None:
        on_key = node.handlers.get("on_key")
        if on_key is not None:
            on_key(self, node, key_comb)

    def _reorder(self, dragged: Node, drop: Node) -> None:
        if dragged.parent is None or drop.parent is None:
            raise CommandError("unsupported", f"cannot drag the page root ({dragged!r})")
        index = drop.parent.children.index(drop)
        dragged.parent.remove(dragged)
        drop.parent.children.insert(index, dragged)
        dragged.parent = drop.parent

    def _record_upload(self, node: Node, files: list[str]) -> None:
        is_chooser = (node.tag == "input" and node.attributes.get("type") == "file") or "filechooser" in node.attributes
        if not is_chooser:
            raise CommandError(
                "unsupported", f'element bid="{node.bid}" is not a file chooser'
            )
        node.attributes["files"] = ",".join(files)


# one executor per command kind


def _exec_click(b: Backend, c: cmd.Click, t: float) -> None:
    node = b._actionable(c.bid, "click", t)
    b._click_node(node)


def _exec_dblclick(b: Backend, c: cmd.DblClick, t: float) -> None:
    node = b._actionable(c.bid, "dblclick", t)
    on_dbl = node.handlers.get("on_dblclick")
    if on_dbl is not None:
        if node.is_interactive():
            b.page.focused = node
        on_dbl(b, node)
    else:
        b._click_node(node)


def _exec_fill(b: Backend, c: cmd.Fill, t: float) -> None:
    node = b._actionable(c.bid, "fill", t)
    if not node.is_fillable():
        raise CommandError("unsupported", f'element bid="{c.bid}" is not fillable')
    b._fill_node(node, c.value)


def _exec_clear(b: Backend, c: cmd.Clear, t: float) -> None:
    node = b._actionable(c.bid, "clear", t)
    if not node.is_fillable():
        raise CommandError("unsupported", f'element bid="{c.bid}" is not fillable')
    b._fill_node(node, "")


def _exec_select(b: Backend, c: cmd.SelectOption, t: float) -> None:
    node = b._actionable(c.bid, "select_option", t)
    if node.tag != "select":
        raise CommandError("unsupported", f'element bid="{c.bid}" is not a select')
    b._select_options(node, c.options)


def _exec_press(b: Backend, c: cmd.Press, t: float) -> None:
    node = b._actionable(c.bid, "press", t)
    b.page.focused = node
    b._deliver_key(node, c.key_comb)


def _exec_focus(b: Backend, c: cmd.Focus, t: float) -> None:
    node = b._actionable(c.bid, "focus", t)
    b.page.focused = node


def _exec_hover(b: Backend, c: cmd.Hover, t: float) -> None:
    node = b._actionable(c.bid, "hover", t)
    on_hover = node.handlers.get("on_hover")
    if on_hover is not None:
        on_hover(b, node)


def _exec_drag(b: Backend, c: cmd.DragAndDrop, t: float) -> None:
    dragged = b._actionable(c.from_bid, "drag_and_drop", t)
    drop = b._actionable(c.to_bid, "drag_and_drop", t)
    b._reorder(dragged, drop)


def _exec_upload(b: Backend, c: cmd.UploadFile, t: float) -> None:
    node = b._actionable(c.bid, "upload_file", t)
    b._record_upload(node, c.files)


def _exec_mouse_move(b: Backend, c: cmd.MouseMove, t: float) -> None:
    b._hit_test(c.x, c.y)


def _exec_mouse_down(b: Backend, c: cmd.MouseDown, t: float) -> None:
    b._hit_test(c.x, c.y)


def _exec_mouse_up(b: Backend, c: cmd.MouseUp, t: float) -> None:
    b._hit_test(c.x, c.y)


def _exec_mouse_click(b: Backend, c: cmd.MouseClick, t: float) -> None:
    node = b._hit_test(c.x, c.y)
    if node is not None and not node.disabled:
        b._click_node(node)


def _exec_mouse_dblclick(b: Backend, c: cmd.MouseDblClick, t: float) -> None:
    node = b._hit_test(c.x, c.y)
    if node is not None and not node.disabled:
        b._click_node(node)


def _exec_mouse_drag(b: Backend, c: cmd.MouseDragAndDrop, t: float) -> None:
    dragged = b._hit_test(c.from_x, c.from_y)
    drop = b._hit_test(c.to_x, c.to_y)
    if dragged is None or drop is None:
        raise CommandError(
            "not_found",
            f"no element at drag endpoint ({c.from_x}, {c.from_y}) -> ({c.to_x}, {c.to_y})",
        )
    b._reorder(dragged, drop)


def _exec_mouse_upload(b: Backend, c: cmd.MouseUploadFile, t: float) -> None:
    node = b._hit_test(c.x, c.y)
    if node is None:
        raise CommandError("not_found", f"no element at ({c.x}, {c.y})")
    b._record_upload(node, c.files)


def _exec_keyboard_down(b: Backend, c: cmd.KeyboardDown, t: float) -> None:
    pass


def _exec_keyboard_up(b: Backend, c: cmd.KeyboardUp, t: float) -> None:
    pass


def _exec_keyboard_press(b: Backend, c: cmd.KeyboardPress, t: float) -> None:
    if b.page.focused is not None:
        b._deliver_key(b.page.focused, c.key_comb)


def _type_text(b: Backend, text: str) -> None:
    node = b.page.focused
    if node is not None and node.is_fillable():
        b._fill_node(node, node.attributes.get("value", "") + text)


def _exec_keyboard_type(b: Backend, c: cmd.KeyboardType, t: float) -> None:
    _type_text(b, c.text)


def _exec_keyboard_insert(b: Backend, c: cmd.KeyboardInsertText, t: float) -> None:
    _type_text(b, c.text)


def _exec_scroll(b: Backend, c: cmd.Scroll, t: float) -> None:
    vp = b.page.viewport
    vp.scroll_x = max(0.0, vp.scroll_x + c.dx)
    vp.scroll_y = max(0.0, vp.scroll_y + c.dy)


def _exec_goto(b: Backend, c: cmd.Goto, t: float) -> None:
    b.goto(c.url)


def _exec_go_back(b: Backend, c: cmd.GoBack, t: float) -> None:
    tab = b.tabs.active
    if tab.index == 0:
        raise CommandError("navigation_failed", "go_back failed: no previous page in history")
    tab.index -= 1


def _exec_go_forward(b: Backend, c: cmd.GoForward, t: float) -> None:
    tab = b.tabs.active
    if tab.index >= len(tab.history) - 1:
        raise CommandError("navigation_failed", "go_forward failed: no next page in history")
    tab.index += 1


def _exec_new_tab(b: Backend, c: cmd.NewTab, t: float) -> None:
    b.tabs.tabs.append(Tab(_blank_page()))
    b.tabs.active_index = len(b.tabs.tabs) - 1


def _exec_tab_close(b: Backend, c: cmd.TabClose, t: float) -> None:
    if len(b.tabs.tabs) == 1:
        raise CommandError("unsupported", "tab_close failed: cannot close the last tab")
    i = b.tabs.active_index
    del b.tabs.tabs[i]
    b.tabs.active_index = min(i, len(b.tabs.tabs) - 1)


def _exec_tab_focus(b: Backend, c: cmd.TabFocus, t: float) -> None:
    if not 0 <= c.index < len(b.tabs.tabs):
        raise CommandError("not_found", f"no open tab at index {c.index}")
    b.tabs.active_index = c.index


def _exec_wait(b: Backend, c: cmd.Wait, t: float) -> None:
    b.clock_ms += c.ms


def _exec_append_chat(b: Backend, c: cmd.AppendChat, t: float) -> None:
    b.append_chat(c.role, c.text)


_EXECUTORS = {
    cmd.Click: _exec_click,
    cmd.DblClick: _exec_dblclick,
    cmd.Fill: _exec_fill,
    cmd.Clear: _exec_clear,
    cmd.SelectOption: _exec_select,
    cmd.Press: _exec_press,
    cmd.Focus: _exec_focus,
    cmd.Hover: _exec_hover,
    cmd.DragAndDrop: _exec_drag,
    cmd.UploadFile: _exec_upload,
    cmd.MouseMove: _exec_mouse_move,
    cmd.MouseDown: _exec_mouse_down,
    cmd.MouseUp: _exec_mouse_up,
    cmd.MouseClick: _exec_mouse_click,
    cmd.MouseDblClick: _exec_mouse_dblclick,
    cmd.MouseDragAndDrop: _exec_mouse_drag,
    cmd.MouseUploadFile: _exec_mouse_upload,
    cmd.KeyboardDown: _exec_keyboard_down,
    cmd.KeyboardUp: _exec_keyboard_up,
    cmd.KeyboardPress: _exec_keyboard_press,
    cmd.KeyboardType: _exec_keyboard_type,
    cmd.KeyboardInsertText: _exec_keyboard_insert,
    cmd.Scroll: _exec_scroll,
    cmd.Goto: _exec_goto,
    cmd.GoBack: _exec_go_back,
    cmd.GoForward: _exec_go_forward,
    cmd.NewTab: _exec_new_tab,
    cmd.TabClose: _exec_tab_close,
    cmd.TabFocus: _exec_tab_focus,
    cmd.Wait: _exec_wait,
    cmd.AppendChat: _exec_append_chat,
}
