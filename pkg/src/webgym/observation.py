"""Observation building: DOM snapshots, the derived accessibility tree,
per-element properties, and the flattened text formats agents consume.

The flattened texts are a stable contract: they appear in prompts, step logs,
and replay diffs, so both flatteners are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backend import Backend, Node, PageModel, Viewport, layout, visibility_ratio
from .chat import ChatMessage, ContentPart

# visibility ratio above which an element counts as "visible" in the AXTree
VISIBLE_THRESHOLD = 0.5

FILTER_VISIBLE_ONLY = "filter_visible_elements_only"
FILTER_WITH_BID_ONLY = "filter_with_bid_only"
FILTER_SOM_ONLY = "filter_som_only"
KNOWN_FILTERS = {FILTER_VISIBLE_ONLY, FILTER_WITH_BID_ONLY, FILTER_SOM_ONLY}


@dataclass(frozen=True)
class DomNode:
    bid: str
    tag: str
    attributes: dict[str, str]
    text: str
    children: tuple["DomNode", ...]

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class ExtraProps:
    bbox: tuple[float, float, float, float]
    visibility: float
    clickable: bool
    set_of_marks: bool


@dataclass
class AXNode:
    bid: str | None
    role: str
    name: str
    properties: frozenset[str] = frozenset()
    children: list["AXNode"] = field(default_factory=list)
    static_text: str | None = None

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class Observation:
    goal_object: list[ContentPart]
    chat_messages: list[ChatMessage]
    open_pages_urls: list[str]
    open_pages_titles: list[str]
    active_page_index: int
    dom: DomNode
    axtree: AXNode
    extra_element_properties: dict[str, ExtraProps]
    focused_element_bid: str | None
    last_action_error: str


# -- DOM snapshot -------------------------------------------------------


def snapshot_dom(page: PageModel) -> DomNode:
    """Deep, immutable copy of the page tree with bids injected.

    Nodes that already carry a ``bid`` attribute keep it; the rest get fresh
    decimal bids from the page's counter in document order, so bids are stable
    across successive snapshots of the same page.
    """
    for node in page.root.walk():
        if "bid" not in node.attributes:
            _assign_bid(page, node)
    return _copy_node(page.root)


def _assign_bid(page: PageModel, node: Node) -> None:
    while True:
        bid = str(page.bid_counter)
        page.bid_counter += 1
        if page.find_by_bid(bid) is None:
            node.attributes = {"bid": bid, **node.attributes}
            return


def _copy_node(node: Node) -> DomNode:
    return DomNode(
        bid=node.attributes["bid"],
        tag=node.tag,
        attributes=dict(node.attributes),
        text=node.text,
        children=tuple(_copy_node(c) for c in node.children),
    )


def strip_bids(dom: DomNode) -> DomNode:
    """Snapshot without injected bids; equals the builder's raw tree."""
    attrs = {k: v for k, v in dom.attributes.items() if k != "bid"}
    return DomNode("", dom.tag, attrs, dom.text, tuple(strip_bids(c) for c in dom.children))


# -- extra element properties -------------------------------------------


def compute_extra_props(page: PageModel, viewport: Viewport | None = None) -> dict[str, ExtraProps]:
    """Bounding boxes, viewport visibility ratios, and interactivity flags,
    keyed by bid. Visibility models viewport clipping only; occlusion is the
    backend's click-interception rule."""
    viewport = viewport or page.viewport
    layout(page)
    props: dict[str, ExtraProps] = {}
    for node in page.root.walk():
        bid = node.attributes.get("bid")
        if bid is None:
            continue
        visibility = visibility_ratio(node.box, viewport)
        clickable = node.is_interactive() and not node.disabled
        props[bid] = ExtraProps(
            bbox=node.box.as_tuple() if node.box else (0.0, 0.0, 0.0, 0.0),
            visibility=visibility,
            clickable=clickable,
            set_of_marks=clickable and visibility > VISIBLE_THRESHOLD,
        )
    return props


# -- accessibility tree ---------------------------------------------------

# tag (and input type) to role; unlisted tags are "generic" and get pruned
# unless they carry an explicit name
ROLE_BY_TAG = {
    "button": "button",
    "select": "combobox",
    "option": "option",
    "textarea": "textbox",
    "img": "image",
    "form": "Section",
    "section": "Section",
    "nav": "navigation",
    "main": "main",
    "h1": "heading",
    "h2": "heading",
    "h3": "heading",
    "h4": "heading",
    "h5": "heading",
    "h6": "heading",
    "li": "listitem",
    "ul": "list",
    "ol": "list",
    "table": "table",
}

INPUT_ROLE_BY_TYPE = {
    "text": "textbox",
    "email": "textbox",
    "password": "textbox",
    "number": "textbox",
    "date": "textbox",
    "checkbox": "checkbox",
    "radio": "radio",
    "submit": "button",
    "button": "button",
    "file": "button",
}

# tags whose accessible name falls back to their direct text content
NAME_FROM_CONTENT = {
    "button", "a", "option", "label", "legend", "th", "td", "summary",
    "caption", "h1", "h2", "h3", "h4", "h5", "h6", "li",
}


def role_of(tag: str, attributes: dict[str, str]) -> str:
    if tag == "a":
        return "link" if "href" in attributes else "generic"
    if tag == "input":
        return INPUT_ROLE_BY_TYPE.get(attributes.get("type", "text"), "textbox")
    return ROLE_BY_TAG.get(tag, "generic")


def accessible_name(tag: str, attributes: dict[str, str], text: str) -> tuple[str, bool]:
    """Returns (name, consumed_text): whether the direct text became the name."""
    for attr in ("aria-label", "title"):
        if attributes.get(attr):
            return attributes[attr], False
    if tag == "img" and attributes.get("alt"):
        return attributes["alt"], False
    stripped = text.strip()
    if stripped and tag in NAME_FROM_CONTENT:
        return stripped, True
    return "", False


def derive_axtree(
    dom: DomNode,
    props: dict[str, ExtraProps],
    focused_bid: str | None = None,
) -> AXNode:
    """Project the DOM snapshot into an accessibility tree.

    Unnamed generic nodes are removed and their children hoisted; bare text
    becomes StaticText children. The returned root is a transparent container
    (empty role) holding whatever survives, so an all-generic page flattens to
    an empty tree.
    """
    top = _derive(dom, props, focused_bid)
    return AXNode(bid=None, role="", name="", children=top)


def _derive(dom: DomNode, props: dict[str, ExtraProps], focused_bid: str | None) -> list[AXNode]:
    role = role_of(dom.tag, dom.attributes)
    name, consumed = accessible_name(dom.tag, dom.attributes, dom.text)

    children: list[AXNode] = []
    stripped = dom.text.strip()
    if stripped and not consumed:
        children.append(AXNode(bid=None, role="StaticText", name="", static_text=stripped))
    for child in dom.children:
        children.extend(_derive(child, props, focused_bid))

    if role == "generic" and not name:
        return children

    flags = set()
    p = props.get(dom.bid)
    if p is not None:
        if p.clickable:
            flags.add("clickable")
        if p.visibility > VISIBLE_THRESHOLD:
            flags.add("visible")
    if focused_bid is not None and dom.bid == focused_bid:
        flags.add("focused")
    if "disabled" in dom.attributes:
        flags.add("disabled")
    return [AXNode(bid=dom.bid, role=role, name=name, properties=frozenset(flags), children=children)]


# -- flatteners ----------------------------------------------------------


def flatten_axtree(
    ax: AXNode,
    filters: frozenset[str] | set[str] = frozenset(),
    *,
    visible_tag: bool = True,
    clickable_tag: bool = True,
    coords: bool = False,
    props: dict[str, ExtraProps] | None = None,
) -> str:
    """One line per node: ``[bid] role 'name'`` plus comma-separated flags.

    ``filters`` accepts {filter_visible_elements_only, filter_with_bid_only,
    filter_som_only}; filtered nodes disappear and their children take their
    place. StaticText lines carry no bid, so only filter_with_bid_only drops
    them. Pure function: identical inputs yield identical bytes.
    """
    unknown = set(filters) - KNOWN_FILTERS
    if unknown:
        raise ValueError(f"unknown axtree filters: {sorted(unknown)}")
    lines: list[str] = []
    roots = ax.children if ax.role == "" else [ax]
    for root in roots:
        _flatten_ax(root, 0, lines, set(filters), visible_tag, clickable_tag, coords, props or {})
    return "\n".join(lines)


def _flatten_ax(node, depth, lines, filters, visible_tag, clickable_tag, coords, props) -> None:
    keep = True
    if node.role == "StaticText":
        # text lines carry no bid and no set-of-marks; only the visibility
        # filter leaves them alone
        if FILTER_WITH_BID_ONLY in filters or FILTER_SOM_ONLY in filters:
            keep = False
    else:
        if FILTER_VISIBLE_ONLY in filters and "visible" not in node.properties:
            keep = False
        if FILTER_SOM_ONLY in filters and not {"clickable", "visible"} <= node.properties:
            keep = False
    if keep:
        lines.append(_ax_line(node, depth, visible_tag, clickable_tag, coords, props))
        depth += 1
    for child in node.children:
        _flatten_ax(child, depth, lines, filters, visible_tag, clickable_tag, coords, props)


def _ax_line(node, depth, visible_tag, clickable_tag, coords, props) -> str:
    indent = "  " * depth
    if node.role == "StaticText":
        return f"{indent}StaticText '{node.static_text}'"
    line = f"{indent}[{node.bid}] {node.role} '{node.name}'"
    flags = []
    if clickable_tag and "clickable" in node.properties:
        flags.append("clickable")
    if visible_tag and "visible" in node.properties:
        flags.append("visible")
    if "focused" in node.properties:
        flags.append("focused")
    if "disabled" in node.properties:
        flags.append("disabled")
    if flags:
        line += ", " + ", ".join(flags)
    if coords and node.bid in props:
        left, top, width, height = props[node.bid].bbox
        line += f", box=({left:g}, {top:g}, {width:g}, {height:g})"
    return line


def flatten_html(dom: DomNode, max_depth: int | None = None) -> str:
    """Serialize the snapshot as indented markup.

    Attributes keep their source order (the injected bid is always present).
    Hidden elements and children beyond ``max_depth`` collapse into a ``...``
    marker appended to the previously emitted line, which keeps the output
    compact while showing where content was elided.
    """
    lines: list[str] = []
    _flatten_html(dom, 0, lines, max_depth)
    if not lines:
        return "..."
    return "\n".join(lines)


def _mark_elision(lines: list[str]) -> None:
    if lines and not lines[-1].endswith("..."):
        lines[-1] += "..."


def _flatten_html(node: DomNode, depth: int, lines: list[str], max_depth: int | None) -> None:
    if "hidden" in node.attributes:
        _mark_elision(lines)
        return
    indent = "  " * depth
    attrs = " ".join(f'{k}="{v}"' for k, v in node.attributes.items())
    open_prefix = f"{indent}<{node.tag}{' ' + attrs if attrs else ''}"
    text = node.text.strip()
    has_content = bool(text or node.children)

    if not has_content:
        lines.append(open_prefix + "/>")
        return
    if max_depth is not None and depth >= max_depth:
        lines.append(open_prefix + ">...</" + node.tag + ">")
        return
    visible_children = [c for c in node.children if "hidden" not in c.attributes]
    if not text and not visible_children:
        lines.append(open_prefix + ">...</" + node.tag + ">")
        return

    lines.append(open_prefix + ">")
    if text:
        lines.append("  " * (depth + 1) + text)
    for child in node.children:
        _flatten_html(child, depth + 1, lines, max_depth)
    lines.append(f"{indent}</{node.tag}>")


# -- full observation ------------------------------------------------------


def build_observation(
    backend: Backend,
    goal_object: list[ContentPart],
    chat_messages: list[ChatMessage],
    last_action_error: str = "",
) -> Observation:
    """Assemble the full percept from the backend, the chat, and the last
    command outcome."""
    page = backend.page
    layout(page)
    dom = snapshot_dom(page)
    props = compute_extra_props(page)
    focused_bid = page.focused.attributes.get("bid") if page.focused is not None else None
    axtree = derive_axtree(dom, props, focused_bid)
    return Observation(
        goal_object=list(goal_object),
        chat_messages=list(chat_messages),
        open_pages_urls=[p.url for p in backend.tabs.pages],
        open_pages_titles=[p.title for p in backend.tabs.pages],
        active_page_index=backend.tabs.active_index,
        dom=dom,
        axtree=axtree,
        extra_element_properties=props,
        focused_element_bid=focused_bid,
        last_action_error=last_action_error,
    )
