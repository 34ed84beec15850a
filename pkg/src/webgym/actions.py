"""High-level action DSL: the primitive catalog, the single-call parser, the
action-space description shown to agents, and the mapping to backend commands.

The grammar is one function call -- ``name(arg, key=value)`` -- with quoted
strings (escapes limited to ``\\n \\t \\" \\' \\\\``), decimal numbers,
bracketed string lists, and bare enumeration literals for enum-typed
parameters. Anything else is a typed ParseError, never an exception: the
parser is total over arbitrary input, which the environment relies on to turn
malformed actions into error feedback instead of crashes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import commands as cmd
from .commands import BackendCommand
from .errors import ConfigurationError

CATEGORIES = ("bid", "coord", "tab", "nav", "misc")

MODIFIER_VALUES = ("Alt", "Control", "ControlOrMeta", "Meta", "Shift")
BUTTON_VALUES = ("left", "middle", "right")

_REQUIRED = object()


@dataclass(frozen=True)
class ParamType:
    kind: str  # str | float | int | str_or_list | enum | enum_list
    values: tuple[str, ...] = ()

    def annotation(self) -> str:
        if self.kind == "str":
            return "str"
        if self.kind == "float":
            return "float"
        if self.kind == "int":
            return "int"
        if self.kind == "str_or_list":
            return "str | list[str]"
        if self.kind == "enum":
            inner = ", ".join(repr(v) for v in self.values)
            return f"Literal[{inner}]"
        if self.kind == "enum_list":
            inner = ", ".join(repr(v) for v in self.values)
            return f"list[typing.Literal[{inner}]]"
        raise AssertionError(self.kind)


STR = ParamType("str")
FLOAT = ParamType("float")
INT = ParamType("int")
STR_OR_LIST = ParamType("str_or_list")
BUTTON = ParamType("enum", BUTTON_VALUES)
MODIFIERS = ParamType("enum_list", MODIFIER_VALUES)


@dataclass(frozen=True)
class Param:
    name: str
    type: ParamType
    default: object = _REQUIRED

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED

    def annotation(self) -> str:
        text = f"{self.name}: {self.type.annotation()}"
        if not self.required:
            text += f" = {_render_signature_default(self.default)}"
        return text


@dataclass(frozen=True)
class ActionPrimitive:
    name: str
    category: str
    params: tuple[Param, ...]
    summary: str
    long_description: str
    usage_examples: tuple[str, ...]

    def signature(self) -> str:
        return f"{self.name}({', '.join(p.annotation() for p in self.params)})"


def _prim(name, category, params, summary, long_description="", examples=()):
    return ActionPrimitive(
        name=name,
        category=category,
        params=tuple(params),
        summary=summary,
        long_description=long_description or summary,
        usage_examples=tuple(examples),
    )


# Catalog in display order; describe() renders enabled primitives in this order.
_CATALOG = (
    _prim(
        "noop", "misc", [Param("wait_ms", FLOAT, 1000.0)],
        "Wait and do nothing.",
        "Do nothing, and optionally wait for the given time (in milliseconds).",
        ["noop()", "noop(500)"],
    ),
    _prim(
        "send_msg_to_user", "misc", [Param("text", STR)],
        "Send a message to the user in the chat.",
        "Sends a message to the user.",
        ["send_msg_to_user('Based on the results of my search, the city was built in 1751.')"],
    ),
    _prim(
        "report_infeasible", "misc", [Param("reason", STR)],
        "Send a special message in the chat and terminate.",
        "Notifies the user that their instructions are infeasible.",
        ["report_infeasible('I cannot follow these instructions because there is no email field in this form.')"],
    ),
    _prim(
        "scroll", "misc", [Param("delta_x", FLOAT), Param("delta_y", FLOAT)],
        "Scroll pixels in X and/or Y direction.",
        "Scroll horizontally and vertically. Amounts in pixels, positive for right or down scrolling, "
        "negative for left or up scrolling. Dispatches a wheel event.",
        ["scroll(0, 200)", "scroll(-50.2, -100.5)"],
    ),
    _prim(
        "fill", "bid", [Param("bid", STR), Param("value", STR)],
        "Fill an input field with text.",
        "Fill out a form field. It focuses the element and triggers an input event with the entered text. "
        "It works for <input>, <textarea> and [contenteditable] elements.",
        ["fill('237', 'example value')", "fill('45', 'multi-line\\nexample')",
         "fill('a12', 'example with \"quotes\"')"],
    ),
    _prim(
        "select_option", "bid", [Param("bid", STR), Param("options", STR_OR_LIST)],
        "Select one or multiple options in a drop-down element.",
        "Select one or multiple options in a <select> element. You can specify option value or label to select. "
        "Multiple options can be selected.",
        ["select_option('a48', 'blue')", "select_option('c48', ['red', 'green'])"],
    ),
    _prim(
        "click", "bid",
        [Param("bid", STR), Param("button", BUTTON, "left"), Param("modifiers", MODIFIERS, ())],
        "Click an element.",
        "Click an element.",
        ["click('a51')", "click('b22', button='right')", "click('48', button='middle', modifiers=['Shift'])"],
    ),
    _prim(
        "dblclick", "bid",
        [Param("bid", STR), Param("button", BUTTON, "left"), Param("modifiers", MODIFIERS, ())],
        "Double-click an element.",
        "Double-click an element.",
        ["dblclick('12')", "dblclick('ca42', button='right')"],
    ),
    _prim(
        "hover", "bid", [Param("bid", STR)],
        "Hover the mouse over an element.",
        "Hover over an element.",
        ["hover('b8')"],
    ),
    _prim(
        "press", "bid", [Param("bid", STR), Param("key_comb", STR)],
        "Focus an element and press a combination of keys.",
        "Focus the matching element and press a combination of keys. It accepts the logical key names: "
        "Backspace, Tab, Delete, Escape, ArrowDown, End, Enter, Home, Insert, PageDown, PageUp, ArrowRight, "
        "ArrowUp, F1 - F12, etc. You can alternatively specify a single character you'd like to produce, and "
        "combinations such as Control+o or Control+Shift+T.",
        ["press('88', 'Backspace')", "press('a26', 'Control+a')"],
    ),
    _prim(
        "focus", "bid", [Param("bid", STR)],
        "Focus an element.",
        "Focus the matching element.",
        ["focus('b455')"],
    ),
    _prim(
        "clear", "bid", [Param("bid", STR)],
        "Clear an input field.",
        "Clear the input field.",
        ["clear('996')"],
    ),
    _prim(
        "drag_and_drop", "bid", [Param("from_bid", STR), Param("to_bid", STR)],
        "Drag and drop one element to another.",
        "Perform a drag & drop. Hover the element that will be dragged, press the left mouse button, move to "
        "the element that will receive the drop, and release the left mouse button.",
        ["drag_and_drop('56', '498')"],
    ),
    _prim(
        "upload_file", "bid", [Param("bid", STR), Param("file", STR_OR_LIST)],
        "Click a 'filechooser' element, then select one or multiple input files for upload.",
        "Click an element and wait for a 'filechooser' event, then select one or multiple input files for "
        "upload. Relative file paths are resolved relative to the current working directory.",
        ["upload_file('572', 'my_receipt.pdf')", "upload_file('63', ['/tmp/file.txt', '/tmp/data.csv'])"],
    ),
    _prim(
        "mouse_move", "coord", [Param("x", FLOAT), Param("y", FLOAT)],
        "Move the mouse to a location.",
        "Move the mouse to a location. Uses absolute client coordinates in pixels.",
        ["mouse_move(65.2, 158.5)"],
    ),
    _prim(
        "mouse_down", "coord", [Param("x", FLOAT), Param("y", FLOAT), Param("button", BUTTON, "left")],
        "Move the mouse then press and hold a button.",
        "Move the mouse to a location then press and hold a mouse button.",
        ["mouse_down(132, 311)"],
    ),
    _prim(
        "mouse_up", "coord", [Param("x", FLOAT), Param("y", FLOAT), Param("button", BUTTON, "left")],
        "Move the mouse then release a button.",
        "Move the mouse to a location then release a mouse button.",
        ["mouse_up(132, 311)"],
    ),
    _prim(
        "mouse_click", "coord", [Param("x", FLOAT), Param("y", FLOAT), Param("button", BUTTON, "left")],
        "Move the mouse and click a button.",
        "Move the mouse to a location and click a mouse button.",
        ["mouse_click(887.2, 68)", "mouse_click(x=121, y=197)"],
    ),
    _prim(
        "mouse_dblclick", "coord", [Param("x", FLOAT), Param("y", FLOAT), Param("button", BUTTON, "left")],
        "Move the mouse and double-click a button.",
        "Move the mouse to a location and double-click a mouse button.",
        ["mouse_dblclick(5, 236)"],
    ),
    _prim(
        "mouse_drag_and_drop", "coord",
        [Param("from_x", FLOAT), Param("from_y", FLOAT), Param("to_x", FLOAT), Param("to_y", FLOAT)],
        "Drag and drop from a location to a location.",
        "Drag and drop from a location to a location, using absolute client coordinates in pixels.",
        ["mouse_drag_and_drop(10.7, 325, 235.6, 24.54)"],
    ),
    _prim(
        "mouse_upload_file", "coord",
        [Param("x", FLOAT), Param("y", FLOAT), Param("file", STR_OR_LIST)],
        "Click a 'filechooser' location, then select one or multiple input files for upload.",
        "Click a location and wait for a 'filechooser' event, then select one or multiple input files for "
        "upload.",
        ["mouse_upload_file(132.1, 547, 'my_receipt.pdf')"],
    ),
    _prim(
        "keyboard_down", "coord", [Param("key", STR)],
        "Press and holds a keyboard key.",
        "Press and hold a keyboard key.",
        ["keyboard_down('Shift')"],
    ),
    _prim(
        "keyboard_up", "coord", [Param("key", STR)],
        "Release a keyboard key.",
        "Release a previously held keyboard key.",
        ["keyboard_up('Shift')"],
    ),
    _prim(
        "keyboard_press", "coord", [Param("key_comb", STR)],
        "Press a combination of keys.",
        "Press a combination of keys on the currently focused element.",
        ["keyboard_press('Enter')", "keyboard_press('Control+a')"],
    ),
    _prim(
        "keyboard_type", "coord", [Param("text", STR)],
        "Types a string of text through the keyboard.",
        "Types a string of text through the keyboard, key by key, into the focused element.",
        ["keyboard_type('Hello world!')"],
    ),
    _prim(
        "keyboard_insert_text", "coord", [Param("text", STR)],
        "Insert a string of text in the currently focused element.",
        "Insert a string of text in the currently focused element in one shot.",
        ["keyboard_insert_text('Hello world!')"],
    ),
    _prim(
        "tab_close", "tab", [],
        "Close the current tab.",
        "Close the current tab.",
        ["tab_close()"],
    ),
    _prim(
        "tab_focus", "tab", [Param("index", INT)],
        "Bring a tab to front (activate tab).",
        "Bring tab to front (activate tab) by its index among the open pages.",
        ["tab_focus(2)"],
    ),
    _prim(
        "new_tab", "tab", [],
        "Open a new tab.",
        "Open a new tab. It will become the active one.",
        ["new_tab()"],
    ),
    _prim(
        "go_back", "nav", [],
        "Navigate to the previous page in history.",
        "Navigate to the previous page in history.",
        ["go_back()"],
    ),
    _prim(
        "go_forward", "nav", [],
        "Navigate to the next page in history.",
        "Navigate to the next page in history.",
        ["go_forward()"],
    ),
    _prim(
        "goto", "nav", [Param("url", STR)],
        "Navigate to a url.",
        "Navigate to a url, in the current tab.",
        ["goto('http://www.example.com')"],
    ),
)

_BY_NAME = {p.name: p for p in _CATALOG}

FINAL_EXAMPLE = "fill('a12', 'example with \"quotes\"')"
SINGLE_ACTION_NOTE = "Only a single action can be provided at once. Example:\n" + FINAL_EXAMPLE


def catalog() -> tuple[ActionPrimitive, ...]:
    """The complete, immutable primitive catalog."""
    return _CATALOG


def get_primitive(name: str) -> ActionPrimitive | None:
    return _BY_NAME.get(name)


@dataclass(frozen=True)
class ActionSetConfig:
    enabled_categories: frozenset[str] = frozenset(CATEGORIES)
    enabled_overrides: frozenset[str] | None = None
    multi_action: bool = False
    long_description: bool = False
    individual_examples: bool = False

    def __post_init__(self):
        unknown = set(self.enabled_categories) - set(CATEGORIES)
        if unknown:
            raise ConfigurationError(f"unknown action categories: {sorted(unknown)}")
        if self.multi_action:
            raise ConfigurationError("multi_action mode is not supported in v1")
        if not self.enabled_names():
            raise ConfigurationError("action set configuration enables no primitives")

    def enabled_names(self) -> frozenset[str]:
        if self.enabled_overrides is not None:
            unknown = set(self.enabled_overrides) - set(_BY_NAME)
            if unknown:
                raise ConfigurationError(f"unknown primitives in override list: {sorted(unknown)}")
            return frozenset(self.enabled_overrides)
        return frozenset(p.name for p in _CATALOG if p.category in self.enabled_categories)


@dataclass(frozen=True)
class ParsedAction:
    primitive: ActionPrimitive
    args: tuple
    raw_text: str

    def __eq__(self, other):
        if not isinstance(other, ParsedAction):
            return NotImplemented
        # raw_text is provenance, not identity
        return self.primitive.name == other.primitive.name and self.args == other.args

    def __hash__(self):
        return hash((self.primitive.name, self.args))

    def arg(self, name: str):
        for param, value in zip(self.primitive.params, self.args):
            if param.name == name:
                return value
        raise KeyError(name)

    def canonical(self) -> str:
        """Stable rendering: required args positional, non-default options as
        keywords, strings double-quoted. Re-parsing it yields an equal action."""
        parts = []
        for param, value in zip(self.primitive.params, self.args):
            if param.required:
                parts.append(_render_value(value))
            elif value != _normalize_default(param.default):
                parts.append(f"{param.name}={_render_value(value)}")
        return f"{self.primitive.name}({', '.join(parts)})"


@dataclass
class ParseError:
    kind: str  # syntax | unknown_primitive | disabled_primitive | arity | type | multiple_actions
    message: str
    span: tuple[int, int]

    def __str__(self):
        return self.message


def _normalize_default(default):
    if isinstance(default, (list, tuple)):
        return tuple(default)
    return default


def _render_signature_default(default) -> str:
    if isinstance(default, (list, tuple)):
        return "[" + ", ".join(_render_signature_default(v) for v in default) + "]"
    if isinstance(default, float):
        return f"{default:g}"
    return repr(default)


def _render_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_render_value(v) for v in value) + "]"
    if isinstance(value, str):
        escaped = (
            value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    if isinstance(value, bool):
        return repr(value)
    if isinstance(value, float):
        return f"{value:g}"
    return repr(value)


# -- tokenizer ------------------------------------------------------------

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?")
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | string | number | punct | end
    value: str | float
    start: int
    end: int


class _ParseFailure(Exception):
    def __init__(self, kind: str, message: str, span: tuple[int, int]):
        super().__init__(message)
        self.error = ParseError(kind, message, span)


def _syntax(message: str, start: int, end: int) -> _ParseFailure:
    return _ParseFailure("syntax", message, (start, end))


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()[],=":
            tokens.append(_Token("punct", c, i, i + 1))
            i += 1
            continue
        if c in "'\"":
            quote = c
            j = i + 1
            out = []
            while j < n:
                ch = text[j]
                if ch == "\\":
                    if j + 1 >= n:
                        raise _syntax("unterminated escape sequence", j, n)
                    esc = text[j + 1]
                    if esc not in _ESCAPES:
                        raise _syntax(f"unsupported escape sequence '\\{esc}'", j, j + 2)
                    out.append(_ESCAPES[esc])
                    j += 2
                elif ch == quote:
                    tokens.append(_Token("string", "".join(out), i, j + 1))
                    break
                else:
                    out.append(ch)
                    j += 1
            else:
                raise _syntax("unterminated string literal", i, n)
            i = j + 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m and (c.isdigit() or (c == "-" and m.end() > i + 1)):
            tokens.append(_Token("number", float(m.group()), i, m.end()))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(_Token("ident", m.group(), i, m.end()))
            i = m.end()
            continue
        raise _syntax(f"unexpected character {c!r}", i, i + 1)
    tokens.append(_Token("end", "", n, n))
    return tokens


# -- parser ---------------------------------------------------------------

MAX_ACTION_TEXT_BYTES = 64 * 1024


def parse_action(text: str, config: ActionSetConfig | None = None) -> ParsedAction | ParseError:
    """Parse one action call; returns a ParsedAction or a typed ParseError.

    Never raises on any input (up to 64 KiB): every deviation from the
    grammar or the primitive signatures comes back as a ParseError whose
    message is exactly what the environment surfaces as error feedback.
    """
    config = config or ActionSetConfig()
    if len(text.encode("utf-8", errors="replace")) > MAX_ACTION_TEXT_BYTES:
        return ParseError("syntax", "action text exceeds the 64 KiB limit", (0, len(text)))
    try:
        return _parse(text, config)
    except _ParseFailure as failure:
        return failure.error


def _parse(text: str, config: ActionSetConfig) -> ParsedAction:
    tokens = _tokenize(text)
    pos = 0

    def peek() -> _Token:
        return tokens[pos]

    def take() -> _Token:
        nonlocal pos
        token = tokens[pos]
        pos += 1
        return token

    head = take()
    if head.kind != "ident":
        raise _syntax("expected an action call like click('42')", head.start, head.end)
    opener = take()
    if not (opener.kind == "punct" and opener.value == "("):
        raise _syntax(f"expected '(' after {head.value!r}", opener.start, opener.end)

    positional: list[tuple[object, _Token]] = []
    keywords: dict[str, tuple[object, _Token]] = {}
    kw_order: list[str] = []

    def parse_value(token: _Token):
        if token.kind in ("string", "number"):
            return token.value
        if token.kind == "ident":
            return _BareWord(token.value)
        if token.kind == "punct" and token.value == "[":
            items = []
            while True:
                item = take()
                if item.kind == "punct" and item.value == "]" and not items:
                    break
                if item.kind == "string":
                    items.append(item.value)
                elif item.kind == "ident":
                    items.append(_BareWord(item.value))
                else:
                    raise _syntax("lists may only contain strings", item.start, item.end)
                sep = take()
                if sep.kind == "punct" and sep.value == "]":
                    break
                if not (sep.kind == "punct" and sep.value == ","):
                    raise _syntax("expected ',' or ']' in list", sep.start, sep.end)
            return tuple(items)
        raise _syntax("expected a string, number, or list value", token.start, token.end)

    token = take()
    if not (token.kind == "punct" and token.value == ")"):
        while True:
            if token.kind == "ident" and peek().kind == "punct" and peek().value == "=":
                name_token = token
                take()  # '='
                value_token = take()
                value = parse_value(value_token)
                if name_token.value in keywords:
                    raise _ParseFailure(
                        "arity",
                        f"duplicate keyword argument {name_token.value!r}",
                        (name_token.start, name_token.end),
                    )
                keywords[str(name_token.value)] = (value, value_token)
                kw_order.append(str(name_token.value))
            else:
                if keywords:
                    raise _syntax(
                        "positional argument follows keyword argument", token.start, token.end
                    )
                positional.append((parse_value(token), token))
            token = take()
            if token.kind == "punct" and token.value == ")":
                break
            if not (token.kind == "punct" and token.value == ","):
                raise _syntax("expected ',' or ')' in argument list", token.start, token.end)
            token = take()

    trailer = take()
    if trailer.kind != "end":
        if trailer.kind == "ident" and peek().kind == "punct" and peek().value == "(":
            raise _ParseFailure(
                "multiple_actions",
                "only a single action can be provided at once",
                (trailer.start, len(text)),
            )
        raise _syntax("unexpected text after the action call", trailer.start, len(text))

    return _validate(str(head.value), positional, keywords, kw_order, (head.start, head.end), text, config)


class _BareWord:
    """An unquoted identifier used as a value; only valid for enum params."""

    def __init__(self, word: str):
        self.word = word


def _validate(name, positional, keywords, kw_order, name_span, text, config) -> ParsedAction:
    primitive = _BY_NAME.get(name)
    if primitive is None:
        raise _ParseFailure("unknown_primitive", f"unknown action {name!r}", name_span)
    if name not in config.enabled_names():
        raise _ParseFailure(
            "disabled_primitive", f"action {name!r} is not enabled in this action set", name_span
        )

    params = primitive.params
    if len(positional) > len(params):
        raise _ParseFailure(
            "arity",
            f"{name}() takes at most {len(params)} arguments ({len(positional)} given)",
            name_span,
        )
    by_name = {p.name: p for p in params}
    for kw in kw_order:
        if kw not in by_name:
            raise _ParseFailure("arity", f"{name}() got an unexpected keyword argument {kw!r}", name_span)

    values: dict[str, tuple[object, _Token]] = {}
    for param, (value, token) in zip(params, positional):
        values[param.name] = (value, token)
    for kw in kw_order:
        if kw in values:
            raise _ParseFailure("arity", f"{name}() got multiple values for argument {kw!r}", name_span)
        values[kw] = keywords[kw]

    final: list[object] = []
    for param in params:
        if param.name in values:
            value, token = values[param.name]
            final.append(_coerce(name, param, value, token))
        elif param.required:
            raise _ParseFailure(
                "arity", f"{name}() missing required argument {param.name!r}", name_span
            )
        else:
            final.append(_normalize_default(param.default))
    return ParsedAction(primitive=primitive, args=tuple(final), raw_text=text)


def _type_error(name: str, param: Param, token: _Token, expected: str) -> _ParseFailure:
    return _ParseFailure(
        "type",
        f"{name}(): argument {param.name!r} must be {expected}",
        (token.start, token.end),
    )


def _coerce(name: str, param: Param, value, token: _Token):
    kind = param.type.kind
    if kind == "str":
        if isinstance(value, str):
            return value
        raise _type_error(name, param, token, "a quoted string")
    if kind == "float":
        if isinstance(value, float):
            return value
        raise _type_error(name, param, token, "a number")
    if kind == "int":
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise _type_error(name, param, token, "an integer")
    if kind == "str_or_list":
        if isinstance(value, str):
            return value
        if isinstance(value, tuple):
            items = [v.word if isinstance(v, _BareWord) else v for v in value]
            if all(isinstance(v, str) for v in items):
                return tuple(items)
        raise _type_error(name, param, token, "a string or a list of strings")
    if kind == "enum":
        word = value.word if isinstance(value, _BareWord) else value
        if isinstance(word, str) and word in param.type.values:
            return word
        raise _type_error(name, param, token, f"one of {list(param.type.values)}")
    if kind == "enum_list":
        if isinstance(value, tuple):
            items = [v.word if isinstance(v, _BareWord) else v for v in value]
            if all(isinstance(v, str) and v in param.type.values for v in items):
                return tuple(items)
        raise _type_error(name, param, token, f"a list drawn from {list(param.type.values)}")
    raise AssertionError(kind)


# -- action-space description ----------------------------------------------


def describe(config: ActionSetConfig) -> str:
    """Textual description of the enabled action space, shown to agents."""
    enabled = config.enabled_names()
    primitives = [p for p in _CATALOG if p.name in enabled]
    verbose = config.long_description or config.individual_examples

    blocks: list[str] = []
    for p in primitives:
        lines = [p.signature()]
        if config.long_description:
            lines.append(f"    Description: {p.long_description}")
        if config.individual_examples and p.usage_examples:
            lines.append("    Examples:")
            for example in p.usage_examples:
                lines.append(f"        {example}")
        blocks.append("\n".join(lines))

    header = f"{len(primitives)} different types of actions are available.\n"
    if verbose:
        body = "\n\n".join(blocks)
        return f"{header}\n{body}\n\n{SINGLE_ACTION_NOTE}"
    body = "\n".join(blocks)
    return f"{header}\n{body}\n{SINGLE_ACTION_NOTE}"


# -- mapping to backend commands ---------------------------------------------


def _as_list(value) -> list[str]:
    if isinstance(value, str):
        return [value]
    return list(value)


def map_to_commands(action: ParsedAction) -> list[BackendCommand]:
    """Translate a validated action into backend commands. Total over the
    catalog; chat primitives become AppendChat commands handled by the env."""
    a = action.arg
    name = action.primitive.name
    if name == "noop":
        return [cmd.Wait(ms=a("wait_ms"))]
    if name == "send_msg_to_user":
        return [cmd.AppendChat(role="assistant", text=a("text"))]
    if name == "report_infeasible":
        return [cmd.AppendChat(role="infeasible", text=a("reason"))]
    if name == "scroll":
        return [cmd.Scroll(dx=a("delta_x"), dy=a("delta_y"))]
    if name == "fill":
        return [cmd.Fill(bid=a("bid"), value=a("value"))]
    if name == "select_option":
        return [cmd.SelectOption(bid=a("bid"), options=_as_list(a("options")))]
    if name == "click":
        return [cmd.Click(bid=a("bid"), button=a("button"), modifiers=list(a("modifiers")))]
    if name == "dblclick":
        return [cmd.DblClick(bid=a("bid"), button=a("button"), modifiers=list(a("modifiers")))]
    if name == "hover":
        return [cmd.Hover(bid=a("bid"))]
    if name == "press":
        return [cmd.Press(bid=a("bid"), key_comb=a("key_comb"))]
    if name == "focus":
        return [cmd.Focus(bid=a("bid"))]
    if name == "clear":
        return [cmd.Clear(bid=a("bid"))]
    if name == "drag_and_drop":
        return [cmd.DragAndDrop(from_bid=a("from_bid"), to_bid=a("to_bid"))]
    if name == "upload_file":
        return [cmd.UploadFile(bid=a("bid"), files=_as_list(a("file")))]
    if name == "mouse_move":
        return [cmd.MouseMove(x=a("x"), y=a("y"))]
    if name == "mouse_down":
        return [cmd.MouseDown(x=a("x"), y=a("y"), button=a("button"))]
    if name == "mouse_up":
        return [cmd.MouseUp(x=a("x"), y=a("y"), button=a("button"))]
    if name == "mouse_click":
        return [cmd.MouseClick(x=a("x"), y=a("y"), button=a("button"))]
    if name == "mouse_dblclick":
        return [cmd.MouseDblClick(x=a("x"), y=a("y"), button=a("button"))]
    if name == "mouse_drag_and_drop":
        return [cmd.MouseDragAndDrop(from_x=a("from_x"), from_y=a("from_y"), to_x=a("to_x"), to_y=a("to_y"))]
    if name == "mouse_upload_file":
        return [cmd.MouseUploadFile(x=a("x"), y=a("y"), files=_as_list(a("file")))]
    if name == "keyboard_down":
        return [cmd.KeyboardDown(key=a("key"))]
    if name == "keyboard_up":
        return [cmd.KeyboardUp(key=a("key"))]
    if name == "keyboard_press":
        return [cmd.KeyboardPress(key_comb=a("key_comb"))]
    if name == "keyboard_type":
        return [cmd.KeyboardType(text=a("text"))]
    if name == "keyboard_insert_text":
        return [cmd.KeyboardInsertText(text=a("text"))]
    if name == "tab_close":
        return [cmd.TabClose()]
    if name == "tab_focus":
        return [cmd.TabFocus(index=a("index"))]
    if name == "new_tab":
        return [cmd.NewTab()]
    if name == "go_back":
        return [cmd.GoBack()]
    if name == "go_forward":
        return [cmd.GoForward()]
    if name == "goto":
        return [cmd.Goto(url=a("url"))]
    raise AssertionError(f"unmapped primitive {name}")
