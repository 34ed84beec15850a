import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webgym import commands as cmd
from webgym.actions import (
    ActionSetConfig,
    ParseError,
    ParsedAction,
    catalog,
    describe,
    get_primitive,
    map_to_commands,
    parse_action,
)
from webgym.errors import ConfigurationError

FULL = ActionSetConfig()


def parsed(text, config=FULL) -> ParsedAction:
    result = parse_action(text, config)
    assert isinstance(result, ParsedAction), result
    return result


def error(text, config=FULL) -> ParseError:
    result = parse_action(text, config)
    assert isinstance(result, ParseError), result
    return result


# -- catalog -------------------------------------------------------------


def test_catalog_size_and_categories():
    prims = catalog()
    assert len(prims) == 32
    by_category = {}
    for p in prims:
        by_category.setdefault(p.category, []).append(p.name)
    assert set(by_category) == {"bid", "coord", "tab", "nav", "misc"}
    assert len(by_category["bid"]) == 10
    assert len(by_category["coord"]) == 12
    assert len(by_category["tab"]) == 3
    assert len(by_category["nav"]) == 3
    assert len(by_category["misc"]) == 4


def test_catalog_contains_expected_signatures():
    drag = get_primitive("drag_and_drop")
    assert drag.category == "bid"
    assert [p.name for p in drag.params] == ["from_bid", "to_bid"]
    infeasible = get_primitive("report_infeasible")
    assert infeasible.category == "misc"
    assert [p.name for p in infeasible.params] == ["reason"]
    noop = get_primitive("noop")
    assert noop.params[0].default == 1000.0
    click = get_primitive("click")
    assert click.params[1].default == "left"
    assert click.params[2].default == ()


def test_names_unique():
    names = [p.name for p in catalog()]
    assert len(names) == len(set(names))


# -- parsing the documented example strings --------------------------------


def test_parse_click_with_keyword_button():
    action = parsed("click('b22', button='right')")
    assert action.primitive.name == "click"
    assert action.args == ("b22", "right", ())


def test_parse_mouse_click_keywords():
    action = parsed("mouse_click(x=121, y=197)")
    assert action.primitive.name == "mouse_click"
    assert action.args == (121.0, 197.0, "left")


def test_parse_press_double_quoted():
    action = parsed('press("169", "Enter")')
    assert action.args == ("169", "Enter")


def test_parse_fill_with_embedded_quotes():
    action = parsed("fill('a12', 'example with \"quotes\"')")
    assert action.args == ("a12", 'example with "quotes"')


def test_parse_fill_with_newline_escape():
    action = parsed("fill('45', 'multi-line\\nexample')")
    assert action.args == ("45", "multi-line\nexample")


def test_parse_negative_floats():
    action = parsed("scroll(-50.2, -100.5)")
    assert action.args == (-50.2, -100.5)


def test_parse_modifier_list():
    action = parsed("click('48', button='middle', modifiers=['Shift'])")
    assert action.args == ("48", "middle", ("Shift",))


def test_parse_select_option_list():
    action = parsed("select_option('c48', ['red', 'green'])")
    assert action.args == ("c48", ("red", "green"))


def test_parse_bare_enum_keyword_value():
    action = parsed("click('b22', button=right)")
    assert action.arg("button") == "right"


def test_whitespace_and_newlines_tolerated():
    action = parsed("  click(\n    '42'\n  )\n")
    assert action.args == ("42", "left", ())


def test_all_catalog_usage_examples_parse():
    for primitive in catalog():
        for example in primitive.usage_examples:
            action = parsed(example)
            assert action.primitive.name == primitive.name


# -- error taxonomy ----------------------------------------------------------


def test_unknown_primitive():
    assert error("clik('a')").kind == "unknown_primitive"


def test_disabled_primitive():
    config = ActionSetConfig(enabled_categories=frozenset({"bid", "misc"}))
    assert error("goto('local://x')", config).kind == "disabled_primitive"
    assert parsed("click('1')", config).primitive.name == "click"


def test_arity_errors():
    assert error("click()").kind == "arity"
    assert error("click('1', '2', '3', '4')").kind == "arity"
    assert error("click('1', bogus='x')").kind == "arity"
    assert error("click('1', bid='2')").kind == "arity"
    assert error("click(bid='1', bid='2')").kind == "arity"


def test_type_errors():
    assert error("click(42)").kind == "type"
    assert error("click('1', button='diagonal')").kind == "type"
    assert error("tab_focus(1.5)").kind == "type"
    assert error("scroll('a', 'b')").kind == "type"
    assert error("click('1', modifiers=['Bogus'])").kind == "type"


def test_syntax_errors():
    assert error("click('1'").kind == "syntax"
    assert error("click '1'").kind == "syntax"
    assert error("").kind == "syntax"
    assert error("click('1') and then some").kind == "syntax"
    assert error("fill('1', 'unterminated)").kind == "syntax"
    assert error("fill('1', 'bad \\q escape')").kind == "syntax"
    assert error("click('1',, '2')").kind == "syntax"


def test_multiple_actions_detected():
    err = error("click('1')\nclick('2')")
    assert err.kind == "multiple_actions"


def test_error_spans_inside_text():
    text = "click('1') trailing"
    err = error(text)
    assert 0 <= err.span[0] <= err.span[1] <= len(text)


def test_messages_are_human_readable():
    assert "unknown action" in error("zap('1')").message
    assert "missing required argument" in error("fill('1')").message


# -- config validation ---------------------------------------------------------


def test_multi_action_rejected():
    with pytest.raises(ConfigurationError):
        ActionSetConfig(multi_action=True)


def test_empty_action_set_rejected():
    with pytest.raises(ConfigurationError):
        ActionSetConfig(enabled_categories=frozenset())


def test_unknown_category_rejected():
    with pytest.raises(ConfigurationError):
        ActionSetConfig(enabled_categories=frozenset({"bogus"}))


def test_override_allow_list():
    config = ActionSetConfig(enabled_overrides=frozenset({"click", "noop"}))
    assert parsed("noop()", config).primitive.name == "noop"
    assert error("fill('1', 'x')", config).kind == "disabled_primitive"


# -- describe -------------------------------------------------------------------


def test_describe_header_counts_enabled():
    config = ActionSetConfig(enabled_categories=frozenset({"bid", "tab", "nav", "misc"}))
    text = describe(config)
    assert text.startswith("20 different types of actions are available.\n")
    assert text.rstrip().endswith("fill('a12', 'example with \"quotes\"')")
    assert "Only a single action can be provided at once." in text


DESCRIBE_20_GOLDEN = """20 different types of actions are available.

noop(wait_ms: float = 1000)
send_msg_to_user(text: str)
report_infeasible(reason: str)
scroll(delta_x: float, delta_y: float)
fill(bid: str, value: str)
select_option(bid: str, options: str | list[str])
click(bid: str, button: Literal['left', 'middle', 'right'] = 'left', modifiers: list[typing.Literal['Alt', 'Control', 'ControlOrMeta', 'Meta', 'Shift']] = [])
dblclick(bid: str, button: Literal['left', 'middle', 'right'] = 'left', modifiers: list[typing.Literal['Alt', 'Control', 'ControlOrMeta', 'Meta', 'Shift']] = [])
hover(bid: str)
press(bid: str, key_comb: str)
focus(bid: str)
clear(bid: str)
drag_and_drop(from_bid: str, to_bid: str)
upload_file(bid: str, file: str | list[str])
tab_close()
tab_focus(index: int)
new_tab()
go_back()
go_forward()
goto(url: str)
Only a single action can be provided at once. Example:
fill('a12', 'example with "quotes"')"""


def test_describe_compact_20_action_golden():
    config = ActionSetConfig(enabled_categories=frozenset({"bid", "tab", "nav", "misc"}))
    assert describe(config) == DESCRIBE_20_GOLDEN


def test_describe_compact_is_signatures_only():
    config = ActionSetConfig(enabled_categories=frozenset({"bid", "tab", "nav", "misc"}))
    text = describe(config)
    assert "noop(wait_ms: float = 1000)" in text
    assert "select_option(bid: str, options: str | list[str])" in text
    assert "Description:" not in text
    assert "Examples:" not in text


def test_describe_long_form_blocks():
    config = ActionSetConfig(long_description=True, individual_examples=True)
    text = describe(config)
    assert text.startswith("32 different types of actions are available.")
    assert "    Description: Click an element." in text
    assert "        click('b22', button='right')" in text


def test_describe_excludes_disabled_names():
    config = ActionSetConfig(enabled_categories=frozenset({"bid", "misc"}))
    text = describe(config)
    assert "goto(url" not in text
    assert "mouse_click(" not in text


def test_describe_signatures_reparse():
    config = ActionSetConfig(long_description=False, individual_examples=False)
    placeholder = {"str": "'x'", "float": "1", "int": "0", "str_or_list": "'x'", "enum": None, "enum_list": None}
    for primitive in catalog():
        args = []
        for param in primitive.params:
            if not param.required:
                continue
            args.append(placeholder[param.type.kind] or f"'{param.type.values[0]}'")
        action = parsed(f"{primitive.name}({', '.join(args)})")
        assert action.primitive.name == primitive.name


# -- canonical round-trip ----------------------------------------------------------


def canonical_fixed_point(text: str) -> None:
    first = parsed(text)
    canon = first.canonical()
    second = parsed(canon)
    assert second == first
    assert second.canonical() == canon


@pytest.mark.parametrize(
    "text",
    [
        "click('b22', button='right')",
        "click('48', button='middle', modifiers=['Shift'])",
        "fill('a12', 'example with \"quotes\"')",
        "fill('45', 'multi-line\\nexample')",
        "scroll(-50.2, -100.5)",
        "select_option('c48', ['red', 'green'])",
        "noop()",
        "noop(500)",
        "press(\"169\", \"Enter\")",
        "mouse_click(x=121, y=197)",
        "tab_focus(2)",
        "send_msg_to_user('done, with trailing spaces   ')",
    ],
)
def test_canonical_round_trip(text):
    canonical_fixed_point(text)


def test_canonical_omits_defaults():
    assert parsed("click('5', button='left')").canonical() == 'click("5")'
    assert parsed("noop(1000)").canonical() == "noop()"
    assert parsed("noop(2000)").canonical() == "noop(wait_ms=2000)"


# -- mapping -----------------------------------------------------------------------


def test_map_click_to_command():
    commands = map_to_commands(parsed('click("169")'))
    assert commands == [cmd.Click(bid="169", button="left", modifiers=[])]


def test_map_noop_to_wait_default():
    commands = map_to_commands(parsed("noop()"))
    assert commands == [cmd.Wait(ms=1000.0)]


def test_map_send_msg_to_chat_command():
    commands = map_to_commands(parsed("send_msg_to_user('hello')"))
    assert commands == [cmd.AppendChat(role="assistant", text="hello")]


def test_map_report_infeasible_to_infeasible_chat():
    commands = map_to_commands(parsed("report_infeasible('why')"))
    assert commands == [cmd.AppendChat(role="infeasible", text="why")]


def test_map_is_total_over_catalog():
    samples = {
        "str": "'x'",
        "float": "3",
        "int": "1",
        "str_or_list": "['a']",
        "enum": "'left'",
        "enum_list": "['Shift']",
    }
    for primitive in catalog():
        args = ", ".join(samples[p.type.kind] for p in primitive.params)
        action = parsed(f"{primitive.name}({args})")
        commands = map_to_commands(action)
        assert len(commands) == 1


def test_map_normalizes_scalar_file_and_options_to_lists():
    assert map_to_commands(parsed("select_option('1', 'only')"))[0].options == ["only"]
    assert map_to_commands(parsed("upload_file('1', 'a.txt')"))[0].files == ["a.txt"]


# -- totality under fuzz -------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=200))
def test_parse_never_raises_on_arbitrary_text(text):
    result = parse_action(text, FULL)
    assert isinstance(result, (ParsedAction, ParseError))


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=200))
def test_parse_never_raises_on_binary_soup(blob):
    text = blob.decode("latin-1")
    result = parse_action(text, FULL)
    assert isinstance(result, (ParsedAction, ParseError))


def test_oversized_input_is_rejected_not_crashed():
    result = parse_action("noop(" + " " * (70 * 1024) + ")")
    assert isinstance(result, ParseError)
    assert result.kind == "syntax"


@settings(max_examples=150, deadline=None)
@given(
    name=st.sampled_from([p.name for p in catalog()]),
    strings=st.lists(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=20), max_size=3),
)
def test_round_trip_on_generated_string_actions(name, strings):
    primitive = get_primitive(name)
    args = []
    for i, param in enumerate(primitive.params):
        if not param.required:
            continue
        if param.type.kind == "str":
            value = strings[i % len(strings)] if strings else "v"
            escaped = (
                value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
            )
            args.append(f'"{escaped}"')
        elif param.type.kind == "float":
            args.append("1.5")
        elif param.type.kind == "int":
            args.append("2")
        elif param.type.kind == "str_or_list":
            args.append('"v"')
        elif param.type.kind == "enum":
            args.append(f"'{param.type.values[0]}'")
        else:
            args.append("[]")
    text = f"{name}({', '.join(args)})"
    result = parse_action(text, FULL)
    if isinstance(result, ParsedAction):
        canonical_fixed_point(text)
