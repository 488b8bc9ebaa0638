from __future__ import annotations

from collections.abc import Iterable, Sequence
from fractions import Fraction

from rich.color import Color
from rich.console import Group, RenderableType
from rich.style import Style
from rich.table import Table
from rich.text import Text

STYLE_HEADER = Style(color=Color.from_rgb(199, 125, 187), bold=True)
STYLE_KEYWORDS = Style(color=Color.from_rgb(207, 142, 109))
STYLE_NUMBER = Style(color=Color.from_rgb(42, 172, 184))
STYLE_OK = Style(color=Color.from_rgb(106, 171, 115))
STYLE_FAIL = Style(color=Color.from_rgb(220, 80, 80), bold=True)


class Inline:
    def __init__(self, *renderables: RenderableType) -> None:
        self.renderables: list[RenderableType] = []
        for renderable in renderables:
            match renderable:
                case str() as text:
                    self.renderables.append(Text(text, end=""))
                case Text() as text:
                    text = text.copy()
                    text.end = ""
                    self.renderables.append(text)
                case _:
                    self.renderables.append(renderable)

    def __rich__(self) -> Group:
        return Group(*self.renderables)


def styled_value(value: object) -> Text:
    match value:
        case bool():
            return Text("yes" if value else "no", style=STYLE_OK if value else STYLE_FAIL)
        case int() | Fraction():
            return Text(str(value), style=STYLE_NUMBER)
        case None:
            return Text("-", style=STYLE_KEYWORDS)
        case _:
            return Text(str(value))


def key_value_table(title: str, rows: Iterable[tuple[str, object]]) -> Table:
    table = Table(title=title, show_header=False, title_style=STYLE_HEADER)
    table.add_column(style=STYLE_KEYWORDS)
    table.add_column()
    for key, value in rows:
        table.add_row(key, styled_value(value))
    return table


def grid_table(title: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Table:
    table = Table(title=title, title_style=STYLE_HEADER, header_style=STYLE_HEADER)
    for name in header:
        table.add_column(name, justify="right")
    for row in rows:
        table.add_row(*(styled_value(value) for value in row))
    return table
