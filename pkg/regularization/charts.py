"""SVG line charts rendered through the Django template engine."""
import math

from django.template.loader import render_to_string

WIDTH = 640
HEIGHT = 400
MARGIN = {"left": 70, "right": 160, "top": 40, "bottom": 50}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _x_ticks(x_max):
    if x_max <= 1:
        return [1]
    step = max(1, math.ceil(x_max / 6))
    return list(range(step, x_max + 1, step)) if step > 1 else list(range(1, x_max + 1))


def _panel(series, title, x_label, y_label, offset):
    positive = [value for _, values in series for value in values if value > 0.0]
    x_max = max((len(values) for _, values in series), default=1)
    if positive:
        y_low = math.floor(math.log10(min(positive)))
        y_high = math.ceil(math.log10(max(positive)))
    else:
        y_low, y_high = 0, 1
    if y_high == y_low:
        y_high = y_low + 1

    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(index):
        span = max(x_max - 1, 1)
        return MARGIN["left"] + plot_w * (index - 1) / span

    def sy(value):
        return MARGIN["top"] + plot_h * (y_high - math.log10(value)) / (y_high - y_low)

    lines = []
    for number, (label, values) in enumerate(series):
        points = " ".join(
            f"{sx(index):.2f},{sy(value):.2f}"
            for index, value in enumerate(values, start=1)
            if value > 0.0
        )
        lines.append({
            "label": label,
            "color": PALETTE[number % len(PALETTE)],
            "points": points,
            "legend_y": MARGIN["top"] + 18 * number + 10,
        })

    return {
        "offset": offset,
        "title": title,
        "x_label": x_label,
        "y_label": y_label,
        "left": MARGIN["left"],
        "top": MARGIN["top"],
        "right": WIDTH - MARGIN["right"],
        "bottom": HEIGHT - MARGIN["bottom"],
        "label_y": HEIGHT - 12,
        "legend_x": WIDTH - MARGIN["right"] + 12,
        "mid_x": MARGIN["left"] + plot_w / 2,
        "mid_y": MARGIN["top"] + plot_h / 2,
        "x_ticks": [{"x": f"{sx(tick):.2f}", "label": tick} for tick in _x_ticks(x_max)],
        "y_ticks": [
            {"y": f"{sy(10.0 ** power):.2f}", "label": f"1e{power}"}
            for power in range(y_low, y_high + 1)
        ],
        "series": lines,
    }


def stacked_chart(panels):
    """
    Render panels stacked vertically in one SVG.

    Each panel is a (series, title, x_label, y_label) tuple; series are
    (label, values) pairs with values indexed from 1, drawn on a log10 y axis.
    Non-positive values have no logarithm and are skipped.
    """
    context = {
        "width": WIDTH,
        "height": HEIGHT * len(panels),
        "panels": [_panel(*panel, offset=HEIGHT * number) for number, panel in enumerate(panels)],
    }
    return render_to_string("regularization/line_chart.svg", context)


def line_chart(series, title, x_label, y_label):
    return stacked_chart([(series, title, x_label, y_label)])
