"""
Fitness-versus-generation charts rendered to PNG.
"""
import math
import os
from typing import Sequence, Tuple

from PIL import Image, ImageDraw, ImageFont

from .models import GenerationStats

BACKGROUND = (255, 255, 255)
AXIS_COLOR = (60, 60, 60)
GRID_COLOR = (225, 225, 225)
SERIES_COLORS = {
    "best": (200, 60, 30),
    "mean": (40, 110, 200),
}
MARGIN = (70, 30, 20, 50)  # left, top, right, bottom


def _finite(values: Sequence[float]) -> list[float]:
    return [v for v in values if v is not None and math.isfinite(v)]


def _value_range(series: dict[str, Sequence[float]]) -> Tuple[float, float]:
    values = [v for points in series.values() for v in _finite(points)]
    if not values:
        return 0.0, 1.0
    low, high = min(values), max(values)
    if low == high:
        pad = abs(low) * 0.05 or 1.0
        return low - pad, high + pad
    pad = (high - low) * 0.05
    return low - pad, high + pad


def plot_fitness_curve(
    history: Sequence[GenerationStats],
    metric: str,
    size: Tuple[int, int] = (640, 400)
) -> Image.Image:
    """
    Draw best and mean population fitness per generation.

    Args:
        history: Per-generation statistics of a run
        metric: Fitness metric name for the axis label
        size: Image size in pixels

    Returns:
        PIL Image of the chart
    """
    width, height = size
    left, top, right, bottom = MARGIN
    image = Image.new("RGB", size, BACKGROUND)
    draw = ImageDraw.Draw(image)
    font = ImageFont.load_default()

    series = {
        "best": [s.best_fitness for s in history],
        "mean": [s.mean_fitness for s in history],
    }
    low, high = _value_range(series)
    n = max(len(history) - 1, 1)
    plot_w = width - left - right
    plot_h = height - top - bottom

    def to_xy(index: int, value: float) -> Tuple[float, float]:
        x = left + plot_w * index / n
        y = top + plot_h * (1.0 - (value - low) / (high - low))
        return x, y

    for k in range(5):
        value = low + (high - low) * k / 4
        _, y = to_xy(0, value)
        draw.line([(left, y), (width - right, y)], fill=GRID_COLOR)
        draw.text((4, y - 6), f"{value:.4g}", fill=AXIS_COLOR, font=font)

    draw.line([(left, top), (left, height - bottom)], fill=AXIS_COLOR)
    draw.line([(left, height - bottom), (width - right, height - bottom)], fill=AXIS_COLOR)
    draw.text((left, height - bottom + 8), "0", fill=AXIS_COLOR, font=font)
    draw.text((width - right - 30, height - bottom + 8), str(max(len(history) - 1, 0)), fill=AXIS_COLOR, font=font)
    draw.text((left + plot_w // 2 - 30, height - 20), "generation", fill=AXIS_COLOR, font=font)
    draw.text((left, 8), metric, fill=AXIS_COLOR, font=font)

    for legend_row, (name, values) in enumerate(series.items()):
        color = SERIES_COLORS[name]
        points = [to_xy(i, v) for i, v in enumerate(values) if v is not None and math.isfinite(v)]
        if len(points) > 1:
            draw.line(points, fill=color, width=2)
        elif points:
            x, y = points[0]
            draw.ellipse([x - 2, y - 2, x + 2, y + 2], fill=color)
        lx = width - right - 60
        ly = top + 4 + 14 * legend_row
        draw.line([(lx, ly + 6), (lx + 16, ly + 6)], fill=color, width=2)
        draw.text((lx + 20, ly), name, fill=AXIS_COLOR, font=font)

    return image


def save_fitness_curve(image: Image.Image, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    image.save(path, "PNG")
