"""
Series Export

CSV (``bin_start_s,group,bytes,packets``) with an exact re-import, and a
static SVG step plot of bit/s over time drawn with svgwrite.
"""

import logging
from decimal import Decimal
from pathlib import Path

import numpy as np
import pandas as pd
import svgwrite
from django.conf import settings

from capture.exceptions import CaptureWriteError
from core.units import NS_PER_SECOND

from .timeseries import TimeSeries, normalize_frame

logger = logging.getLogger('analysis')

CSV_COLUMNS = ['bin_start_s', 'group', 'bytes', 'packets']

# Colors
COLOR_TEXT = '#6b7280'
COLOR_TEXT_DIM = '#9ca3af'
COLOR_AXIS = '#6b7280'
COLOR_GRID = '#e5e7eb'
COLOR_EXPECTED = '#111827'
SERIES_COLORS = ['#2563eb', '#dc2626', '#16a34a', '#d97706', '#7c3aed', '#0891b2', '#db2777', '#65a30d']


def format_bin_start(ns: int) -> str:
    """Exact decimal seconds of a nanosecond instant."""
    sec, rem = divmod(ns, NS_PER_SECOND)
    return f"{sec}.{rem:09d}"


def _write_text(path: Path, text: str):
    try:
        Path(path).write_text(text, encoding='utf-8')
    except OSError as e:
        raise CaptureWriteError(path, e.strerror or str(e)) from e


def timeseries_to_csv(series: TimeSeries) -> str:
    frame = pd.DataFrame({
        'bin_start_s': [format_bin_start(int(b) * series.bin_ns) for b in series.frame['bin']],
        'group': series.frame['group'].astype(str).tolist(),
        'bytes': series.frame['bytes'].tolist(),
        'packets': series.frame['packets'].tolist(),
    }, columns=CSV_COLUMNS)
    return frame.to_csv(index=False, lineterminator='\n')


def write_timeseries_csv(series: TimeSeries, path: Path) -> Path:
    _write_text(path, timeseries_to_csv(series))
    logger.debug(f"Wrote {len(series)} rows to {path}")
    return Path(path)


def read_timeseries_csv(path: Path, bin_ns: int | None = None) -> TimeSeries:
    """
    Load a series written by ``write_timeseries_csv``.

    The bin width is the gap between the first two bin starts. An empty or
    single-bin series takes ``bin_ns``, else PULSEWAVE_DEFAULT_BIN_MS.
    """
    frame = pd.read_csv(path, dtype={'bin_start_s': str, 'group': str}, keep_default_na=False)
    starts = [int(Decimal(value).scaleb(9)) for value in frame['bin_start_s']]
    distinct = sorted(set(starts))
    if len(distinct) >= 2:
        bin_ns = distinct[1] - distinct[0]
    elif bin_ns is None:
        bin_ns = settings.PULSEWAVE_DEFAULT_BIN_MS * NS_PER_SECOND // 1000
        logger.debug(f"{path}: bin width not inferable, using the default {bin_ns} ns")
    frame = pd.DataFrame({
        'bin': [start // bin_ns for start in starts],
        'group': frame['group'],
        'bytes': frame['bytes'],
        'packets': frame['packets'],
    })
    return TimeSeries(bin_ns, normalize_frame(frame))


def write_flows_csv(flows: pd.DataFrame, path: Path) -> Path:
    _write_text(path, flows.to_csv(index=False, lineterminator='\n'))
    return Path(path)


class TimeSeriesPlot:
    """
    Step plot of bit/s per bin, one line per group, optional analytic overlay.
    """

    def __init__(self, series: TimeSeries, title: str, expected_bps: np.ndarray | None = None):
        self.series = series
        self.title = title
        self.expected_bps = expected_bps

    def render(self) -> str:
        # Layout
        width = 1400
        height = 700
        top_margin = 110
        left_margin = 150
        right_margin = 220
        bottom_margin = 110
        plot_width = width - left_margin - right_margin
        plot_height = height - top_margin - bottom_margin

        # Fonts
        title_size = 36
        label_size = 24
        tick_size = 18
        font_family = "Liberation Sans, DejaVu Sans, Arial, sans-serif"

        dwg = svgwrite.Drawing(size=(width, height), profile='full')
        dwg.add(dwg.rect(insert=(0, 0), size=(width, height), fill='white'))
        dwg.add(dwg.text(
            self.title, insert=(width / 2, 60), text_anchor="middle",
            font_size=title_size, font_family=font_family, font_weight="600", fill=COLOR_TEXT,
        ))

        bins = max(self.series.bin_count, len(self.expected_bps) if self.expected_bps is not None else 0, 1)
        duration = bins * self.series.bin_seconds
        rates = {group: self._dense(self.series.rate_bps(group), bins) for group in self.series.groups}
        peaks = [float(values.max()) for values in rates.values()]
        if self.expected_bps is not None and len(self.expected_bps):
            peaks.append(float(self.expected_bps.max()))
        peak = max(peaks + [1.0])
        scale, unit = _rate_unit(peak)

        def x_of(seconds: float) -> float:
            return left_margin + seconds / duration * plot_width

        def y_of(bps: float) -> float:
            return top_margin + plot_height - bps / (peak * 1.05) * plot_height

        # Grid and y ticks
        for k in range(6):
            value = peak * 1.05 * k / 5
            y = y_of(value)
            dwg.add(dwg.line(start=(left_margin, y), end=(left_margin + plot_width, y),
                             stroke=COLOR_GRID, stroke_width=1))
            dwg.add(dwg.text(f"{value / scale:.3g}", insert=(left_margin - 12, y + 6), text_anchor="end",
                             font_size=tick_size, font_family=font_family, fill=COLOR_TEXT_DIM))

        # X ticks
        for k in range(11):
            seconds = duration * k / 10
            x = x_of(seconds)
            dwg.add(dwg.line(start=(x, top_margin + plot_height), end=(x, top_margin + plot_height + 10),
                             stroke=COLOR_AXIS, stroke_width=2))
            dwg.add(dwg.text(f"{seconds:.3g}", insert=(x, top_margin + plot_height + 34), text_anchor="middle",
                             font_size=tick_size, font_family=font_family, fill=COLOR_TEXT_DIM))

        # Axes
        dwg.add(dwg.line(start=(left_margin, top_margin), end=(left_margin, top_margin + plot_height),
                         stroke=COLOR_AXIS, stroke_width=2))
        dwg.add(dwg.line(start=(left_margin, top_margin + plot_height),
                         end=(left_margin + plot_width, top_margin + plot_height), stroke=COLOR_AXIS, stroke_width=2))
        dwg.add(dwg.text("time [s]", insert=(left_margin + plot_width / 2, height - 30), text_anchor="middle",
                         font_size=label_size, font_family=font_family, fill=COLOR_TEXT))
        y_label = dwg.text(f"rate [{unit}]", insert=(40, top_margin + plot_height / 2), text_anchor="middle",
                           font_size=label_size, font_family=font_family, fill=COLOR_TEXT)
        y_label.rotate(-90, center=(40, top_margin + plot_height / 2))
        dwg.add(y_label)

        # Series
        lines = [(group, values, SERIES_COLORS[i % len(SERIES_COLORS)], None) for i, (group, values)
                 in enumerate(rates.items())]
        if self.expected_bps is not None:
            lines.append(('expected', self._dense(pd.Series(self.expected_bps), bins), COLOR_EXPECTED, [8, 6]))
        for i, (group, values, color, dash) in enumerate(lines):
            points = []
            for k, value in enumerate(values):
                y = y_of(value)
                points.append((x_of(k * self.series.bin_seconds), y))
                points.append((x_of((k + 1) * self.series.bin_seconds), y))
            polyline = dwg.polyline(points=points, fill='none', stroke=color, stroke_width=2)
            if dash:
                polyline.dasharray(dash)
            dwg.add(polyline)

            legend_y = top_margin + 20 + i * 32
            legend_x = left_margin + plot_width + 24
            dwg.add(dwg.line(start=(legend_x, legend_y), end=(legend_x + 36, legend_y), stroke=color, stroke_width=4))
            dwg.add(dwg.text(group, insert=(legend_x + 46, legend_y + 6), font_size=tick_size,
                             font_family=font_family, fill=COLOR_TEXT))

        return dwg.tostring()

    @staticmethod
    def _dense(values: pd.Series, bins: int) -> np.ndarray:
        dense = np.zeros(bins)
        for k, value in values.items():
            if 0 <= int(k) < bins:
                dense[int(k)] = value
        return dense


def _rate_unit(peak: float) -> tuple[float, str]:
    for scale, unit in ((1e9, 'Gbit/s'), (1e6, 'Mbit/s'), (1e3, 'kbit/s')):
        if peak >= scale:
            return scale, unit
    return 1.0, 'bit/s'


def write_timeseries_svg(series: TimeSeries, path: Path, title: str,
                         expected_bps: np.ndarray | None = None) -> Path:
    _write_text(path, TimeSeriesPlot(series, title, expected_bps).render())
    logger.debug(f"Wrote plot {path}")
    return Path(path)
