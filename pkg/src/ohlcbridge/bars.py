"""OHLC bar ingestion, normalization, and emission.

Bars arrive as prices and are normalized to the log scale relative to the
open: o' = 0, h' = log(high/open) >= 0, l' = log(low/open) <= 0, and
c' = log(close/open) inside [l', h'].  Real feeds violate the ordering by
a tick now and then; lenient mode clamps and logs, strict mode raises
with the offending line number.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass

from .errors import DataError
from .extrema import HighLowCloseStat

log = logging.getLogger(__name__)

COLUMNS = ("open", "high", "low", "close")


@dataclass(frozen=True)
class OhlcBar:
    """One bar: raw prices plus the normalized log statistics."""

    bar_id: str
    open: float
    high: float
    low: float
    close: float
    high_log: float
    low_log: float
    close_log: float

    @classmethod
    def from_prices(cls, bar_id, open_, high, low, close, mode="lenient", line=None):
        for name, v in zip(("open", *COLUMNS[1:]), (open_, high, low, close)):
            if not (isinstance(v, (int, float)) and math.isfinite(v)) or v <= 0.0:
                raise DataError(f"bar {bar_id!r}: {name} price {v!r} not a positive number",
                                line=line)
        top = max(open_, close)
        bottom = min(open_, close)
        if high < top or low > bottom:
            msg = (f"bar {bar_id!r}: OHLC ordering violated "
                   f"(open={open_}, high={high}, low={low}, close={close})")
            if mode == "strict":
                raise DataError(msg, line=line)
            log.warning("%s; clamped", msg)
            high = max(high, top)
            low = min(low, bottom)
        h = math.log(high / open_)
        low_l = math.log(low / open_)
        c = math.log(close / open_)
        # the clamps above make these exact up to rounding of the logs
        h = max(h, 0.0, c)
        low_l = min(low_l, 0.0, c)
        return cls(bar_id=str(bar_id), open=float(open_), high=float(high),
                   low=float(low), close=float(close),
                   high_log=h, low_log=low_l, close_log=c)

    @property
    def is_flat(self):
        return self.high_log == self.low_log == 0.0

    def stat(self):
        """The normalized statistic; degenerate flat bars have none."""
        if self.is_flat:
            raise DataError(f"bar {self.bar_id!r} is flat; no statistic to condition on")
        return HighLowCloseStat(high=self.high_log, low=self.low_log,
                                close=self.close_log)


def _column_map(fieldnames, format_spec):
    """Resolve the four price columns (plus optional id) from a header.

    ``format_spec`` is either "auto" (case-insensitive header match) or an
    ordered comma list naming the id, open, high, low, close columns --
    e.g. "date,o,h,l,c" or "o,h,l,c" for files without an id column.
    """
    if format_spec == "auto":
        lowered = {name.lower().strip(): name for name in fieldnames}
        missing = [c for c in COLUMNS if c not in lowered]
        if missing:
            raise DataError(f"header lacks required columns {missing}; "
                            "pass an explicit column list")
        id_col = next((lowered[k] for k in ("date", "id", "bar_id", "timestamp")
                       if k in lowered), None)
        return id_col, [lowered[c] for c in COLUMNS]
    names = [n.strip() for n in format_spec.split(",")]
    if len(names) == 5:
        id_col, price_cols = names[0], names[1:]
    elif len(names) == 4:
        id_col, price_cols = None, names
    else:
        raise DataError(f"format spec needs 4 or 5 column names, got {len(names)}")
    unknown = [n for n in ([id_col] if id_col else []) + price_cols
               if n not in fieldnames]
    if unknown:
        raise DataError(f"columns {unknown} not in header {list(fieldnames)}")
    return id_col, price_cols


def ingest(source, format_spec="auto", mode="lenient"):
    """Read bars from a CSV path or file object.

    Every parse or ordering problem carries its 1-based line number.
    """
    if hasattr(source, "read"):
        return _ingest_stream(source, format_spec, mode)
    try:
        fh = open(source, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {source}: {exc}") from None
    with fh:
        return _ingest_stream(fh, format_spec, mode)


def _ingest_stream(fh, format_spec, mode):
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        raise DataError("empty input: no header line")
    id_col, price_cols = _column_map(reader.fieldnames, format_spec)
    bars = []
    for row in reader:
        line = reader.line_num
        bar_id = row[id_col] if id_col else str(len(bars))
        try:
            prices = [float(row[c]) for c in price_cols]
        except (TypeError, ValueError) as exc:
            raise DataError(f"unparseable price in bar {bar_id!r}: {exc}",
                            line=line) from None
        bars.append(OhlcBar.from_prices(bar_id, *prices, mode=mode, line=line))
    if not bars:
        raise DataError("empty input: header but no data rows")
    return bars


def emit(bars, target=None, kind="csv"):
    """Write bars back out (prices at 12 significant digits).

    ``target`` may be a path, a file object, or None to get the text.
    """
    if kind not in ("csv", "json"):
        raise DataError(f"unknown output kind {kind!r}")
    buf = io.StringIO()
    if kind == "csv":
        w = csv.writer(buf)
        w.writerow(["date", *COLUMNS])
        for b in bars:
            w.writerow([b.bar_id] + [f"{getattr(b, c):.12g}" for c in COLUMNS])
    else:
        json.dump([{"date": b.bar_id,
                    **{c: float(f"{getattr(b, c):.12g}") for c in COLUMNS}}
                   for b in bars], buf, indent=2)
        buf.write("\n")
    text = buf.getvalue()
    if target is None:
        return text
    if hasattr(target, "write"):
        target.write(text)
        return None
    with open(target, "w") as fh:
        fh.write(text)
    return None
