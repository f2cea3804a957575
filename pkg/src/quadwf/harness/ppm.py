"""Plain-text PPM (P3) reading and writing."""
import numpy as np


class PPMError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        for tok in raw.split("#", 1)[0].split():
            yield tok, lineno


def parse_ppm(text):
    """Parse P3 text into ``(channels, width, height)``.

    ``channels`` has shape ``(3, height * width)``, row-major, scaled to [0, 1].
    """
    toks = _tokens(text)
    last_line = max(1, len(text.splitlines()))

    def take(what):
        try:
            return next(toks)
        except StopIteration:
            raise PPMError(f"truncated data: expected {what}", last_line) from None

    def take_int(what):
        tok, line = take(what)
        try:
            return int(tok), line
        except ValueError:
            raise PPMError(f"expected integer {what}, got {tok!r}", line) from None

    magic, line = take("magic number")
    if magic != "P3":
        raise PPMError(f"wrong magic number {magic!r}, expected 'P3'", line)
    width, line = take_int("width")
    height, _ = take_int("height")
    if width <= 0 or height <= 0:
        raise PPMError(f"invalid dimensions {width}x{height}", line)
    maxval, line = take_int("maxval")
    if maxval != 255:
        raise PPMError(f"unsupported maxval {maxval}, expected 255", line)
    count = width * height * 3
    values = np.empty(count, dtype=np.int64)
    for k in range(count):
        v, line = take_int(f"sample {k + 1} of {count}")
        if not 0 <= v <= maxval:
            raise PPMError(f"sample {v} outside [0, {maxval}]", line)
        values[k] = v
    extra = next(toks, None)
    if extra is not None:
        raise PPMError(f"unexpected trailing data {extra[0]!r}", extra[1])
    channels = values.reshape(height * width, 3).T / float(maxval)
    return channels, width, height


def load_ppm(path):
    with open(path, "r", encoding="ascii") as fh:
        return parse_ppm(fh.read())


def format_ppm(channels, width, height):
    """Canonical P3 text: header on three lines, one pixel per line."""
    channels = np.asarray(channels, dtype=float)
    if channels.shape != (3, width * height):
        raise ValueError(f"channels must have shape (3, {width * height}), got {channels.shape}")
    samples = np.rint(np.clip(channels, 0.0, 1.0) * 255.0).astype(int).T
    lines = ["P3", f"{width} {height}", "255"]
    lines.extend(f"{r} {g} {b}" for r, g, b in samples)
    return "\n".join(lines) + "\n"


def save_ppm(path, channels, width, height):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_ppm(channels, width, height))
