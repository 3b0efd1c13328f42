"""Worker-count policy: honor the HITCHIN_THREADS environment variable."""

import os


def worker_count() -> int:
    """Number of workers batch stages may use (>= 1).

    Reads ``HITCHIN_THREADS`` if set; otherwise the CPU count.  Values below
    1 are clamped to 1, junk is ignored.
    """
    raw = os.environ.get("HITCHIN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)
