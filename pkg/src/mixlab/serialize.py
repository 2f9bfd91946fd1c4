"""Small serialization helpers shared by the CLI and the data types.

Probabilities are printed with 17 significant digits so that round-tripping
through text is lossless for doubles.
"""

import json
import os
import tempfile


def fmt17(x):
    """Format a float with 17 significant digits."""
    return format(float(x), ".17g")


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` atomically (temp file + rename)."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
