"""Append-only JSON-lines lookup table of generation sequences.

Each line is one episode record. Keys are the (r, tau) values rounded to a
fixed number of decimals plus the exact detector counts, so identical
quantized sequences map to identical keys across runs.
"""
from __future__ import annotations

import json
import os

QUANTIZE_DECIMALS = 3


def quantize_sequence(sequence, decimals=QUANTIZE_DECIMALS):
    """[(r, tau, n), ...] -> hashable key with r, tau rounded."""
    return tuple((round(float(r), decimals), round(float(t), decimals), int(n))
                 for r, t, n in sequence)


class LookupTable:
    def __init__(self, path, decimals=QUANTIZE_DECIMALS):
        self.path = str(path)
        self.decimals = decimals

    def append(self, record):
        """Append one EpisodeRecord (or its dict form) to the log."""
        rec = record.to_dict() if hasattr(record, "to_dict") else dict(record)
        rec["key"] = [list(k) for k in quantize_sequence(
            [(r, t, n) for r, t, n, _ in rec["sequence"]], self.decimals)]
        with open(self.path, "a") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def __iter__(self):
        if not os.path.exists(self.path):
            return
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def query(self, prefix=()):
        """Records whose quantized sequence starts with the given prefix.

        The prefix is a list of (r, tau, n) triples; values are quantized with
        the table's own resolution before matching. An empty prefix returns
        every record.
        """
        want = quantize_sequence(prefix, self.decimals)
        out = []
        for rec in self:
            key = tuple(tuple(k) for k in rec["key"])
            if key[:len(want)] == want:
                out.append(rec)
        return out
