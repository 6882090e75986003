#!/usr/bin/env python3
"""Independent frame-enumeration scorer.

Reads a corpus manifest and produces the accuracy-table CSV by brute
force: parse every LAB file, enumerate frame centers, reduce labels to
the majmin class space, and count matches. Used to pin golden CSVs for
the C++ scorer; kept dependency-free and deliberately literal.

Usage: frame_enum_oracle.py MANIFEST_JSON OUTPUT_CSV [HOP]
"""

import json
import math
import sys
from pathlib import Path

NATURAL = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
MAJ_QUALITIES = {"", "maj", "maj7", "7", "maj6"}
MIN_QUALITIES = {"min", "min7", "min6", "dim"}
NOCHORD = 24
EXCLUDED = 25


def label_class(text):
    if text == "N":
        return NOCHORD
    if text == "X":
        return EXCLUDED
    root = NATURAL[text[0]]
    i = 1
    while i < len(text) and text[i] in "#b":
        root += 1 if text[i] == "#" else -1
        i += 1
    root %= 12
    quality = ""
    if i < len(text) and text[i] == ":":
        rest = text[i + 1:]
        quality = rest.split("/", 1)[0]
    if quality in MAJ_QUALITIES:
        return root
    if quality in MIN_QUALITIES:
        return root + 12
    return EXCLUDED


def parse_lab(path):
    segments = []
    for raw in Path(path).read_text().splitlines():
        fields = raw.split()
        if not fields or fields[0].startswith("#"):
            continue
        onset, offset, label = float(fields[0]), float(fields[1]), fields[2]
        if segments and onset < segments[-1][1]:
            if segments[-1][1] - onset > 1e-3:
                raise ValueError(f"{path}: overlap beyond tolerance")
            segments[-1] = (segments[-1][0], onset, segments[-1][2])
        segments.append((onset, offset, label_class(label)))
    return segments


def class_at(segments, t):
    for onset, offset, cls in segments:
        if onset <= t < offset:
            return cls
    return NOCHORD


def accuracy(pred, ref, hop):
    duration = ref[-1][1] if ref else 0.0
    frames = int(math.ceil(duration / hop - 1e-9))
    matched = 0
    excluded = 0
    for k in range(frames):
        t = (k + 0.5) * hop
        ref_cls = class_at(ref, t)
        if ref_cls == EXCLUDED:
            excluded += 1
        elif ref_cls == class_at(pred, t):
            matched += 1
    return matched / (frames - excluded)


def main():
    manifest_path = Path(sys.argv[1])
    out_path = Path(sys.argv[2])
    hop = float(sys.argv[3]) if len(sys.argv) > 3 else 0.1

    manifest = json.loads(manifest_path.read_text())
    base = manifest_path.parent
    rows = []
    for song in manifest["songs"]:
        pseudo = parse_lab(base / song["pseudo"])
        gt = parse_lab(base / song["gt"]) if song["gt"] else None
        for system in manifest["systems"]:
            pred = parse_lab(base / song["predictions"][system])
            x = accuracy(pred, pseudo, hop)
            y = accuracy(pred, gt, hop) if gt is not None else None
            rows.append((song["id"], system, song["genre"], x, y))

    rows.sort(key=lambda row: (row[1], row[0]))
    lines = ["song_id,system,genre,x,y"]
    for song_id, system, genre, x, y in rows:
        y_text = f"{y:.6f}" if y is not None else ""
        lines.append(f"{song_id},{system},{genre},{x:.6f},{y_text}")
    out_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(rows)} rows -> {out_path}")


if __name__ == "__main__":
    main()
