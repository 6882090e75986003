#!/usr/bin/env python3
"""Generates the bundled synthetic 60-song corpus (tests/data/corpus60).

Three systems (alpha, beta, gamma) with different error rates predict
chord sequences for 60 songs across four genres. The first 24 songs are
validation songs (ground truth committed); the rest are test songs
(ground truth withheld). Pseudo annotations are lightly corrupted copies
of the ground truth, so pseudo accuracy tracks but does not equal GT
accuracy.

The corpus is generated once with a fixed seed and committed; this
script exists to document how, not to run per build.

Usage: make_corpus.py [OUTPUT_DIR]
"""

import json
import random
import sys
from pathlib import Path

ROOTS = ["C", "C#", "Db", "D", "D#", "Eb", "E", "F",
         "F#", "Gb", "G", "G#", "Ab", "A", "A#", "Bb", "B"]
PITCH = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
MAJ_QUALITIES = ["", "maj", "maj7", "7", "maj6"]
MIN_QUALITIES = ["min", "min7", "min6", "dim"]
OTHER_QUALITIES = ["aug", "sus4", "sus2", "hdim7", "9"]
BASSES = ["3", "5", "b7", "2"]

GENRES = ["rock", "pop", "jazz", "blues"]
GENRE_WEIGHTS = [0.35, 0.30, 0.20, 0.15]
SYSTEMS = {"alpha": 0.10, "beta": 0.16, "gamma": 0.26}

N_SONGS = 60
N_VALIDATION = 24
SEED = 20260815


def pitch_class(root):
    semitone = PITCH[root[0]]
    for accidental in root[1:]:
        semitone += 1 if accidental == "#" else -1
    return semitone % 12


def render(root, quality, rng, bass_ok=True):
    text = root
    if quality:
        text += ":" + quality
        if bass_ok and rng.random() < 0.15:
            text += "/" + rng.choice(BASSES)
    return text


def random_chord(rng, avoid_pitch=None, minor_bias=0.35):
    while True:
        root = rng.choice(ROOTS)
        if avoid_pitch is None or pitch_class(root) != avoid_pitch:
            break
    quality = rng.choice(MIN_QUALITIES if rng.random() < minor_bias else MAJ_QUALITIES)
    return render(root, quality, rng)


def chord_pitch(label):
    head = label.split(":", 1)[0].split("/", 1)[0]
    if head in ("N", "X"):
        return None
    return pitch_class(head)


def make_gt(rng):
    segments = []
    t = 0.0
    target = rng.uniform(120.0, 200.0)
    while t < target:
        dur = rng.uniform(1.2, 5.0)
        roll = rng.random()
        if roll < 0.08:
            label = "N"
        elif roll < 0.14:
            label = render(rng.choice(ROOTS), rng.choice(OTHER_QUALITIES), rng)
        else:
            label = random_chord(rng)
        onset = round(t, 3)
        offset = round(t + dur, 3)
        if offset > onset:
            segments.append([onset, offset, label])
        t += dur
    return segments


def corrupt_label(rng, label):
    roll = rng.random()
    if roll < 0.08:
        return "N"
    if roll < 0.12:
        return "X"
    return random_chord(rng, avoid_pitch=chord_pitch(label))


def make_pseudo(rng, gt):
    segments = [list(seg) for seg in gt]
    for seg in segments:
        roll = rng.random()
        if roll < 0.04:
            seg[2] = corrupt_label(rng, seg[2])
        elif roll < 0.06:
            seg[2] = "X"
    for i in range(1, len(segments)):
        if rng.random() < 0.05:
            prev, cur = segments[i - 1], segments[i]
            slack = min(0.15, (prev[1] - prev[0]) - 0.3, (cur[1] - cur[0]) - 0.3)
            if slack > 0.0:
                shift = round(rng.uniform(-slack, slack), 3)
                prev[1] = round(prev[1] + shift, 3)
                cur[0] = prev[1]
    return segments


def make_prediction(rng, gt, base_error):
    error = min(0.6, max(0.03, base_error + rng.uniform(-0.05, 0.05)))
    segments = []
    for seg in gt:
        if rng.random() < 0.02:
            continue  # dropout: the gap reads as NoChord
        onset, offset, label = seg
        if rng.random() < error:
            label = corrupt_label(rng, label)
        if rng.random() < 0.08 and offset - onset > 1.6:
            mid = round((onset + offset) / 2.0, 3)
            second = label if rng.random() < 0.5 else random_chord(rng)
            segments.append([onset, mid, label])
            segments.append([mid, offset, second])
        else:
            segments.append([onset, offset, label])
    for i in range(1, len(segments)):
        prev, cur = segments[i - 1], segments[i]
        if prev[1] != cur[0]:
            continue
        if rng.random() < 0.25:
            slack = min(0.25, (prev[1] - prev[0]) - 0.3, (cur[1] - cur[0]) - 0.3)
            if slack > 0.0:
                shift = round(rng.uniform(-slack, slack), 3)
                prev[1] = round(prev[1] + shift, 3)
                cur[0] = prev[1]
    return segments


def write_lab(path, segments, header=None):
    lines = [] if header is None else [header]
    lines += [f"{onset:.6f} {offset:.6f} {label}" for onset, offset, label in segments]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus60")
    rng = random.Random(SEED)

    songs = []
    for index in range(1, N_SONGS + 1):
        song_id = f"song-{index:02d}"
        genre = rng.choices(GENRES, weights=GENRE_WEIGHTS)[0]
        gt = make_gt(rng)
        pseudo = make_pseudo(rng, gt)
        is_validation = index <= N_VALIDATION

        entry = {
            "id": song_id,
            "genre": genre,
            "gt": f"gt/{song_id}.lab" if is_validation else None,
            "pseudo": f"pseudo/{song_id}.lab",
            "predictions": {},
        }
        if is_validation:
            write_lab(out_dir / "gt" / f"{song_id}.lab", gt)
        header = "# pseudo annotation (aligned from a crowd-sourced chord sheet)" \
            if song_id == "song-03" else None
        write_lab(out_dir / "pseudo" / f"{song_id}.lab", pseudo, header)
        for system, base_error in SYSTEMS.items():
            pred = make_prediction(rng, gt, base_error)
            rel = f"pred/{system}/{song_id}.lab"
            write_lab(out_dir / Path(rel), pred)
            entry["predictions"][system] = rel
        songs.append(entry)

    manifest = {"systems": list(SYSTEMS), "songs": songs}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {N_SONGS} songs ({N_VALIDATION} validation) -> {out_dir}")


if __name__ == "__main__":
    main()
