#!/usr/bin/env python3
"""Regenerates the text, tabular and image fixtures under fixtures/.

Everything is derived from fixed seeds, so rerunning leaves the files
byte-identical. The reference CNN weight file is written by the C++ CLI
(`percept make-model`), not here.
"""

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def digit0():
    size = 16
    pixels = bytearray()
    for y in range(size):
        for x in range(size):
            # ring with radii ~4.5 x 6 around the centre, soft edge
            r = math.hypot((x - 7.5) / 4.5, (y - 7.5) / 6.0)
            v = max(0.0, 1.0 - abs(r - 0.8) / 0.25)
            pixels.append(round(255 * min(1.0, 1.6 * v)))
    return b"P5\n16 16\n255\n" + bytes(pixels)


POSITIVE = {"good": 2.0, "great": 2.5, "excellent": 3.0, "love": 2.2, "wonderful": 2.8, "fun": 1.5}
NEGATIVE = {"bad": 2.0, "terrible": 2.8, "awful": 3.0, "hate": 2.4, "boring": 1.8, "dull": 1.4}

SENTENCES = [
    "the movie was good and the actors were great",
    "a terrible plot with awful dialogue",
    "i love this film it is wonderful",
    "boring and dull from start to finish",
    "the soundtrack is excellent but the ending is bad",
    "great fun for the whole family",
    "i hate how long and boring it felt",
    "a good story told with excellent care",
    "the acting was awful and the script was bad",
    "wonderful visuals and a great cast",
    "not much happens and it is dull",
    "the jokes are fun and the pacing is good",
    "terrible editing ruins a good idea",
    "i love the music and the great direction",
    "an awful waste of a wonderful book",
    "the characters are dull but the scenery is great",
    "excellent performances all around",
    "bad sound and terrible lighting",
    "a fun ride with a good heart",
    "i hate sequels and this one is boring",
]


def bow_model():
    weights = {}
    for tok, w in POSITIVE.items():
        weights[tok] = [0.0, w]
    for tok, w in NEGATIVE.items():
        weights[tok] = [w, 0.0]
    return {"class_names": ["negative", "positive"], "bias": [0.0, 0.0], "token_weights": weights}


FEATURES = ["age", "education_num", "hours_per_week", "capital_gain", "sex", "workclass"]
CATEGORICAL = ["sex", "workclass"]
SEXES = ["Male", "Female"]
WORKCLASSES = ["Private", "Self-emp", "Gov"]


def adult_rows(n=120, seed=20240607):
    rng = random.Random(seed)
    rows = []
    # row 0 is a deliberately clear-cut high earner so anchors have a target
    rows.append([58, 16, 60, 9000, "Male", "Self-emp"])
    for _ in range(n - 1):
        age = rng.randint(18, 75)
        edu = rng.randint(4, 16)
        hours = rng.randint(10, 70)
        gain = 0 if rng.random() < 0.7 else rng.randint(500, 15000)
        sex = SEXES[0] if rng.random() < 0.6 else SEXES[1]
        work = rng.choices(WORKCLASSES, weights=[0.6, 0.2, 0.2])[0]
        rows.append([age, edu, hours, gain, sex, work])
    return rows


def linear_model():
    # Class 1 (">50K") logit; class 0 fixed at zero. Categorical codes follow
    # first-seen order in the CSV: sex Male=0 Female=1, workclass
    # Self-emp=0 Private=1 Gov=2.
    w1 = [0.06, 0.45, -0.05, 0.0002, -0.2, -0.1]
    b1 = -0.06 * 40 - 0.45 * 10 + 0.05 * 40 - 0.0002 * 2000 + 0.2
    return {
        "feature_names": FEATURES,
        "class_names": ["<=50K", ">50K"],
        "categorical": CATEGORICAL,
        "weights": [[0.0] * len(FEATURES), w1],
        "bias": [0.0, round(b1, 6)],
    }


def main():
    FIXTURES.mkdir(exist_ok=True)
    (FIXTURES / "digit0.pgm").write_bytes(digit0())
    (FIXTURES / "sentiment.txt").write_text("\n".join(SENTENCES) + "\n")
    (FIXTURES / "sentiment_bow.json").write_text(json.dumps(bow_model(), indent=2) + "\n")
    lines = [",".join(FEATURES)] + [",".join(str(v) for v in row) for row in adult_rows()]
    (FIXTURES / "adult.csv").write_text("\n".join(lines) + "\n")
    (FIXTURES / "adult_linear.json").write_text(json.dumps(linear_model(), indent=2) + "\n")


if __name__ == "__main__":
    main()
