"""Synthetic fixture videos: a narrated descriptor plus ground-truth sidecars.

The bundled "house tour" runs a little over three minutes, cycles through
shots whose tags come from the fake providers' lexicon, and includes one
silent black shot so the empty-speech and black-image rules get exercised
end to end. Everything is deterministic: building the same fixture twice
produces identical bytes.
"""

from __future__ import annotations

import json
import os

from . import media

WORD_SECONDS = 0.38
SENTENCE_GAP_S = 0.7
SHOT_GAP_S = 1.3
LEAD_IN_S = 1.0

HOUSE_TOUR_SHOTS: list[tuple[str, str, list[str]]] = [
    ("front door", "S0", [
        "Welcome back to the channel, today we are touring a stunning lakeside home.",
        "This front door already tells you the whole story of the place.",
        "Stick around because the front door is only the beginning.",
    ]),
    ("kitchen", "S0", [
        "First stop is the kitchen, and it is honestly a dream.",
        "The kitchen has brand new appliances and custom cabinets.",
        "You could cook for twenty people in this kitchen without breaking a sweat.",
    ]),
    ("kitchen island", "S0", [
        "Right in the middle sits a huge kitchen island.",
        "The kitchen island doubles as a breakfast bar for the whole family.",
    ]),
    ("living room", "S1", [
        "Through here is the living room with soaring ceilings.",
        "The living room gets amazing light all afternoon.",
    ]),
    ("fireplace", "S1", [
        "My favorite corner is this stone fireplace.",
        "Imagine winter evenings around the fireplace with a good book.",
    ]),
    ("spiral staircase", "S0", [
        "Now look at this spiral staircase, it is a real showpiece.",
        "The spiral staircase winds up to the second floor in one smooth curve.",
        "Craftsmen spent three months on the spiral staircase alone.",
    ]),
    ("bedroom", "S0", [
        "Upstairs, the main bedroom feels like a hotel suite.",
        "The bedroom fits a king bed with room to spare.",
    ]),
    ("balcony", "S0", [
        "The bedroom opens onto a private balcony.",
        "From the balcony you can see the whole lake.",
    ]),
    ("bathroom", "S1", [
        "The bathroom is finished in marble from floor to ceiling.",
        "There is even a soaking tub in the bathroom.",
    ]),
    ("garden", "S0", [
        "Outside, the garden wraps around the entire house.",
        "A local designer planted the garden with native flowers.",
    ]),
    ("pond", "S0", [
        "Hidden in the back you will find a quiet pond.",
        "Koi drift around the pond under the lily pads.",
    ]),
    ("swimming pool", "S0", [
        "And yes, there is a heated swimming pool.",
        "The swimming pool has a shallow ledge for lounging.",
    ]),
    ("garage", "S1", [
        "Car people will love the three car garage.",
        "The garage includes a workshop bench and a storage wall.",
    ]),
    ("dining room", "S0", [
        "Back inside, the dining room seats twelve comfortably.",
        "The dining room chandelier came from a Paris flea market.",
    ]),
    ("backyard", "S0", [
        "The backyard ties it all together with a stone patio.",
        "Summer parties in this backyard are going to be unreal.",
    ]),
    ("black", "S0", []),  # silent beauty shot: no speech, black keyframe
    ("front door", "S0", [
        "That wraps up the tour of this incredible lakeside home.",
        "Thanks for watching and I will see you at the front door of the next one.",
    ]),
]


def write_fixture(
    out_dir: str,
    name: str,
    shots: list[tuple[str, str, list[str]]],
    fps: float = 25.0,
    width: int = 320,
    height: int = 180,
    min_shot_s: float = 3.0,
) -> str:
    """Write a descriptor video plus sidecars for the given shot script."""
    os.makedirs(out_dir, exist_ok=True)
    t = LEAD_IN_S
    words: list[tuple[float, float, str, str]] = []
    turns: list[tuple[float, float, str]] = []
    tags: list[tuple[float, float, str]] = []
    cuts: list[float] = []

    shot_start = 0.0
    for shot_idx, (tag, speaker, sentences) in enumerate(shots):
        speech_start = t
        for sentence in sentences:
            for word in sentence.split():
                start, end = round(t, 3), round(t + WORD_SECONDS, 3)
                words.append((start, end, speaker, word))
                t = end
            t += SENTENCE_GAP_S
        if sentences:
            turns.append((round(speech_start, 3), round(t, 3), speaker))
        t += SHOT_GAP_S
        if t - shot_start < min_shot_s:
            t = shot_start + min_shot_s
        shot_end = round(t, 3)
        tags.append((round(shot_start, 3), shot_end, tag))
        if shot_idx < len(shots) - 1:
            cuts.append(shot_end)
        shot_start = shot_end

    duration = round(shot_start, 3)
    video_path = os.path.join(out_dir, f"{name}.vdesc")
    desc = {
        "format": media.VDESC_FORMAT,
        "duration_s": duration,
        "fps": fps,
        "width": width,
        "height": height,
        "label": name,
    }
    with open(video_path, "w", encoding="utf-8") as f:
        json.dump(desc, f, indent=2)
        f.write("\n")
    media.write_sidecar(video_path, "words", words)
    media.write_sidecar(video_path, "cuts", [(c,) for c in cuts])
    media.write_sidecar(video_path, "speakers", turns)
    media.write_sidecar(video_path, "tags", tags)
    return video_path


def build_house_tour(out_dir: str, name: str = "tour") -> str:
    return write_fixture(out_dir, name, HOUSE_TOUR_SHOTS)


def build_tiny(out_dir: str, name: str = "tiny") -> str:
    """A 30+ second three-shot fixture for fast unit tests."""
    shots = [
        ("kitchen", "S0", [
            "Here is the kitchen with a big window.",
            "I love cooking in this kitchen every day.",
        ]),
        ("garden", "S0", [
            "Outside we have a small garden with roses.",
        ]),
        ("pond", "S1", [
            "Behind the garden sits a tiny pond.",
            "The pond freezes over every winter.",
        ]),
    ]
    return write_fixture(out_dir, name, shots, min_shot_s=11.0)
