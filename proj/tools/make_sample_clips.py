#!/usr/bin/env python3
"""Writes the bundled sample clip library: one 2 s talking clip per emotion.

Each clip holds an emotion pose, a little breathing sway, decorative jaw
motion and one blink. Usage: make_sample_clips.py [output.json]
"""
import json
import math
import sys

FPS = 30
FRAMES = 60

CHANNELS = [
    "eyeBlinkLeft", "eyeLookDownLeft", "eyeLookInLeft", "eyeLookOutLeft",
    "eyeLookUpLeft", "eyeSquintLeft", "eyeWideLeft", "eyeBlinkRight",
    "eyeLookDownRight", "eyeLookInRight", "eyeLookOutRight", "eyeLookUpRight",
    "eyeSquintRight", "eyeWideRight", "jawForward", "jawLeft",
    "jawRight", "jawOpen", "mouthClose", "mouthFunnel",
    "mouthPucker", "mouthLeft", "mouthRight", "mouthSmileLeft",
    "mouthSmileRight", "mouthFrownLeft", "mouthFrownRight", "mouthDimpleLeft",
    "mouthDimpleRight", "mouthStretchLeft", "mouthStretchRight", "mouthRollLower",
    "mouthRollUpper", "mouthShrugLower", "mouthShrugUpper", "mouthPressLeft",
    "mouthPressRight", "mouthLowerDownLeft", "mouthLowerDownRight", "mouthUpperUpLeft",
    "mouthUpperUpRight", "browDownLeft", "browDownRight", "browInnerUp",
    "browOuterUpLeft", "browOuterUpRight", "cheekPuff", "cheekSquintLeft",
    "cheekSquintRight", "noseSneerLeft", "noseSneerRight", "tongueOut",
]

# Emotion poses, mirrored onto Left/Right where the name says "Both".
POSES = {
    "Neutral": {},
    "Happy": {"mouthSmileBoth": 0.7, "cheekSquintBoth": 0.45, "eyeSquintBoth": 0.3,
              "mouthDimpleBoth": 0.2},
    "Sad": {"browInnerUp": 0.65, "mouthFrownBoth": 0.55, "eyeLookDownBoth": 0.3,
            "mouthShrugLower": 0.3},
    "Angry": {"browDownBoth": 0.75, "noseSneerBoth": 0.35, "eyeSquintBoth": 0.4,
              "jawForward": 0.2, "mouthPressBoth": 0.4},
    "Surprised": {"browInnerUp": 0.7, "browOuterUpBoth": 0.75, "eyeWideBoth": 0.8, "jawOpen": 0.35},
    "Afraid": {"browInnerUp": 0.8, "eyeWideBoth": 0.6, "mouthStretchBoth": 0.5,
               "browOuterUpBoth": 0.3},
    "Disgusted": {"noseSneerBoth": 0.7, "mouthUpperUpBoth": 0.5, "browDownBoth": 0.4,
                  "eyeSquintBoth": 0.25, "mouthFrownBoth": 0.2},
}


def expand(pose):
    out = {}
    for name, value in pose.items():
        if name.endswith("Both"):
            stem = name[: -len("Both")]
            out[stem + "Left"] = value
            out[stem + "Right"] = value
        else:
            out[name] = value
    return out


def clamp(x):
    return min(1.0, max(0.0, x))


def clip(emotion, index):
    pose = expand(POSES[emotion])
    base_jaw = pose.get("jawOpen", 0.0)
    frames = []
    for f in range(FRAMES):
        t = f / FPS
        sway = 0.05 * math.sin(2 * math.pi * 0.5 * t + index)
        talk = 0.25 * (0.5 + 0.5 * math.sin(2 * math.pi * 4.0 * t)) * (0.6 + 0.4 * math.sin(2 * math.pi * 0.7 * t))
        blink = max(0.0, 1.0 - abs(f - 40) / 3.0)
        weights = []
        for ch in CHANNELS:
            w = pose.get(ch, 0.0)
            if w > 0.0:
                w += sway * w
            if ch == "jawOpen":
                w = base_jaw + talk
            elif ch in ("mouthLowerDownLeft", "mouthLowerDownRight"):
                w += 0.4 * talk
            elif ch in ("eyeBlinkLeft", "eyeBlinkRight"):
                w = blink
            weights.append(round(clamp(w), 3))
        frames.append(weights)
    return {"clip_id": emotion.lower() + "_talk_01", "emotion": emotion, "frames": frames}


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "assets/clips/sample_library.json"
    library = {
        "fps": FPS,
        "channels": CHANNELS,
        "clips": [clip(e, i) for i, e in enumerate(POSES)],
    }
    with open(out, "w") as fh:
        json.dump(library, fh, separators=(",", ":"))
        fh.write("\n")


if __name__ == "__main__":
    main()
