#!/usr/bin/env python3
"""Records a debate transcript for the replay test.

Runs the topics stage of the CLI against mock backends on a two-leaf
taxonomy, then dresses every reply the way chat models tend to answer:
prose before and after, JSON inside a markdown fence. Requests are left
byte-for-byte intact so replay lookups still match.

    python3 scripts/make_replay_fixture.py build/tools/litelong
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

TAXONOMY = """code,label,parent_code
REP000000,Replay Studies,
REP001000,Tidal Ecology,REP000000
REP002000,Glass Blowing,REP000000
"""

WRAPPERS = [
    ("Sure, here is the result.\n\n```json\n", "\n```\n\nLet me know if you need anything else."),
    ("```\n", "\n```"),
    ("Here you go:\n```json\n", "\n```"),
]


def main() -> None:
    cli = Path(sys.argv[1] if len(sys.argv) > 1 else ROOT / "build" / "tools" / "litelong").resolve()
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "replay_taxonomy.csv").write_text(TAXONOMY)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        config = {
            "seed": 7,
            "workers": 1,
            "paths": {
                "corpus": [str(ROOT / "data" / "demo" / "corpus.jsonl")],
                "taxonomy": str(FIXTURES / "replay_taxonomy.csv"),
                "output_dir": str(tmp / "out"),
            },
            "debate": {
                "backends": {
                    "debater_1": {"kind": "mock"},
                    "debater_2": {"kind": "mock"},
                    "judge": {"kind": "mock", "mock": {"reject_every": 3}},
                }
            },
        }
        (tmp / "config.json").write_text(json.dumps(config))
        subprocess.run([str(cli), "--config", str(tmp / "config.json"), "--stage", "topics", "--save-transcripts"],
                       check=True, stdout=subprocess.DEVNULL)
        out = tmp / "out"
        entries = [json.loads(line) for line in (out / "transcripts.jsonl").read_text().splitlines() if line]
        topics = [json.loads(line) for line in (out / "topics.jsonl").read_text().splitlines() if line]

    lines = []
    for i, entry in enumerate(entries):
        head, tail = WRAPPERS[i % len(WRAPPERS)]
        entry["response"] = head + entry["response"].strip() + tail
        lines.append(json.dumps(entry, ensure_ascii=False, sort_keys=True))
    (FIXTURES / "replay_transcript.jsonl").write_text("\n".join(lines) + "\n")

    rejected = sorted(t["topic_id"] for t in topics if t["status"] == "rejected")
    expected = {
        "t_total": len(topics),
        "rejected": rejected,
        "reasons": {tid: "mock-reject" for tid in rejected},
    }
    (FIXTURES / "replay_expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    print(f"{len(entries)} exchanges, {len(topics)} topics, {len(rejected)} rejected")


if __name__ == "__main__":
    main()
