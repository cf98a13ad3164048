#!/usr/bin/env python3
"""Independent reference computations for values frozen in the C++ tests.

Nothing here imports or calls the C++ code. Run it after regenerating
fixtures and compare its output with the constants in tests/.

    python3 scripts/oracle_values.py
"""

import json
import math
import re
from collections import Counter, deque
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "tests" / "fixtures"
WORD = re.compile(r"[A-Za-z0-9]+")


def tokens(text):
    return [t.lower() for t in WORD.findall(text)]


def bm25(docs, query, k1=1.2, b=0.75):
    toks = [tokens(d) for d in docs]
    n = len(docs)
    avgdl = sum(map(len, toks)) / n
    out = []
    for t in toks:
        tf = Counter(t)
        s = 0.0
        for q in dict.fromkeys(query):
            nq = sum(1 for d in toks if q in d)
            if tf[q] == 0:
                continue
            idf = math.log((n - nq + 0.5) / (nq + 0.5) + 1)
            s += idf * tf[q] * (k1 + 1) / (tf[q] + k1 * (1 - b + b * len(t) / avgdl))
        out.append(s)
    return out


def hypernym_depths(path):
    parents = {}
    for line in path.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        c, p = line.split("\t")
        parents.setdefault(c, []).append(p)
        parents.setdefault(p, [])
    children = {}
    for c, ps in parents.items():
        for p in ps:
            children.setdefault(p, []).append(c)
    roots = [t for t, ps in parents.items() if not ps]
    depth = {r: 0 for r in roots}
    queue = deque(roots)
    while queue:
        t = queue.popleft()
        for c in children.get(t, []):
            if c not in depth:
                depth[c] = depth[t] + 1
                queue.append(c)

    def all_paths(t):
        if not parents[t]:
            return [0]
        return [d + 1 for p in parents[t] for d in all_paths(p)]

    mean = {t: sum(all_paths(t)) / len(all_paths(t)) for t in parents}
    return depth, mean


def shingles(text):
    t = tokens(text)
    if len(t) < 3:
        return {" ".join(t)} if t else set()
    return {" ".join(t[i:i + 3]) for i in range(len(t) - 2)}


def main():
    cat = bm25(["cat hat", "cat cat dog", "dog"], ["cat"])
    print("bm25 3-doc cat scores:", [f"{x:.12f}" for x in cat])
    print("idf ln(1.6) =", f"{math.log(1.6):.12f}")
    print("budget 4680 leaves * 2 * 4 =", 4680 * 2 * 4, "; at 0.5x =", round(4680 * 2 * 4 * 0.5))

    depth, mean = hypernym_depths(FIX / "hypernyms_fixture.tsv")
    print("hypernym min depths:", json.dumps(dict(sorted(depth.items()))))
    print("puppy min/mean:", depth["puppy"], mean["puppy"])
    report = {}
    unknown_terms = unknown_topics = 0
    for line in (FIX / "hypernym_topics.jsonl").read_text().splitlines():
        t = json.loads(line)
        ds = []
        for tok in tokens(t["text"]):
            if tok in depth:
                ds.append(depth[tok])
            else:
                unknown_terms += 1
        if ds:
            report[t["topic_id"]] = sum(ds) / len(ds)
        else:
            unknown_topics += 1
    n = len(report)
    print("topic depths:", report)
    print("share_abstract", sum(d < 3 for d in report.values()) / n,
          "share_specific", sum(d > 9 for d in report.values()) / n,
          "unknown_terms", unknown_terms, "unknown_topics", unknown_topics)

    fixture = json.loads((FIX / "dedup_topics.json").read_text())
    topics = fixture["topics"]
    sh = [shingles(t["text"]) for t in topics]
    pairs = []
    for i in range(len(topics)):
        for j in range(i + 1, len(topics)):
            inter = len(sh[i] & sh[j])
            union = len(sh[i] | sh[j])
            if union and inter / union >= 0.8:
                pairs.append((topics[i]["topic_id"], topics[j]["topic_id"], inter / union))
    print("dedup pairs >= 0.8:", pairs)

    total = 0
    for line in (ROOT / "data" / "demo" / "corpus.jsonl").read_text().splitlines():
        if line.strip():
            total += len(tokens(json.loads(line)["text"]))
    print("demo corpus tokens (incl. blank doc):", total)


if __name__ == "__main__":
    main()
