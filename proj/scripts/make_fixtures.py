#!/usr/bin/env python3
"""Regenerates the bundled demo data and test fixtures.

Output is a pure function of the constants below, so rerunning the script
leaves committed files unchanged.

    python3 scripts/make_fixtures.py
"""

import csv
import io
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DEMO = ROOT / "data" / "demo"
TAXONOMY_DIR = ROOT / "data" / "taxonomy"
FIXTURES = ROOT / "tests" / "fixtures"

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"


def pseudo_words(rng, count, min_syl=2, max_syl=4, taken=None):
    """Distinct lowercase ASCII pseudo-words."""
    taken = set() if taken is None else taken
    out = []
    while len(out) < count:
        w = "".join(rng.choice(CONSONANTS) + rng.choice(VOWELS) for _ in range(rng.randint(min_syl, max_syl)))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def zipf_weights(n, s=1.05):
    return [1.0 / (i + 1) ** s for i in range(n)]


def write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def write_jsonl(path, rows):
    write_text(path, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows))


def write_csv(path, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["code", "label", "parent_code"])
    for r in rows:
        w.writerow(r)
    write_text(path, buf.getvalue())


def sentence_text(rng, words):
    """Joins words into sentences with light punctuation and capitals."""
    out, i = [], 0
    while i < len(words):
        n = rng.randint(6, 16)
        chunk = words[i:i + n]
        i += n
        chunk[0] = chunk[0].capitalize()
        sep = rng.choice([", ", " "]) if len(chunk) > 8 else " "
        mid = len(chunk) // 2
        out.append(" ".join(chunk[:mid]) + sep + " ".join(chunk[mid:]) + rng.choice([".", ".", "!", "?", ";"]))
    return " ".join(out)


# ---------------------------------------------------------------- demo data

DEMO_TREE = [
    ("SCI000000", "Science", [
        ("SCI039000", "Marine Biology"),
        ("SCI004000", "Astronomy and Astrophysics"),
        ("SCI013040", "Organic Chemistry"),
        ("SCI031000", "Plate Tectonics and Geology"),
    ]),
    ("HIS000000", "History", [
        ("HIS002020", "Ancient Rome"),
        ("HIS037010", "Medieval Europe"),
        ("HIS037060", "Industrial Revolution"),
        ("HIS027000", "Cold War Diplomacy"),
    ]),
    ("CKB000000", "Cooking", [
        ("CKB009000", "Baking Bread and Pastry"),
        ("CKB086000", "Vegetarian Cuisine"),
        ("CKB088000", "Wine and Beverages"),
        ("CKB047000", "Regional Italian Cooking"),
    ]),
]

FILLER = ("the of and to in a is that for it as was with be by on not he this are or his from at which but have "
          "an they you were her she there been one all we their has would when if so no what up out who more "
          "said can about into them only other new some could time these two may then first any like now my "
          "such over our even most made after also did many before must through back years where much your way "
          "well down should because each just those people how too little state good very make world still "
          "own see men work long here get both between life being under never day same another know while last "
          "might great old year off come since against go came right used take three himself few house use "
          "during without again place around however home small found thought went say part once general high "
          "upon school every does got united left number course war until always away something fact though "
          "water less public put think almost hand enough far took head yet government system better set told "
          "nothing night end why called didn find look going asked later knew point next program city business "
          "give group toward young days let room president side social given present several order national "
          "possible rather second face per among form important often things looked early white case john become "
          "large big need four within felt along children saw best church ever least power development light "
          "thing seemed family interest want members mind country area others done turned although open god "
          "service certain kind problem began different door thus help sense means whole matter perhaps itself "
          "york times law human line above name example action company hands local show whether five history "
          "gave today either act feet across taken past quite anything seen having death week experience body "
          "word half really field am car words already themselves information tell together shall money period "
          "held keep sure probably free seems real behind cannot miss political air question making office "
          "brought whose special heard major problems ago became federal moment study available known result "
          "street economic boy position reason change south board individual job areas society west close turn "
          "love community true court force full seem am wife future age wanted voice department center woman "
          "common necessary policy following sound").split()

AREA_WORDS = {
    "SCI039000": "marine biology ocean coral reef plankton whale dolphin kelp tidal estuary salinity fish shark "
                 "invertebrate jellyfish seagrass benthic pelagic sponge crustacean",
    "SCI004000": "astronomy astrophysics telescope galaxy nebula star planet orbit comet quasar supernova "
                 "redshift cosmology spectrum pulsar exoplanet gravity luminosity",
    "SCI013040": "organic chemistry carbon molecule benzene alkane ester synthesis catalyst polymer reagent "
                 "hydrocarbon bond isomer solvent titration compound aromatic",
    "SCI031000": "plate tectonics geology fault magma basalt granite earthquake volcano subduction mantle crust "
                 "sediment mineral erosion continental rift seismic",
    "HIS002020": "ancient rome roman senate emperor caesar legion republic forum gladiator aqueduct consul "
                 "patrician plebeian latin colosseum augustus province",
    "HIS037010": "medieval europe feudal knight castle monastery crusade manor serf vassal plague cathedral "
                 "guild bishop kingdom chivalry charter",
    "HIS037060": "industrial revolution factory steam engine textile coal railway mill labor urban iron "
                 "mechanization invention workforce canal loom",
    "HIS027000": "cold war diplomacy soviet treaty embassy summit nuclear sanctions detente alliance espionage "
                 "negotiation ambassador containment blockade",
    "CKB009000": "baking bread pastry dough yeast flour oven crust butter croissant sourdough knead proofing "
                 "loaf tart glaze",
    "CKB086000": "vegetarian cuisine vegetable lentil tofu bean grain salad spinach chickpea quinoa mushroom "
                 "herb curry legume",
    "CKB088000": "wine beverages vineyard grape cellar tannin vintage cocktail brewing cider barrel sommelier "
                 "fermentation aroma pairing",
    "CKB047000": "regional italian cooking pasta risotto olive tomato basil parmesan polenta pesto tuscany "
               "sicily garlic trattoria",
}
ROOT_WORDS = {
    "SCI000000": "science research experiment theory data evidence laboratory scientist method measurement",
    "HIS000000": "history historian archive century dynasty chronicle era empire heritage record",
    "CKB000000": "cooking recipe kitchen chef flavor ingredient meal dish taste seasoning",
}


def make_demo():
    rng = random.Random(1000)
    rows = []
    leaves = []
    for code, label, children in DEMO_TREE:
        rows.append((code, label, ""))
        for ccode, clabel in children:
            rows.append((ccode, clabel, code))
            leaves.append((ccode, clabel, code))
    write_csv(DEMO / "taxonomy.csv", rows)

    filler_w = zipf_weights(len(FILLER))
    docs = []
    sources = ["web", "books", "wiki"]
    for i in range(1000):
        leaf_code, _, root_code = leaves[rng.randrange(len(leaves))]
        area = AREA_WORDS[leaf_code].split()
        root = ROOT_WORDS[root_code].split()
        n = rng.randint(120, 420)
        words = []
        for _ in range(n):
            r = rng.random()
            if r < 0.30:
                words.append(rng.choice(area))
            elif r < 0.40:
                words.append(rng.choice(root))
            else:
                words.append(rng.choices(FILLER, weights=filler_w)[0])
        docs.append({"id": f"demo-{i:04d}", "text": sentence_text(rng, words), "source": sources[rng.randrange(3)]})

    lines = [json.dumps(d) for d in docs]
    # Dirty input the ingester reports instead of failing on.
    lines.insert(137, "")
    lines.insert(600, json.dumps({"id": "demo-blank", "text": "   ", "source": "web"}))
    write_text(DEMO / "corpus.jsonl", "\n".join(lines) + "\n")

    # Hypernym forest over the demo vocabulary: every word hangs below a
    # random word one level up, so depth is the assigned level.
    vocab = sorted({w for s in AREA_WORDS.values() for w in s.split()}
                   | {w for s in ROOT_WORDS.values() for w in s.split()}
                   | set(FILLER) | {"facet"})
    levels = {0: ["entity"]}
    for w in vocab:
        if w in FILLER:
            lvl = rng.randint(1, 5)
        elif any(w in ROOT_WORDS[r].split() for r in ROOT_WORDS):
            lvl = rng.randint(1, 4)
        elif w == "facet":
            lvl = 3
        else:
            lvl = rng.randint(3, 12)
        levels.setdefault(lvl, []).append(w)
    # Fill missing levels with connector nodes so every chain is complete.
    top = max(levels)
    for lvl in range(1, top + 1):
        levels.setdefault(lvl, [])
        levels[lvl].insert(0, f"concept{'x' * lvl}")
    edges = []
    for lvl in range(1, top + 1):
        for w in levels[lvl]:
            parent = levels[lvl - 1][0] if w.startswith("concept") else rng.choice(levels[lvl - 1])
            edges.append(f"{w}\t{parent}")
    write_text(DEMO / "hypernyms.tsv", "# child<TAB>parent\n" + "\n".join(edges) + "\n")

    base = {
        "seed": 20240601,
        "workers": 0,
        "scale_factor": 1.0,
        "paths": {"corpus": ["corpus.jsonl"], "taxonomy": "taxonomy.csv", "hypernyms": "hypernyms.tsv",
                  "output_dir": "out"},
        "debate": {
            "n_per_debater": 4,
            "retention": "filter_reject",
            "fixed_k": 10,
            "judge_mode": "reject",
            "backends": {
                "debater_1": {"kind": "mock"},
                "debater_2": {"kind": "mock"},
                "judge": {"kind": "mock", "mock": {"reject_every": 4}},
            },
        },
        "retrieval": {"k1": 1.2, "b": 0.75, "top_k": 256},
        "assembly": {"strategy": "shuffle_concat", "target_tokens": 4096, "meta_chunk_tokens": 512,
                     "negatives_per_chunk": 3},
        "analysis": {"depth_mode": "min"},
    }
    write_text(DEMO / "config.json", json.dumps(base, indent=2) + "\n")
    nl = json.loads(json.dumps(base))
    nl["paths"]["output_dir"] = "out_nextlong"
    nl["assembly"]["strategy"] = "nextlong"
    write_text(DEMO / "config_nextlong.json", json.dumps(nl, indent=2) + "\n")


# ------------------------------------------------------------- taxonomies

BISAC_ROOTS = [
    ("ANT", "Antiques and Collectibles"), ("ARC", "Architecture"), ("ART", "Art"), ("BIB", "Bibles"),
    ("BIO", "Biography and Autobiography"), ("BOD", "Body Mind and Spirit"), ("BUS", "Business and Economics"),
    ("CGN", "Comics and Graphic Novels"), ("COM", "Computers"), ("CKB", "Cooking"), ("CRA", "Crafts and Hobbies"),
    ("DES", "Design"), ("DRA", "Drama"), ("EDU", "Education"), ("FAM", "Family and Relationships"),
    ("FIC", "Fiction"), ("FOR", "Foreign Language Study"), ("GAM", "Games and Activities"),
    ("GAR", "Gardening"), ("HEA", "Health and Fitness"), ("HIS", "History"), ("HOM", "House and Home"),
    ("HUM", "Humor"), ("JNF", "Juvenile Nonfiction"), ("JUV", "Juvenile Fiction"),
    ("LAN", "Language Arts and Disciplines"), ("LAW", "Law"), ("LCO", "Literary Collections"),
    ("LIT", "Literary Criticism"), ("MAT", "Mathematics"), ("MED", "Medical"), ("MUS", "Music"),
    ("NAT", "Nature"), ("OCC", "Body and Spirit Practice"), ("PER", "Performing Arts"), ("PET", "Pets"),
    ("PHI", "Philosophy"), ("PHO", "Photography"), ("POE", "Poetry"), ("POL", "Political Science"),
    ("PSY", "Psychology"), ("REF", "Reference"), ("REL", "Religion"), ("SCI", "Science"),
    ("SEL", "Self Help"), ("SOC", "Social Science"), ("SPO", "Sports and Recreation"),
    ("STU", "Study Aids"), ("TEC", "Technology and Engineering"), ("TRA", "Transportation"),
    ("TRV", "Travel"),
]


def leaf_labels(rng, n, taken):
    words = pseudo_words(rng, n * 2, 2, 3, taken)
    return [f"{words[2 * i].capitalize()} {words[2 * i + 1].capitalize()}" for i in range(n)]


def make_taxonomy(path, roots, total_leaves, seed):
    rng = random.Random(seed)
    per_root = [total_leaves // len(roots)] * len(roots)
    for i in range(total_leaves - sum(per_root)):
        per_root[i] += 1
    taken = set()
    rows = []
    for (prefix, label), count in zip(roots, per_root):
        root_code = f"{prefix}000000"
        rows.append((root_code, label, ""))
        for i, leaf_label in enumerate(leaf_labels(rng, count, taken), start=1):
            rows.append((f"{prefix}{i:03d}000", leaf_label, root_code))
    write_csv(path, rows)


# --------------------------------------------------------------- fixtures

def make_bm25_fixture():
    rng = random.Random(200)
    vocab = pseudo_words(rng, 320, 1, 3)
    weights = zipf_weights(len(vocab), 1.1)
    docs = []
    for i in range(200):
        n = rng.randint(5, 220)
        words = rng.choices(vocab, weights=weights, k=n)
        text = sentence_text(rng, words)
        if i % 17 == 0:
            text += " Noted in 2019; see ref-" + str(i) + "."
        docs.append({"id": f"d{i:03d}", "text": text, "source": "fixture"})
    # Exact duplicates under different ids force score ties.
    for j, src in enumerate([3, 3, 41, 77, 150]):
        docs.append({"id": f"dup{j}", "text": docs[src]["text"], "source": "fixture"})
    docs = docs[:195] + docs[200:]  # keep 200 documents in total
    rng.shuffle(docs)
    write_jsonl(FIXTURES / "bm25_200docs.jsonl", docs)

    queries = []
    for q in range(50):
        if q == 7:
            queries.append("qqqzzz xxyyzz")  # nothing matches
            continue
        n = rng.randint(1, 6)
        words = [rng.choice(vocab) for _ in range(n)]
        if q % 5 == 0:
            words.append(words[0])  # repeated term counts once
        if q % 9 == 0:
            words.append("absentterm")
        if q % 4 == 0:
            words[0] = words[0].upper()
        queries.append(" ".join(words))
    write_text(FIXTURES / "bm25_queries.txt", "\n".join(queries) + "\n")


def make_nextlong_fixture():
    rng = random.Random(50)
    vocab = pseudo_words(rng, 240, 1, 3)
    weights = zipf_weights(len(vocab), 0.9)
    docs = []
    for i in range(50):
        n = rng.randint(150, 2600)
        # Each document leans on its own slice of the vocabulary so chunk
        # scores spread out.
        home = vocab[(i * 5) % 200:(i * 5) % 200 + 40]
        words = [rng.choice(home) if rng.random() < 0.4 else rng.choices(vocab, weights=weights)[0]
                 for _ in range(n)]
        docs.append({"id": f"nl{i:02d}", "text": sentence_text(rng, words), "source": "fixture"})
    write_jsonl(FIXTURES / "nextlong_50docs.jsonl", docs)
    topics = []
    for t in range(12):
        words = [rng.choice(vocab[:120]) for _ in range(rng.randint(2, 5))]
        topics.append({"topic_id": f"NL{t:02d}", "text": " ".join(words)})
    write_jsonl(FIXTURES / "nextlong_topics.jsonl", topics)


def make_hypernym_fixture():
    chain_animal = ["entity", "object", "living", "organism", "animal", "chordate", "vertebrate", "mammal",
                    "placental", "carnivore", "canine", "dog"]
    edges = [(chain_animal[i], chain_animal[i - 1]) for i in range(1, len(chain_animal))]
    edges += [("wolf", "carnivore"), ("fox", "carnivore")]
    edges += [("abstraction", "entity"), ("concept", "abstraction"), ("idea", "concept"),
              ("theory", "idea"), ("hypothesis", "theory")]
    edges += [("physical", "entity"), ("matter", "physical")]
    # Two routes to "puppy": lengths 6 (via pet) and 12 (via dog).
    edges += [("pet", "animal"), ("puppy", "pet"), ("puppy", "dog")]
    lines = ["# hand-built hypernym fixture; depths are listed in the abstraction tests"]
    lines += [f"{c}\t{p}" for c, p in edges]
    write_text(FIXTURES / "hypernyms_fixture.tsv", "\n".join(lines) + "\n")

    topics = [
        ("H01", "Living"), ("H02", "concept"), ("H03", "matter"), ("H04", "living concept"),
        ("H05", "canine"), ("H06", "wolf"), ("H07", "Canine wolf"),
        ("H08", "chordate"), ("H09", "organism chordate mammal"), ("H10", "hypothesis zzzunknown"),
        ("H11", "qwerty"),
    ]
    write_jsonl(FIXTURES / "hypernym_topics.jsonl", [{"topic_id": i, "text": t} for i, t in topics])


def make_dedup_fixture():
    rng = random.Random(5050)
    vocab = pseudo_words(rng, 400, 2, 3)
    topics = []
    base_texts = []
    for i in range(34):
        n = rng.randint(4, 22)
        base_texts.append([rng.choice(vocab) for _ in range(n)])
    planted, near_miss = [], []
    for i, words in enumerate(base_texts):
        topics.append({"topic_id": f"T{len(topics):02d}", "subcategory_code": f"S{i % 8}", "text": " ".join(words)})
    # Five planted near-duplicates: one token appended to a 20-token topic.
    for j in range(5):
        words = [rng.choice(vocab) for _ in range(20)]
        a = f"T{len(topics):02d}"
        topics.append({"topic_id": a, "subcategory_code": f"S{j}", "text": " ".join(words)})
        b = f"T{len(topics):02d}"
        topics.append({"topic_id": b, "subcategory_code": f"S{j + 3}",
                       "text": " ".join(words + [rng.choice(vocab)]).upper()})
        planted.append([a, b])
    # Near misses: one middle token replaced (Jaccard 15/21 < 0.8).
    while len(topics) < 50:
        words = [rng.choice(vocab) for _ in range(20)]
        other = list(words)
        other[10] = rng.choice([w for w in vocab if w not in words])
        a = f"T{len(topics):02d}"
        topics.append({"topic_id": a, "subcategory_code": "S7", "text": " ".join(words)})
        if len(topics) < 50:
            b = f"T{len(topics):02d}"
            topics.append({"topic_id": b, "subcategory_code": "S7", "text": " ".join(other)})
            near_miss.append([a, b])
    write_text(FIXTURES / "dedup_topics.json",
               json.dumps({"topics": topics, "planted_pairs": planted, "near_miss_pairs": near_miss}, indent=1) + "\n")


def main():
    make_demo()
    make_taxonomy(TAXONOMY_DIR / "bisac_synthetic.csv", BISAC_ROOTS, 4500, 4500)
    make_taxonomy(FIXTURES / "taxonomy_500.csv", BISAC_ROOTS[:10], 500, 500)
    make_taxonomy(FIXTURES / "taxonomy_100.csv", BISAC_ROOTS[10:15], 100, 100)
    make_bm25_fixture()
    make_nextlong_fixture()
    make_hypernym_fixture()
    make_dedup_fixture()


if __name__ == "__main__":
    main()
