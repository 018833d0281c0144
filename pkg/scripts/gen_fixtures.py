#!/usr/bin/env python3
"""Generate the shipped fixture corpus, datasets and abbreviation dictionary.

The corpus is engineered so the retrieval ablations have known outcomes:

* "cmds" questions carry a rare command token that only their target record
  contains, so sparse retrieval finds the target on the exact term. A few
  decoy records are minted to share hash buckets with the questions' English
  filler words, which pushes the target out of the dense top-3.
* "q2a" questions share no surface token with any record; instead their
  content words are minted to hash into the same embedder buckets as the
  target record's words. Dense retrieval finds the target, sparse scores
  everything zero.
* abbreviation questions use the dictionary template; no corpus token equals
  any question filler, dictionary term, or dictionary full-name token, so
  with the echo backend the abbreviation block is the only recall source.

Everything is seeded and the script verifies the constructions by running
the real pipeline before writing anything. Regenerate with:

    python3 scripts/gen_fixtures.py [--out fixtures]
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from deskqa.adh import AbbreviationEntry, AbbreviationDictionary
from deskqa.dense import HashingEmbedder
from deskqa.evaluate import QaExample, run_eval
from deskqa.fusion import HybridRetriever
from deskqa.ingest import ingest_corpus, load_manifest
from deskqa.llm import GenerationConfig
from deskqa.pipeline import AnswerPipeline
from deskqa.sparse import tokenize

SEED = 20240613
DIMENSION = 384

DICTIONARY = [
    ("RAT", "Required Arrival Time", None),
    ("PDK", "Process Design Kit", "a foundry-provided collection of device models and rule decks"),
    ("DRC", "Design Rule Checking", "verifying a layout against the foundry geometric rules"),
    ("LVS", "Layout Versus Schematic", "checking that extracted layout connectivity matches the schematic netlist"),
    ("STA", "Static Timing Analysis", "verifying timing by analyzing path delays without simulation vectors"),
    ("ECO", "Engineering Change Order", None),
    ("CTS", "Clock Tree Synthesis", "building the buffered clock distribution network"),
    ("PPA", "Power Performance Area", None),
    ("NDR", "Non Default Rule", "special routing width and spacing constraints for selected nets"),
    ("ERC", "Electrical Rule Check", None),
    ("RTL", "Register Transfer Level", None),
    ("DFT", "Design For Test", "inserting scan and test structures to make silicon observable"),
]

# English filler words that appear in question templates but must never
# appear in the corpus.
LEX_FILLERS = ("what", "does", "accomplish")
PARA_FILLERS = ("how", "can", "engineers")
ABBR_FILLERS = ("stand", "for")

VERBS = [
    "rebalances", "rethreads", "compacts", "stitches", "quells", "damps",
    "nudges", "splays", "coalesces", "trims", "reseats", "untangles",
    "remaps", "staggers", "anneals", "grooms", "reflows", "brackets",
    "tempers", "splices",
]
NOUNS = [
    "strap", "lattice", "fencing", "spine", "gasket", "manifold", "plenum",
    "bulkhead", "trellis", "girder", "mast", "keel", "sprocket", "flange",
    "gusset", "rivet", "spindle", "ferrule", "grommet", "bobbin", "pylon",
    "truss", "chock", "cleat", "shim", "bezel", "cowl", "strut", "yoke",
    "ladder", "stanchion", "baffle", "louver", "mullion", "purlin",
]
ADJECTIVES = [
    "spare", "stray", "skewed", "crooked", "brittle", "dormant", "molten",
    "woven", "serrated", "tapered", "fluted", "knurled", "ribbed", "splined",
    "cambered", "pitted", "lacquered", "burnished", "crimped", "beveled",
]
SYLLABLES = [
    "ka", "zo", "mel", "tur", "vin", "rop", "sel", "dag", "fim", "lor",
    "bex", "nuv", "qir", "wex", "hol", "jam", "pru", "gos", "yat", "cev",
]


def banned_tokens() -> set[str]:
    banned = set(LEX_FILLERS + PARA_FILLERS + ABBR_FILLERS)
    for abbr, name, _ in DICTIONARY:
        banned.add(abbr.lower())
        banned.update(tokenize(name, compounds=False))
    return banned


class WordMint:
    """Deterministic pseudo-word factory with bucket targeting."""

    def __init__(self, rng: random.Random, embedder: HashingEmbedder, banned: set[str]):
        self.rng = rng
        self.embedder = embedder
        self.used: set[str] = set(banned)

    def fresh(self) -> str:
        while True:
            word = "".join(self.rng.choices(SYLLABLES, k=self.rng.randint(2, 3)))
            if word not in self.used:
                self.used.add(word)
                return word

    def colliding_with(self, token: str) -> str:
        """A fresh surface form that hashes into the same bucket as `token`."""
        target = self.embedder.bucket(token)
        for _ in range(200_000):
            word = "".join(self.rng.choices(SYLLABLES, k=self.rng.randint(2, 4)))
            if word in self.used or word == token:
                continue
            if self.embedder.bucket(word) == target:
                self.used.add(word)
                return word
        raise RuntimeError(f"could not mint a collision for {token!r}")

    def reserve(self, words: list[str]) -> None:
        self.used.update(words)


def build_fixture(out_dir: Path) -> None:
    rng = random.Random(SEED)
    embedder = HashingEmbedder(dimension=DIMENSION)
    banned = banned_tokens()
    mint = WordMint(rng, embedder, banned)
    mint.reserve(VERBS + NOUNS + ADJECTIVES)

    records: dict[str, str] = {}  # doc name -> record sentence
    cmds_examples: list[dict] = []
    q2a_examples: list[dict] = []

    # --- cmds half: rare command token is the only lexical link ------------
    for i in range(20):
        verb = rng.choice(VERBS)
        command = f"vx::{verb[:-1]}_{mint.fresh()}_{i:03d}"
        sentence = (
            f"{command} {verb} {rng.choice(ADJECTIVES)} {rng.choice(NOUNS)} "
            f"{rng.choice(NOUNS)} rows."
        )
        records[f"cmd_{i:03d}"] = sentence
        cmds_examples.append(
            {"question": f"What does {command} accomplish?", "answer": command}
        )

    # decoys: collide with the lexical questions' filler-word buckets so the
    # dense top-3 for cmds questions is all decoys
    decoy_words = {filler: [mint.colliding_with(filler) for _ in range(4)] for filler in LEX_FILLERS}
    for d in range(4):
        junk = " ".join(mint.fresh() for _ in range(2))
        sentence = (
            f"{decoy_words['what'][d]} {decoy_words['does'][d]} "
            f"{decoy_words['accomplish'][d]} {junk} clutter."
        )
        records[f"decoy_{d:03d}"] = sentence

    # --- q2a half: no surface overlap, three bucket-colliding content words
    for i in range(20):
        content = [mint.fresh() for _ in range(4)]
        sentence = (
            f"{content[0]} {content[1]} {rng.choice(VERBS)} {content[2]} "
            f"{content[3]} {rng.choice(NOUNS)}."
        )
        paraphrase = [mint.colliding_with(content[j]) for j in range(3)]
        records[f"qa_{i:03d}"] = sentence
        q2a_examples.append(
            {
                "question": f"How can engineers {paraphrase[0]} {paraphrase[1]} {paraphrase[2]}?",
                "answer": sentence,
            }
        )

    # --- background records: plausible-looking junk -------------------------
    for i in range(170):
        words = [
            rng.choice(ADJECTIVES),
            rng.choice(NOUNS),
            rng.choice(VERBS),
            mint.fresh(),
            rng.choice(NOUNS),
            mint.fresh(),
        ]
        records[f"bg_{i:03d}"] = " ".join(words) + "."

    # sanity: no record token is banned, no command leaks into another record
    all_tokens: set[str] = set()
    for sentence in records.values():
        all_tokens.update(tokenize(sentence))
    assert not (all_tokens & banned), sorted(all_tokens & banned)

    # --- write corpus files --------------------------------------------------
    corpus_dir = out_dir / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name in sorted(records):
        (corpus_dir / f"{name}.txt").write_text(records[name] + "\n", encoding="utf-8")
        manifest.append({"uri": f"corpus/{name}.txt"})

    # a few structured documents so the loaders see real traffic
    csv_rows = [
        f"{rng.choice(ADJECTIVES)} {rng.choice(NOUNS)},{rng.choice(VERBS)} {mint.fresh()}"
        for _ in range(4)
    ]
    (corpus_dir / "notes.csv").write_text(
        "topic,remark\n" + "\n".join(csv_rows) + "\n", encoding="utf-8"
    )
    manifest.append({"uri": "corpus/notes.csv"})
    json_records = [
        {"param": mint.fresh(), "note": f"{rng.choice(VERBS)} {rng.choice(NOUNS)}"}
        for _ in range(3)
    ]
    (corpus_dir / "params.json").write_text(
        json.dumps(json_records, indent=2) + "\n", encoding="utf-8"
    )
    manifest.append({"uri": "corpus/params.json"})
    (corpus_dir / "guide.md").write_text(
        f"# {rng.choice(NOUNS)} guide\n\n{rng.choice(ADJECTIVES)} "
        f"{rng.choice(NOUNS)} {rng.choice(VERBS)} {mint.fresh()}.\n",
        encoding="utf-8",
    )
    manifest.append({"uri": "corpus/guide.md"})

    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )

    # --- dictionary and datasets --------------------------------------------
    dictionary_payload = [
        {"abbr": abbr, "name": name, **({"desc": desc} if desc else {})}
        for abbr, name, desc in DICTIONARY
    ]
    (out_dir / "abbreviations.json").write_text(
        json.dumps(dictionary_payload, indent=2) + "\n", encoding="utf-8"
    )

    abbr_examples = [
        {"question": f"What does {abbr} stand for?", "answer": name}
        for abbr, name, _ in DICTIONARY
    ]
    datasets_dir = out_dir / "datasets"
    datasets_dir.mkdir(exist_ok=True)

    def write_jsonl(name: str, rows: list[dict]) -> None:
        (datasets_dir / name).write_text(
            "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows),
            encoding="utf-8",
        )

    write_jsonl("cmds.jsonl", cmds_examples)
    write_jsonl("q2a.jsonl", q2a_examples)
    write_jsonl("mixed.jsonl", cmds_examples + q2a_examples)
    write_jsonl("abbr.jsonl", abbr_examples)

    # --- app config pointing at the fixture ----------------------------------
    config = {
        "manifest": "manifest.json",
        "dictionary": "abbreviations.json",
        "index_dir": "../var/index",
        "feedback_path": "../var/feedback.jsonl",
        "chunking": {"chunk_size": 2048, "chunk_overlap": 256},
        "retrieval": {"n_dense": 3, "n_sparse": 3, "n_hybrid": 3, "rrf_k": 60.0, "mode": "hybrid"},
        "embedder": {"provider": "hashing", "dimension": DIMENSION},
        "generation": {"backend": "stub_extractive", "context_length": 8192, "max_new_tokens": 4096},
        "adh_enabled": True,
    }
    (out_dir / "config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )

    verify(out_dir)


def verify(out_dir: Path) -> None:
    """Run the real pipeline over the written fixture and check every margin."""
    result = ingest_corpus(load_manifest(out_dir / "manifest.json"))
    assert not result.warnings, result.warnings
    assert len(result.chunks) >= 200, len(result.chunks)

    retriever = HybridRetriever(provider=HashingEmbedder(dimension=DIMENSION)).fit(
        result.chunks
    )
    entries = tuple(
        AbbreviationEntry(abbr=a, name=n, desc=d) for a, n, d in DICTIONARY
    )

    def pipeline(backend: str) -> AnswerPipeline:
        return AnswerPipeline(
            retriever=retriever,
            dictionary=AbbreviationDictionary(entries=entries),
            generation=GenerationConfig(backend=backend),
            docs={d.doc_id: {"uri": d.uri, "format": d.format} for d in result.documents},
        )

    def load(name: str) -> list[QaExample]:
        rows = (out_dir / "datasets" / name).read_text(encoding="utf-8").splitlines()
        return [QaExample(**json.loads(r)) for r in rows if r]

    cmds, q2a, abbr = load("cmds.jsonl"), load("q2a.jsonl"), load("abbr.jsonl")

    # per-question retrieval shape
    for ex in cmds:
        target = next(t for t in tokenize(ex.question) if t.startswith("vx::"))
        sparse_hits = retriever.sparse_.search(ex.question, 3)
        assert len(sparse_hits) == 1, (ex.question, sparse_hits)
        dense_ids = [cid for cid, _ in retriever.dense_.search(ex.question, 3)]
        assert all(cid.startswith("decoy_") for cid in dense_ids), (ex.question, dense_ids)
        hybrid_ids = [c.chunk_id for c in retriever.candidates(ex.question)]
        assert sparse_hits[0][0] in hybrid_ids, (ex.question, hybrid_ids)
    for ex in q2a:
        assert retriever.sparse_.search(ex.question, 3) == [], ex.question
        top = retriever.dense_.search(ex.question, 3)
        assert top and top[0][0].startswith("qa_"), (ex.question, top)
    for ex in abbr:
        assert retriever.sparse_.search(ex.question, 3) == [], ex.question

    extractive = pipeline("stub_extractive")
    arms = [("hybrid", True), ("sparse", True), ("dense", True), ("none", True)]
    cmds_report = run_eval(cmds, extractive, arms, dataset_name="cmds")
    q2a_report = run_eval(q2a, extractive, arms, dataset_name="q2a")

    def mean_recall(report, mode):
        return next(a.mean.recall for a in report.arms if a.mode == mode)

    assert mean_recall(cmds_report, "hybrid") == 1.0
    assert mean_recall(cmds_report, "sparse") == 1.0
    assert mean_recall(cmds_report, "dense") == 0.0
    assert mean_recall(cmds_report, "none") == 0.0
    assert mean_recall(q2a_report, "hybrid") == 1.0
    assert mean_recall(q2a_report, "sparse") == 0.0
    assert mean_recall(q2a_report, "dense") == 1.0
    assert mean_recall(q2a_report, "none") == 0.0

    echo = pipeline("stub_echo")
    abbr_report = run_eval(
        abbr, echo, [("hybrid", True), ("hybrid", False)], dataset_name="abbr"
    )
    assert abbr_report.arms[0].mean.recall == 1.0
    assert abbr_report.arms[1].mean.recall == 0.0

    # abbreviation knowledge must not perturb the other datasets
    for examples, name in ((cmds, "cmds"), (q2a, "q2a")):
        report = run_eval(
            examples, extractive, [("hybrid", True), ("hybrid", False)], dataset_name=name
        )
        on, off = report.arms
        for r_on, r_off in zip(on.records, off.records):
            assert r_on.generated == r_off.generated
            assert r_on.score == r_off.score

    print(f"fixture verified: {len(result.chunks)} chunks, "
          f"{len(cmds)} cmds / {len(q2a)} q2a / {len(abbr)} abbr examples")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures", type=Path)
    args = parser.parse_args()
    build_fixture(args.out)


if __name__ == "__main__":
    main()
