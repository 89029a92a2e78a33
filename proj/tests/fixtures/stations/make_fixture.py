"""Regenerates this fixture from samples/corpus_stations.json.

Usage: python3 make_fixture.py <ewom binary>
"""
import csv
import json
import pathlib
import random
import subprocess
import sys
import tempfile

here = pathlib.Path(__file__).resolve().parent
root = here.parents[2]
ewom = sys.argv[1]

with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    subprocess.run([ewom, "simulate", "--spec", str(root / "samples/corpus_stations.json"), "--out", str(tmp)], check=True)
    labels = {}
    with open(tmp / "labels.csv") as f:
        for row in csv.DictReader(f):
            labels.setdefault(row["doc_id"], set()).add(row["topic_id"])
    docs = [json.loads(line) for line in open(tmp / "documents.jsonl")]

rng = random.Random(11)
for d in docs:
    if "T3" in labels.get(d["id"], ()):
        d["author"] = "michinoeki_official"
    if "T5" in labels.get(d["id"], ()):
        d["text"] = "I'm at Michinoeki " + d["text"]

with open(here / "documents.jsonl", "w") as f:
    for d in docs:
        f.write(json.dumps(d, ensure_ascii=False, separators=(",", ":")) + "\n")
with open(here / "labels.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["doc_id", "topic_id"])
    for d in docs:
        for t in sorted(labels.get(d["id"], ())):
            w.writerow([d["id"], t])
(here / "official.txt").write_text("michinoeki_official\n")

effect = {"T1": 900, "T2": 600, "T3": 700, "T4": -1000, "T5": 500, "T6": 1100, "T7": -800}
sales = {}
for d in docs:
    s = d["station_id"]
    sales.setdefault(s, 20000 + rng.uniform(-3000, 3000))
    for t in labels.get(d["id"], ()):
        sales[s] += effect.get(t, 0)
with open(here / "sales.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["station_id", "sales"])
    for s in sorted(sales):
        w.writerow([s, f"{sales[s]:.2f}"])
