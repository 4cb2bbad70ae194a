"""Regenerates chrf_sacrebleu.jsonl: sentence- and corpus-level chrF/chrF++
from sacrebleu for a fixed set of hypothesis/reference pairs.

    pip install sacrebleu==2.6.0 && python make_chrf_fixture.py
"""
import json
import random

import sacrebleu
from sacrebleu.metrics import CHRF

WORDS = ("main aaj bahut khush hoon tum kal ghar jaoge movie achhi thi yaar "
         "office mein meeting hai please wait karo phone pe baat karte hain "
         "the weather is really nice today let's go out for chai "
         "kitna time lagega traffic bahut zyada hai abhi "
         "मैं आज खुश हूँ naya phone liya 2024 mein").split()
PUNCT = [",", ".", "!", "?", ""]


def sentence(rng):
    n = rng.randint(1, 14)
    words = [rng.choice(WORDS) for _ in range(n)]
    return " ".join(words) + rng.choice(PUNCT)


def perturb(rng, ref):
    words = ref.split()
    out = []
    for w in words:
        r = rng.random()
        if r < 0.15:
            continue
        if r < 0.3:
            out.append(rng.choice(WORDS))
        elif r < 0.4 and len(w) > 2:
            i = rng.randrange(len(w))
            out.append(w[:i] + rng.choice("aeiouxyz") + w[i + 1:])
        else:
            out.append(w)
        if rng.random() < 0.1:
            out.append(rng.choice(WORDS))
    if rng.random() < 0.2:
        rng.shuffle(out)
    return "  ".join(out) if rng.random() < 0.1 else " ".join(out)


def main():
    rng = random.Random(20240611)
    chrf = CHRF()
    chrfpp = CHRF(word_order=2)
    rows = []
    while len(rows) < 50:
        ref = sentence(rng)
        hyp = ref if rng.random() < 0.06 else perturb(rng, ref)
        if not hyp.strip():
            continue
        rows.append({
            "hypothesis": hyp,
            "reference": ref,
            "chrf": chrf.sentence_score(hyp, [ref]).score,
            "chrfpp": chrfpp.sentence_score(hyp, [ref]).score,
        })
    hyps = [r["hypothesis"] for r in rows]
    refs = [[r["reference"] for r in rows]]
    with open("chrf_sacrebleu.jsonl", "w", encoding="utf-8") as f:
        f.write(json.dumps({"sacrebleu": sacrebleu.__version__,
                            "corpus_chrf": chrf.corpus_score(hyps, refs).score,
                            "corpus_chrfpp": chrfpp.corpus_score(hyps, refs).score},
                           ensure_ascii=False) + "\n")
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
