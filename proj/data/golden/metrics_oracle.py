#!/usr/bin/env python3
# Copyright 2026 The TermForge Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent reference values for the BLEU/ROUGE golden fixture.

Exact rational arithmetic for counts, math.exp/log only at the end.
Regenerate with: python3 metrics_oracle.py > metrics_golden.json
"""

import itertools
import json
import math
import unicodedata
from collections import Counter
from fractions import Fraction

PAIRS = [
    ("the cat", "the cat sat"),
    ("the cat sat", "the cat sat"),
    ("a b c d", "e f g h"),
    ("the the the", "the cat"),
    ("cat the sat", "the cat sat"),
    ("loan officer signs", "loan office signs"),
    ("risk control unit reports", "risk controller reports"),
    ("a b a b", "a b a"),
    ("ｆｕｌｌ width", "full width"),
    ("x", "x y z w v"),
]


def words(text):
    return unicodedata.normalize("NFKC", text).split()


def ngrams(ws, n):
    return Counter(tuple(ws[i:i + n]) for i in range(len(ws) - n + 1))


def bleu(hyps, refs):
    matched = [0] * 5
    total = [0] * 5
    hyp_len = ref_len = 0
    for h, r in zip(hyps, refs):
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, 5):
            hc, rc = ngrams(h, n), ngrams(r, n)
            matched[n] += sum(min(c, rc[g]) for g, c in hc.items())
            total[n] += sum(hc.values())
    if hyp_len == 0 or matched[1] == 0:
        return 0.0, 0.0
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    p1 = Fraction(matched[1], total[1])
    logs = [math.log(p1)]
    for n in range(2, 5):
        logs.append(math.log(Fraction(matched[n] + 1, total[n] + 1)))
    return bp * float(p1), bp * math.exp(sum(logs) / 4)


def f_measure(overlap, h, r):
    if overlap == 0 or h == 0 or r == 0:
        return 0.0
    p = Fraction(overlap, h)
    q = Fraction(overlap, r)
    return float(2 * p * q / (p + q))


def rouge1(h, r):
    hc, rc = Counter(h), Counter(r)
    return f_measure(sum(min(c, rc[w]) for w, c in hc.items()), len(h), len(r))


def lcs_bruteforce(a, b):
    # Exhaustive over subsequences of the shorter side; fine for <= 5 tokens.
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for k in range(len(short), 0, -1):
        for idx in itertools.combinations(range(len(short)), k):
            sub = [short[i] for i in idx]
            it = iter(long_)
            if all(any(w == x for x in it) for w in sub):
                return k
    return best


def rougel(h, r):
    return f_measure(lcs_bruteforce(h, r), len(h), len(r))


def main():
    out = {"pairs": []}
    hyps, refs = [], []
    r1_sum = rl_sum = 0.0
    for hyp, ref in PAIRS:
        h, r = words(hyp), words(ref)
        hyps.append(h)
        refs.append(r)
        b1, b4 = bleu([h], [r])
        r1, rl = rouge1(h, r), rougel(h, r)
        r1_sum += r1
        rl_sum += rl
        out["pairs"].append({
            "hypothesis": hyp, "reference": ref,
            "bleu1": b1, "bleu4": b4, "rouge1": r1, "rougel": rl,
            "lcs": lcs_bruteforce(h, r),
        })
    b1, b4 = bleu(hyps, refs)
    out["corpus"] = {"bleu1": b1, "bleu4": b4,
                     "rouge1": r1_sum / len(PAIRS), "rougel": rl_sum / len(PAIRS)}
    print(json.dumps(out, indent=2, ensure_ascii=False))


if __name__ == "__main__":
    main()
