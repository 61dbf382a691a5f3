"""Regenerate the random part of corpus/rewbs.txt (fixed seed, deterministic)."""
from __future__ import annotations

import random
import sys
import time

from rewb.analysis import is_closed, is_closed_star
from rewb.harness import check, default_engines, random_rewb
from rewb.refstring import lang_until_saturated
from rewb.syntax import Alt, Concat, Epsilon, Group, Ref, Rewb, Star, pretty

SEED = 20240517
WANTED = 16
MAX_LEN = 7
SLOW = 6.0  # seconds per entry


def without_refs(r: Rewb) -> Rewb:
    if isinstance(r, Ref):
        return Epsilon()
    if isinstance(r, (Concat, Alt)):
        return type(r)(without_refs(r.left), without_refs(r.right))
    if isinstance(r, Star):
        return Star(without_refs(r.body))
    if isinstance(r, Group):
        return Group(r.index, without_refs(r.body))
    return r


def references_matter(r: Rewb) -> bool:
    """The references change the bounded language (they are not all trivially empty)."""
    return lang_until_saturated(r, MAX_LEN).words != lang_until_saturated(without_refs(r), MAX_LEN).words


def main() -> None:
    rng = random.Random(SEED)
    seen: set[str] = set()
    picked = []
    closed_star = 0
    while len(picked) < WANTED:
        r = random_rewb(rng, max_index=2, letters=rng.choice(["ab", "ab", "abc"]), size=rng.randint(5, 11))
        text = pretty(r)
        if text in seen or not references_matter(r):
            continue
        seen.add(text)
        cs = is_closed_star(r)
        # keep a mix: at most three quarters closed-star
        if cs and closed_star >= WANTED * 3 // 4:
            continue
        start = time.perf_counter()
        report = check(text, MAX_LEN, default_engines(text))
        took = time.perf_counter() - start
        if not report.ok or took > SLOW:
            continue
        closed_star += cs
        picked.append(f"{text}  # expect: closed={'yes' if is_closed(r) else 'no'}, closed-star={'yes' if cs else 'no'}")
        print(f"{took:6.2f}s {picked[-1]}", file=sys.stderr)
    print("\n".join(picked))


if __name__ == "__main__":
    main()
