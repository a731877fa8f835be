"""Independent reference for the documented question-generation procedure.

Used once to derive the golden values frozen in tests/test_pattern_bank.cpp and
tests/test_gameplay.cpp. Run: python3 tests/oracles/reference_generator.py
"""

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, state):
        self.state = state & MASK

    def next(self):
        self.state = (self.state + GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self, lo, hi):
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        x = self.next()
        while x >= limit:
            x = self.next()
        return lo + x % span


EASY = {
    "kinds": ["Arithmetic", "SquareNumbers", "TriangularNumbers"],
    "arithmetic_first": (1, 20), "arithmetic_diff": (2, 12),
    "square_start": (1, 10), "triangular_start": (1, 10),
}


def next_term(kind, stem):
    if kind == "Arithmetic":
        return stem[-1] + (stem[1] - stem[0])
    if kind == "SquareNumbers":
        k = round(stem[0] ** 0.5)
        return (k + len(stem)) ** 2
    if kind == "TriangularNumbers":
        k = next(k for k in range(10**6) if k * (k + 1) // 2 == stem[0])
        j = k + len(stem)
        return j * (j + 1) // 2
    raise ValueError(kind)


def distractors(answer, stem, rng):
    last = stem[-1]
    d = last - stem[-2]
    cands = [answer + d, answer - d, answer + 1, answer - 1, last, answer + 2 * d, answer - 2 * d]
    for i in range(len(cands) - 1, 0, -1):
        j = rng.uniform(0, i)
        cands[i], cands[j] = cands[j], cands[i]
    out = []
    for c in cands:
        if len(out) < 3 and c != answer and c not in out:
            out.append(c)
    step = 2
    while len(out) < 3:
        for c in (answer + step, answer - step):
            if len(out) < 3 and c != answer and c not in out:
                out.append(c)
        step += 1
    return out


def generate_easy(seed):
    p = EASY
    rng = SplitMix64(seed)
    kind = p["kinds"][rng.uniform(0, len(p["kinds"]) - 1)]
    if kind == "Arithmetic":
        first = rng.uniform(*p["arithmetic_first"])
        diff = rng.uniform(*p["arithmetic_diff"])
        stem = [first + i * diff for i in range(4)]
    elif kind == "SquareNumbers":
        k = rng.uniform(*p["square_start"])
        stem = [(k + i) ** 2 for i in range(4)]
    else:
        k = rng.uniform(*p["triangular_start"])
        stem = [(k + i) * (k + i + 1) // 2 for i in range(4)]
    answer = next_term(kind, stem)
    choices = [answer] + distractors(answer, stem, rng)
    for i in range(3, 0, -1):
        j = rng.uniform(0, i)
        choices[i], choices[j] = choices[j], choices[i]
    return {"id": "E-%016x" % seed, "kind": kind, "stem": stem, "choices": choices,
            "correct_index": choices.index(answer)}


if __name__ == "__main__":
    seed = next(s for s in range(1 << 20) if generate_easy(s)["stem"] == [2, 5, 8, 11])
    print("seed", seed, generate_easy(seed))
    print("seed 7", generate_easy(7))
    # Session with seed 42: first roll draws the die then the card seed.
    rng = SplitMix64(42)
    dice = rng.uniform(1, 6)
    card_seed = rng.next()
    print("session 42 first roll", dice, card_seed, generate_easy(card_seed))
