"""Oracle for derived constants frozen into the C++ tests.

Run from the repo root; rewrites tests/oracles/phrase_tuples.txt and prints
the remaining constants.
"""
import itertools
import math
import pathlib

from scipy import stats

PHRASES = ["folklore", "common sense", "mythology", "culture"]


def english_list(items):
    if len(items) == 1:
        return items[0]
    if len(items) == 2:
        return f"{items[0]} and {items[1]}"
    return ", ".join(items[:-1]) + ", and " + items[-1]


tuples = [p for k in (2, 3, 4) for p in itertools.permutations(PHRASES, k)]
out = pathlib.Path(__file__).with_name("phrase_tuples.txt")
out.write_text("".join(english_list(list(t)) + "\n" for t in tuples))
print("ordered phrase samples:", len(tuples))

# 2d6: exact mean/variance and the standard error over 100k rolls.
faces = range(1, 7)
sums = [a + b for a in faces for b in faces]
mean = sum(sums) / 36
var = sum((s - mean) ** 2 for s in sums) / 36
print(f"2d6 mean {mean} var {var:.6f} se(100k) {math.sqrt(var / 100_000):.6f}")
print("2d6 pmf x36:", [sums.count(s) for s in range(2, 13)])

# Weighted 1:3 table over 400k draws.
p = 0.75
print(f"1:3 heavy share {p} se(400k) {math.sqrt(p * (1 - p) / 400_000):.6f}")
# Size classes over 60k draws.
print(f"size class 1/3 se(60k) {math.sqrt((1/3) * (2/3) / 60_000):.6f}")

for dof in (1, 2, 10, 59):
    print(f"chi2 critical p=0.001 dof={dof}: {stats.chi2.ppf(0.999, dof):.4f}")

print(f"brainstorm rounds per thread: 162/71 = {162 / 71:.6f}")
print(f"open chat rounds per thread: 2295/51 = {2295 / 51:.6f}")
