"""
Choosing an algorithm
=====================

A selector table maps parameters to a ranked list of algorithms. The first
compatible entry wins. Tables can be written by hand or measured.
"""

from convprims import Algorithm, ConvParams, SelectorTable, select
from convprims.autotune import autotune
from convprims.selector import DEFAULT_TABLE, format_table, parse_table

# The built-in table prefers Winograd for unstrided 3x3 windows.
print(select(DEFAULT_TABLE, ConvParams.square(3, 1, 56, 56, 64, 64)))
print(select(DEFAULT_TABLE, ConvParams.square(7, 2, 224, 224, 3, 64)))

# A hand-written table in the text format.
table = parse_table("""
# K S H W Cin Cout : ranking
3 1 * * * * : winograd,tiled
default : im2col,direct
""")
print(select(table, ConvParams.square(3, 1, 14, 14, 8, 8)))
print(select(table, ConvParams.square(3, 2, 14, 14, 8, 8)))

# Measure instead of guessing. Each config gets an exact-match rule.
configs = [ConvParams.square(1, 1, 14, 14, 64, 128), ConvParams.square(3, 1, 14, 14, 32, 32)]
result = autotune(configs, reps=3)
print(format_table(result.table))
for key, times in result.timings.items():
    print(key, {a.value: t for a, t in sorted(times.items(), key=lambda kv: kv[1])})

assert isinstance(result.table, SelectorTable) and Algorithm.DIRECT in result.table.default
