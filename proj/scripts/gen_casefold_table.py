#!/usr/bin/env python3
"""Regenerates include/reconwatch/detail/casefold_table.hpp.

Emits the 1:1 simple case-fold mapping (code point -> folded code point)
derived from Python's Unicode tables. Multi-character foldings (full
folding only) keep their identity mapping, matching simple-fold behavior.
"""

import sys

LIMIT = 0x20000


def simple_fold(cp: int) -> int:
    ch = chr(cp)
    cf = ch.casefold()
    if len(cf) == 1 and cf != ch:
        return ord(cf)
    lo = ch.lower()
    if len(lo) == 1 and lo != ch:
        return ord(lo)
    return cp


def main() -> None:
    pairs = []
    for cp in range(LIMIT):
        folded = simple_fold(cp)
        if folded != cp:
            pairs.append((cp, folded))

    out = sys.stdout
    out.write("// Generated by scripts/gen_casefold_table.py. Do not edit by hand.\n")
    out.write("#pragma once\n\n")
    out.write("#include <cstdint>\n#include <cstddef>\n\n")
    out.write("namespace reconwatch::detail {\n\n")
    out.write("struct CaseFoldPair {\n  char32_t from;\n  char32_t to;\n};\n\n")
    out.write(f"inline constexpr std::size_t kCaseFoldCount = {len(pairs)};\n\n")
    out.write("inline constexpr CaseFoldPair kCaseFoldTable[kCaseFoldCount] = {\n")
    for i in range(0, len(pairs), 4):
        chunk = pairs[i : i + 4]
        cells = " ".join(f"{{0x{a:04X}, 0x{b:04X}}}," for a, b in chunk)
        out.write("    " + cells + "\n")
    out.write("};\n\n")
    out.write("}  // namespace reconwatch::detail\n")


if __name__ == "__main__":
    main()
