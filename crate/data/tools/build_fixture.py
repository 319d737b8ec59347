#!/usr/bin/env python3
"""Build data/ecdata/curves.jsonl from PARI's elldata tables.

Needs the `cypari` module and an unpacked elldata directory (files ell0,
ell1, ...). Torsion, Tamagawa numbers, Kodaira symbols, isogeny degrees and
analytic Sha come from PARI; rank is the number of stored generators.

    python3 build_fixture.py ELLDATA_DIR OUT.jsonl
"""

import json
import sys
from pathlib import Path

from cypari import pari

MAX_LEVEL = 1000
EXTRA_LEVELS = {2, 7, 14, 2003, 4006, 14021, 28042}


def kodaira(code):
    code = int(code)
    if code == 1:
        return "I0"
    if code in (2, 3, 4):
        return ["II", "III", "IV"][code - 2]
    if code > 4:
        return f"I{code - 4}"
    if code == -1:
        return "I0*"
    if code in (-2, -3, -4):
        return ["II*", "III*", "IV*"][-code - 2]
    return f"I{-code - 4}*"


def curves_at(elldata, levels):
    files = sorted({n // 1000 for n in levels})
    for k in files:
        table = pari(Path(elldata, f"ell{k}").read_text())
        for entry in table:
            n = int(entry[0])
            if n not in levels:
                continue
            for c in list(entry)[1:]:
                yield n, str(c[0]), [int(a) for a in c[1]], list(c[2])


def split_label(label, n):
    rest = label[len(str(n)):]
    letters = "".join(ch for ch in rest if ch.isalpha())
    return letters, int(rest[len(letters):])


def record(n, label, ainvs, gens):
    e = pari.ellinit(ainvs)
    cls, num = split_label(label, n)
    rank = len(gens)
    tam, kod, fexp = {}, {}, {}
    for p in pari.factor(n)[0]:
        f, code, _, c = pari.elllocalred(e, p)
        tam[str(int(p))] = int(c)
        kod[str(int(p))] = kodaira(code)
        fexp[str(int(p))] = int(f)
    iso = pari.ellisomat(e)
    degrees = sorted({int(d) for d in iso[1][0]}) if len(iso) else [1]
    rec = {
        "level": n,
        "label": f"{n}{cls}",
        "number": num,
        "ainvs": ainvs,
        "rank": rank,
        "torsion": int(pari.elltors(e)[0]),
        "isogeny_degrees": degrees,
        "tamagawa": tam,
        "kodaira": kod,
        "conductor_exponents": fexp,
    }
    if rank <= 1:
        r_an, lval = pari.ellanalyticrank(e)
        if int(r_an) == rank:
            reg = pari.matdet(pari.ellheightmatrix(e, gens)) if rank else 1
            sha = float(lval / (pari.ellbsd(e) * reg))
            if abs(sha - round(sha)) > 1e-4:
                raise SystemExit(f"{label}: non-integral analytic Sha {sha}")
            rec["sha_an"] = int(round(sha))
    return rec


def main():
    elldata, out = sys.argv[1], sys.argv[2]
    levels = set(range(1, MAX_LEVEL + 1)) | EXTRA_LEVELS
    pari.allocatemem(2 * 10**9)
    rows = [record(*c) for c in curves_at(elldata, levels)]
    rows.sort(key=lambda r: (r["level"], len(r["label"]), r["label"], r["number"]))
    with open(out, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r, separators=(",", ":")) + "\n")
    print(f"{len(rows)} curves", file=sys.stderr)


if __name__ == "__main__":
    main()
