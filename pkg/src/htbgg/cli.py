"""Command-line front end and the JSON complex document format.

A complex document looks like::

    {"field": "Q", "n": 3,
     "terms": {"-1": [{"twist": -3}], "0": [{"twist": -1, "strand": 1}]},
     "differentials": {"-1": [["e[0,2]+e[1,3]"]]}}

Differential matrices are indexed ``[target][source]``; entries use the
exterior-element grammar ``c*e[i,j,...]`` and ``"0"``.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bgg import L_of_complex, cohomology_table, poly_str
from .exactla import parse_field
from .exterior import ExteriorError, format_element, parse_element
from .gallery import BUILDERS, build_example, monad_report
from .lamcomplex import FreeComplex, chain_map_dimension, homotopy_class_dimension
from .lammod import FreeModule, ModMorphism, ModuleError
from .minimize import decompose_bundle, minimize_complex
from .tate import extract_ht, is_isomorphic_minimal, tate_window


class DocumentError(ValueError):
    pass


def _int_key(k, where):
    try:
        return int(k)
    except (TypeError, ValueError):
        raise DocumentError(f"{where}: position {k!r} is not an integer") from None


def parse_complex_document(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    for key in ("field", "n", "terms"):
        if key not in doc:
            raise DocumentError(f"missing key {key!r}")
    try:
        F = parse_field(doc["field"])
    except ValueError as e:
        raise DocumentError(str(e)) from None
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise DocumentError("n must be a positive integer")
    terms = {}
    for k, summands in doc["terms"].items():
        p = _int_key(k, "terms")
        twists = []
        for t, s in enumerate(summands):
            where = f"terms[{k}][{t}]"
            a = s.get("twist") if isinstance(s, dict) else s
            if not isinstance(a, int):
                raise DocumentError(f"{where}: twist must be an integer")
            if isinstance(s, dict) and "strand" in s and s["strand"] != p - a:
                raise DocumentError(f"{where}: strand {s['strand']} disagrees with p - twist = {p - a}")
            twists.append(a)
        terms[p] = FreeModule(twists, n)
    diffs = {}
    for k, rows in (doc.get("differentials") or {}).items():
        p = _int_key(k, "differentials")
        src, tgt = terms.get(p, FreeModule((), n)), terms.get(p + 1, FreeModule((), n))
        if len(rows) != len(tgt) or any(len(r) != len(src) for r in rows):
            raise DocumentError(f"differentials[{k}]: expected a {len(tgt)}x{len(src)} matrix")
        entries = {}
        for r, row in enumerate(rows):
            for c, txt in enumerate(row):
                where = f"differentials[{k}][{r}][{c}]"
                gap = tgt.twists[r] - src.twists[c]
                try:
                    w = parse_element(str(txt), n, F, "V", gap if gap >= 0 else None)
                except ExteriorError as e:
                    if str(txt).strip() == "0":
                        continue
                    raise DocumentError(f"{where}: {e}") from None
                if w:
                    entries[(r, c)] = w
        try:
            diffs[p] = ModMorphism(src, tgt, entries, F)
        except ModuleError as e:
            raise DocumentError(f"differentials[{k}]: {e}") from None
    G = FreeComplex(terms, diffs, n, F)
    ver = G.verify_complex()
    if not ver["ok"]:
        w = ver["failures"][0]
        raise DocumentError(
            f"d^2 != 0: composite at position {w['position']} has entry ({w['row']},{w['col']}) = "
            f"{format_element(w['entry'])}")
    return G


def complex_to_dict(G):
    terms = {str(p): [{"twist": a, "strand": p - a} for a in G.term(p).twists] for p in G.positions()}
    diffs = {}
    for p, f in sorted(G.diffs.items()):
        diffs[str(p)] = [[format_element(f.entries[(r, c)]) if (r, c) in f.entries else "0"
                          for c in range(len(f.source))] for r in range(len(f.target))]
    return {"field": G.field.descriptor, "n": G.n, "terms": terms, "differentials": diffs}


def emit_complex_document(G):
    return json.dumps(complex_to_dict(G), indent=1)


def scomplex_to_dict(C):
    nv = C.nv
    diffs = {}
    for s, D in sorted(C.diffs.items()):
        diffs[str(s)] = [[poly_str(D.entries[(r, c)], nv, C.field) if (r, c) in D.entries else "0"
                          for c in range(D.cols)] for r in range(D.rows)]
    return {"field": C.field.descriptor, "n": C.n,
            "terms": {str(s): list(t) for s, t in sorted(C.terms.items())},
            "summary": {str(s): v for s, v in C.describe().items()}, "differentials": diffs}


def _range(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path, field=None):
    G = parse_complex_document(_read(path))
    if field is not None and field != G.field:
        raise DocumentError(f"document is over {G.field.descriptor}, --field asks for {field.descriptor}")
    return G


def _emit(obj):
    print(json.dumps(obj, indent=1, sort_keys=False))


def cmd_check(a):
    G = _load(a.document, a.field)
    st = G.strand_table()
    _emit({"verify": True, "is_minimal": G.is_minimal(), "is_ht": G.is_ht(),
           "strands": [{"strand": i, "twist": d, "multiplicity": k} for (i, d), k in sorted(st.items())]})


def cmd_cohomology(a):
    G = _load(a.document, a.field)
    lo, hi = a.degrees or (-G.n - 2, 2)
    T = cohomology_table(G, range(lo, hi + 1))
    fmt = a.format or "csv"
    if fmt == "csv":
        sys.stdout.write(T.to_csv())
    elif fmt == "md":
        sys.stdout.write(T.to_markdown())
    else:
        _emit(T.to_json())


def cmd_decompose(a):
    G = _load(a.document, a.field)
    _emit(decompose_bundle(G).to_json())


def cmd_tate(a):
    G = _load(a.document, a.field)
    lo, hi = a.window or (None, None)
    W = tate_window(G, lo, hi)
    back = extract_ht(W)
    iso = is_isomorphic_minimal(back, G, seed=a.seed)
    _emit({"lo": W.lo, "hi": W.hi, "r": W.r, "exact": W.exact_ok, "window": complex_to_dict(W.complex),
           "extracted": complex_to_dict(back), "roundtrip": iso.status, "reason": iso.reason})


def cmd_stablehom(a):
    A = _load(a.document, a.field)
    B = _load(a.other, a.field)
    _emit({"hom_chain_maps": chain_map_dimension(A, B), "stable_hom": homotopy_class_dimension(A, B)})


def cmd_minimize(a):
    G = _load(a.document, a.field)
    _emit(scomplex_to_dict(minimize_complex(L_of_complex(G))))


def cmd_example(a):
    params = {}
    if a.field is not None:
        params["field"] = a.field
    for key in ("n", "i", "j", "module"):
        v = getattr(a, key)
        if v is not None:
            params[key] = v
    try:
        ex = build_example(a.name, **params)
    except TypeError as e:
        raise DocumentError(f"bad parameters for {a.name}: {e}") from None
    rep = monad_report(ex, exhaustive=not a.sample_only, samples=a.samples, seed=a.seed)
    if a.emit_document:
        rep["document"] = complex_to_dict(ex.G)
    _emit(rep)


def build_parser():
    ap = argparse.ArgumentParser(prog="htbgg", description="HT-complexes, BGG and Tate resolutions")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", type=parse_field, default=None, help="Q or GF:p")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=200)
    sub = ap.add_subparsers(dest="command", required=True)

    def doc_cmd(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("document", help="complex document (JSON), '-' for stdin")
        p.set_defaults(fn=fn)
        return p

    doc_cmd("check", cmd_check, "verify d^2 = 0 and the HT conditions")
    p = doc_cmd("cohomology", cmd_cohomology, "cohomology table of the associated bundle")
    p.add_argument("--degrees", type=_range)
    p.add_argument("--format", choices=["csv", "md", "json"])
    doc_cmd("decompose", cmd_decompose, "decomposition report")
    p = doc_cmd("tate", cmd_tate, "Tate window and round trip")
    p.add_argument("--window", type=_range)
    p = doc_cmd("stablehom", cmd_stablehom, "dimension of stable Hom between two complexes")
    p.add_argument("other")
    doc_cmd("minimize", cmd_minimize, "minimized L(G)")
    p = sub.add_parser("example", parents=[common], help="gallery example with monad report")
    p.add_argument("name", choices=sorted(BUILDERS))
    p.add_argument("--n", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--module", choices=["k", "m2"])
    p.add_argument("--sample-only", action="store_true", help="sample points even over GF(p)")
    p.add_argument("--emit-document", action="store_true")
    p.set_defaults(fn=cmd_example)
    return ap


def _glue_ranges(argv):
    # "--degrees -4:2" would otherwise read -4:2 as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--degrees", "--window"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run_command(argv=None):
    ap = build_parser()
    a = ap.parse_args(_glue_ranges(sys.argv[1:] if argv is None else list(argv)))
    try:
        a.fn(a)
    except (ValueError, OSError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
