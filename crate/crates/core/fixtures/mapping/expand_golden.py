#!/usr/bin/env python3
"""Expands markers.csv by hand-written rules (mirroring markers.map) and
writes markers.golden.ttl in the canonical Turtle layout.

Run from this directory: python3 expand_golden.py
"""
import csv
import re
import urllib.parse

EX = "http://semaps.example/legacy#"
XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
PREFIXES = {"ex": EX, "xsd": XSD}

IRI, LIT = 0, 1


def iri(v):
    return (IRI, v, None)


def lit(v, dt):
    return (LIT, v, dt)


def enc(v):
    return urllib.parse.quote(v, safe="")


def rows():
    with open("markers.csv", newline="", encoding="utf-8") as f:
        yield from csv.DictReader(f)


def expand():
    triples = set()
    for r in rows():
        if r["id"] == "":
            continue
        s = iri(EX + "marker/" + enc(r["id"]))
        triples.add((s, iri(RDF_TYPE), iri(EX + "Marker")))
        if r["creator"]:
            triples.add((s, iri(EX + "hasCreator"), iri(EX + "user/" + enc(r["creator"]))))
        for col, dt in [("lat", "decimal"), ("lon", "decimal"), ("label", "string"), ("created", "dateTime")]:
            if r[col]:
                triples.add((s, iri(EX + col), lit(r[col], XSD + dt)))
        triples.add((s, iri(EX + "origin"), lit("legacy-db", XSD + "string")))
    return triples


def key(term):
    kind, value, dt = term
    return (value, kind, dt or "")


def local_ok(local):
    if local == "":
        return True
    if local.endswith(".") or local[0] in "-.":
        return False
    return all(c.isalnum() or c in "_-." for c in local)


def write_iri(v):
    best = None
    for name, ns in sorted(PREFIXES.items()):
        if v.startswith(ns) and local_ok(v[len(ns):]):
            if best is None or len(ns) > len(best[1]):
                best = (name, ns)
    if best:
        return best[0] + ":" + v[len(best[1]):]
    out = ""
    for c in v:
        if c.isspace() or ord(c) < 0x20 or c in '<>"{}|^`\\':
            out += "\\u%04X" % ord(c)
        else:
            out += c
    return "<" + out + ">"


def escape(s):
    out = ""
    for c in s:
        out += {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}.get(c, c)
    return out


def write_term(t):
    kind, value, dt = t
    if kind == IRI:
        return write_iri(value)
    if dt == XSD + "string":
        return '"' + escape(value) + '"'
    if dt == XSD + "decimal" and re.fullmatch(r"[+-]?\d*\.\d+", value):
        return value
    return '"' + escape(value) + '"^^' + write_iri(dt)


def serialize(triples):
    out = "".join("@prefix %s: <%s> .\n" % (n, ns) for n, ns in sorted(PREFIXES.items()))
    ordered = sorted(triples, key=lambda t: (key(t[0]), key(t[1]), key(t[2])))
    subject = predicate = None
    for s, p, o in ordered:
        if s != subject:
            if subject is not None:
                out += " .\n"
            out += "\n" + write_term(s) + " " + ("a" if p[1] == RDF_TYPE else write_term(p))
            subject, predicate = s, p
        elif p != predicate:
            out += " ;\n    " + ("a" if p[1] == RDF_TYPE else write_term(p))
            predicate = p
        else:
            out += ","
        out += " " + write_term(o)
    if subject is not None:
        out += " .\n"
    return out


if __name__ == "__main__":
    triples = expand()
    with open("markers.golden.ttl", "w", encoding="utf-8") as f:
        f.write(serialize(triples))
    print(len(triples), "triples")
