#!/usr/bin/env python3
"""Writes the Turtle round-trip corpus (corpus/doc-NN.ttl) and hundred.ttl.

Deterministic: run from this directory with python3 make_corpus.py.
"""
import random

rng = random.Random(20260316)

WORDS = ["map", "marker", "street", "rua", "escola", "politician", "político", "ônibus",
         "hall", "river", "bridge", "açaí", "corrupção", "vote", "flood", "school"]
NAMESPACES = [("ex", "http://example.org/"), ("ns", "http://semaps.example/ns#"),
              ("geo", "http://www.w3.org/2003/01/geo/wgs84_pos#"), ("foaf", "http://xmlns.com/foaf/0.1/"),
              ("xsd", "http://www.w3.org/2001/XMLSchema#"), ("rdfs", "http://www.w3.org/2000/01/rdf-schema#")]
ESCAPES = ['quote \\"here\\"', "tab\\tsep", "line\\nbreak", "back\\\\slash", "uni \\u00e9t\\u00E9", "astral \\U0001F600"]


def local():
    return rng.choice(["a", "b", "c", "item", "place", "n"]) + str(rng.randint(0, 40))


def iri(doc_ns, style):
    if style == 0:
        return "<http://example.org/%s>" % local()
    if style == 1:
        return "ex:%s" % local()
    if style == 2:
        return "<%s>" % local()          # relative, resolved against @base
    return "%s:%s" % (doc_ns, local())


def literal():
    kind = rng.randrange(9)
    w = rng.choice(WORDS)
    if kind == 0:
        return '"%s"' % w
    if kind == 1:
        return '"%s"@%s' % (w, rng.choice(["en", "pt", "pt-BR", "en-US"]))
    if kind == 2:
        return str(rng.randint(-500, 5000))
    if kind == 3:
        return "%d.%d" % (rng.randint(-90, 90), rng.randint(0, 9999))
    if kind == 4:
        return "%d.%de%d" % (rng.randint(0, 9), rng.randint(0, 99), rng.randint(-5, 5))
    if kind == 5:
        return '"%s"' % rng.choice(ESCAPES)
    if kind == 6:
        return '"2026-0%d-1%dT10:00:00Z"^^xsd:dateTime' % (rng.randint(1, 9), rng.randint(0, 9))
    if kind == 7:
        return "'%s'" % w
    return '"%s"^^<http://example.org/dt/custom>' % w


def doc(i):
    lines = ["# round-trip corpus document %d" % i]
    use_sparql_style = i % 5 == 0
    for name, ns in NAMESPACES:
        lines.append(("PREFIX %s: <%s>" if use_sparql_style else "@prefix %s: <%s> .") % (name, ns))
    doc_ns = "d%d" % i
    lines.append("@prefix %s: <http://corpus.example/doc%d/> ." % (doc_ns, i))
    lines.append(("BASE <http://base.example/%d/>" if use_sparql_style else "@base <http://base.example/%d/> .") % i)
    lines.append("")
    for _ in range(rng.randint(3, 12)):
        subj = "_:b%d" % rng.randint(0, 3) if rng.random() < 0.2 else iri(doc_ns, rng.randrange(4))
        preds = []
        for _ in range(rng.randint(1, 4)):
            p = "a" if rng.random() < 0.15 else iri(doc_ns, rng.choice([0, 1, 3]))
            objs = []
            for _ in range(rng.randint(1, 3)):
                r = rng.random()
                if p == "a" or r < 0.35:
                    objs.append(iri(doc_ns, rng.randrange(4)))
                elif r < 0.45:
                    objs.append("_:b%d" % rng.randint(0, 3))
                else:
                    objs.append(literal())
            preds.append("%s %s" % (p, " , ".join(objs)))
        sep = " ;\n    " if rng.random() < 0.7 else " ; "
        lines.append("%s %s ." % (subj, sep.join(preds)))
        if rng.random() < 0.2:
            lines.append("# a comment between statements")
    return "\n".join(lines) + "\n"


def hundred():
    lines = ["@prefix ex: <http://example.org/> .",
             "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .", ""]
    triples = set()
    while len(triples) < 100:
        s = "ex:s%d" % rng.randint(0, 19)
        p = "ex:p%d" % rng.randint(0, 6)
        o = rng.choice(['"v%d"' % rng.randint(0, 50), str(rng.randint(0, 99)),
                        "ex:o%d" % rng.randint(0, 30), '"x%d"@pt' % rng.randint(0, 9)])
        triples.add((s, p, o))
    for t in sorted(triples):
        lines.append("%s %s %s ." % t)
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    for i in range(50):
        with open("corpus/doc-%02d.ttl" % i, "w", encoding="utf-8") as f:
            f.write(doc(i))
    with open("hundred.ttl", "w", encoding="utf-8") as f:
        f.write(hundred())
