"""
Exact certificate for the square of the pasted operator
=======================================================

The block relations are oriented into rewrite rules; every entry of the
squared matrices is reduced to a normal form.  Dropping a relation leaves a
stuck term that names what was missing.
"""

from relindex.symbolic import RewriteSystem, parse_term, reduce
from relindex.symbolic.verify import soundness_check, verify_homotopy, verify_proposition

rs = RewriteSystem.default()
print(rs)
print()

# a few reductions by hand
for text in ("a a + b b*", "b d", "b* b + c c + dt dt*"):
    print("%-22s ->  %s" % (text, reduce(parse_term(text), rs)))
print()

cert = verify_proposition(rs)
print(cert.summary())
for step in cert.entry(2, 2).trace:
    print("   (2,2)", step.rule, "at", step.position, "on", step.monomial)

hom = verify_homotopy(rs)
print(hom.summary(), hom.checks)
print()

# what breaks without each relation
for axiom in ("A6", "KILL", "A5"):
    bad = verify_proposition(rs.without(axiom))
    first = bad.failures[0]
    print("without %-4s: %s, first stuck entry %s = %s"
          % (axiom, bad.summary(), first.label, first.normal_form))
print()

# numbers that satisfy the relations up to delta square to 1 up to C delta
res = soundness_check()
print("soundness constant C = %.3f (worst axiom defect %.1e)" % (res.constant, res.worst_axiom_defect))
