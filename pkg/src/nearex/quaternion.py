"""Quaternion arithmetic over polynomial (or scalar) entries.

A quaternion is a length-4 sequence ``(q0, q1, q2, q3)`` of objects that
support +, -, and *; this covers both numeric types and
:class:`nearex.algebra.Polynomial`, which is what the kinematic system
builders use.
"""

from __future__ import annotations


def qmul(a, b):
    """Hamilton product a * b."""
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def qconj(a):
    a0, a1, a2, a3 = a
    return (a0, -a1, -a2, -a3)


def leg_constraint(e, g, a, b, d):
    """Squared-distance constraint of one platform leg in Study coordinates.

    ``e`` and ``g`` are quaternions (rotation and translation part of a dual
    quaternion), ``a`` and ``b`` are pure quaternions for the anchor points,
    and ``d`` is the squared leg length.  The vector parts of the terms cancel
    in conjugate pairs, so the scalar component carries the whole constraint.
    """
    ec, gc = qconj(e), qconj(g)
    ac, bc = qconj(a), qconj(b)
    aa = qmul(a, ac)[0]
    bb = qmul(b, bc)[0]
    terms = [
        tuple((aa + bb - d) * c for c in qmul(e, ec)),
        tuple(-c for c in qmul(qmul(qmul(e, b), ec), ac)),
        tuple(-c for c in qmul(qmul(qmul(a, e), bc), ec)),
        qmul(qmul(g, bc), ec),
        qmul(qmul(e, b), gc),
        tuple(-c for c in qmul(qmul(g, ec), ac)),
        tuple(-c for c in qmul(qmul(a, e), gc)),
        qmul(g, gc),
    ]
    total = terms[0]
    for t in terms[1:]:
        total = tuple(x + y for x, y in zip(total, t))
    return total
