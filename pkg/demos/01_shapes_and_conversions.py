"""Tour of the quadric model type: build, convert, decompose, serialize.

An ellipsoid lives in two equivalent representations here: ten algebraic
coefficients (unit norm, sign-canonical) and a geometric frame (rotation,
translation, semiaxes).  Everything downstream accepts the model object,
which carries both.
"""

import json

import numpy as np

from casfit import (EllipsoidGeometry, EllipsoidModel, NotAnEllipsoid,
                    algebraic_distance, random_ellipsoid)


def main():
    rng = np.random.default_rng(7)

    print("=== from geometry to coefficients ===")
    rot = np.eye(3)
    geom = EllipsoidGeometry(rotation=rot, translation=-rot @ [1.0, -2.0, 0.5],
                             semiaxes=np.array([3.0, 2.0, 1.0]))
    model = EllipsoidModel.from_geometry(geom)
    print("semiaxes:", model.semiaxes)
    print("center:  ", model.center)
    print("coeffs q:", np.array_str(model.coeffs, precision=4))

    print()
    print("=== and back again ===")
    again = EllipsoidModel.from_coeffs(model.coeffs)
    print("semiaxes after a round trip:", again.semiaxes)
    print("center drift:", np.abs(again.center - model.center).max())

    print()
    print("=== the coefficient vector is only defined up to sign ===")
    flipped = EllipsoidModel.from_coeffs(-model.coeffs)
    print("normalization collapses the sign:",
          np.array_equal(flipped.coeffs, model.coeffs))

    print()
    print("=== surface membership is an algebraic statement ===")
    m = random_ellipsoid(rng)
    u = np.array([1.0, 0.0, 0.0]) * m.semiaxes
    p = (u - m.geometry.translation) @ m.geometry.rotation
    print("point on the first axis vertex:", np.array_str(p, precision=4))
    print("algebraic distance there:", float(algebraic_distance(p, m)))

    print()
    print("=== not every quadric is an ellipsoid ===")
    hyperboloid = np.array([1.0, 1.0, -1.0, 0, 0, 0, 0, 0, 0, 1.0])
    try:
        EllipsoidModel.from_coeffs(hyperboloid)
    except NotAnEllipsoid as exc:
        print("rejected:", exc)

    print()
    print("=== JSON round trip ===")
    doc = model.to_json_dict()
    text = json.dumps(doc, indent=2)
    back = EllipsoidModel.from_json_dict(json.loads(text))
    print("keys:", sorted(doc))
    print("coefficient drift:", np.abs(back.coeffs - model.coeffs).max())


if __name__ == "__main__":
    main()
