"""Write the reference map files used by the tests and the determinism check."""
import pathlib
import sys

from uniharm.mapspec import canonical_dumps

Z = {"type": "harmonic", "h": [[0, 0], [1, 0]], "g": [[0, 0]]}
ZERO = {"type": "harmonic", "h": [[0, 0]], "g": [[0, 0]]}


def const(c):
    return {"type": "polyzzbar", "terms": [[0, 0, c, 0]]}


CORPUS = {
    "identity": {"kind": "polyharmonic", "p": 1, "components": [Z], "name": "f = z"},
    "shear": {"kind": "polyharmonic", "p": 1, "name": "f = z + 0.3 conj(z)",
              "components": [{"type": "harmonic", "h": [[0, 0], [1, 0]], "g": [[0, 0], [0.3, 0]]}]},
    "conjugate": {"kind": "polyharmonic", "p": 1, "name": "f = conj(z)",
                  "components": [{"type": "harmonic", "h": [[0, 0]], "g": [[0, 0], [1, 0]]}]},
    "square": {"kind": "polyharmonic", "p": 1, "name": "f = z^2",
               "components": [{"type": "harmonic", "h": [[0, 0], [0, 0], [1, 0]], "g": [[0, 0]]}]},
    "biharmonic_03": {"kind": "polyharmonic", "p": 2, "name": "f = 0.3|z|^2 + z",
                      "components": [const(0.3), Z]},
    "stable_02": {"kind": "polyharmonic", "p": 2, "name": "f = 0.2|z|^2 + z",
                  "components": [const(0.2), Z]},
    "violation_5": {"kind": "polyharmonic", "p": 2, "name": "f = 5|z|^2 + z",
                    "components": [const(5), Z]},
    "fold_counterexample": {"kind": "polyharmonic", "p": 2, "name": "f = 0.4|z|^2 z^2 + z",
                            "components": [{"type": "polyzzbar", "terms": [[2, 0, 0.4, 0]]}, Z]},
    "logharmonic_z4": {"kind": "polyharmonic", "p": 3, "name": "f = |z|^4 z^4",
                       "components": [{"type": "harmonic", "h": [[0, 0]] * 4 + [[1, 0]], "g": [[0, 0]]},
                                      ZERO, ZERO]},
    "logp_03": {"kind": "log-p-harmonic", "p": 2, "name": "f = exp(0.3|z|^2 + z)",
                "components": [{"type": "harmonic", "h": [[0.3, 0]], "g": [[0, 0]]}, Z]},
}


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, obj in CORPUS.items():
        (out / f"{name}.json").write_text(canonical_dumps(obj) + "\n", encoding="ascii")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/corpus")
