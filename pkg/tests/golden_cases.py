"""CLI invocations pinned by golden files.

Run ``python3 tests/golden_cases.py`` to regenerate ``tests/golden`` after an
intentional output change. Float text is LAPACK-dependent at the roundoff
level, so files generated on one platform may differ in the last digits on
another.
"""
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
MODELS = ROOT / "models"
GOLDEN = Path(__file__).resolve().parent / "golden"

ROT = "rotation_reflection.json"
HICKS = "hicks_periodic.json"

# name -> (input model, extra arguments)
CASES = {
    "rot_check": (ROT, ["check"]),
    "rot_evolve_csv": (ROT, ["evolve", "--box", "2,3", "--x0", "1,0,0"]),
    "rot_evolve_json": (ROT, ["evolve", "--box", "1,2", "--x0", "0,1,1", "--format", "json"]),
    "rot_transition": (ROT, ["transition", "--t", "2,3"]),
    "rot_transition_from_s": (ROT, ["transition", "--t", "3,4", "--s", "1,1"]),
    "rot_floquet": (ROT, ["floquet"]),
    "rot_floquet_period": (ROT, ["floquet", "--period", "1,3"]),
    "rot_multipliers": (ROT, ["multipliers"]),
    "rot_synth": ("rotation_reflection_generator.json", ["synth"]),
    "hicks_check": (HICKS, ["check", "--m", "2"]),
    "hicks_evolve": (HICKS, ["evolve", "--box", "2,2", "--x0", "1,0.5"]),
    "hicks_transition": (HICKS, ["transition", "--t", "1,2"]),
    "hicks_floquet": (HICKS, ["floquet", "--period", "2,0"]),
    "hicks_multipliers": (HICKS, ["multipliers", "--m", "2"]),
    "hicks_evolve_model": (HICKS, ["hicks-evolve", "--box", "3,2", "--x0", "1,0.5"]),
    "hicks_multipliers_model": (HICKS, ["hicks-multipliers"]),
}


def argv_for(name, output, seed=0):
    model, extra = CASES[name]
    return [extra[0], "--input", str(MODELS / model), "--output", str(output),
            "--seed", str(seed), *extra[1:]]


def golden_path(name):
    return GOLDEN / f"{name}.out"


def regenerate():
    from multirec.cli import main
    GOLDEN.mkdir(exist_ok=True)
    for name in CASES:
        code = main(argv_for(name, golden_path(name)))
        if code != 0:
            raise SystemExit(f"{name}: exit {code}")


if __name__ == "__main__":
    regenerate()
    sys.exit(0)
