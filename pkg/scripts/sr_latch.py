"""SR latch: set-only run against set-plus-reset run, both models."""

import argparse

from idmsim.core import Model
from idmsim.experiments import latch_recipe


def show(name, recipe):
    for label, run in (("set only", recipe.set_only), ("set + reset", recipe.set_reset)):
        print(f"{name:9s} {label:12s} T periods {run.periods:3d}  "
              f"verdict {run.verdict_t.kind.value:11s} Q transitions {run.q_transitions}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.parse_args(argv)
    idm = latch_recipe(Model.IDM_EXP)
    print(f"set width {idm.set_width} as, reset {idm.reset_width} as rising at {idm.reset_rise} as")
    show("idm", idm)
    show("inertial", latch_recipe(Model.INERTIAL, idm.set_width, idm.reset_width,
                                  reset_rise=idm.reset_rise))


if __name__ == "__main__":
    main()
