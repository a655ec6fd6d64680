"""Command-line entry point: ``daqsim <recipe> [options]``.

Exit codes: 0 success, 2 configuration error, 3 device validation error.
"""
import argparse
import json
import sys

from . import experiments as ex
from .device import DeviceValidationError
from .model import DisorderSpec


def _key_values(text, allowed):
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ex.ConfigError(f"bad setting {part!r}; expected key=value with key in {allowed}")
        out[key] = allowed[key](value)
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="daqsim", description=__doc__.splitlines()[0])
    p.add_argument("recipe", choices=sorted(ex.RECIPES))
    p.add_argument("--config", help="JSON file with ExperimentConfig fields (flags override it)")
    p.add_argument("--device", help="preset name or device JSON file")
    p.add_argument("--backend", action="append", choices=["theory", "digital", "da",
                                                          "exact-theory", "digital-analog"],
                   help="repeat to select several (default: all applicable)")
    p.add_argument("--trotter", type=int, help="Trotter steps")
    p.add_argument("--tmax-us", type=float, help="last grid point in µs")
    p.add_argument("--points", type=int, help="grid points (default 25)")
    p.add_argument("--shots", type=int, help="trajectories per point (default 8192)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--disorder", help="amplitude_factor=2,realizations=10,seed=0")
    p.add_argument("--pattern", help="initial domain pattern for the disorder recipe")
    p.add_argument("--noise-scale", type=float, help="multiplies every stochastic noise rate")
    p.add_argument("--crosstalk-scale", type=float, help="multiplies all device couplings")
    p.add_argument("--cnot-depol", type=float, help="CNOT depolarizing probability")
    p.add_argument("--workers", type=int, help="threads sweeping the time grid")
    p.add_argument("--continuum", action="store_true", help="add the exact continuous solution")
    p.add_argument("--out", help="CSV output path (default stdout)")
    return p


def config_from_args(args):
    kw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                kw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ex.ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(kw, dict):
            raise ex.ConfigError("config file must hold an object")
        kw.pop("recipe", None)
        if "disorder" in kw:
            kw["disorder"] = DisorderSpec(**kw["disorder"])
        if "backends" in kw:
            kw["backends"] = tuple(kw["backends"])
    simple = {"device": args.device, "n_trotter": args.trotter, "tmax_us": args.tmax_us,
              "points": args.points, "shots": args.shots, "seed": args.seed,
              "workers": args.workers, "pattern": args.pattern}
    kw.update({k: v for k, v in simple.items() if v is not None})
    if args.continuum:
        kw["continuum"] = True
    if args.backend:
        kw["backends"] = tuple(args.backend)
    elif args.recipe == "nonmarkov" and "backends" not in kw:
        kw["backends"] = ("theory", "da")
    noise = dict(kw.get("noise", {}))
    for flag, key in (("noise_scale", "scale"), ("crosstalk_scale", "crosstalk_scale"),
                      ("cnot_depol", "cnot_depol")):
        if getattr(args, flag) is not None:
            noise[key] = getattr(args, flag)
    kw["noise"] = noise
    if args.disorder:
        d = _key_values(args.disorder, {"amplitude_factor": float, "realizations": int,
                                        "seed": int})
        kw["disorder"] = DisorderSpec(**d)
    try:
        return ex.ExperimentConfig(recipe=args.recipe, **kw)
    except TypeError as exc:
        raise ex.ConfigError(str(exc)) from exc


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.noise_model()
        rows = ex.run_recipe(cfg)
    except DeviceValidationError as exc:
        print(f"daqsim: device error: {exc}", file=sys.stderr)
        return 3
    except (ex.ConfigError, ValueError) as exc:
        print(f"daqsim: config error: {exc}", file=sys.stderr)
        return 2
    text = ex.rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
