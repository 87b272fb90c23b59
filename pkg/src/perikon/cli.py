"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 numerical instability,
3 input/output error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import ArrivalNotDetected, ConfigError, InstabilityError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INSTABILITY = 2
EXIT_IO = 3

THREADS_ENV = "PERIKON_THREADS"

log = logging.getLogger("perikon")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="perikon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (("homogenize", "effective mortar moduli sweep"),
                            ("wave", "wave-speed modulus runs"),
                            ("impact", "projectile impact run")):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", required=True, help="scenario file or preset name")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default: ${THREADS_ENV} or all cores)")
        s.add_argument("--seed", type=int, default=None, help="override the meso seed")
    v = sub.add_parser("validate", help="check a scenario file and exit")
    v.add_argument("--config", required=True)
    return p


def _load(ref: str):
    from .config import load, load_preset

    if os.path.exists(ref):
        return load(ref)
    return load_preset(ref)


def _set_threads(threads):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if threads is None:
        return
    if threads < 1:
        raise ConfigError("thread count must be at least 1")
    import numba

    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def _run(args) -> int:
    from dataclasses import replace

    cfg = _load(args.config)
    if args.command == "validate":
        print(f"{args.config}: valid {cfg.kind} configuration")
        return EXIT_OK
    expected = {"homogenize": "homogenize-sweep", "wave": "wave-modulus", "impact": "impact"}
    if cfg.kind != expected[args.command]:
        raise ConfigError(f"'{args.command}' needs kind = {expected[args.command]}, "
                          f"the configuration has kind = {cfg.kind}")
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        cfg = replace(cfg, meso=replace(cfg.meso, seed=args.seed))
    _set_threads(args.threads)

    from . import scenarios

    if args.command == "homogenize":
        table = scenarios.run_homogenize_sweep(cfg, args.out)
        print(f"wrote {len(table)} rows to {args.out}")
    elif args.command == "wave":
        scenarios.run_wave_modulus(cfg, args.out, progress=_wave_progress)
    else:
        res = scenarios.run_impact(cfg, args.out, progress=_impact_progress)
        m = res.metrics
        print(f"residual velocity {m.residual_velocity:.2f} m/s, penetration {m.penetration_depth:.4f} m, "
              f"crater radius {m.crater_radius * 1e3:.1f} mm, scabbing depth {m.scabbing_depth * 1e3:.1f} mm")
    return EXIT_OK


def _wave_progress(r):
    print(f"porosity {r.porosity:g} saturation {r.saturation:g}: speed {r.speed:.1f} m/s, "
          f"modulus ratio {r.ratio:.4f}", flush=True)


def _impact_progress(sim):
    p = sim.projectile
    log.info("step %d t=%.4g s v=%.2f m/s broken=%d", sim.step_count, sim.time,
             p.velocity[2], sim.failure.n_load_broken if sim.failure is not None else 0)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InstabilityError, ArrivalNotDetected) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
