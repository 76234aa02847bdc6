"""Command-line interface: ``vibronic {compile,estimate,simulate,spectrum}``.

Exit codes: 0 success, 2 invalid input or I/O failure, 3 size cap exceeded,
4 numerical failure (fixed-point overflow, step-count fit).
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from .circuit import FixedPoint, build_evolution, export_gates
from .circuit.stepcount import DEFAULT_PROXY_BUDGET
from .errors import CompileError, FitError, SizeCapError
from .grid import GridConfig
from .model import load_model
from .units import HARTREE_IN_EV, fs_to_au

EXIT_OK, EXIT_INPUT, EXIT_SIZE, EXIT_NUMERIC = 0, 2, 3, 4


def _fixed_point(args) -> FixedPoint:
    if args.fixed_point_bits is None:
        return FixedPoint(w_frac=args.fraction_bits or 24)
    w = args.fixed_point_bits
    w_frac = args.fraction_bits if args.fraction_bits is not None else max(1, min(24, w - 4))
    return FixedPoint(w_frac=w_frac, w=w)


def _sign(args) -> int:
    return 1 if args.sign == "paper" else -1


def _write(out, text: str):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(args):
    return load_model(args.model), GridConfig(args.grid_bits)


def _circuit_factory(args, model, g):
    fp = _fixed_point(args)

    def build(dt):
        return build_evolution(model, g, dt, args.steps, args.order, fp, args.include_v0, sign=_sign(args))

    return build


def cmd_compile(args) -> int:
    from .resources import count_toffoli

    model, g = _load(args)
    t = fs_to_au(args.time_fs)
    circuit = build_evolution(model, g, t, args.steps, args.order, _fixed_point(args), args.include_v0, sign=_sign(args))
    text = export_gates(circuit)
    _write(args.out, text)
    lay = circuit.layout
    toffoli, _ = count_toffoli(circuit)
    summary = [
        f"model: {model.name or args.model}",
        f"layout: n={lay.n_electronic} M={lay.n_modes} k={lay.k} w={lay.w} (w_frac={lay.w_frac})",
        f"qubits: system={lay.system_qubits} ancilla={lay.ancilla_budget} total={lay.total_qubits}",
        f"gates: {len(circuit)} toffoli: {toffoli}",
    ]
    print("\n".join(summary), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_estimate(args) -> int:
    from .resources import ACCOUNTING_W, estimate_total

    model, g = _load(args)
    w = args.fixed_point_bits or ACCOUNTING_W
    t = None if args.time_fs is None else fs_to_au(args.time_fs)
    report = estimate_total(
        model,
        g,
        t,
        args.epsilon,
        args.order,
        r=args.steps,
        w=w,
        include_v0=args.include_v0,
        probe_budget=args.probe_budget,
        sign=_sign(args),
    )
    if args.time_fs is not None and report.t_fs is not None:
        report.t_fs = args.time_fs
    if args.out not in (None, "-"):
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    sys.stdout.write(report.to_table())
    return EXIT_OK


def _times(args):
    if args.samples < 2:
        raise ValueError("--samples must be at least 2")
    return np.linspace(0.0, fs_to_au(args.time_fs), args.samples)


def _backend_args(args, model, g):
    if args.backend == "oracle":
        return None, "semantic"
    return _circuit_factory(args, model, g), args.backend


def cmd_simulate(args) -> int:
    from .observables import population_trace, prepare_vertical_excitation

    model, g = _load(args)
    factory, backend = _backend_args(args, model, g)
    psi0 = prepare_vertical_excitation(model, g, args.initial_state)
    trace = population_trace(
        model, g, psi0, _times(args), args.include_v0, _sign(args), factory, backend, args.shots, args.seed
    )
    _write(args.out, trace.to_csv())
    return EXIT_OK


def cmd_spectrum(args) -> int:
    from .observables import autocorrelation, prepare_vertical_excitation, spectrum

    model, g = _load(args)
    factory, backend = _backend_args(args, model, g)
    times = _times(args)
    ref = prepare_vertical_excitation(model, g, args.initial_state)
    _, C = autocorrelation(
        model, g, times[-1], times.size, None, ref, args.include_v0, _sign(args), factory, backend
    )
    damping = None if args.damping_ev is None else args.damping_ev / HARTREE_IN_EV
    result = spectrum(times, C, damping)
    _write(args.out, result.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file")
    common.add_argument("--grid-bits", type=int, default=4, help="qubits per mode k (K = 2**k)")
    common.add_argument("--order", type=int, choices=(1, 2, 4), default=2, help="product-formula order")
    common.add_argument("--fixed-point-bits", type=int, help="total fixed-point width w (default: auto)")
    common.add_argument("--fraction-bits", type=int, help="fractional bits (default 24, or w-4 when w < 28)")
    common.add_argument("--include-v0", action=argparse.BooleanOptionalAction, default=True, help="include the harmonic potential")
    common.add_argument("--sign", choices=("paper", "physics"), default="paper", help="paper: exp(+iHt), physics: exp(-iHt)")
    common.add_argument("--seed", type=int, help="seed for sampling modes")
    common.add_argument("--out", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="vibronic", description="Vibronic dynamics compiler, estimator and simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="write the gate list of a Trotterized evolution")
    p.add_argument("--time-fs", type=float, required=True)
    p.add_argument("--steps", type=int, default=1)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("estimate", parents=[common], help="Toffoli and qubit estimate")
    p.add_argument("--time-fs", type=float)
    p.add_argument("--epsilon", type=float, help="target error (trace distance)")
    p.add_argument("--steps", type=int, help="use this step count instead of the empirical fit")
    p.add_argument("--probe-budget", type=int, default=DEFAULT_PROXY_BUDGET, help="amplitude budget of the proxy model")
    p.set_defaults(func=cmd_estimate)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "diabatic population trace (CSV)"),
        ("spectrum", cmd_spectrum, "absorption spectrum from the dipole autocorrelation (CSV)"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--time-fs", type=float, required=True)
        p.add_argument("--samples", type=int, default=101, help="number of time samples")
        p.add_argument("--steps", type=int, default=1, help="Trotter steps per sample interval (compiled backends)")
        p.add_argument("--backend", choices=("faithful", "semantic", "oracle"), default="oracle")
        p.add_argument("--oracle", dest="backend", action="store_const", const="oracle", help="same as --backend oracle")
        p.add_argument("--compiled", dest="backend", action="store_const", const="semantic", help="same as --backend semantic")
        p.add_argument("--initial-state", type=int, default=0)
        if name == "simulate":
            p.add_argument("--shots", type=int, help="estimate populations from this many samples")
        else:
            p.add_argument("--damping-ev", type=float, help="exponential damping (default 5/t_max)")
        p.set_defaults(func=func)
    return parser


def _thread_limit():
    n = os.environ.get("VIBRONIC_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(int(n))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except SizeCapError as exc:
        print(f"error: size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (CompileError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: cannot read or write {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
