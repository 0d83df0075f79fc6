"""Command-line front end.

Exit codes: 0 success, 2 estimation failure, 64 usage error, 66 unreadable
or malformed input files.
"""

import argparse
import io
import json
import sys

import numpy as np

from ..correlation import sample_aacf
from ..errors import (EstimationError, FormatError, InvalidArgumentError, NsparamError,
                      ParseError, ValidationError)
from ..estimators import EstimationConfig, canonical_kind, estimate
from ..models import add_noise, nmse, synthesize
from ..numerics import periodogram
from ..signal import ComplexSignal
from .formats import (atomic_write, is_effectively_real, load_model, load_signal,
                      save_model, save_signal)

EXIT_OK = 0
EXIT_ESTIMATION = 2
EXIT_USAGE = 64
EXIT_INPUT = 66

CENTERED_KINDS = ("fm", "exp_am")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


class InputError(Exception):
    pass


def format_nmse(value):
    """Scientific notation with six decimals and a bare exponent: ``1.234500e-7``."""
    mantissa, exponent = f"{value:.6e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def default_center(kind, n_samples):
    """Mid-record for models whose statistics need two-sided time, else 0."""
    return n_samples // 2 if kind in CENTERED_KINDS else 0


def _read(loader, path):
    try:
        return loader(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except (ParseError, FormatError, ValidationError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _synth_signal(spec, n, center):
    center = default_center(spec.kind, n) if center is None else center
    sig = synthesize(spec, n, center)
    rate = spec.extras.get("sample_rate_hz")
    return ComplexSignal(sig.samples, sig.center, rate) if rate is not None else sig


def cmd_synth(args):
    spec = _read(load_model, args.model)
    center = args.center if args.center is not None else spec.extras.get("center")
    sig = _synth_signal(spec, args.n, center)
    real = None
    if args.snr is not None:
        if is_effectively_real(sig.samples):
            sig = sig.with_samples(sig.samples.real)
            real = True
        sig = add_noise(sig, args.snr, args.seed)
    save_signal(sig, args.out, real=real)
    return EXIT_OK


def _load_config(args):
    data = {}
    if args.config:
        def read_json(path):
            with open(path, encoding="utf-8") as fh:
                try:
                    return json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ParseError(exc.lineno, exc.msg) from None
        data = _read(read_json, args.config)
        if not isinstance(data, dict):
            raise InputError(f"{args.config}: expected a JSON object")
    if args.order is not None:
        data["model_order"] = args.order
    try:
        return EstimationConfig.from_dict(data)
    except (InvalidArgumentError, TypeError) as exc:
        raise InputError(f"{args.config or '--order'}: {exc}") from None


def cmd_fit(args):
    sig = _read(load_signal, args.input)
    config = _load_config(args)
    kind = canonical_kind(args.kind)
    kwargs = {"known_xi": args.known_xi} if kind == "exp_am" and args.known_xi else {}
    try:
        report = estimate(kind, sig, config, **kwargs)
    except (EstimationError, InvalidArgumentError) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    if sig.sample_rate is not None:
        report.spec.extras["sample_rate_hz"] = sig.sample_rate
    save_model(report.spec, args.out, center=report.center,
               diagnostics=report.diagnostics_dict())
    return EXIT_OK


def cmd_recon(args):
    spec = _read(load_model, args.model)
    center = args.center if args.center is not None else spec.extras.get("center")
    save_signal(_synth_signal(spec, args.n, center), args.out)
    return EXIT_OK


def cmd_eval(args):
    ref = _read(load_signal, args.ref)
    test = _read(load_signal, args.test)
    if len(ref) != len(test):
        raise InputError(f"length mismatch: {len(ref)} vs {len(test)} samples")
    print(f"nmse={format_nmse(nmse(ref, test))}")
    return EXIT_OK


def _write_rows(path, header, rows):
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(repr(float(v)) if not isinstance(v, (int, np.integer)) else str(v)
                           for v in row) + "\n")
    with atomic_write(path) as fh:
        fh.write(buf.getvalue())


def cmd_aacf(args):
    sig = _read(load_signal, args.input)
    try:
        seq = sample_aacf(sig, args.maxlag)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None
    _write_rows(args.out, "lag,re,im",
                ((int(k), v.real, v.imag) for k, v in zip(seq.lags, seq.values)))
    return EXIT_OK


def cmd_spectrum(args):
    sig = _read(load_signal, args.input)
    try:
        spec = periodogram(sig, args.nfft)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None
    _write_rows(args.out, "frequency,re,im",
                ((f, v.real, v.imag) for f, v in zip(spec.frequencies, spec.values)))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="nsparam", description="Parametric models of non-stationary signals.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize a signal from a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--center", type=int)
    p.add_argument("--snr", type=float, help="add white Gaussian noise at this SNR (dB)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="estimate model parameters from a signal")
    p.add_argument("--kind", required=True, choices=["exp", "am", "fm", "expam",
                                                       "exponential", "exp_am"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--order", type=int)
    p.add_argument("--config")
    p.add_argument("--known-xi", type=float, help="shared modulating frequency for expam (rad/sample)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("recon", help="synthesize from a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--center", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("eval", help="normalized mean squared error of test against ref")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("aacf", help="write the accumulated autocorrelation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--maxlag", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aacf)

    p = sub.add_parser("spectrum", help="write the zero-padded periodogram")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--nfft", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "n", None) is not None and args.n < 1:
            raise UsageError("--n must be positive")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"{getattr(exc, 'filename', '') or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_INPUT
    except NsparamError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
