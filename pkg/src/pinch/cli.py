"""Command-line front end.

    pinch build     [--config PATH] [--seed N] [--out DIR] [--KEY VALUE ...]
    pinch verify    ...
    pinch toledo    ...
    pinch limitset  ...
    pinch classify  WORD ...

Exit status: 0 when every check passes, 1 on a failed check, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("pinch")


class ConfigError(ValueError):
    pass


def _parse_t(text):
    return "auto" if str(text).strip().lower() == "auto" else float(text)


def _parse_resolution(text):
    if isinstance(text, (tuple, list)):
        return tuple(int(x) for x in text)
    parts = str(text).lower().replace(",", "x").split("x")
    if len(parts) != 2:
        raise ValueError("expected NSxNT, e.g. 64x8")
    return int(parts[0]), int(parts[1])


@dataclass
class RunConfig:
    g1: int = 1
    g2: int = 1
    r: float = 6.0
    t: object = "auto"
    margin: float = 0.5
    blend_fraction: float = 0.5
    seed: int = 0
    L: int = 4  # word length for the interactive-pair checks
    N: int = 10_000  # samples for the interactive-pair checks
    fundamental_L: int = 6
    fundamental_N: int = 1000
    fundamental_full_N: int = 200
    nonidentity_L: int = 8
    nonidentity_cap: int = 20_000
    census_L: int = 6
    limit_L: int = 6
    resolution: tuple = (64, 8)
    pieces: int = 7
    tau_tol: float = 1e-2
    piece_rtol: float = 1e-6
    max_undecided: float = 0.05
    format: str = "csv"
    out: str = "out"

    def validate(self):
        if self.g1 < 1 or self.g2 < 1:
            raise ConfigError("g1 and g2 must be >= 1")
        if self.r <= 0:
            raise ConfigError("r must be positive")
        if self.t != "auto" and self.t <= 0:
            raise ConfigError("t must be positive or 'auto'")
        if self.margin <= 0:
            raise ConfigError("margin must be positive")
        if not 0 < self.blend_fraction < 1:
            raise ConfigError("blend_fraction must be in (0, 1)")
        for k in ("L", "N", "fundamental_L", "fundamental_N", "fundamental_full_N",
                  "nonidentity_L", "nonidentity_cap", "census_L"):
            if getattr(self, k) < 1:
                raise ConfigError(f"{k} must be >= 1")
        if self.limit_L < 0:
            raise ConfigError("limit_L must be >= 0")
        if min(self.resolution) < 1:
            raise ConfigError("resolution entries must be >= 1")
        if self.pieces < 2:
            raise ConfigError("pieces must be >= 2")
        if self.format not in ("csv", "png"):
            raise ConfigError("format must be csv or png")
        return self


_PARSERS = {"t": _parse_t, "resolution": _parse_resolution}


def _converter(f):
    if f.name in _PARSERS:
        return _PARSERS[f.name]
    return {"int": int, "float": float, "str": str}[f.type]


def _set(cfg, key, text):
    conv = _converter(next(f for f in fields(cfg) if f.name == key))
    setattr(cfg, key, conv(text))


def parse_config(text: str, cfg: RunConfig | None = None, source="config") -> RunConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = cfg or RunConfig()
    known = {f.name for f in fields(cfg)}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected key = value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{source}:{n}: unknown key {key!r}")
        try:
            _set(cfg, key, val)
        except ValueError as e:
            raise ConfigError(f"{source}:{n}: bad value for {key}: {e}") from None
    return cfg


def load_config(path=None, overrides=None) -> RunConfig:
    cfg = RunConfig()
    if path:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror}") from None
        parse_config(text, cfg, str(path))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        try:
            _set(cfg, key, val)
        except ValueError as e:
            raise ConfigError(f"--{key}: {e}") from None
    return cfg.validate()


# --------------------------------------------------------------------------
# JSON helpers


def _matrix_json(M):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(M)]


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dump(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2)


def _write(cfg, name, payload):
    payload = dict(payload)
    payload["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    text = dump(payload)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.json").write_text(text + "\n")
    print(text)


# --------------------------------------------------------------------------
# commands


def _build(cfg):
    from .amalgam import build
    return build(cfg.g1, cfg.g2, cfg.r, cfg.t, cfg.margin, cfg.blend_fraction, cfg.seed)


def rep_summary(rep):
    from .chc import Isometry, distance_to_scalar
    sec = rep.section
    relator = rep.rho(rep.relator)
    return {
        "g1": rep.g1, "g2": rep.g2, "r": rep.r, "t": rep.t, "v1": rep.v1, "v2": rep.v2,
        "w_mid": rep.w_mid, "separation_margin": rep.margin,
        "horoballs": [dataclasses.asdict(b) for b in rep.balls],
        "unbounded_sides": [rep.F1.unbounded_x0, rep.F2.unbounded_x0],
        "section": {"w_lo": sec.w_lo, "w_hi": sec.w_hi, "curve_u": list(sec.curve_u),
                    "curve_y": sec.curve_y},
        "generators": {k: _matrix_json(v.matrix) for k, v in sorted(rep.images.items())},
        "rho_gamma_is_d": rep.rho(rep.gamma).equals(rep.d, 1e-10),
        "relator_scalar_distance": distance_to_scalar(relator.matrix),
        "relator_is_identity": relator.equals(Isometry.identity(), 1e-9),
    }


def cmd_build(cfg):
    rep = _build(cfg)
    summary = rep_summary(rep)
    _write(cfg, "build", summary)
    return EXIT_OK if summary["rho_gamma_is_d"] and summary["relator_is_identity"] else EXIT_FAIL


def cmd_verify(cfg):
    from . import maskit as K
    rep = _build(cfg)
    reports = [
        K.check_precisely_invariant(rep, 1, cfg.L, cfg.N, cfg.seed),
        K.check_precisely_invariant(rep, 2, cfg.L, cfg.N, cfg.seed),
        K.check_interactive_pair(rep, cfg.L, cfg.N, cfg.seed),
        K.check_fundamental_set(rep, 1, cfg.fundamental_L, cfg.fundamental_N, cfg.seed,
                                cfg.max_undecided),
        K.check_fundamental_set(rep, 2, cfg.fundamental_L, cfg.fundamental_N, cfg.seed,
                                cfg.max_undecided),
        K.check_fundamental_set(rep, "full", cfg.fundamental_L, cfg.fundamental_full_N,
                                cfg.seed, cfg.max_undecided),
        K.nonidentity_words(rep, cfg.nonidentity_L, cfg.nonidentity_cap, cfg.seed),
    ]
    entries, census = K.parabolic_census(rep, cfg.census_L, cfg.seed)
    reports.append(census)
    ok = all(r.passed for r in reports)
    _write(cfg, "verify", {
        "passed": ok,
        "reports": [r.to_dict() for r in reports],
        "census": [dataclasses.asdict(e) for e in entries],
    })
    return EXIT_OK if ok else EXIT_FAIL


def cmd_toledo(cfg):
    from . import toledo as T
    rep = _build(cfg)
    form = T.calibrate()
    res = T.toledo_invariant(rep, cfg.resolution, form)
    sub = T.subdivision_test(rep, cfg.pieces, cfg.resolution, form)
    res.per_piece = list(sub.pieces)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    T.export_pieces_csv(out / "subdivision.csv", sub, res.error * 2 * np.pi / cfg.pieces)
    ok = (abs(res.tau) < cfg.tau_tol and abs(res.tau) <= res.error + 1e-15
          and sub.spread <= cfg.piece_rtol)
    payload = res.to_dict()
    payload.update({"passed": ok, "subdivision_spread": sub.spread,
                    "subdivision_total": sub.total, "pieces": cfg.pieces})
    _write(cfg, "toledo", payload)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_limitset(cfg):
    from . import limitset as LS
    rep = _build(cfg)
    cloud = LS.orbit_boundary(rep, cfg.limit_L)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"limitset.{cfg.format}"
    LS.export(cloud, path, cfg.format)
    _write(cfg, "limitset", {"points": len(cloud), "infinity_images": cloud.infinity_count,
                             "L": cfg.limit_L, "file": path.name})
    return EXIT_OK


def cmd_classify(cfg, word_text):
    from . import words as W
    from .amalgam import normal_form
    rep = _build(cfg)
    try:
        word = rep.presentation.parse(word_text)
    except (ValueError, KeyError) as e:
        raise ConfigError(f"word: {e.args[0]}") from None
    g = rep.rho(word)
    c = g.classify()
    nf = normal_form(rep, word)
    _write(cfg, "classify", {
        "word": W.format_word(word), "kind": c.kind.value,
        "trace": [c.trace.real, c.trace.imag], "discriminant": c.discriminant,
        "normal_form": [{"factor": s.factor, "word": W.format_word(s.word),
                         "d_exponent": s.d_exponent} for s in nf.syllables],
    })
    return EXIT_OK


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "toledo": cmd_toledo,
            "limitset": cmd_limitset, "classify": cmd_classify}


def make_parser():
    p = argparse.ArgumentParser(prog="pinch", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "classify":
            sp.add_argument("word", help='e.g. "a1 b1 a1^-1 b1^-1" or "gamma"')
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("-v", "--verbose", action="store_true")
        for f in fields(RunConfig):
            sp.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                            metavar=f.name.upper())
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "classify":
            return cmd_classify(cfg, args.word)
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
