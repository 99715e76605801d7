"""Command-line entry point: ``clamm quote | metrics | replay | scenario``.

Exit codes: 0 success, 2 validation or parse error, 3 domain error
(liquidity exhaustion, out-of-range prices), 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from ._decimal import to_decimal
from .amm.state import PoolConfig, PoolState, PriceFeed
from .amm.swap import execute_swap, input_amount_for_usd
from .amm.tickmath import raw_price, tick_to_price
from .exceptions import ClammError, DomainError, EventParseError, LiquidityExhausted, ValidationError
from .ingest import (ParseResult, SeriesPriceFeed, StaticPriceFeed, bucketize, parse_events, parse_price_series,
                     replay)
from .metrics.panel import MetricsParams, compute_metrics, write_csv, write_jsonl
from .scenario import ScenarioSpec, results_to_csv, results_to_json, run_scenario
from .validation import (check_cutoff, check_interval, check_pcts, check_positive, check_side, check_sizes,
                         parse_number_list, parse_pct_list)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

CONFIG_KEYS = {"token_x_symbol", "token_y_symbol", "decimals_x", "decimals_y", "fee_bp", "tick_spacing",
               "initial_price", "initial_tick", "genesis", "price_token", "other_usd", "usd_x", "usd_y"}
INT_KEYS = {"decimals_x", "decimals_y", "fee_bp", "tick_spacing", "initial_tick"}


class PoolSettings:
    """Parsed pool configuration file."""

    def __init__(self, values: dict, base: Path):
        self.values = values
        self.base = base
        cfg_keys = ("token_x_symbol", "token_y_symbol", "decimals_x", "decimals_y", "fee_bp", "tick_spacing")
        try:
            self.config = PoolConfig(**{k: values[k] for k in cfg_keys if k in values})
        except TypeError as exc:
            raise ValidationError(f"bad pool config: {exc}") from exc

    def genesis(self) -> Optional[PoolState]:
        path = self.values.get("genesis")
        if not path:
            return None
        return PoolState.from_json(_read_text(self.base / path))

    def initial_price(self):
        """Raw initial price from ``initial_tick`` or a human-unit ``initial_price``."""
        if "initial_tick" in self.values:
            return tick_to_price(self.values["initial_tick"])
        if "initial_price" in self.values:
            human = to_decimal(self.values["initial_price"])
            if human <= 0:
                raise ValidationError("initial_price must be positive")
            return raw_price(human, self.config.decimals_x, self.config.decimals_y)
        return None

    def static_feed(self) -> Optional[StaticPriceFeed]:
        if "usd_x" in self.values and "usd_y" in self.values:
            return StaticPriceFeed(self.values["usd_x"], self.values["usd_y"])
        return None


def load_pool_config(path: Path) -> PoolSettings:
    """Read a ``key = value`` file; a leading section header is optional and values may be quoted."""
    text = _read_text(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        if not text.lstrip().startswith("["):
            text = "[pool]\n" + text
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse pool config {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in CONFIG_KEYS:
                raise ValidationError(f"unknown pool config key {key!r}")
            raw = raw.strip()
            if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
                raw = raw[1:-1]
            if key in INT_KEYS:
                try:
                    values[key] = int(raw)
                except ValueError as exc:
                    raise ValidationError(f"pool config key {key!r} must be an integer") from exc
            else:
                values[key] = raw
    return PoolSettings(values, path.parent)


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path} is not valid UTF-8") from exc


def _read_events(paths: Sequence[Path], tick_spacing: int) -> ParseResult:
    events = []
    diagnostics = []
    for path in paths:
        fmt = "jsonl" if path.suffix in (".jsonl", ".ndjson") else "csv"
        res = parse_events(Path(path).read_bytes(), fmt, tick_spacing=tick_spacing)
        events.extend(res.events)
        diagnostics.extend(f"{path}: {d}" for d in res.diagnostics)
    events.sort(key=lambda e: e.sort_key)
    keys = [e.key for e in events]
    if len(set(keys)) != len(keys):
        raise EventParseError("duplicate (block, log_index) across event files")
    return ParseResult(events, diagnostics)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _summary(data: dict) -> None:
    sys.stderr.write(json.dumps(data, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_quote(args) -> int:
    state = PoolState.from_json(_read_text(args.snapshot))
    side = check_side(args.side)
    check_positive("size", args.size)
    cfg = state.config
    if args.usd:
        if args.usd_x is None or args.usd_y is None:
            raise ValidationError("--usd needs --usd-x and --usd-y")
        feed = PriceFeed.of(check_positive("usd-x", args.usd_x), check_positive("usd-y", args.usd_y))
        amount = input_amount_for_usd(state, to_decimal(args.size), side, feed)
    else:
        decimals = cfg.decimals_x if side == "sell_x" else cfg.decimals_y
        amount = to_decimal(args.size) * 10 ** decimals
    result = execute_swap(state, side, amount, commit=False)
    out = result.to_dict()
    out["amount_in"] = str(amount)
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")
    return EXIT_OK


def _pipeline_inputs(args):
    if args.pool_config is None:
        raise ValidationError("--pool-config is required")
    settings = load_pool_config(args.pool_config)
    parsed = _read_events(args.events or [], settings.config.tick_spacing)
    genesis = settings.genesis()
    if genesis is not None and genesis.config != settings.config:
        raise ValidationError("genesis snapshot config does not match the pool config")
    p0 = settings.initial_price()
    if genesis is None and p0 is None:
        raise ValidationError("pool config needs initial_price, initial_tick or genesis")
    return settings, parsed, genesis, p0


def _report_rejections(parsed: ParseResult, lenient: bool) -> bool:
    """Print row diagnostics; True when the run must stop."""
    for d in parsed.diagnostics:
        sys.stderr.write(f"{d}\n")
    return bool(parsed.diagnostics) and not lenient


def _replay(settings, parsed, genesis, p0):
    if genesis is not None:
        return replay(parsed.events, genesis=genesis), genesis
    return replay(parsed.events, settings.config, p0), PoolState(settings.config, p0)


def cmd_metrics(args) -> int:
    interval = check_interval(args.interval)
    pcts = check_pcts(parse_pct_list(args.pct)) if args.pct else MetricsParams().pcts
    sizes = check_sizes(parse_number_list(args.sizes)) if args.sizes else MetricsParams().sizes_usd
    params = MetricsParams(interval_seconds=interval, pcts=pcts, sizes_usd=sizes, jit_filter=not args.no_jit_filter,
                           outlier_cutoff=check_cutoff(args.outlier_cutoff), weighted=args.weighted)
    settings, parsed, genesis, p0 = _pipeline_inputs(args)
    if args.prices is not None:
        series = parse_price_series(Path(args.prices).read_bytes())
        token = settings.values.get("price_token", "y")
        if token not in ("x", "y"):
            raise ValidationError("price_token must be x or y")
        feed = SeriesPriceFeed(series, token, settings.values.get("other_usd", 1))
    else:
        feed = settings.static_feed()
        if feed is None:
            raise ValidationError("--prices is required unless the pool config sets usd_x and usd_y")
    if _report_rejections(parsed, args.lenient):
        return EXIT_VALIDATION
    replayed, start = _replay(settings, parsed, genesis, p0)
    panel = compute_metrics(replayed, feed, params, initial_snapshot=start)
    fh = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8", newline="")
    try:
        if args.format == "csv":
            write_csv(panel.rows, fh, params.pcts, params.sizes_usd)
        else:
            write_jsonl(panel.rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    summary = dict(panel.summary, rejected_rows=len(parsed.diagnostics))
    _summary(summary)
    return EXIT_OK


def cmd_replay(args) -> int:
    interval = check_interval(args.interval)
    settings, parsed, genesis, p0 = _pipeline_inputs(args)
    if _report_rejections(parsed, args.lenient):
        return EXIT_VALIDATION
    replayed, start = _replay(settings, parsed, genesis, p0)
    _emit(replayed.final_state.to_json() + "\n", args.out)
    if args.manifest is not None:
        buckets = bucketize(replayed.steps, interval, initial_snapshot=start)
        manifest = [{
            "start_ts": b.start_ts,
            "end_ts": b.end_ts,
            "events": len(b.steps),
            "mints": len(b.mints),
            "burns": len(b.burns),
            "swaps": len(b.swaps),
            "market_price": str(b.end_snapshot.market_price),
        } for b in buckets]
        Path(args.manifest).write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    _summary({"events": len(replayed), "rejected_rows": len(parsed.diagnostics),
              "reconciliation_warnings": replayed.reconciliation_warnings})
    return EXIT_OK


def cmd_scenario(args) -> int:
    spec = ScenarioSpec.from_json(_read_text(args.spec))
    results = run_scenario(spec)
    _emit(results_to_json(results) if args.format == "json" else results_to_csv(results), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clamm", description="Concentrated-liquidity pool engine and metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("quote", help="quote a hypothetical swap against a snapshot")
    q.add_argument("snapshot", type=Path, help="pool snapshot JSON")
    q.add_argument("--size", required=True, type=float,
                   help="input amount in whole input-token units (USD with --usd)")
    q.add_argument("--side", required=True, help="buy_x (pay Y) or sell_x (pay X)")
    q.add_argument("--usd", action="store_true", help="interpret --size as a USD notional")
    q.add_argument("--usd-x", type=float, help="USD price of one X token (with --usd)")
    q.add_argument("--usd-y", type=float, help="USD price of one Y token (with --usd)")
    q.set_defaults(func=cmd_quote)

    def pipeline_flags(p):
        p.add_argument("--events", type=Path, action="append", default=[], help="event file (repeatable)")
        p.add_argument("--pool-config", type=Path, help="key=value pool config file")
        p.add_argument("--interval", type=int, default=300, help="bucket length in seconds (default 300)")
        p.add_argument("--out", type=Path, help="output path (default stdout)")
        p.add_argument("--lenient", action="store_true", help="skip rejected event rows instead of failing")

    m = sub.add_parser("metrics", help="compute the per-interval metrics panel")
    pipeline_flags(m)
    m.add_argument("--prices", type=Path, help="timestamp,price CSV for the priced token")
    m.add_argument("--pct", help="concentration bands in percent, e.g. 1,2,10")
    m.add_argument("--sizes", help="hypothetical trade sizes in USD, e.g. 100,500,1000")
    m.add_argument("--no-jit-filter", action="store_true", help="keep just-in-time liquidity")
    m.add_argument("--outlier-cutoff", type=float, default=0.20, help="drop LP events whose range mid is "
                   "further than this fraction from the market (default 0.20)")
    m.add_argument("--weighted", action="store_true", help="dollar-weight gap/length/precision averages")
    m.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    m.set_defaults(func=cmd_metrics)

    r = sub.add_parser("replay", help="replay events and write the final snapshot")
    pipeline_flags(r)
    r.add_argument("--manifest", type=Path, help="write a bucket manifest JSON here")
    r.set_defaults(func=cmd_replay)

    s = sub.add_parser("scenario", help="run an adverse-selection scenario spec")
    s.add_argument("spec", type=Path, help="scenario spec JSON")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_scenario)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except LiquidityExhausted as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except (ClammError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
