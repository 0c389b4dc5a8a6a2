"""Command-line front end.

The CLI never touches the physics directly: every subcommand builds a
request model, posts it to the service (in-process by default, over HTTP
with --server), and writes the response out as CSV plus a JSON metadata
sidecar. Outputs carry no timestamps, so a fixed (config, seed) pair gives
byte-identical files, and each sidecar embeds the fully resolved config so
it re-parses into the exact run that produced it.

Exit codes: 0 success, 1 validation error (arguments, config file, input
data), 2 runtime error (transport failures, server-side faults).
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import httpx
from pydantic import ValidationError

from .experiments import SweepRow, write_sweep_csv
from .service.schemas import (
    CalibrationResponse,
    RunConfig,
    SimulateResponse,
    SqueezeDemoResponse,
    SweepResponse,
    SweepRowPayload,
)
from .spectral import write_trace_csv


class ValidationFailure(Exception):
    """Bad arguments, config, or input data; maps to exit code 1."""


class RuntimeFailure(Exception):
    """Server or transport fault; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; the contract reserves 2 for
    # runtime faults, so route usage problems through the validation path.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValidationFailure(f"{self.format_usage()}{self.prog}: error: {message}")


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ValidationFailure(f"expected a comma-separated list of numbers, got {text!r}") from exc


def build_parser() -> _Parser:
    parser = _Parser(prog="aovsim", description="Acousto-optic vibrometry simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration (defaults apply)")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    common.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    common.add_argument("--server", metavar="URL", help="send requests to a running server instead of in-process")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", parents=[common], help="one spectrum-analyzer trace")
    p.add_argument("--unit", choices=["m", "pa", "rel"], default="m", help="trace units (default: m)")
    p.add_argument(
        "--noise",
        choices=["shot", "squeezed", "antisqueezed", "none"],
        default="shot",
        help="quantum noise floor (default: shot)",
    )
    p.add_argument("--z-m-mm", type=float, default=1.0, help="interaction length for Pa conversion (default: 1.0)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("squeeze-demo", parents=[common], help="same tone on shot, squeezed and anti-squeezed floors")
    p.add_argument("--z-m-mm", type=float, default=1.0, help="calibration interaction length (default: 1.0)")
    p.set_defaults(func=_cmd_squeeze_demo)

    p = sub.add_parser("sweep-freq", parents=[common], help="absorption fit vs ultrasound frequency")
    p.add_argument("--frequencies-hz", type=_csv_floats, metavar="LIST", help="comma-separated frequencies")
    p.add_argument("--distances-mm", type=_csv_floats, metavar="LIST", help="comma-separated distances")
    p.add_argument(
        "--source-pa",
        type=_csv_floats,
        metavar="LIST",
        help="per-frequency source pressure amplitudes (default: config value everywhere)",
    )
    p.set_defaults(func=_cmd_sweep_freq)

    p = sub.add_parser("sweep-temp", parents=[common], help="absorption fit vs air temperature")
    p.add_argument("--temperatures-k", type=_csv_floats, metavar="LIST", help="comma-separated temperatures")
    p.add_argument("--distances-mm", type=_csv_floats, metavar="LIST", help="comma-separated distances")
    p.add_argument("--frequency-hz", type=float, help="ultrasound frequency (default: config scene value)")
    p.set_defaults(func=_cmd_sweep_temp)

    p = sub.add_parser("calibrate", parents=[common], help="print noise-floor and conversion numbers for a config")
    p.add_argument("--z-m-mm", type=float, default=1.0, help="interaction length for Pa conversion (default: 1.0)")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("fit", parents=[common], help="exponential-decay fit of a distance/power CSV")
    p.add_argument("input", metavar="CSV", help="input table: distance_mm,peak_power[,weight]")
    p.add_argument("--frequency-hz", type=float, default=5.204e6, help="frequency for the theory column")
    p.add_argument("--temperature-k", type=float, default=293.15, help="temperature for the theory column")
    p.set_defaults(func=_cmd_fit)

    return parser


def load_config(path: str | None) -> RunConfig:
    """Parse a JSON config file; None or an empty document means all defaults."""
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ValidationFailure(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    if text.strip() == "":
        return RunConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"malformed config {path}: {exc}") from exc
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ValidationFailure(_format_validation(path, exc)) from exc


def _format_validation(source: str, exc: ValidationError) -> str:
    lines = [f"invalid config {source}:"]
    for err in exc.errors():
        field_path = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"  {field_path}: {err['msg']}")
    return "\n".join(lines)


def _post(server: str | None, path: str, payload: dict[str, Any]) -> dict[str, Any]:
    async def _go() -> httpx.Response:
        if server is None:
            from .service.app import app as asgi_app

            transport = httpx.ASGITransport(app=asgi_app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://aovsim.local", timeout=None
            ) as client:
                return await client.post(path, json=payload)
        async with httpx.AsyncClient(base_url=server, timeout=600.0) as client:
            return await client.post(path, json=payload)

    try:
        response = asyncio.run(_go())
    except httpx.HTTPError as exc:
        raise RuntimeFailure(f"transport error talking to {server or 'in-process service'}: {exc}") from exc

    # 400 and 422 are the service saying the inputs are wrong; those belong
    # to the validation exit code. Anything else from the server is a fault.
    if response.status_code in (400, 422):
        raise ValidationFailure(f"request rejected: {json.dumps(response.json().get('detail'))}")
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise RuntimeFailure(f"server error ({response.status_code}): {detail}")
    return response.json()


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_meta(path: Path, command: str, seed: int, config: dict[str, Any], **extra: Any) -> None:
    _write_json(path, {"command": command, "seed": seed, "config": config, **extra})


def _request_config(args: argparse.Namespace) -> dict[str, Any]:
    return load_config(args.config).model_dump(mode="json")


def _cmd_simulate(args: argparse.Namespace) -> None:
    body: dict[str, Any] = {
        "config": _request_config(args),
        "unit": args.unit,
        "noise": args.noise,
        "z_m_mm": args.z_m_mm,
    }
    if args.seed is not None:
        body["seed"] = args.seed
    data = _post(args.server, "/simulate", body)
    result = SimulateResponse.model_validate(data)

    out = _out_dir(args)
    write_trace_csv(result.trace.to_core(), out / "trace.csv")
    _write_meta(
        out / "trace.meta.json",
        "simulate",
        result.seed,
        result.config.model_dump(mode="json"),
        unit=args.unit,
        noise=args.noise,
        z_m_mm=args.z_m_mm,
        peak=result.peak.model_dump(mode="json"),
        signal_asd_pa=result.signal_asd_pa,
        band_rms_m=result.band_rms_m,
        noise_variance=result.noise_variance,
    )
    vis = result.peak.visibility_db
    vis_text = f"{vis:.2f} dB" if vis is not None else "inf (zero floor)"
    print(
        f"peak at {result.peak.frequency_hz:.6g} Hz: total {result.peak.total_asd_m:.4e} m/rtHz, "
        f"floor {result.peak.noise_floor_asd_m:.4e}, subtracted {result.peak.signal_asd_m:.4e} "
        f"({result.signal_asd_pa * 1e3:.4g} mPa/rtHz at z_M = {args.z_m_mm} mm), visibility {vis_text}"
    )
    print(f"wrote {out / 'trace.csv'} and {out / 'trace.meta.json'}")


def _cmd_squeeze_demo(args: argparse.Namespace) -> None:
    body: dict[str, Any] = {"config": _request_config(args), "z_m_mm": args.z_m_mm}
    if args.seed is not None:
        body["seed"] = args.seed
    data = _post(args.server, "/squeeze-demo", body)
    result = SqueezeDemoResponse.model_validate(data)

    out = _out_dir(args)
    names = {}
    for label, payload in (
        ("shot", result.shot),
        ("squeezed", result.squeezed),
        ("antisqueezed", result.anti_squeezed),
    ):
        path = out / f"trace_{label}.csv"
        write_trace_csv(payload.trace.to_core(), path)
        names[label] = {
            "file": path.name,
            "noise_variance": payload.noise_variance,
            "peak": payload.peak.model_dump(mode="json"),
            "signal_asd_pa": payload.signal_asd_pa,
            "visible": payload.visible,
        }
    _write_meta(
        out / "squeeze_demo.meta.json",
        "squeeze-demo",
        result.seed,
        result.config.model_dump(mode="json"),
        z_m_mm=args.z_m_mm,
        traces=names,
        pressure_amplitude_pa=result.pressure_amplitude_pa,
        shot_floor_asd_m=result.shot_floor_asd_m,
    )
    for label, info in names.items():
        flag = "visible" if info["visible"] else "buried"
        print(f"{label}: V = {info['noise_variance']:.4g}, subtracted {info['signal_asd_pa'] * 1e3:.4g} mPa/rtHz, {flag}")
    print(f"wrote 3 traces and squeeze_demo.meta.json to {out}")


def _rows_from_payloads(payloads: Sequence[SweepRowPayload]) -> list[SweepRow]:
    rows = []
    for p in payloads:
        rows.append(
            SweepRow(
                x=p.x,
                alpha_fit_db_per_mm=p.alpha_fit_db_per_mm if p.alpha_fit_db_per_mm is not None else math.nan,
                alpha_std_error=p.alpha_err if p.alpha_err is not None else math.nan,
                alpha_theory_db_per_mm=p.alpha_theory_db_per_mm,
                n_usable=p.n_usable,
                usable_distances_mm=tuple(p.usable_distances_mm),
                flagged=p.flagged,
                degenerate=p.degenerate,
            )
        )
    return rows


def _run_sweep(args: argparse.Namespace, kind: str, body: dict[str, Any]) -> None:
    endpoint = "/sweep/frequency" if kind == "frequency" else "/sweep/temperature"
    data = _post(args.server, endpoint, body)
    result = SweepResponse.model_validate(data)

    out = _out_dir(args)
    base = f"sweep_{kind}"
    write_sweep_csv(_rows_from_payloads(result.rows), out / f"{base}.csv", kind)
    _write_meta(
        out / f"{base}.meta.json",
        f"sweep-{'freq' if kind == 'frequency' else 'temp'}",
        result.seed,
        result.config.model_dump(mode="json"),
        rows=[r.model_dump(mode="json") for r in result.rows],
    )
    for row in result.rows:
        fit = f"{row.alpha_fit_db_per_mm:.4g} ± {row.alpha_err:.2g}" if not row.flagged else "flagged"
        print(
            f"x = {row.x:.6g}: alpha_fit {fit} dB/mm, theory {row.alpha_theory_db_per_mm:.4g}, "
            f"{row.n_usable} usable points"
        )
    print(f"wrote {out / (base + '.csv')} and {out / (base + '.meta.json')}")


def _cmd_sweep_freq(args: argparse.Namespace) -> None:
    body: dict[str, Any] = {"config": _request_config(args)}
    if args.frequencies_hz is not None:
        body["frequencies_hz"] = args.frequencies_hz
    if args.distances_mm is not None:
        body["distances_mm"] = args.distances_mm
    if args.source_pa is not None:
        body["source_pressures_pa"] = args.source_pa
    if args.seed is not None:
        body["seed"] = args.seed
    _run_sweep(args, "frequency", body)


def _cmd_sweep_temp(args: argparse.Namespace) -> None:
    body: dict[str, Any] = {"config": _request_config(args)}
    if args.temperatures_k is not None:
        body["temperatures_k"] = args.temperatures_k
    if args.distances_mm is not None:
        body["distances_mm"] = args.distances_mm
    if args.frequency_hz is not None:
        body["frequency_hz"] = args.frequency_hz
    if args.seed is not None:
        body["seed"] = args.seed
    _run_sweep(args, "temperature", body)


def _cmd_calibrate(args: argparse.Namespace) -> None:
    body = {"config": _request_config(args), "z_m_mm": args.z_m_mm}
    data = _post(args.server, "/calibrate", body)
    result = CalibrationResponse.model_validate(data)

    out = _out_dir(args)
    _write_json(out / "calibration.json", result.model_dump(mode="json"))
    print(f"shot-noise ASD (input-referred): {result.shot_noise_asd_m:.4e} m/rtHz")
    print(
        f"pressure floor at z_M = {result.z_m_used_mm:.3f} mm: "
        f"{result.pressure_floor_pa * 1e3:.4g} mPa/rtHz"
    )
    print(f"shot-noise ASD (detected power): {result.shot_noise_asd_m_detected:.4e} m/rtHz")
    print(f"model interaction length: {result.z_m_model_mm:.4g} mm (diverged: {result.z_m_diverged})")
    print(
        f"squeezed / anti-squeezed quadratures: {result.squeezed_db:+.2f} dB / "
        f"{result.anti_squeezed_db:+.2f} dB"
    )
    print(f"equivalent shot-noise-limited power: {result.equivalent_shot_noise_power_w:.4g} W")
    print(f"absorption at scene frequency: {result.absorption_db_per_mm:.4g} dB/mm")
    print(f"wrote {out / 'calibration.json'}")


def _read_fit_csv(path: str) -> tuple[list[float], list[float], list[float] | None]:
    p = Path(path)
    if not p.is_file():
        raise ValidationFailure(f"input file not found: {path}")
    distances: list[float] = []
    powers: list[float] = []
    weights: list[float] = []
    with p.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["distance_mm", "peak_power"]:
            raise ValidationFailure(
                f"{path}: expected header 'distance_mm,peak_power[,weight]', got {header}"
            )
        has_weight = len(header) >= 3 and header[2].strip() == "weight"
        for lineno, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            try:
                distances.append(float(row[0]))
                powers.append(float(row[1]))
                if has_weight:
                    weights.append(float(row[2]))
            except (IndexError, ValueError) as exc:
                raise ValidationFailure(f"{path}:{lineno}: bad row {row}") from exc
    return distances, powers, (weights if weights else None)


def _cmd_fit(args: argparse.Namespace) -> None:
    distances, powers, weights = _read_fit_csv(args.input)
    body: dict[str, Any] = {
        "distances_mm": distances,
        "peak_powers": powers,
        "frequency_hz": args.frequency_hz,
        "temperature_k": args.temperature_k,
    }
    if weights is not None:
        body["weights"] = weights
    data = _post(args.server, "/fit", body)

    out = _out_dir(args)
    _write_json(out / "fit.json", {"input": args.input, **body, **data})
    note = " (two-point fit, no error estimate)" if data["degenerate"] else ""
    print(
        f"alpha_fit = {data['alpha_db_per_mm']:.6g} ± {data['alpha_std_error']:.3g} dB/mm{note}; "
        f"theory {data['alpha_theory_db_per_mm']:.6g} dB/mm"
    )
    print(f"wrote {out / 'fit.json'}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except ValidationFailure as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except RuntimeFailure as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
