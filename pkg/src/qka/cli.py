"""Command-line front end.

Subcommands:

* ``qka run``  — execute a protocol (optionally under an adversary) for one
  or many seeded trials and emit the result or a batch summary.
* ``qka efficiency`` — print the four-protocol resource/efficiency table.
* ``qka verify-groups`` — run the exhaustive group-algebra checks and print
  the dense-coding tables for the Bell and 4-qubit resource states.

Every flag of ``run`` can also come from a JSON config file (``--config``);
flags override file values, and the environment variable ``QKA_SEED`` is
the seed fallback when neither supplies one. Output is deterministic for a
fixed spec: identical runs serialize byte-identically.

Exit codes: 0 success, 2 configuration error, 3 when ``--fail-on-abort``
is set and any run aborted on a failed disturbance check.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .adversaries import AdversaryKind, AdversaryModel
from .efficiency import (
    efficiency_table_csv,
    efficiency_table_json,
    efficiency_table_text,
)
from .pauli import (
    GroupElement,
    PauliLetter,
    canonical_order,
    check_disjoint,
    dense_coding_orthogonal,
    group_g1,
    group_g2,
    mul,
    product_set,
    standard_subgroups_g2,
)
from .protocols import (
    FIVE_PARTY_ROUND_CHOICES,
    InvalidSchemeError,
    ProtocolConfig,
    ProtocolResult,
    bits_to_hex,
    run_protocol,
)
from .registers import (
    BELL_VECTORS,
    BellOutcome,
    FourQubitState,
    StateRegister,
    apply_element,
    four_qubit_vector,
)

PROTOCOL_CHOICES = ("two-party", "three-party", "five-party")
PARTY_COUNTS = {"two-party": 2, "three-party": 3, "five-party": 5}
ADVERSARY_CHOICES = tuple(kind.value for kind in AdversaryKind)


class ConfigError(Exception):
    pass


# Flags that may also appear in a JSON config file, with defaults.
RUN_DEFAULTS = {
    "protocol": "two-party",
    "key_bits": 16,
    "seed": None,
    "trials": 1,
    "adversary": "none",
    "attack_fraction": 1.0,
    "swap_count": 1,
    "threshold": 0.0,
    "five_party_state": "omega",
    "five_party_rounds": "1234",
    "format": "json",
    "out": None,
    "fail_on_abort": False,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qka",
        description="Simulate orthogonal-state quantum key agreement protocols.",
    )
    parser.add_argument("--version", action="version", version=f"qka {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute protocol trials")
    run_p.add_argument("--config", help="JSON config file; flags override its values")
    run_p.add_argument("--protocol", choices=PROTOCOL_CHOICES)
    run_p.add_argument("--key-bits", type=int, dest="key_bits")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--adversary", choices=ADVERSARY_CHOICES)
    run_p.add_argument("--attack-fraction", type=float, dest="attack_fraction")
    run_p.add_argument("--swap-count", type=int, dest="swap_count",
                       help="number of disjoint position swaps for dishonest-bob")
    run_p.add_argument("--threshold", type=float, help="decoy error-rate tolerance")
    run_p.add_argument("--five-party-state", choices=("omega", "cluster"),
                       dest="five_party_state")
    run_p.add_argument("--five-party-rounds", choices=FIVE_PARTY_ROUND_CHOICES,
                       dest="five_party_rounds")
    run_p.add_argument("--format", choices=("json", "text"))
    run_p.add_argument("--out", help="write output to this path instead of stdout")
    run_p.add_argument("--fail-on-abort", action="store_true", default=None,
                       dest="fail_on_abort")

    eff_p = sub.add_parser("efficiency", help="resource and efficiency table")
    eff_p.add_argument("--table", action="store_true",
                       help="emit the four-protocol comparison table")
    eff_p.add_argument("--key-bits", type=int, default=2, dest="key_bits")
    eff_p.add_argument("--format", choices=("json", "text", "csv"), default="text")
    eff_p.add_argument("--out")

    ver_p = sub.add_parser("verify-groups",
                           help="exhaustive group checks and dense-coding tables")
    ver_p.add_argument("--out")
    return parser


def _load_run_spec(args: argparse.Namespace) -> dict:
    spec = dict(RUN_DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        unknown = set(file_values) - set(RUN_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        spec.update(file_values)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            spec[key] = value
    if spec["seed"] is None:
        env_seed = os.environ.get("QKA_SEED")
        if env_seed is not None:
            try:
                spec["seed"] = int(env_seed)
            except ValueError:
                raise ConfigError(f"QKA_SEED must be an integer, got {env_seed!r}")
        else:
            spec["seed"] = 0
    return spec


def _validate_run_spec(spec: dict) -> tuple[ProtocolConfig, AdversaryModel]:
    if spec["protocol"] not in PROTOCOL_CHOICES:
        raise ConfigError(f"unknown protocol {spec['protocol']!r}")
    if spec["trials"] < 1:
        raise ConfigError("trials must be >= 1")
    if spec["format"] not in ("json", "text"):
        raise ConfigError("run output format must be json or text")
    try:
        kind = AdversaryKind(spec["adversary"])
    except ValueError:
        raise ConfigError(f"unknown adversary {spec['adversary']!r}") from None
    if kind is not AdversaryKind.NONE:
        if spec["protocol"] == "five-party":
            raise ConfigError("the five-party protocol does not take an adversary")
        if kind in (AdversaryKind.DISHONEST_ALICE_EARLY_MEASURE,
                    AdversaryKind.DISHONEST_BOB_REORDER) and spec["protocol"] != "two-party":
            raise ConfigError(f"{kind.value} applies to the two-party protocol only")
    config = ProtocolConfig(
        key_bits=spec["key_bits"],
        party_count=PARTY_COUNTS[spec["protocol"]],
        error_threshold=spec["threshold"],
        seed=spec["seed"],
        five_party_state=spec["five_party_state"],
        five_party_rounds=spec["five_party_rounds"],
    )
    try:
        config.validate()
        adversary = AdversaryModel(
            kind=kind,
            fraction=spec["attack_fraction"],
            swap_count=spec["swap_count"],
        )
        if kind is AdversaryKind.DISHONEST_BOB_REORDER:
            if 2 * spec["swap_count"] > spec["key_bits"]:
                raise ValueError("swap count too large for the key length")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config, adversary


def batch_summary(results: Sequence[ProtocolResult]) -> dict:
    """Agreement/abort/error statistics over a nonempty batch of runs."""
    if not results:
        raise ValueError("batch_summary needs at least one result")
    total = len(results)
    aborted = sum(1 for r in results if r.aborted)
    completed = [r for r in results if not r.aborted]
    agreement = sum(1 for r in completed if r.agreement())
    error_rates = [c.error_rate for r in results for c in r.checks]
    bit_errors = 0
    bit_total = 0
    for r in completed:
        truth = r.ground_truth_key()
        for key in r.derived_keys.values():
            bit_total += len(truth)
            bit_errors += sum(1 for a, b in zip(key, truth) if a != b)
    return {
        "trials": total,
        "abort_rate": aborted / total,
        "agreement_rate": agreement / total,
        "mean_error_rate": (
            sum(error_rates) / len(error_rates) if error_rates else 0.0
        ),
        "key_bit_error_rate": (bit_errors / bit_total) if bit_total else None,
    }


def _run_command(args: argparse.Namespace) -> int:
    spec = _load_run_spec(args)
    config, adversary = _validate_run_spec(spec)
    results = []
    for trial in range(spec["trials"]):
        trial_config = ProtocolConfig(
            key_bits=config.key_bits,
            party_count=config.party_count,
            error_threshold=config.error_threshold,
            seed=config.seed,
            run_index=trial,
            five_party_state=config.five_party_state,
            five_party_rounds=config.five_party_rounds,
        )
        try:
            results.append(run_protocol(trial_config, adversary))
        except InvalidSchemeError as exc:
            raise ConfigError(str(exc)) from exc

    if spec["trials"] == 1:
        payload = results[0].to_dict()
        text = _render_single(results[0])
    else:
        payload = {
            "schema": "qka.batch/1",
            "spec": {k: spec[k] for k in sorted(RUN_DEFAULTS) if k != "out"},
            "summary": batch_summary(results),
            "trials": [
                {
                    "run_index": i,
                    "aborted": r.aborted,
                    "agreement": r.agreement(),
                    "shared_key": _shared_key_hex(r),
                }
                for i, r in enumerate(results)
            ],
        }
        text = _render_batch(payload)
    output = (
        json.dumps(payload, sort_keys=True, indent=2)
        if spec["format"] == "json"
        else text
    )
    _emit(output, spec["out"])
    if spec["fail_on_abort"] and any(r.aborted for r in results):
        return 3
    return 0


def _shared_key_hex(result: ProtocolResult) -> str | None:
    if result.aborted:
        return None
    key = result.derived_keys[result.party_names[0]]
    return bits_to_hex(key) if key is not None else None


def _render_single(result: ProtocolResult) -> str:
    d = result.to_dict()
    lines = [
        f"protocol       {d['protocol']}",
        f"key bits       {d['key_bits']}",
        f"aborted        {d['aborted']}",
    ]
    if d["abort_reason"]:
        lines.append(f"abort reason   {d['abort_reason']}")
    for name in d["parties"]:
        key = d["derived_keys"][name]
        lines.append(f"key[{name:<7}]  {key if key is not None else '-'}")
    lines.append(f"agreement      {d['agreement']}")
    for check in d["checks"]:
        lines.append(
            f"check t{check['transmission']:<3} {check['sender']}->{check['receiver']}"
            f" error {check['error_rate']:.4f} {'ok' if check['passed'] else 'FAIL'}"
        )
    if d["resource_counts"]:
        rc = d["resource_counts"]
        eff = d["efficiency"]
        lines.append(f"resources      c={rc['c']} q={rc['q']} b={rc['b']}")
        lines.append(f"efficiency     {eff['eta_fraction']} = {eff['eta_percent']}")
    return "\n".join(lines)


def _render_batch(payload: dict) -> str:
    s = payload["summary"]
    lines = [
        f"trials             {s['trials']}",
        f"abort rate         {s['abort_rate']:.4f}",
        f"agreement rate     {s['agreement_rate']:.4f}",
        f"mean error rate    {s['mean_error_rate']:.4f}",
    ]
    if s["key_bit_error_rate"] is not None:
        lines.append(f"key bit error rate {s['key_bit_error_rate']:.4f}")
    return "\n".join(lines)


def _efficiency_command(args: argparse.Namespace) -> int:
    # --table is the only mode; accept its absence as the same request.
    n = args.key_bits
    if n <= 0:
        raise ConfigError("key-bits must be positive")
    if args.format == "csv":
        output = efficiency_table_csv(n)
    elif args.format == "json":
        output = efficiency_table_json(n)
    else:
        output = efficiency_table_text(n)
    _emit(output, args.out)
    return 0


def _verify_groups_command(args: argparse.Namespace) -> int:
    lines: list[str] = []
    ok = True

    def check(name: str, passed: bool) -> None:
        nonlocal ok
        ok = ok and passed
        lines.append(f"{'ok  ' if passed else 'FAIL'} {name}")

    letters = list(PauliLetter)
    oracle = _matrix_mul_oracle()
    check(
        "letter product table matches the matrix oracle (16 pairs)",
        all(mul(GroupElement.of(a), GroupElement.of(b)).letters[0] is oracle[a, b]
            for a in letters for b in letters),
    )
    g1 = group_g1()
    check(
        "letter group closed and commutative (64 triples)",
        all(
            mul(a, b) in g1
            and mul(a, b) == mul(b, a)
            and mul(mul(a, b), c) == mul(a, mul(b, c))
            for a in g1 for b in g1 for c in g1
        ),
    )
    subs = standard_subgroups_g2()
    check(
        "g1..g6 pairwise disjoint (15 pairs)",
        all(check_disjoint(a, b) for a, b in itertools.combinations(subs, 2)),
    )
    g2 = group_g2()
    for quad in FIVE_PARTY_ROUND_CHOICES:
        chosen = [subs[int(d) - 1] for d in quad]
        check(
            f"product of g{quad[0]},g{quad[1]},g{quad[2]},g{quad[3]} covers all 16 elements",
            product_set(chosen) == g2,
        )

    psi = StateRegister((0, 1), BELL_VECTORS[BellOutcome.PSI_PLUS].copy())
    check(
        "dense coding on |psi+> (letters on qubit 2) is orthogonal",
        dense_coding_orthogonal(psi, (1,), g1),
    )
    for kind in FourQubitState:
        reg = StateRegister((0, 1, 2, 3), four_qubit_vector(kind))
        check(
            f"dense coding on |{kind.value}> (two-letter group on qubits 1,3) is orthogonal",
            dense_coding_orthogonal(reg, (0, 2), g2),
        )

    lines.append("")
    lines.extend(_dense_coding_table_bell(psi))
    for kind in FourQubitState:
        lines.append("")
        lines.extend(_dense_coding_table_four(kind))

    _emit("\n".join(lines), args.out)
    return 0 if ok else 1


def _matrix_mul_oracle() -> dict:
    """Independent letter-product table from raw matrix products."""
    table = {}
    for a in PauliLetter:
        for b in PauliLetter:
            prod = a.matrix @ b.matrix
            for cand in PauliLetter:
                ref = cand.matrix
                nz = np.argwhere(np.abs(ref) > 0.5)[0]
                phase = prod[nz[0], nz[1]] / ref[nz[0], nz[1]]
                if abs(abs(phase) - 1) < 1e-12 and np.allclose(prod, phase * ref):
                    table[a, b] = cand
                    break
    return table


def _dense_coding_table_bell(psi: StateRegister) -> list[str]:
    lines = ["dense coding table for |psi+>, letters acting on qubit 2:"]
    bell_names = {o: o.label for o in BellOutcome}
    for letter in PauliLetter:
        out = apply_element(psi, GroupElement.of(letter), (1,))
        hits = [
            name
            for o, name in bell_names.items()
            if abs(abs(complex(np.vdot(BELL_VECTORS[o], out.amplitudes))) - 1) < 1e-10
        ]
        lines.append(f"  {GroupElement.of(letter).label:<3} -> |{hits[0]}>")
    return lines


def _dense_coding_table_four(kind: FourQubitState) -> list[str]:
    reg = StateRegister((0, 1, 2, 3), four_qubit_vector(kind))
    lines = [f"dense coding table for |{kind.value}>, elements acting on qubits 1,3:"]
    for element in canonical_order(group_g2()):
        out = apply_element(reg, element, (0, 2))
        lines.append(f"  {element.label:<5} -> {_render_ket(out.amplitudes)}")
    return lines


def _render_ket(amplitudes: np.ndarray) -> str:
    k = int(np.log2(len(amplitudes)))
    terms = []
    for idx, amp in enumerate(amplitudes):
        if abs(amp) < 1e-12:
            continue
        sign = "+" if amp.real > 0 else "-"
        terms.append(f"{sign}|{idx:0{k}b}>")
    return "1/2(" + " ".join(terms) + ")" if len(terms) == 4 else " ".join(terms)


def _emit(output: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(output + "\n")
    else:
        print(output)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _run_command(args)
        if args.command == "efficiency":
            return _efficiency_command(args)
        return _verify_groups_command(args)
    except ConfigError as exc:
        print(f"qka: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
