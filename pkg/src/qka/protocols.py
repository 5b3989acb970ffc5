"""Turn-based engines for the two-, three- and five-party key agreements.

All three protocols share one transport idiom: the sender interleaves the
message qubits with decoy Bell pairs, scrambles the whole train under a
secret uniform permutation, and stages its disclosures so that the receiver
can always check the decoys for disturbance before any key-bearing order
becomes public. The two-party run additionally withholds the return train's
message order until the initiating party has committed to her key
announcement, so neither side can steer the final key.

Keys combine by XOR: every party's private key flips exactly its own bits
of the shared key, and nobody learns anything before committing.

Engines are strictly sequential; parallelize at the run level only. Every
run owns its store, generator and transcript, and identical (seed,
run_index) pairs reproduce byte-identical transcripts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import transcript as tr
from .adversaries import (
    AdversaryKind,
    AdversaryModel,
    attack_transit,
    choose_swap_pairs,
    dishonest_alice_early_measure,
    dishonest_bob_reorder,
)
from .efficiency import (
    FIVE_PARTY,
    THREE_PARTY,
    TWO_PARTY,
    ResourceCount,
    count_from_transcript,
    qubit_efficiency,
)
from .pauli import (
    EncodingScheme,
    GroupElement,
    PauliLetter,
    canonical_order,
    product_set,
    standard_subgroups_g2,
    validate_scheme,
)
from .registers import (
    BellOutcome,
    FourQubitState,
    QubitStore,
    StateRegister,
    apply_element,
    four_qubit_vector,
)
from .transcript import Transcript

PARTY_NAMES = ("Alice", "Bob", "Charlie", "Dave", "Erika")

FIVE_PARTY_ROUND_CHOICES = ("1234", "1256", "3456")


class InvalidSchemeError(ValueError):
    """A five-party round selection fails the encoding-scheme validation."""


class EncodingAlphabet(Enum):
    X_ROUND = "x"
    Z_ROUND = "z"


def bits_to_hex(bits: Sequence[int]) -> str:
    """Big-endian hex rendering, left-padded to whole nibbles."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    width = (len(bits) + 3) // 4
    return f"{value:0{width}x}"


def xor_bits(*keys: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(keys[0])
    for key in keys:
        for i, b in enumerate(key):
            out[i] ^= int(b)
    return tuple(out)


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything a run needs; n must be even (decoys ship as n/2 pairs)."""

    key_bits: int
    party_count: int = 2
    error_threshold: float = 0.0
    seed: int = 0
    run_index: int = 0
    five_party_state: str = "omega"
    five_party_rounds: str = "1234"
    fixed_keys: tuple[tuple[int, ...], ...] | None = None

    def validate(self) -> None:
        if self.key_bits <= 0 or self.key_bits % 2:
            raise ValueError("key_bits must be a positive even integer")
        if self.party_count not in (2, 3, 5):
            raise ValueError("party_count must be 2, 3 or 5")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError("error_threshold must lie in [0, 1]")
        if self.seed < 0 or self.run_index < 0:
            raise ValueError("seed and run_index must be nonnegative")
        if self.five_party_state not in ("omega", "cluster"):
            raise ValueError("five_party_state must be 'omega' or 'cluster'")
        if len(self.five_party_rounds) != 4 or any(
            c not in "123456" for c in self.five_party_rounds
        ):
            raise ValueError("five_party_rounds must be four digits from 1..6")
        if self.fixed_keys is not None:
            if len(self.fixed_keys) != self.party_count:
                raise ValueError("fixed_keys must supply one key per party")
            for key in self.fixed_keys:
                if len(key) != self.key_bits or any(b not in (0, 1) for b in key):
                    raise ValueError("each fixed key must be key_bits bits")

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.run_index])


@dataclass
class TravelSequence:
    """The scrambled qubit train in transit; slots mutate under attack."""

    slots: list[int]


@dataclass(frozen=True)
class PermutationRecord:
    """The sender's secret map for one scrambled train.

    ``forward[i]`` is the slot of concatenated item i (messages first, then
    decoy qubits pair by pair); ``inverse`` undoes it. ``message_order[i]``
    is the slot of message qubit i, and ``decoy_pairs`` lists the slot pair
    of each decoy Bell pair.
    """

    forward: tuple[int, ...]
    inverse: tuple[int, ...]
    message_order: tuple[int, ...]
    decoy_pairs: tuple[tuple[int, int], ...]

    @property
    def decoy_positions(self) -> frozenset[int]:
        return frozenset(s for pair in self.decoy_pairs for s in pair)

    @property
    def message_positions(self) -> frozenset[int]:
        return frozenset(self.message_order)


@dataclass(frozen=True)
class TransmissionCheck:
    transmission: int
    step: str
    sender: str
    receiver: str
    error_rate: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "transmission": self.transmission,
            "step": self.step,
            "sender": self.sender,
            "receiver": self.receiver,
            "error_rate": self.error_rate,
            "passed": self.passed,
        }


def insert_decoys_and_permute(
    message_qubits: Sequence[int],
    store: QubitStore,
    rng: np.random.Generator,
    decoy_pair_count: int | None = None,
) -> tuple[TravelSequence, PermutationRecord]:
    """Append fresh decoy pairs and scramble everything uniformly."""
    m = len(message_qubits)
    if decoy_pair_count is None:
        if m % 2:
            raise ValueError("message qubit count must be even")
        decoy_pair_count = m // 2
    decoys: list[int] = []
    for _ in range(decoy_pair_count):
        decoys.extend(store.new_bell(BellOutcome.PSI_PLUS))
    items = list(message_qubits) + decoys
    total = len(items)
    inverse = tuple(int(v) for v in rng.permutation(total))
    forward = [0] * total
    for slot, item in enumerate(inverse):
        forward[item] = slot
    slots = [items[inverse[s]] for s in range(total)]
    record = PermutationRecord(
        forward=tuple(forward),
        inverse=inverse,
        message_order=tuple(forward[:m]),
        decoy_pairs=tuple(
            (forward[m + 2 * p], forward[m + 2 * p + 1]) for p in range(decoy_pair_count)
        ),
    )
    return TravelSequence(slots), record


def verify_decoys(
    store: QubitStore,
    seq: TravelSequence,
    decoy_pairs: Sequence[tuple[int, int]],
    threshold: float,
    rng: np.random.Generator,
) -> tuple[float, bool]:
    """Bell-measure the disclosed decoy pairs; any non-psi+ outcome is an error."""
    seen: set[int] = set()
    for a, b in decoy_pairs:
        if a == b or not (0 <= a < len(seq.slots)) or not (0 <= b < len(seq.slots)):
            raise ValueError(f"malformed decoy pair ({a}, {b})")
        if a in seen or b in seen:
            raise ValueError("decoy pairs must be disjoint")
        seen.update((a, b))
    if not decoy_pairs:
        raise ValueError("decoy disclosure is empty")
    errors = 0
    for a, b in decoy_pairs:
        outcome = store.measure_bell(seq.slots[a], seq.slots[b], rng)
        if outcome is not BellOutcome.PSI_PLUS:
            errors += 1
    error_rate = errors / len(decoy_pairs)
    return error_rate, error_rate <= threshold


def encode_key(
    store: QubitStore,
    qubits: Sequence[int],
    key: Sequence[int],
    alphabet: EncodingAlphabet,
) -> None:
    """Bitwise encoding: identity on 0, X or Z (per alphabet) on 1."""
    if len(qubits) != len(key):
        raise ValueError("qubit list and key must have equal length")
    letter = PauliLetter.X if alphabet is EncodingAlphabet.X_ROUND else PauliLetter.Z
    word = GroupElement.of(letter)
    for qubit, bit in zip(qubits, key):
        if bit:
            store.apply_pauli(word, (qubit,))


def decode_bell_bits(outcome: BellOutcome) -> tuple[int, int]:
    """Map a Bell outcome on an initial psi+ pair to (x-round bit, z-round bit)."""
    return outcome.x_bit, outcome.z_bit


@dataclass
class ProtocolResult:
    protocol: str
    key_bits: int
    party_names: tuple[str, ...]
    private_keys: dict[str, tuple[int, ...]]
    derived_keys: dict[str, tuple[int, ...] | None]
    aborted: bool
    abort_reason: str | None
    checks: list[TransmissionCheck]
    resource_counts: ResourceCount | None
    transcript: Transcript
    outcome_records: dict[str, tuple[str, ...]] = field(default_factory=dict)
    attack_report: dict | None = None

    def ground_truth_key(self) -> tuple[int, ...]:
        """XOR of all private keys; what every honest run must derive."""
        return xor_bits(*self.private_keys.values())

    def agreement(self) -> bool:
        if self.aborted:
            return False
        truth = self.ground_truth_key()
        return all(key == truth for key in self.derived_keys.values())

    def to_dict(self) -> dict:
        report = (
            qubit_efficiency(self.resource_counts).to_dict()
            if self.resource_counts
            else None
        )
        return {
            "schema": "qka.run/1",
            "protocol": self.protocol,
            "key_bits": self.key_bits,
            "parties": list(self.party_names),
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "private_keys": {k: bits_to_hex(v) for k, v in self.private_keys.items()},
            "derived_keys": {
                k: (bits_to_hex(v) if v is not None else None)
                for k, v in self.derived_keys.items()
            },
            "ground_truth_key": bits_to_hex(self.ground_truth_key()),
            "agreement": self.agreement(),
            "checks": [c.to_dict() for c in self.checks],
            "resource_counts": (
                {"c": self.resource_counts.c, "q": self.resource_counts.q, "b": self.resource_counts.b}
                if self.resource_counts
                else None
            ),
            "efficiency": report,
            "outcomes": {k: list(v) for k, v in self.outcome_records.items()},
            "attack_report": self.attack_report,
            "transcript": self.transcript.to_dict(),
        }

    def to_json(self) -> str:
        import json

        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


class _AbortRun(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class _RunContext:
    """Shared plumbing for one run: store, rng, transcript, attack wiring."""

    def __init__(
        self,
        protocol: str,
        config: ProtocolConfig,
        adversary: AdversaryModel,
    ):
        self.config = config
        self.adversary = adversary
        self.store = QubitStore()
        self.rng = config.make_rng()
        self.transcript = Transcript(protocol, config.key_bits)
        self.checks: list[TransmissionCheck] = []
        self._transmissions = 0

    def draw_key(self, party_index: int) -> tuple[int, ...]:
        fixed = self.config.fixed_keys
        if fixed is not None:
            return tuple(int(b) for b in fixed[party_index])
        return tuple(int(b) for b in self.rng.integers(0, 2, size=self.config.key_bits))

    def log_preparation(self, step: str, actor: str, qubit_count: int, purpose: str) -> None:
        self.transcript.log(
            step,
            actor,
            tr.STATE_PREPARATION,
            {"purpose": purpose, "qubit_count": qubit_count},
            qubit_count=qubit_count,
            purpose=purpose,
        )

    def send_scrambled(
        self,
        step: str,
        sender: str,
        receiver: str,
        message_qubits: Sequence[int],
        decoy_pair_count: int,
    ) -> tuple[TravelSequence, PermutationRecord, int]:
        """Decoy prep + scramble + send + ack; transit attack happens here."""
        self.log_preparation(step, sender, 2 * decoy_pair_count, "decoy")
        seq, record = insert_decoys_and_permute(
            message_qubits, self.store, self.rng, decoy_pair_count
        )
        index = self._transmissions
        self._transmissions += 1
        self.transcript.log(
            step,
            sender,
            tr.QUANTUM_SEND,
            {"to": receiver, "slots": list(seq.slots), "transmission": index},
            qubit_count=len(seq.slots),
        )
        if self.adversary.is_external and self.adversary.transmission_index == index:
            attack_transit(self.adversary, self.store, seq, self.rng)
        self.transcript.log(step, receiver, tr.ACK, {"transmission": index})
        return seq, record, index

    def disclose_full(self, step: str, actor: str, record: PermutationRecord) -> None:
        self.transcript.log(
            step,
            actor,
            tr.FULL_PERMUTATION_DISCLOSURE,
            {
                "message_order": list(record.message_order),
                "decoy_pairs": [list(p) for p in record.decoy_pairs],
            },
            counted_bits=len(record.message_order),
        )

    def disclose_decoys(self, step: str, actor: str, record: PermutationRecord) -> None:
        self.transcript.log(
            step,
            actor,
            tr.DECOY_POSITIONS_DISCLOSURE,
            {"decoy_pairs": [list(p) for p in record.decoy_pairs]},
        )

    def disclose_order(self, step: str, actor: str, order: Sequence[int]) -> None:
        self.transcript.log(
            step,
            actor,
            tr.MESSAGE_ORDER_DISCLOSURE,
            {"message_order": list(order)},
            counted_bits=len(order),
        )

    def announce_key(self, step: str, actor: str, key: Sequence[int]) -> None:
        self.transcript.log(
            step,
            actor,
            tr.KEY_ANNOUNCEMENT,
            {"key": bits_to_hex(key)},
            counted_bits=len(key),
        )

    def check_decoys(
        self,
        step: str,
        sender: str,
        receiver: str,
        seq: TravelSequence,
        record: PermutationRecord,
        index: int,
    ) -> None:
        """Receiver-side disturbance estimate; a failure aborts the run."""
        error_rate, passed = verify_decoys(
            self.store, seq, record.decoy_pairs, self.config.error_threshold, self.rng
        )
        self.checks.append(
            TransmissionCheck(index, step, sender, receiver, error_rate, passed)
        )
        if not passed:
            self.transcript.log(
                step,
                receiver,
                tr.ABORT,
                {"transmission": index, "error_rate": error_rate},
            )
            self.transcript.aborted = True
            raise _AbortRun(
                f"decoy check failed on transmission {index} "
                f"(error rate {error_rate:.4f} > threshold {self.config.error_threshold})"
            )


def _restore_order(seq: TravelSequence, order: Sequence[int]) -> list[int]:
    return [seq.slots[s] for s in order]


def _normalize_adversary(adversary: AdversaryModel | None) -> AdversaryModel:
    return adversary if adversary is not None else AdversaryModel.none()


def run_two_party(
    config: ProtocolConfig, adversary: AdversaryModel | None = None
) -> ProtocolResult:
    """Initiator/responder exchange over n Bell pairs.

    The initiator keeps one half of every pair and circulates the other.
    The responder X-encodes his key on the returned halves; the initiator
    announces her key before the responder reveals the return train's
    message order, then Bell-measures pairwise to decode his.
    """
    config.validate()
    if config.party_count != 2:
        raise ValueError("two-party run requires party_count == 2")
    adv = _normalize_adversary(adversary)
    n = config.key_bits
    names = PARTY_NAMES[:2]
    alice, bob = names
    ctx = _RunContext(TWO_PARTY, config, adv)
    store, rng, t = ctx.store, ctx.rng, ctx.transcript

    private: dict[str, tuple[int, ...]] = {}
    derived: dict[str, tuple[int, ...] | None] = {alice: None, bob: None}
    outcome_records: dict[str, tuple[str, ...]] = {}
    attack_report: dict | None = None

    try:
        # Step 1: pair preparation and the initiator's key.
        pairs = [store.new_bell(BellOutcome.PSI_PLUS) for _ in range(n)]
        ctx.log_preparation("step1", alice, 2 * n, "message")
        kept = [p for p, _ in pairs]
        travel = [q for _, q in pairs]
        key_a = ctx.draw_key(0)
        private[alice] = key_a

        # Steps 2-3: outbound train, full disclosure, responder's decoy check.
        seq1, rec1, idx1 = ctx.send_scrambled("step2", alice, bob, travel, n // 2)
        ctx.disclose_full("step3", alice, rec1)
        ctx.check_decoys("step3", alice, bob, seq1, rec1, idx1)
        at_bob = _restore_order(seq1, rec1.message_order)

        # Step 4: responder's key, X-encoding, return train.
        key_b = ctx.draw_key(1)
        private[bob] = key_b
        encode_key(store, at_bob, key_b, EncodingAlphabet.X_ROUND)
        seq2, rec2, idx2 = ctx.send_scrambled("step4", bob, alice, at_bob, n // 2)

        # Step 5: decoy coordinates only; the message order stays secret.
        ctx.disclose_decoys("step5", bob, rec2)
        ctx.check_decoys("step5", bob, alice, seq2, rec2, idx2)

        # Insider hook: an impatient initiator measures on guessed pairings
        # now, before committing to her announcement.
        early_guess: tuple[int, ...] | None = None
        if adv.kind is AdversaryKind.DISHONEST_ALICE_EARLY_MEASURE:
            early_guess, attack_report = dishonest_alice_early_measure(
                store, kept, seq2, rec2, rng, key_b
            )

        # Step 6: the initiator commits; the responder can already finish.
        ctx.announce_key("step6", alice, key_a)
        derived[bob] = xor_bits(key_a, key_b)

        # Step 7: message order (honest or reordered), then pairwise decoding.
        order = list(rec2.message_order)
        if adv.kind is AdversaryKind.DISHONEST_BOB_REORDER:
            swap_pairs = adv.swap_pairs or choose_swap_pairs(n, adv.swap_count, rng)
            order = dishonest_bob_reorder(order, swap_pairs)
            claimed_bits = tuple(key_b[i] for i in _claimed_indices(order, rec2))
            attack_report = {
                "kind": "reorder",
                "swap_pairs": [list(p) for p in swap_pairs],
                "target_key": bits_to_hex(xor_bits(key_a, claimed_bits)),
            }
        ctx.disclose_order("step7", bob, order)

        if early_guess is not None:
            derived[alice] = xor_bits(key_a, early_guess)
        else:
            claimed = _restore_order(seq2, order)
            outcomes = [store.measure_bell(kept[i], claimed[i], rng) for i in range(n)]
            outcome_records[alice] = tuple(o.label for o in outcomes)
            decoded = tuple(decode_bell_bits(o)[0] for o in outcomes)
            derived[alice] = xor_bits(key_a, decoded)  # Step 8

        if attack_report is not None and attack_report.get("kind") == "reorder":
            attack_report["alice_key_matches_target"] = (
                bits_to_hex(derived[alice]) == attack_report["target_key"]
            )

        counts = count_from_transcript(t)
        return ProtocolResult(
            TWO_PARTY, n, names, private, derived, False, None, ctx.checks,
            counts, t, outcome_records, attack_report,
        )
    except _AbortRun as abort:
        return ProtocolResult(
            TWO_PARTY, n, names, private,
            {name: None for name in names}, True, abort.reason, ctx.checks,
            None, t, outcome_records, attack_report,
        )


def _claimed_indices(order: Sequence[int], record: PermutationRecord) -> list[int]:
    """Which true message index each announced slot actually carries."""
    true_index_of_slot = {slot: i for i, slot in enumerate(record.message_order)}
    return [true_index_of_slot[slot] for slot in order]


def run_three_party(
    config: ProtocolConfig, adversary: AdversaryModel | None = None
) -> ProtocolResult:
    """Ring of three: each pair train makes three hops around the ring.

    Hop 1 moves the fresh halves onward; the next two hops carry an X-round
    and then a Z-round of key encoding. After the third hop every party
    Bell-measures its kept halves against its own returned train and reads
    both neighbors' bits off the outcome.
    """
    config.validate()
    if config.party_count != 3:
        raise ValueError("three-party run requires party_count == 3")
    adv = _normalize_adversary(adversary)
    if adv.is_insider:
        raise ValueError("insider models apply to the two-party protocol only")
    n = config.key_bits
    names = PARTY_NAMES[:3]
    ctx = _RunContext(THREE_PARTY, config, adv)
    store, rng, t = ctx.store, ctx.rng, ctx.transcript

    private: dict[str, tuple[int, ...]] = {}
    try:
        kept: list[list[int]] = []
        streams: list[list[int]] = []  # streams[s]: train that originated at party s
        for j in range(3):
            pairs = [store.new_bell(BellOutcome.PSI_PLUS) for _ in range(n)]
            ctx.log_preparation("step1", names[j], 2 * n, "message")
            kept.append([p for p, _ in pairs])
            streams.append([q for _, q in pairs])
        keys = [ctx.draw_key(j) for j in range(3)]
        for j in range(3):
            private[names[j]] = keys[j]

        # Hop 1 (steps 2-3): full disclosure, like the two-party outbound leg.
        hop1 = {}
        for j in range(3):
            hop1[j] = ctx.send_scrambled(
                "step2", names[j], names[(j + 1) % 3], streams[j], n // 2
            )
        for j in range(3):
            seq, rec, idx = hop1[j]
            ctx.disclose_full("step3", names[j], rec)
            ctx.check_decoys("step3", names[j], names[(j + 1) % 3], seq, rec, idx)
            streams[j] = _restore_order(seq, rec.message_order)

        # Rounds: (alphabet, step labels, stream held by sender j).
        rounds = (
            (EncodingAlphabet.X_ROUND, "step4", "step5", 1),
            (EncodingAlphabet.Z_ROUND, "step6", "step7", 2),
        )
        for alphabet, send_step, check_step, back in rounds:
            for j in range(3):
                encode_key(store, streams[(j - back) % 3], keys[j], alphabet)
            hop = {}
            for j in range(3):
                hop[j] = ctx.send_scrambled(
                    send_step, names[j], names[(j + 1) % 3], streams[(j - back) % 3], n // 2
                )
            for j in range(3):
                seq, rec, idx = hop[j]
                ctx.disclose_decoys(check_step, names[j], rec)
                ctx.check_decoys(check_step, names[j], names[(j + 1) % 3], seq, rec, idx)
                ctx.disclose_order(check_step, names[j], rec.message_order)
                streams[(j - back) % 3] = _restore_order(seq, rec.message_order)

        # Step 8: every party decodes both neighbors from one Bell outcome.
        derived: dict[str, tuple[int, ...] | None] = {}
        outcome_records: dict[str, tuple[str, ...]] = {}
        for j in range(3):
            outcomes = [
                store.measure_bell(kept[j][i], streams[j][i], rng) for i in range(n)
            ]
            outcome_records[names[j]] = tuple(o.label for o in outcomes)
            x_bits = tuple(o.x_bit for o in outcomes)  # key of party j+1
            z_bits = tuple(o.z_bit for o in outcomes)  # key of party j-1
            derived[names[j]] = xor_bits(keys[j], x_bits, z_bits)

        counts = count_from_transcript(t)
        return ProtocolResult(
            THREE_PARTY, n, names, private, derived, False, None, ctx.checks,
            counts, t, outcome_records, None,
        )
    except _AbortRun as abort:
        return ProtocolResult(
            THREE_PARTY, n, names, private,
            {name: None for name in names}, True, abort.reason, ctx.checks,
            None, t, {}, None,
        )


def five_party_round_subgroups(digits: str):
    """Map a four-digit selection like '1234' onto the standard order-2 subgroups."""
    subs = standard_subgroups_g2()
    return tuple(subs[int(d) - 1] for d in digits)


def run_five_party(config: ProtocolConfig) -> ProtocolResult:
    """Ring of five over 4-qubit resource states.

    Each party keeps qubits 2 and 4 of every copy and circulates qubits 1
    and 3. The four downstream parties each encode one key bit per copy
    with their round's subgroup; after five hops the originator measures
    every copy in the orthogonal basis the product group generates and
    factors the composite operator back into the four bits.
    """
    config.validate()
    if config.party_count != 5:
        raise ValueError("five-party run requires party_count == 5")
    n = config.key_bits
    names = PARTY_NAMES[:5]

    subgroups = five_party_round_subgroups(config.five_party_rounds)
    scheme = EncodingScheme(
        total_qubits=4, travel_qubits=2, bits_per_round=1, rounds=4,
        round_subgroups=subgroups,
    )
    state_kind = (
        FourQubitState.OMEGA if config.five_party_state == "omega" else FourQubitState.CLUSTER
    )
    reference = StateRegister((0, 1, 2, 3), four_qubit_vector(state_kind))
    if not validate_scheme(scheme, reference, (0, 2)):
        raise InvalidSchemeError(
            f"round selection {config.five_party_rounds!r} on {config.five_party_state!r} "
            "does not form a decodable encoding scheme"
        )

    generators = [sub.non_identity()[0] for sub in subgroups]
    elements = canonical_order(product_set(subgroups))
    basis = np.stack(
        [apply_element(reference, u, (0, 2)).amplitudes for u in elements]
    )
    bits_of_element: dict[GroupElement, tuple[int, ...]] = {}
    for bits in itertools.product((0, 1), repeat=4):
        word = GroupElement.identity(2)
        for bit, gen in zip(bits, generators):
            if bit:
                word = word * gen
        bits_of_element[word] = bits

    ctx = _RunContext(FIVE_PARTY, config, AdversaryModel.none())
    store, rng, t = ctx.store, ctx.rng, ctx.transcript

    private: dict[str, tuple[int, ...]] = {}
    try:
        copies: list[list[tuple[int, int, int, int]]] = []
        travels: list[list[int]] = []  # flattened travel qubits per stream
        for j in range(5):
            stream_copies = [store.new_four_qubit(state_kind) for _ in range(n)]
            ctx.log_preparation("hop0", names[j], 4 * n, "message")
            copies.append(stream_copies)
            travels.append([q for c in stream_copies for q in (c[0], c[2])])
        keys = [ctx.draw_key(j) for j in range(5)]
        for j in range(5):
            private[names[j]] = keys[j]

        # Hop 1: fresh travel qubits move one step; full disclosure.
        hop = {}
        for j in range(5):
            hop[j] = ctx.send_scrambled(
                "hop1", names[j], names[(j + 1) % 5], travels[j], n // 2
            )
        for j in range(5):
            seq, rec, idx = hop[j]
            ctx.disclose_full("hop1", names[j], rec)
            ctx.check_decoys("hop1", names[j], names[(j + 1) % 5], seq, rec, idx)
            travels[j] = _restore_order(seq, rec.message_order)

        # Encoding rounds k=1..4: the holder of stream j-k is party j.
        for k in range(1, 5):
            step = f"hop{k + 1}"
            for j in range(5):
                stream = (j - k) % 5
                qubits = travels[stream]
                for i in range(n):
                    if keys[j][i]:
                        store.apply_pauli(
                            generators[k - 1], (qubits[2 * i], qubits[2 * i + 1])
                        )
            hop = {}
            for j in range(5):
                stream = (j - k) % 5
                hop[j] = ctx.send_scrambled(
                    step, names[j], names[(j + 1) % 5], travels[stream], n // 2
                )
            for j in range(5):
                stream = (j - k) % 5
                seq, rec, idx = hop[j]
                ctx.disclose_decoys(step, names[j], rec)
                ctx.check_decoys(step, names[j], names[(j + 1) % 5], seq, rec, idx)
                ctx.disclose_order(step, names[j], rec.message_order)
                travels[stream] = _restore_order(seq, rec.message_order)

        # Decode: measure every copy in the product-group basis.
        derived: dict[str, tuple[int, ...] | None] = {}
        outcome_records: dict[str, tuple[str, ...]] = {}
        for j in range(5):
            labels = []
            final = []
            for i in range(n):
                q1, q2, q3, q4 = copies[j][i]
                # travel qubits may have been replaced only by an attack;
                # honest runs return the original ids rearranged.
                index = store.measure_in_basis((q1, q2, q3, q4), basis, rng)
                element = elements[index]
                labels.append(element.label)
                bits = bits_of_element[element]
                final.append(keys[j][i] ^ bits[0] ^ bits[1] ^ bits[2] ^ bits[3])
            outcome_records[names[j]] = tuple(labels)
            derived[names[j]] = tuple(final)

        counts = count_from_transcript(t)
        return ProtocolResult(
            FIVE_PARTY, n, names, private, derived, False, None, ctx.checks,
            counts, t, outcome_records, None,
        )
    except _AbortRun as abort:
        return ProtocolResult(
            FIVE_PARTY, n, names, private,
            {name: None for name in names}, True, abort.reason, ctx.checks,
            None, t, {}, None,
        )


def run_protocol(
    config: ProtocolConfig, adversary: AdversaryModel | None = None
) -> ProtocolResult:
    """Dispatch on party_count; the five-party run accepts no adversary."""
    if config.party_count == 2:
        return run_two_party(config, adversary)
    if config.party_count == 3:
        return run_three_party(config, adversary)
    adv = _normalize_adversary(adversary)
    if adv.kind is not AdversaryKind.NONE:
        raise ValueError("the five-party protocol does not take an adversary model")
    return run_five_party(config)
