"""Attack models run against the key-agreement protocols.

Two external attacks act on qubits in transit: a computational-basis
intercept-resend, and a Bell-basis intercept-resend that pairs *adjacent*
travel slots because the secret permutation denies the attacker the true
pairing. Two insider attacks override a party's behavior: a sender trying
to decode the peer's key before announcing her own (forced to guess the
withheld message order), and a receiver announcing a reordered message map
after learning the peer's key (which triggers entanglement swapping at the
mismatched measurement pairs).

Resent qubits are fresh ids; the measured originals retire from the store.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .registers import QubitStore


class AdversaryKind(str, Enum):
    NONE = "none"
    INTERCEPT_RESEND_Z = "intercept-z"
    INTERCEPT_RESEND_BELL = "intercept-bell"
    DISHONEST_ALICE_EARLY_MEASURE = "dishonest-alice"
    DISHONEST_BOB_REORDER = "dishonest-bob"


EXTERNAL_KINDS = frozenset(
    {AdversaryKind.INTERCEPT_RESEND_Z, AdversaryKind.INTERCEPT_RESEND_BELL}
)
INSIDER_KINDS = frozenset(
    {AdversaryKind.DISHONEST_ALICE_EARLY_MEASURE, AdversaryKind.DISHONEST_BOB_REORDER}
)


@dataclass(frozen=True)
class AdversaryModel:
    """Attack selector plus its parameters.

    ``fraction`` is the per-slot (or per-slot-pair) attack probability for
    external kinds. ``swap_count`` is the number of disjoint transpositions
    a reordering receiver applies (2*swap_count message positions touched);
    ``swap_pairs`` pins them explicitly instead. ``transmission_index``
    selects which quantum transmission an external attacker taps, counting
    sends in transcript order from 0.
    """

    kind: AdversaryKind = AdversaryKind.NONE
    fraction: float = 1.0
    swap_count: int = 1
    swap_pairs: tuple[tuple[int, int], ...] | None = None
    transmission_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("attack fraction must lie in [0, 1]")
        if self.swap_count < 0:
            raise ValueError("swap count must be nonnegative")
        if self.transmission_index < 0:
            raise ValueError("transmission index must be nonnegative")

    @classmethod
    def none(cls) -> "AdversaryModel":
        return cls()

    @property
    def is_external(self) -> bool:
        return self.kind in EXTERNAL_KINDS

    @property
    def is_insider(self) -> bool:
        return self.kind in INSIDER_KINDS


def attack_transit(
    model: AdversaryModel,
    store: QubitStore,
    seq,
    rng: np.random.Generator,
) -> None:
    """Apply an external attack to a travel sequence, mutating its slots.

    ``seq`` is any object with a mutable ``slots`` list of qubit ids. A
    NONE model is a no-op (and draws no randomness); insider kinds raise.
    """
    if model.kind is AdversaryKind.NONE:
        return
    if not model.is_external:
        raise ValueError(f"{model.kind.value} is not an external transit attack")
    if model.kind is AdversaryKind.INTERCEPT_RESEND_Z:
        for k in range(len(seq.slots)):
            if rng.random() < model.fraction:
                bit = store.measure_z(seq.slots[k], rng)
                seq.slots[k] = store.new_computational(bit)
    else:
        # Bell-basis attack on adjacent slots; a trailing odd slot is left alone.
        for k in range(0, len(seq.slots) - 1, 2):
            if rng.random() < model.fraction:
                outcome = store.measure_bell(seq.slots[k], seq.slots[k + 1], rng)
                seq.slots[k], seq.slots[k + 1] = store.new_bell(outcome)


def choose_swap_pairs(
    n: int, count: int, rng: np.random.Generator
) -> tuple[tuple[int, int], ...]:
    """Draw ``count`` disjoint transpositions over message indices 0..n-1."""
    if 2 * count > n:
        raise ValueError("cannot place that many disjoint swaps in the key")
    picks = rng.choice(n, size=2 * count, replace=False)
    return tuple(
        (int(picks[2 * i]), int(picks[2 * i + 1])) for i in range(count)
    )


def dishonest_bob_reorder(
    order: Sequence[int], swap_pairs: Sequence[tuple[int, int]]
) -> list[int]:
    """Announce a message order with the given index pairs transposed.

    The swaps touch message positions only; overlapping or out-of-range
    pairs are malformed and raise.
    """
    out = list(order)
    touched: set[int] = set()
    for i, j in swap_pairs:
        if i == j or not (0 <= i < len(out)) or not (0 <= j < len(out)):
            raise ValueError(f"malformed swap pair ({i}, {j})")
        if i in touched or j in touched:
            raise ValueError("swap pairs must be disjoint")
        touched.update((i, j))
        out[i], out[j] = out[j], out[i]
    return out


def dishonest_alice_early_measure(
    store: QubitStore,
    kept: Sequence[int],
    seq,
    record,
    rng: np.random.Generator,
    true_partner_key: Sequence[int],
) -> tuple[tuple[int, ...], dict]:
    """Decode the peer's key before the message order is public.

    The attacker knows which slots hold message qubits (the decoy
    coordinates were disclosed for the error check) but not their order,
    so she pairs her kept qubits against a uniformly random guess.
    Correctly guessed pairings decode exactly; wrong ones hit entanglement
    swapping and come out uncorrelated with the true bits.

    Returns the guessed key bits plus a report with the per-bit accuracy
    against the true key (known to the harness, not the attacker).
    """
    n = len(kept)
    message_slots = sorted(set(range(len(seq.slots))) - set(record.decoy_positions))
    if len(message_slots) != n:
        raise ValueError("message slot count does not match kept qubits")
    guess = rng.permutation(n)
    guessed_slots = [message_slots[int(guess[i])] for i in range(n)]
    guessed_bits = tuple(
        store.measure_bell(kept[i], seq.slots[guessed_slots[i]], rng).x_bit
        for i in range(n)
    )
    correct_pairing = [guessed_slots[i] == record.message_order[i] for i in range(n)]
    hits = [int(guessed_bits[i] == true_partner_key[i]) for i in range(n)]
    wrong = [i for i in range(n) if not correct_pairing[i]]
    report = {
        "kind": "early-measure",
        "correct_pairings": sum(correct_pairing),
        "per_bit_accuracy": sum(hits) / n,
        "wrong_pair_accuracy": (
            sum(hits[i] for i in wrong) / len(wrong) if wrong else None
        ),
    }
    return guessed_bits, report
