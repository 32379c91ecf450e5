# Copyright (C) 2025 Covert-Planner Contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Observation-process data models

ObsModel holds the observer's emission tables, Hmm the policy-induced hidden
Markov model over decision states s and nature states (s, a), and ObsSequence
one observed symbol sequence y = o0 o1 ... on.
"""

from dataclasses import dataclass, field

import numpy as np

from covert_planner.errors import ModelValidationError

NULL_SYMBOL = "null"


def nature_index(n_states: int, n_actions: int, state, action):
    """HMM index of nature state (s, a); broadcasts over index arrays"""
    return n_states + state * n_actions + action


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _safe_log(array: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(array)


@dataclass(frozen=True)
class ObsModel:
    """
    Observer model Obs(o|s) and Obs(o|s,a)

    Attributes:
        alphabet: symbol labels, index = symbol id
        state_emission: shape (|S|, |O|)
        action_emission: shape (|S|, |A|, |O|)
    """
    alphabet: tuple[str, ...]
    state_emission: np.ndarray
    action_emission: np.ndarray

    def __post_init__(self):
        state_emission = np.array(self.state_emission, dtype=float)
        action_emission = np.array(self.action_emission, dtype=float)
        n_symbols = len(self.alphabet)
        if state_emission.ndim != 2 or state_emission.shape[1] != n_symbols:
            raise ModelValidationError(
                f"state_emission must have shape (S, {n_symbols}), got {state_emission.shape}"
            )
        if action_emission.ndim != 3 or action_emission.shape[2] != n_symbols \
                or action_emission.shape[0] != state_emission.shape[0]:
            raise ModelValidationError(
                f"action_emission must have shape (S, A, {n_symbols}), got {action_emission.shape}"
            )
        object.__setattr__(self, "alphabet", tuple(str(o) for o in self.alphabet))
        object.__setattr__(self, "state_emission", _frozen(state_emission))
        object.__setattr__(self, "action_emission", _frozen(action_emission))

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    @property
    def n_states(self) -> int:
        return self.state_emission.shape[0]

    @property
    def n_actions(self) -> int:
        return self.action_emission.shape[1]

    @classmethod
    def with_null_actions(cls, alphabet, state_emission: np.ndarray, n_actions: int) -> "ObsModel":
        """
        Build a model whose nature states always emit the null symbol

        The null symbol is appended to the alphabet (unless already present)
        and never emitted by decision states.
        """
        alphabet = tuple(str(o) for o in alphabet)
        state_emission = np.asarray(state_emission, dtype=float)
        if NULL_SYMBOL not in alphabet:
            alphabet = alphabet + (NULL_SYMBOL,)
            state_emission = np.hstack([state_emission, np.zeros((state_emission.shape[0], 1))])
        null_index = alphabet.index(NULL_SYMBOL)
        action_emission = np.zeros((state_emission.shape[0], n_actions, len(alphabet)))
        action_emission[:, :, null_index] = 1.0
        return cls(alphabet=alphabet, state_emission=state_emission, action_emission=action_emission)


@dataclass(frozen=True)
class ObsSequence:
    """Observed symbol ids, alternating decision / nature emissions along a run"""
    symbols: np.ndarray

    def __post_init__(self):
        symbols = np.array(self.symbols, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "symbols", _frozen(symbols))

    def __len__(self) -> int:
        return int(self.symbols.shape[0])

    @property
    def key(self) -> bytes:
        """Hashable identity, used to share likelihood evaluations"""
        return self.symbols.tobytes()


@dataclass(frozen=True)
class Hmm:
    """
    Discrete HMM (P, E, initial distribution)

    Policy-induced HMMs lay out decision states first (index s) followed by
    nature states (index |S| + s*|A| + a); `n_decision` and `n_actions`
    record that layout and are 0 for free-standing HMMs.
    """
    transition: np.ndarray
    emission: np.ndarray
    initial: np.ndarray
    n_decision: int = 0
    n_actions: int = 0
    log_transition: np.ndarray = field(init=False, repr=False, compare=False)
    log_emission: np.ndarray = field(init=False, repr=False, compare=False)
    log_initial: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        transition = np.array(self.transition, dtype=float)
        emission = np.array(self.emission, dtype=float)
        initial = np.array(self.initial, dtype=float)
        n = transition.shape[0]
        if transition.shape != (n, n) or emission.shape[0] != n or initial.shape != (n,):
            raise ModelValidationError(
                f"inconsistent HMM shapes: P {transition.shape}, E {emission.shape}, "
                f"initial {initial.shape}"
            )
        for name, table in (("transition", transition), ("emission", emission)):
            sums = table.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-9)
            if bad.size or np.any(table < 0):
                raise ModelValidationError(
                    f"HMM {name} rows must be distributions (first bad row: "
                    f"{int(bad[0]) if bad.size else 'negative entry'})"
                )
        object.__setattr__(self, "transition", _frozen(transition))
        object.__setattr__(self, "emission", _frozen(emission))
        object.__setattr__(self, "initial", _frozen(initial))
        object.__setattr__(self, "log_transition", _frozen(_safe_log(transition)))
        object.__setattr__(self, "log_emission", _frozen(_safe_log(emission)))
        object.__setattr__(self, "log_initial", _frozen(_safe_log(initial)))

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.emission.shape[1]
