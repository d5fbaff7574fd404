"""Tests for interpretation maps and conjugate priors."""

from fractions import Fraction as F

import pytest

from markov_machines.core.dist import Dist
from markov_machines.core.finset import FinSet
from markov_machines.core.kernel import Kernel, identity
from markov_machines.errors import MarkovMachinesError
from markov_machines.filtering.adjunction import (
    ReachableBeliefs,
    belief_submachine,
    inclusion,
    reachable_beliefs,
)
from markov_machines.filtering.interpretation import (
    check_interpretation,
    conjugate_check,
    interpretation_sides,
)
from markov_machines.machines.machine import CombMachine, MealyMachine, UnifilarMachine

THETAS = FinSet.of("Θ", [F(1, 4), F(1, 2), F(3, 4)])
COIN = FinSet.of("X", [0, 1])


def coin_model() -> Kernel:
    """Lands 1 with probability θ."""
    return Kernel.from_function(THETAS, COIN, lambda theta: {1: theta, 0: 1 - theta})


def counting_family(n: int) -> tuple[Kernel, Kernel]:
    """Beliefs indexed by (ones, zeros) counts up to ``n`` draws, and the count update."""
    counts = FinSet.of("N", [(h, t) for h in range(n + 1) for t in range(n + 1 - h)])
    psi = Kernel.from_rows(
        counts,
        THETAS,
        {
            (h, t): Dist.normalized(THETAS, {theta: theta**h * (1 - theta) ** t for theta in THETAS})
            for h, t in counts
        },
    )
    open_counts = FinSet.of("N0", [(h, t) for h, t in counts if h + t < n])
    update = Kernel.deterministic(
        FinSet.product(COIN, open_counts),
        counts,
        lambda x_s: (x_s[1][0] + 1, x_s[1][1]) if x_s[0] == 1 else (x_s[1][0], x_s[1][1] + 1),
    )
    return psi, update


class TestInterpretation:
    def test_identity_on_persistent_state(self, persist_state: CombMachine) -> None:
        """A unifilar model interprets itself through the identity."""
        m = UnifilarMachine.from_machine(persist_state)
        assert check_interpretation(identity(persist_state.states), m, persist_state)

    def test_swap_is_rejected(self, persist_state: CombMachine) -> None:
        """Swapping the states breaks the readout."""
        states = persist_state.states
        swap = Kernel.deterministic(states, states, {"a": "b", "b": "a"}.__getitem__)
        m = UnifilarMachine.from_machine(persist_state)
        assert not check_interpretation(swap, m, persist_state)

    def test_reachable_beliefs(self, alternating: CombMachine) -> None:
        """The closed belief submachine interprets the model through the inclusion."""
        result = reachable_beliefs(alternating, [Dist.uniform(alternating.states)])
        assert isinstance(result, ReachableBeliefs)
        sub = belief_submachine(alternating, result.beliefs)
        psi = inclusion(result.beliefs, alternating.states)
        assert check_interpretation(psi, sub, alternating)

    def test_sides_agree(self, persist_state: CombMachine) -> None:
        """Both sides of the equation coincide on a valid interpretation."""
        m = UnifilarMachine.from_machine(persist_state)
        left, right, witness = interpretation_sides(identity(persist_state.states), m, persist_state)
        assert left == right
        assert witness.row(((), "a"))(0) == F(3, 4)

    def test_mealy_wiring(self, echo: MealyMachine) -> None:
        """Input-dependent readouts need the Mealy flag."""
        m = UnifilarMachine.from_machine(echo)
        with pytest.raises(MarkovMachinesError):
            check_interpretation(identity(echo.states), m, echo)
        assert check_interpretation(identity(echo.states), m, echo, mealy=True)


class TestConjugate:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_counting_family(self, n: int) -> None:
        """Counts of ones and zeros are a conjugate family for a coin."""
        psi, update = counting_family(n)
        assert conjugate_check(psi, coin_model(), update)

    def test_stale_update_fails(self) -> None:
        """Ignoring the data is not a Bayesian update."""
        psi, update = counting_family(2)
        stale = Kernel.deterministic(update.source, update.target, lambda x_s: x_s[1])
        assert not conjugate_check(psi, coin_model(), stale)
