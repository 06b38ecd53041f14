"""Nash equilibria of n-player extensive-form games via sequence-form barrier homotopies."""

from importlib import resources

from .game_model import (CHANCE, GameFormatError, GameTree, dump_game, game_from_dict, load_game, parse_game,
                         validate_perfect_recall)
from .gamegen import GenSpec, generate, generate_type1, generate_type2
from .homotopy import LBNE, LGNE, BarrierHomotopy, HomotopyConfig, HomotopyPoint, build_homotopy, psi
from .normal_form import build_reduced_normal_form, enumerate_equilibria_small, is_nash
from .sequence_form import (SequenceFormGame, build_sequence_form, epsilon_gap, expected_payoffs,
                            mixed_to_realization, realization_to_mixed, recover_duals)
from .tracer import SolveResult, TracerParams, polish, rank_diagnostic, trace

FIXTURES = ("fig1", "fig2", "fig3")


def fixture_path(name: str):
    """Path of a bundled example game ("fig1", "fig2" or "fig3")."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return resources.files(__name__) / "data" / f"{name}.game.json"


def load_fixture(name: str) -> GameTree:
    return load_game(fixture_path(name))


__all__ = [
    "CHANCE", "FIXTURES", "LBNE", "LGNE", "BarrierHomotopy", "GameFormatError", "GameTree", "GenSpec",
    "HomotopyConfig", "HomotopyPoint", "SequenceFormGame", "SolveResult", "TracerParams",
    "build_homotopy", "build_reduced_normal_form", "build_sequence_form", "dump_game", "enumerate_equilibria_small",
    "epsilon_gap", "expected_payoffs", "fixture_path", "game_from_dict", "generate", "generate_type1",
    "generate_type2", "is_nash", "load_fixture", "load_game", "mixed_to_realization", "parse_game", "polish", "psi",
    "rank_diagnostic", "realization_to_mixed", "recover_duals", "trace", "validate_perfect_recall",
]
