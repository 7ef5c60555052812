import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for reference_evm

from yulgamecheck.abi import parse_abi
from yulgamecheck.engine import GameEngine
from yulgamecheck.params import Params
from yulgamecheck.preprocess import inject_hooks, link_libraries, strip_checked_arithmetic
from yulgamecheck.state import KeccakOracle
from yulgamecheck.syntax import parse_object

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def load_fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


def build_engine(
    yul_name: str,
    abi_name: str,
    params: Params,
    print_sink=None,
    legacy: bool = False,
) -> GameEngine:
    """The CLI pipeline in one call, for in-process tests."""
    root = parse_object(load_fixture(yul_name))
    root = inject_hooks(root)
    if legacy or params.legacy_mode:
        root = strip_checked_arithmetic(root)
    root, plan = link_libraries(root)
    explore_abi = parse_abi(load_fixture(abi_name))
    if params.only:
        explore_abi.restrict(list(params.only))
    oracle = KeccakOracle(params.seed) if params.seed is not None else KeccakOracle()
    return GameEngine(root, params, explore_abi, plan, oracle=oracle, print_sink=print_sink)


def bank_params(**overrides) -> Params:
    """Table-1 defaults with deploy value 0, as the paper's experiments use."""
    overrides.setdefault("deploy_value", 0)
    return Params(**overrides)
