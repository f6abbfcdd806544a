"""tfm - collusion analysis of transaction fee mechanisms."""

__version__ = "0.1.0"

from .config import Config, ConfigManager, get_config, init_config
from .contracts import MinerModel, SideContract, Witness, verify_witness
from .mechanism import Mechanism, Outcome, Setting
from .reduction import reduce_to_2sc
from .search import SearchLimits, find_c_sc, is_c_scp_on_grid
from .zoo import ZOO, build_mechanism

__all__ = [
    "Config",
    "ConfigManager",
    "get_config",
    "init_config",
    "MinerModel",
    "SideContract",
    "Witness",
    "verify_witness",
    "Mechanism",
    "Outcome",
    "Setting",
    "reduce_to_2sc",
    "SearchLimits",
    "find_c_sc",
    "is_c_scp_on_grid",
    "ZOO",
    "build_mechanism",
]
