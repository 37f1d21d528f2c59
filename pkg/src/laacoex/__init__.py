"""Learning-based coexistence of LAA-LTE and WiFi in an unlicensed band."""

from .allocator import (
    AllocatorConfig,
    AllocatorState,
    init_allocator,
    q_update,
    refresh_sets,
    run_session,
    select_beta,
)
from .dna import SLConfig, is_pure_ne, lri_update, run_dna, sample_action
from .model import (
    Aggregates,
    CoexistenceGame,
    Network,
    ProtocolConfig,
    TrafficProfile,
    aggregates,
    constraints_satisfied,
    laa_throughput,
    pure_wifi_throughput,
    utility,
    wifi_channel_periods,
    wifi_throughput,
)
from .oracle import beta_max, beta_optimum_for_partition, exhaustive_optimum, feasibility
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"
