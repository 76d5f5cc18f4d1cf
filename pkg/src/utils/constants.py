"""
Application constants and configuration
"""

# Application Information
APP_VERSION = "1.0.0"
APP_TITLE = "InterSDN Convergence Analyzer"

# Environment variables
ENV_OUTPUT_DIR = "INTERSDN_OUTPUT_DIR"
ENV_CACHE_DIR = "INTERSDN_CACHE_DIR"
ENV_CAIDA_PATH = "INTERSDN_CAIDA_PATH"
ENV_LOG_LEVEL = "INTERSDN_LOG_LEVEL"
ENV_WORKERS = "INTERSDN_WORKERS"

# Defaults
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_CACHE_DIR = ".intersdn_cache"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_WORKERS = 1
DEFAULT_SEED = 20170101
DEFAULT_TRIALS = 500
DEFAULT_BGP_RATE = 1.0
DEFAULT_ELL_FRACTIONS = [0.1, 0.5, 1.0]
DEFAULT_PATH_SAMPLES = 100000

# Exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

# Routing modes
ROUTING_SHORTEST_PATH_DAG = "shortest_path_dag"
ROUTING_POLICY_TREE = "policy_tree"
ROUTING_FLOOD = "flood"

ROUTING_MODES = [ROUTING_SHORTEST_PATH_DAG, ROUTING_POLICY_TREE, ROUTING_FLOOD]

# Cluster selection strategies
STRATEGY_RANDOM = "random"
STRATEGY_TOP_BETWEENNESS = "top_betweenness"

STRATEGIES = [STRATEGY_RANDOM, STRATEGY_TOP_BETWEENNESS]

# Betweenness backends
BETWEENNESS_EXACT = "exact"
BETWEENNESS_PATH_SAMPLE = "path_sample"

# Largest graph on which the exact betweenness backend is used by default
EXACT_BETWEENNESS_MAX_NODES = 5000

# Relationship labels (CAIDA serial format codes)
REL_P2P = "p2p"
REL_C2P = "c2p"
CAIDA_P2P = 0
CAIDA_P2C = -1

# Route classes, ordered by preference
ROUTE_CUSTOMER = 0
ROUTE_PEER = 1
ROUTE_PROVIDER = 2
ROUTE_ORIGIN = -1
ROUTE_NONE = 3

# Numerics
PMF_TOLERANCE = 1e-12
PSDN_TAIL_TOLERANCE = 1e-12
PSDN_TRUNCATION_MIN_NODES = 20000
MGF_STEP_SCALE = 1e-6

# Random stream keys (trial streams use key 0)
STREAM_TRIAL = 0
STREAM_GRAPH = 1
STREAM_CLUSTER = 2
STREAM_LOCAL_PREFS = 3
STREAM_PATH_SAMPLE = 4

# Odds ratio used when no outside node carries centrality
OMEGA_CAP = 1e12

# Routing plans kept per simulation engine (one per announcing source)
PLAN_CACHE_SIZE = 64

# Trials per aggregation chunk; chunks merge in order whatever the worker count
TRIAL_CHUNK_SIZE = 100
