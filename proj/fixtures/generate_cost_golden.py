"""Golden slot for the cost model, computed by hand-written straight-line arithmetic.

One server, two agents, two models. Cell order is (agent, model) row-major.
"""
import json
import math
from pathlib import Path

system = {
    "servers": [{"memory_cap": 1000.0, "energy_cap": 1000.0, "compute_cap": 312000.0,
                 "edge_tx_unit": [0.0001, 0.0002]}],
    "models": [
        {"name": "m0", "size_gb": 40.0, "compute_per_token": 2.0, "context_window": 100000.0, "cloud_unit": 0.0075},
        {"name": "m1", "size_gb": 50.0, "compute_per_token": 3.0, "context_window": 100000.0, "cloud_unit": 0.01},
    ],
    "agents": [
        {"input_size": 150.0, "thought_len": 10.0, "consensus": 1.0, "per_model": [
            {"alpha": 0.56, "beta": 0.9, "paths": 2, "vanishing": 5.0},
            {"alpha": 0.6, "beta": 0.8, "paths": 1, "vanishing": 0.0}]},
        {"input_size": 100.0, "thought_len": 20.0, "consensus": 0.5, "per_model": [
            {"alpha": 0.7, "beta": 0.85, "paths": 3, "vanishing": 2.0},
            {"alpha": 0.5, "beta": 0.9, "paths": 1, "vanishing": 0.0}]},
    ],
    "switch_unit": 1e-5,
    "accuracy_weight": 2.5,
}
prev_cache = [1, 0, 0, 1]
tokens = [100.0, 0.0, 0.0, 0.0]
aot = [20.0, 0.0, 0.0, 0.0]
cache = [1, 1, 0, 0]
offload = [0.25, 0.0, 1.0, 1.0]
requests = [4, 2, 3, 0]

# Cell (0,0): 0.75 * 4 requests * 10 tokens per path, 2 paths.
per_path_00 = 0.75 * 4 * 10.0
delta_00 = per_path_00 * 2
aot_00 = max(20.0 + 1.0 * delta_00 - 5.0, 0.0)
# Cell (0,1): 2 requests * 10 tokens, 1 path.
per_path_01 = 1.0 * 2 * 10.0
delta_01 = per_path_01
aot_01 = delta_01

switching = 1e-5 * 1  # only (0,1) loads
transmission = 4 * 0.0001 * 150.0 * 0.75 + 2 * 0.0001 * 150.0 * 1.0
computation = 2 * per_path_00 * 2.0 / 312000.0 + per_path_01 * 3.0 / 312000.0
accuracy = 2.5 * ((1 - 0.56) / (aot_00 * math.log(1 / 0.9)) * 4 * 0.75
                  + (1 - 0.6) / (aot_01 * math.log(1 / 0.8)) * 2 * 1.0)
cloud = 2 * 0.0075 * 0.25 * 4 + 3 * 0.0075 * 1.0 * 3
total = switching + transmission + computation + accuracy + cloud

golden = {
    "system": system,
    "prev_cache": prev_cache, "tokens": tokens, "aot": aot,
    "action": {"cache": cache, "offload": offload},
    "requests": requests,
    "expected_next": {"tokens": [100.0 + delta_00, delta_01, 0.0, 0.0], "aot": [aot_00, aot_01, 0.0, 0.0]},
    "expected": {"switching": switching, "transmission": transmission, "computation": computation,
                 "accuracy": accuracy, "cloud": cloud, "total": total},
}
Path(__file__).with_name("cost_golden.json").write_text(json.dumps(golden, indent=1) + "\n")
