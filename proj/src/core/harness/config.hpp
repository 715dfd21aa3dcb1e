#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "auction/auction.hpp"
#include "env/demand.hpp"
#include "env/spec.hpp"
#include "learn/trainer.hpp"

namespace edgeserve::harness {

struct ModelConfig {
    std::string name;
    double size_gb = 0.0;
    double compute_per_token = 0.0;
    double context_window = 0.0;
    double cloud_unit = 0.0075;
    // Calibration for models without an accuracy-table row; NaN = from the tables.
    double alpha = env::kUnset;
    double beta = env::kUnset;
};

/// World description in the units of the experimental setup. Servers hold
/// `gpus_per_server` identical GPUs; the per-GPU caps are summed.
struct SystemConfig {
    std::size_t servers = 4;
    std::size_t gpus_per_server = 10;
    double gpu_memory_gb = 80.0;
    double gpu_compute = 312000.0;
    double gpu_energy = 300.0;
    double edge_tx_unit = 0.0001;
    double switch_unit = 1e-5;
    double accuracy_weight = 2.5;

    std::size_t agents = 10;
    double input_size_min = 100.0;  // agent input sizes spread evenly over [min, max]
    double input_size_max = 200.0;
    double thought_len = 20.0;
    double consensus = 1.0;
    int paths = 10;
    double vanishing = 1.0;
    std::vector<std::string> datasets;  // cycled over agents; empty = every table dataset
    std::vector<ModelConfig> models;    // empty = the two table models
};

struct ShiftConfig {
    std::uint64_t popularity_seed = 7;
    double volume_scale = 1.5;
    double zipf_s = 1.0;
};

struct EvalSection {
    std::size_t episodes = 10;
    bool adapt = true;
    bool shifted = false;  // evaluate on the demand-shifted environment
};

struct AuctionSection {
    auction::ClockConfig clock;
    std::vector<std::size_t> sizes = {20, 40, 60, 80, 100};
    std::size_t seeds = 100;
};

struct SweepSection {
    std::vector<std::size_t> agents = {10, 15, 20, 25};
    std::vector<std::size_t> gpus = {40, 80, 120, 160};  // total over all servers
    std::vector<int> paths = {5, 10, 15, 20};
    std::vector<double> vanishing = {1.0, 2.0, 3.0, 4.0};
    std::vector<std::string> policies = {"fifo", "lfu", "laot", "cloud", "t2drl", "ppo"};
    std::size_t train_epochs = 20;  // learner budget per sweep point
    std::size_t episodes = 5;
};

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::size_t horizon = 100;
    std::string policy = "t2drl";
    SystemConfig system;
    env::DemandModel demand{1.0, {10.0}, 0};
    learn::TrainConfig train;
    EvalSection eval;
    ShiftConfig shift;
    AuctionSection auction;
    SweepSection sweep;
};

/// The two table models with their default footprints.
std::vector<ModelConfig> default_models();

/// Expands the setup-level description into a validated system.
env::ValidatedSystem build_system(const SystemConfig& sys);

/// Demand of the shifted test environment: re-ranked popularity and scaled volume.
env::DemandModel shifted_demand(const ExperimentConfig& cfg);

/// Parses TOML text. Unknown keys and wrong types are Config errors naming
/// the key; syntax errors are Parse errors with line and column. The result
/// is validated (system spec, train and auction settings).
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<string>");
ExperimentConfig load_config(const std::string& path);

/// Checks cross-field invariants; called by parse_config.
void validate(const ExperimentConfig& cfg);

/// Canonical JSON text of every setting; stable across runs.
std::string canonical_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace edgeserve::harness
