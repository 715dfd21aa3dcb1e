#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harness/config.hpp"
#include "learn/serving_env.hpp"
#include "learn/trainer.hpp"
#include "policy/baselines.hpp"

namespace edgeserve::harness {

enum class Command { Train, Evaluate, Baselines, Sweep, Auction, Bounds, Gradcheck };

std::optional<Command> parse_command(std::string_view name);
std::string_view command_name(Command c);

/// Command-line overrides. Unset fields fall back to the config.
struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::optional<std::string> policy;
    std::optional<bool> adapt;
    std::string checkpoint;
    std::optional<std::string> mechanism;
    std::optional<std::size_t> market_size;
    std::optional<std::size_t> seeds;
    bool quiet = false;
};

learn::ServingEnv make_env(const ExperimentConfig& cfg, bool shifted = false);

/// Training settings for "t2drl" (with the inner loop) or "ppo" (without).
learn::TrainConfig learner_config(const ExperimentConfig& cfg, std::string_view policy);

/// Rolls out a baseline on the evaluation seeds shared with the learners.
learn::EvalMetrics run_baseline(policy::PolicyKind kind, learn::ServingEnv& env, std::size_t episodes,
                                std::uint64_t seed, const learn::StepObserver& observer = {});

/// Runs one CLI command, writing CSV / JSONL outputs and manifest.json into
/// opts.out_dir. On failure the manifest records the error and the
/// exception is rethrown.
void run_command(Command c, const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace edgeserve::harness
