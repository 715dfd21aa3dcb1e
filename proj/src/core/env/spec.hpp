#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "common/grid.hpp"

namespace edgeserve::env {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct ModelSpec {
    std::string name;
    double size_gb = 0.0;            // GPU memory footprint
    double compute_per_token = 0.0;  // GFLOPs per token; also energy units per request in the energy cap
    double context_window = 0.0;     // tokens
    double cloud_unit = 0.0;         // cloud cost per request and reasoning path
};

/// Per (agent, model) calibration. `uses` = false means the agent never
/// requests that model and the remaining fields are ignored.
struct AgentModelParams {
    bool uses = true;
    double zero_shot_accuracy = kUnset;  // alpha in (0, 1)
    double reasoning_gain = kUnset;      // beta in (0, 1)
    int paths = 1;                       // J >= 1
    double vanishing = 0.0;              // Delta >= 0
};

struct AgentSpec {
    std::string name;
    std::string dataset;       // accuracy-table dataset, may be empty
    double input_size = 0.0;   // tokens per request
    double thought_len = 1.0;  // tokens per thought
    double consensus = 1.0;    // zeta
    std::vector<AgentModelParams> per_model;
};

struct ServerSpec {
    std::string name;
    double memory_cap = 0.0;   // GB
    double energy_cap = 0.0;   // energy units per slot
    double compute_cap = 0.0;  // GFLOPs per slot
    std::vector<double> edge_tx_unit;  // cost per token, one per agent
};

struct CostCoefficients {
    double switch_unit = 0.0;
    double accuracy_weight = 1.0;
};

/// The simulated world as read from configuration. Edge servers are indexed
/// 0..N-1; the cloud is implicit and unconstrained.
struct SystemSpec {
    std::vector<ServerSpec> servers;
    std::vector<ModelSpec> models;
    std::vector<AgentSpec> agents;
    CostCoefficients coefficients;

    Shape shape() const { return Shape{servers.size(), agents.size(), models.size()}; }
};

/// A SystemSpec whose invariants have been checked. Immutable and cheap to
/// copy; instances running on different threads share the same spec.
class ValidatedSystem {
public:
    const SystemSpec& spec() const { return *spec_; }
    const SystemSpec* operator->() const { return spec_.get(); }
    Shape shape() const { return spec_->shape(); }

    const ModelSpec& model(std::size_t m) const { return spec_->models[m]; }
    const AgentSpec& agent(std::size_t i) const { return spec_->agents[i]; }
    const ServerSpec& server(std::size_t n) const { return spec_->servers[n]; }
    const AgentModelParams& params(std::size_t i, std::size_t m) const {
        return spec_->agents[i].per_model[m];
    }

private:
    friend ValidatedSystem validate_spec(SystemSpec spec);
    explicit ValidatedSystem(std::shared_ptr<const SystemSpec> s) : spec_(std::move(s)) {}
    std::shared_ptr<const SystemSpec> spec_;
};

/// Checks every invariant; throws InvalidSpec(field, reason) or
/// MissingCalibration.
ValidatedSystem validate_spec(SystemSpec spec);

}  // namespace edgeserve::env
