#include "env/spec.hpp"

#include <cmath>

#include "common/error.hpp"

namespace edgeserve::env {
namespace {

void require_positive(double v, const std::string& field) {
    if (!std::isfinite(v) || v <= 0.0) throw InvalidSpec(field, "must be finite and > 0");
}

void require_non_negative(double v, const std::string& field) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidSpec(field, "must be finite and >= 0");
}

}  // namespace

ValidatedSystem validate_spec(SystemSpec spec) {
    if (spec.servers.empty()) throw InvalidSpec("servers", "at least one edge server is required");
    if (spec.models.empty()) throw InvalidSpec("models", "at least one model is required");
    if (spec.agents.empty()) throw InvalidSpec("agents", "at least one agent is required");

    for (const auto& m : spec.models) {
        require_positive(m.size_gb, "size_gb");
        require_positive(m.compute_per_token, "compute_per_token");
        require_positive(m.context_window, "context_window");
        require_non_negative(m.cloud_unit, "cloud_unit");
    }

    for (auto& s : spec.servers) {
        require_positive(s.memory_cap, "memory_cap");
        require_positive(s.energy_cap, "energy_cap");
        require_positive(s.compute_cap, "compute_cap");
        if (s.edge_tx_unit.size() == 1 && spec.agents.size() > 1)
            s.edge_tx_unit.assign(spec.agents.size(), s.edge_tx_unit.front());
        if (s.edge_tx_unit.size() != spec.agents.size())
            throw InvalidSpec("edge_tx_unit", "needs one entry per agent");
        for (double l : s.edge_tx_unit) require_non_negative(l, "edge_tx_unit");
    }

    for (const auto& a : spec.agents) {
        require_positive(a.input_size, "input_size");
        if (!std::isfinite(a.thought_len) || a.thought_len < 1.0)
            throw InvalidSpec("thought_len", "must be >= 1");
        require_positive(a.consensus, "consensus");
        if (a.per_model.size() != spec.models.size())
            throw InvalidSpec("per_model", "agent '" + a.name + "' needs one entry per model");
        for (std::size_t m = 0; m < a.per_model.size(); ++m) {
            const auto& p = a.per_model[m];
            if (!p.uses) continue;
            if (std::isnan(p.zero_shot_accuracy) || std::isnan(p.reasoning_gain))
                throw MissingCalibration("agent '" + a.name + "' has no accuracy calibration for model '" +
                                         spec.models[m].name + "'");
            if (!(p.zero_shot_accuracy > 0.0 && p.zero_shot_accuracy < 1.0))
                throw InvalidSpec("zero_shot_accuracy", "must lie in (0, 1)");
            if (!(p.reasoning_gain > 0.0 && p.reasoning_gain < 1.0))
                throw InvalidSpec("reasoning_gain", "must lie in (0, 1) so that log(1/beta) > 0");
            if (p.paths < 1) throw InvalidSpec("paths", "must be >= 1");
            require_non_negative(p.vanishing, "vanishing");
        }
    }

    require_non_negative(spec.coefficients.switch_unit, "switch_unit");
    require_non_negative(spec.coefficients.accuracy_weight, "accuracy_weight");

    return ValidatedSystem(std::make_shared<const SystemSpec>(std::move(spec)));
}

}  // namespace edgeserve::env
