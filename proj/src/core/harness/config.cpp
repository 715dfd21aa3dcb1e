#include "harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "cot/tables.hpp"
#include "json.hpp"
#include "toml.hpp"

namespace edgeserve::harness {
namespace {

std::string where(const toml::node& n) {
    const auto& s = n.source();
    return " (line " + std::to_string(s.begin.line) + ", column " + std::to_string(s.begin.column) + ")";
}

[[noreturn]] void fail(const std::string& key, const std::string& what, const toml::node* n = nullptr) {
    throw Error(ErrorKind::Config, "config key '" + key + "': " + what + (n ? where(*n) : std::string()));
}

// One TOML table; remembers which keys were read so the rest can be rejected.
class Section {
public:
    Section(const toml::table* t, std::string prefix) : t_(t), prefix_(std::move(prefix)) {}

    std::string full(std::string_view key) const { return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key); }

    const toml::node* node(std::string_view key) {
        seen_.insert(std::string(key));
        return t_ ? t_->get(key) : nullptr;
    }

    void get(std::string_view key, double& out) {
        if (auto* n = node(key)) out = number(*n, full(key));
    }
    void get(std::string_view key, bool& out) {
        if (auto* n = node(key)) {
            if (!n->is_boolean()) fail(full(key), "expected a boolean", n);
            out = n->as_boolean()->get();
        }
    }
    void get(std::string_view key, std::string& out) {
        if (auto* n = node(key)) {
            if (!n->is_string()) fail(full(key), "expected a string", n);
            out = n->as_string()->get();
        }
    }
    void get(std::string_view key, std::size_t& out) {
        if (auto* n = node(key)) out = static_cast<std::size_t>(count(*n, full(key)));
    }
    void get(std::string_view key, int& out) {
        if (auto* n = node(key)) {
            if (!n->is_integer()) fail(full(key), "expected an integer", n);
            out = static_cast<int>(n->as_integer()->get());
        }
    }
    template <class T>
    void get(std::string_view key, std::vector<T>& out) {
        auto* n = node(key);
        if (!n) return;
        const toml::array* arr = n->as_array();
        if (!arr) fail(full(key), "expected an array", n);
        out.clear();
        for (const auto& e : *arr) {
            if constexpr (std::is_same_v<T, double>) {
                out.push_back(number(e, full(key)));
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!e.is_string()) fail(full(key), "expected an array of strings", &e);
                out.push_back(e.as_string()->get());
            } else {
                out.push_back(static_cast<T>(count(e, full(key))));
            }
        }
    }

    Section sub(std::string_view key) {
        auto* n = node(key);
        if (n && !n->is_table()) fail(full(key), "expected a table", n);
        return Section(n ? n->as_table() : nullptr, full(key));
    }

    const toml::array* tables(std::string_view key) {
        auto* n = node(key);
        if (!n) return nullptr;
        const toml::array* arr = n->as_array();
        if (!arr || !arr->is_array_of_tables()) fail(full(key), "expected an array of tables", n);
        return arr;
    }

    void finish() const {
        if (!t_) return;
        for (const auto& [k, v] : *t_)
            if (!seen_.count(std::string(k.str()))) fail(full(k.str()), "unknown key", &v);
    }

private:
    static double number(const toml::node& n, const std::string& key) {
        if (n.is_integer()) return static_cast<double>(n.as_integer()->get());
        if (n.is_floating_point()) return n.as_floating_point()->get();
        fail(key, "expected a number", &n);
    }
    static std::uint64_t count(const toml::node& n, const std::string& key) {
        if (!n.is_integer()) fail(key, "expected a non-negative integer", &n);
        const auto v = n.as_integer()->get();
        if (v < 0) fail(key, "expected a non-negative integer", &n);
        return static_cast<std::uint64_t>(v);
    }

    const toml::table* t_;
    std::string prefix_;
    std::set<std::string> seen_;
};

void read_system(Section s, SystemConfig& c) {
    s.get("servers", c.servers);
    s.get("gpus_per_server", c.gpus_per_server);
    s.get("gpu_memory_gb", c.gpu_memory_gb);
    s.get("gpu_compute", c.gpu_compute);
    s.get("gpu_energy", c.gpu_energy);
    s.get("edge_tx_unit", c.edge_tx_unit);
    s.get("switch_unit", c.switch_unit);
    s.get("accuracy_weight", c.accuracy_weight);
    s.get("agents", c.agents);
    s.get("input_size_min", c.input_size_min);
    s.get("input_size_max", c.input_size_max);
    s.get("thought_len", c.thought_len);
    s.get("consensus", c.consensus);
    s.get("paths", c.paths);
    s.get("vanishing", c.vanishing);
    s.get("datasets", c.datasets);
    if (const auto* arr = s.tables("models")) {
        c.models.clear();
        std::size_t k = 0;
        for (const auto& e : *arr) {
            Section m(e.as_table(), s.full("models") + "[" + std::to_string(k++) + "]");
            ModelConfig mc;
            m.get("name", mc.name);
            for (const auto& d : default_models())
                if (d.name == mc.name) mc = d;
            m.get("size_gb", mc.size_gb);
            m.get("compute_per_token", mc.compute_per_token);
            m.get("context_window", mc.context_window);
            m.get("cloud_unit", mc.cloud_unit);
            m.get("alpha", mc.alpha);
            m.get("beta", mc.beta);
            m.finish();
            c.models.push_back(mc);
        }
    }
    s.finish();
}

void read_demand(Section s, env::DemandModel& d) {
    s.get("zipf_s", d.zipf_s);
    s.get("popularity_seed", d.popularity_seed);
    if (auto* n = s.node("mean_volume")) {
        if (n->is_array()) {
            d.mean_volume.clear();
            for (const auto& e : *n->as_array()) {
                if (e.is_integer()) d.mean_volume.push_back(static_cast<double>(e.as_integer()->get()));
                else if (e.is_floating_point()) d.mean_volume.push_back(e.as_floating_point()->get());
                else fail(s.full("mean_volume"), "expected numbers", &e);
            }
        } else if (n->is_integer() || n->is_floating_point()) {
            d.mean_volume = {n->value<double>().value()};
        } else {
            fail(s.full("mean_volume"), "expected a number or an array of numbers", n);
        }
    }
    s.finish();
}

void read_train(Section s, learn::TrainConfig& t) {
    s.get("epochs", t.epochs);
    s.get("steps_per_epoch", t.steps_per_epoch);
    s.get("lr", t.adam.lr);
    s.get("grad_norm_cap", t.adam.grad_norm_cap);
    s.get("gamma", t.gamma);
    s.get("gae_lambda", t.gae_lambda);
    s.get("clip", t.ppo.clip);
    s.get("value_coef", t.ppo.value_coef);
    s.get("entropy_coef", t.ppo.entropy_coef);
    s.get("minibatch", t.ppo.minibatch);
    s.get("update_passes", t.ppo.passes);
    s.get("normalize_advantages", t.ppo.normalize_advantages);
    s.get("hidden", t.net.hidden);
    s.get("ttt_hidden", t.net.ttt_hidden);
    s.get("ttt_heads", t.net.heads);
    s.get("ttt_minibatch", t.net.ttt_minibatch);
    s.get("eta_inner", t.net.eta_inner);
    s.get("keep_prob", t.net.keep_prob);
    s.get("init_log_std", t.net.init_log_std);
    s.get("reward_scale", t.reward_scale);
    s.get("anneal_lr", t.anneal_lr);
    s.get("adapt", t.adapt);
    s.finish();
}

void read_auction(Section s, AuctionSection& a) {
    s.get("p_max", a.clock.p_max);
    s.get("p_min", a.clock.p_min);
    s.get("step", a.clock.step);
    s.get("schedule", a.clock.schedule);
    s.get("clear_weight", a.clock.clear_weight);
    s.get("pause", a.clock.pause);
    s.get("sizes", a.sizes);
    s.get("seeds", a.seeds);
    s.finish();
}

void read_sweep(Section s, SweepSection& w) {
    s.get("agents", w.agents);
    s.get("gpus", w.gpus);
    s.get("paths", w.paths);
    s.get("vanishing", w.vanishing);
    s.get("policies", w.policies);
    s.get("train_epochs", w.train_epochs);
    s.get("episodes", w.episodes);
    s.finish();
}

}  // namespace

std::vector<ModelConfig> default_models() {
    // 8-bit weights: one GB per billion parameters; two GFLOPs per parameter and token.
    return {
        ModelConfig{"LaMDA-137B", 137.0, 274.0, 2048.0, 0.0075, env::kUnset, env::kUnset},
        ModelConfig{"PaLM-540B", 540.0, 1080.0, 2048.0, 0.0075, env::kUnset, env::kUnset},
    };
}

env::ValidatedSystem build_system(const SystemConfig& c) {
    if (c.servers == 0) throw InvalidSpec("system.servers", "at least one edge server is required");
    if (c.gpus_per_server == 0) throw InvalidSpec("system.gpus_per_server", "must be >= 1");
    if (c.agents == 0) throw InvalidSpec("system.agents", "at least one agent is required");
    if (!(c.input_size_max >= c.input_size_min)) throw InvalidSpec("system.input_size_max", "must be >= input_size_min");

    env::SystemSpec spec;
    const double g = static_cast<double>(c.gpus_per_server);
    for (std::size_t n = 0; n < c.servers; ++n)
        spec.servers.push_back(env::ServerSpec{"es" + std::to_string(n), c.gpu_memory_gb * g, c.gpu_energy * g,
                                               c.gpu_compute * g, {c.edge_tx_unit}});
    const auto models = c.models.empty() ? default_models() : c.models;
    for (const auto& m : models)
        spec.models.push_back(env::ModelSpec{m.name, m.size_gb, m.compute_per_token, m.context_window, m.cloud_unit});

    std::vector<std::string> datasets = c.datasets;
    if (datasets.empty())
        for (auto d : cot::kDatasets) datasets.emplace_back(d);
    for (const auto& d : datasets)
        if (!cot::is_dataset(d)) throw InvalidSpec("system.datasets", "unknown dataset '" + d + "'");

    for (std::size_t i = 0; i < c.agents; ++i) {
        env::AgentSpec a;
        a.name = "agent" + std::to_string(i);
        a.dataset = datasets[i % datasets.size()];
        a.input_size = c.agents == 1 ? c.input_size_min
                                     : c.input_size_min + (c.input_size_max - c.input_size_min) *
                                                              static_cast<double>(i) / static_cast<double>(c.agents - 1);
        a.thought_len = c.thought_len;
        a.consensus = c.consensus;
        for (const auto& m : models) {
            env::AgentModelParams p;
            p.paths = c.paths;
            p.vanishing = c.vanishing;
            if (!std::isnan(m.alpha) || !std::isnan(m.beta)) {
                p.zero_shot_accuracy = m.alpha;
                p.reasoning_gain = m.beta;
            } else if (cot::is_table_model(m.name)) {
                const auto cal = cot::derive_calibration(m.name, a.dataset);
                p.zero_shot_accuracy = cal.alpha;
                p.reasoning_gain = cal.beta;
            }
            a.per_model.push_back(p);
        }
        spec.agents.push_back(std::move(a));
    }
    spec.coefficients.switch_unit = c.switch_unit;
    spec.coefficients.accuracy_weight = c.accuracy_weight;
    if (!(c.switch_unit >= 0.0)) throw InvalidSpec("system.switch_unit", "must be >= 0");
    if (!(c.accuracy_weight >= 0.0)) throw InvalidSpec("system.accuracy_weight", "must be >= 0");
    return env::validate_spec(std::move(spec));
}

env::DemandModel shifted_demand(const ExperimentConfig& cfg) {
    env::DemandModel d = cfg.demand;
    d.popularity_seed = cfg.shift.popularity_seed;
    d.zipf_s = cfg.shift.zipf_s;
    for (double& v : d.mean_volume) v *= cfg.shift.volume_scale;
    return d;
}

void validate(const ExperimentConfig& cfg) {
    build_system(cfg.system);
    if (cfg.horizon == 0) throw Error(ErrorKind::Config, "config key 'horizon': must be >= 1");
    if (cfg.policy != "t2drl" && cfg.policy != "ppo")
        throw Error(ErrorKind::Config, "config key 'policy': expected t2drl or ppo, got '" + cfg.policy + "'");
    if (cfg.demand.mean_volume.empty())
        throw Error(ErrorKind::Config, "config key 'demand.mean_volume': must not be empty");
    if (cfg.demand.mean_volume.size() != 1 && cfg.demand.mean_volume.size() != cfg.system.servers)
        throw Error(ErrorKind::Config, "config key 'demand.mean_volume': needs one entry or one per server");
    for (double v : cfg.demand.mean_volume)
        if (!(v >= 0.0)) throw Error(ErrorKind::Config, "config key 'demand.mean_volume': must be >= 0");
    if (!(cfg.demand.zipf_s >= 0.0)) throw Error(ErrorKind::Config, "config key 'demand.zipf_s': must be >= 0");
    if (!(cfg.shift.volume_scale >= 0.0)) throw Error(ErrorKind::Config, "config key 'shift.volume_scale': must be >= 0");

    const auto& t = cfg.train;
    auto need = [](bool ok, const char* key, const char* what) {
        if (!ok) throw Error(ErrorKind::Config, std::string("config key '") + key + "': " + what);
    };
    need(t.steps_per_epoch > 0, "train.steps_per_epoch", "must be >= 1");
    need(t.adam.lr > 0.0, "train.lr", "must be > 0");
    need(t.gamma > 0.0 && t.gamma <= 1.0, "train.gamma", "must lie in (0, 1]");
    need(t.gae_lambda >= 0.0 && t.gae_lambda <= 1.0, "train.gae_lambda", "must lie in [0, 1]");
    need(t.ppo.clip > 0.0, "train.clip", "must be > 0");
    need(t.ppo.minibatch > 0, "train.minibatch", "must be >= 1");
    need(t.ppo.passes > 0, "train.update_passes", "must be >= 1");
    need(t.net.hidden > 0, "train.hidden", "must be >= 1");
    need(t.net.heads > 0 && t.net.ttt_hidden % t.net.heads == 0, "train.ttt_heads", "must divide ttt_hidden");
    need(t.net.ttt_minibatch > 0, "train.ttt_minibatch", "must be >= 1");
    need(t.net.eta_inner >= 0.0, "train.eta_inner", "must be >= 0");
    need(t.net.keep_prob > 0.0 && t.net.keep_prob <= 1.0, "train.keep_prob", "must lie in (0, 1]");
    need(t.reward_scale > 0.0, "train.reward_scale", "must be > 0");
    need(t.adapt || cfg.policy == "ppo", "train.adapt",
         "test-time adaptation cannot be disabled for training: the inner loop is part of the forward pass");
    need(cfg.eval.episodes > 0, "eval.episodes", "must be >= 1");

    auction::validate(cfg.auction.clock);
    need(!cfg.auction.sizes.empty(), "auction.sizes", "must not be empty");
    need(cfg.auction.seeds > 0, "auction.seeds", "must be >= 1");
    for (auto n : cfg.auction.sizes) need(n > 0, "auction.sizes", "sizes must be >= 1");

    const auto& w = cfg.sweep;
    need(!w.agents.empty() && !w.gpus.empty() && !w.paths.empty() && !w.vanishing.empty(), "sweep",
         "sweep axes must not be empty");
    need(!w.policies.empty(), "sweep.policies", "must not be empty");
    for (auto g : w.gpus)
        need(g > 0 && g % cfg.system.servers == 0, "sweep.gpus", "GPU totals must split evenly over the servers");
    for (auto a : w.agents) need(a > 0, "sweep.agents", "must be >= 1");
    for (int j : w.paths) need(j >= 1, "sweep.paths", "must be >= 1");
    for (double v : w.vanishing) need(v >= 0.0, "sweep.vanishing", "must be >= 0");
    need(w.episodes > 0, "sweep.episodes", "must be >= 1");
    for (const auto& p : w.policies)
        need(p == "fifo" || p == "lfu" || p == "laot" || p == "cloud" || p == "t2drl" || p == "ppo", "sweep.policies",
             "unknown policy name");
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
    toml::table doc;
    try {
        doc = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        const auto& b = e.source().begin;
        throw Error(ErrorKind::Parse, std::string(source) + ":" + std::to_string(b.line) + ":" +
                                          std::to_string(b.column) + ": " + std::string(e.description()));
    }

    ExperimentConfig cfg;
    Section root(&doc, "");
    root.get("seed", cfg.seed);
    root.get("horizon", cfg.horizon);
    root.get("policy", cfg.policy);
    read_system(root.sub("system"), cfg.system);
    read_demand(root.sub("demand"), cfg.demand);
    read_train(root.sub("train"), cfg.train);
    {
        Section s = root.sub("eval");
        s.get("episodes", cfg.eval.episodes);
        s.get("adapt", cfg.eval.adapt);
        s.get("shifted", cfg.eval.shifted);
        s.finish();
    }
    {
        Section s = root.sub("shift");
        s.get("popularity_seed", cfg.shift.popularity_seed);
        s.get("volume_scale", cfg.shift.volume_scale);
        s.get("zipf_s", cfg.shift.zipf_s);
        s.finish();
    }
    read_auction(root.sub("auction"), cfg.auction);
    read_sweep(root.sub("sweep"), cfg.sweep);
    root.finish();

    cfg.train.seed = cfg.seed;
    cfg.train.net.use_ttt = cfg.policy != "ppo";
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

std::string canonical_json(const ExperimentConfig& c) {
    using nlohmann::ordered_json;
    ordered_json models = ordered_json::array();
    for (const auto& m : c.system.models.empty() ? default_models() : c.system.models)
        models.push_back({{"name", m.name},
                          {"size_gb", m.size_gb},
                          {"compute_per_token", m.compute_per_token},
                          {"context_window", m.context_window},
                          {"cloud_unit", m.cloud_unit},
                          {"alpha", std::isnan(m.alpha) ? ordered_json() : ordered_json(m.alpha)},
                          {"beta", std::isnan(m.beta) ? ordered_json() : ordered_json(m.beta)}});
    const auto& s = c.system;
    const auto& t = c.train;
    ordered_json j = {
        {"seed", c.seed},
        {"horizon", c.horizon},
        {"policy", c.policy},
        {"system",
         {{"servers", s.servers},
          {"gpus_per_server", s.gpus_per_server},
          {"gpu_memory_gb", s.gpu_memory_gb},
          {"gpu_compute", s.gpu_compute},
          {"gpu_energy", s.gpu_energy},
          {"edge_tx_unit", s.edge_tx_unit},
          {"switch_unit", s.switch_unit},
          {"accuracy_weight", s.accuracy_weight},
          {"agents", s.agents},
          {"input_size_min", s.input_size_min},
          {"input_size_max", s.input_size_max},
          {"thought_len", s.thought_len},
          {"consensus", s.consensus},
          {"paths", s.paths},
          {"vanishing", s.vanishing},
          {"datasets", s.datasets},
          {"models", models}}},
        {"demand",
         {{"zipf_s", c.demand.zipf_s},
          {"mean_volume", c.demand.mean_volume},
          {"popularity_seed", c.demand.popularity_seed}}},
        {"train",
         {{"epochs", t.epochs},
          {"steps_per_epoch", t.steps_per_epoch},
          {"lr", t.adam.lr},
          {"grad_norm_cap", t.adam.grad_norm_cap},
          {"gamma", t.gamma},
          {"gae_lambda", t.gae_lambda},
          {"clip", t.ppo.clip},
          {"value_coef", t.ppo.value_coef},
          {"entropy_coef", t.ppo.entropy_coef},
          {"minibatch", t.ppo.minibatch},
          {"update_passes", t.ppo.passes},
          {"normalize_advantages", t.ppo.normalize_advantages},
          {"hidden", t.net.hidden},
          {"ttt_hidden", t.net.ttt_hidden},
          {"ttt_heads", t.net.heads},
          {"ttt_minibatch", t.net.ttt_minibatch},
          {"eta_inner", t.net.eta_inner},
          {"keep_prob", t.net.keep_prob},
          {"init_log_std", t.net.init_log_std},
          {"reward_scale", t.reward_scale},
          {"anneal_lr", t.anneal_lr},
          {"adapt", t.adapt}}},
        {"eval", {{"episodes", c.eval.episodes}, {"adapt", c.eval.adapt}, {"shifted", c.eval.shifted}}},
        {"shift",
         {{"popularity_seed", c.shift.popularity_seed},
          {"volume_scale", c.shift.volume_scale},
          {"zipf_s", c.shift.zipf_s}}},
        {"auction",
         {{"p_max", c.auction.clock.p_max},
          {"p_min", c.auction.clock.p_min},
          {"step", c.auction.clock.step},
          {"schedule", c.auction.clock.schedule},
          {"clear_weight", c.auction.clock.clear_weight},
          {"pause", c.auction.clock.pause},
          {"sizes", c.auction.sizes},
          {"seeds", c.auction.seeds}}},
        {"sweep",
         {{"agents", c.sweep.agents},
          {"gpus", c.sweep.gpus},
          {"paths", c.sweep.paths},
          {"vanishing", c.sweep.vanishing},
          {"policies", c.sweep.policies},
          {"train_epochs", c.sweep.train_epochs},
          {"episodes", c.sweep.episodes}}},
    };
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(canonical_json(cfg)); }

}  // namespace edgeserve::harness
