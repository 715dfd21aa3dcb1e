#include "harness/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>

#include "auction/auction.hpp"
#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"
#include "cost/cost_model.hpp"
#include "cot/tables.hpp"
#include "cot/world.hpp"
#include "harness/io.hpp"
#include "learn/checkpoint.hpp"
#include "learn/gradcheck.hpp"

namespace edgeserve::harness {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<std::string_view, Command>, 7> kCommands = {{
    {"train", Command::Train},
    {"evaluate", Command::Evaluate},
    {"baselines", Command::Baselines},
    {"sweep", Command::Sweep},
    {"auction", Command::Auction},
    {"bounds", Command::Bounds},
    {"gradcheck", Command::Gradcheck},
}};

const Row kSummaryHeader = {"policy",   "episodes", "slots",     "mean_cost",     "switching",
                            "transmission", "computation", "accuracy", "cloud", "evictions",
                            "violations", "edge_accuracy", "table_accuracy"};

Row summary_row(const std::string& name, const learn::EvalMetrics& m) {
    return {name,
            fmt(static_cast<std::uint64_t>(m.episodes)),
            fmt(static_cast<std::uint64_t>(m.slots)),
            fmt(m.mean_cost),
            fmt(m.parts.switching),
            fmt(m.parts.transmission),
            fmt(m.parts.computation),
            fmt(m.parts.accuracy),
            fmt(m.parts.cloud),
            fmt(static_cast<std::uint64_t>(m.evictions)),
            fmt(static_cast<std::uint64_t>(m.violations)),
            fmt(m.edge_accuracy),
            fmt(m.table_accuracy)};
}

ordered_json step_record(const std::string& policy, std::size_t episode, std::size_t slot,
                         const learn::StepResult& r) {
    return {{"policy", policy},
            {"episode", episode},
            {"slot", slot},
            {"cost", to_json(r.cost)},
            {"evictions", r.evictions},
            {"violations", r.violations}};
}

fs::path data_file(const std::string& rel) {
    if (const char* dir = std::getenv("EDGESERVE_DATA_DIR")) return fs::path(dir) / rel;
    return fs::path(EDGESERVE_SOURCE_DIR) / rel;
}

void progress(const RunOptions& opts, const std::string& line) {
    if (!opts.quiet) std::cerr << line << '\n';
}

// One policy evaluated on the shared evaluation seeds, with its per-step records buffered.
struct PolicyRun {
    std::string name;
    learn::EvalMetrics metrics;
    std::vector<std::string> records;
};

PolicyRun run_named_baseline(const std::string& name, learn::ServingEnv env, std::size_t episodes,
                             std::uint64_t seed) {
    PolicyRun out{name, {}, {}};
    const auto kind = policy::parse_policy(name);
    if (!kind) throw Error(ErrorKind::Argument, "unknown baseline policy '" + name + "'");
    out.metrics = run_baseline(*kind, env, episodes, seed, [&](std::size_t e, std::size_t t, const learn::StepResult& r) {
        out.records.push_back(step_record(name, e, t, r).dump());
    });
    return out;
}

PolicyRun run_learned(const std::string& name, const learn::ActorCritic& net, learn::ServingEnv env,
                      std::size_t episodes, std::uint64_t seed, bool adapt) {
    PolicyRun out{name, {}, {}};
    learn::EvalConfig ec;
    ec.episodes = episodes;
    ec.seed = seed;
    ec.adapt = adapt;
    ec.observer = [&](std::size_t e, std::size_t t, const learn::StepResult& r) {
        out.records.push_back(step_record(name, e, t, r).dump());
    };
    out.metrics = learn::evaluate(net, env, ec);
    return out;
}

void write_runs(const fs::path& dir, const std::vector<PolicyRun>& runs) {
    Table summary{kSummaryHeader, {}};
    JsonlWriter steps(dir / "steps.jsonl");
    for (const auto& r : runs) {
        summary.rows.push_back(summary_row(r.name, r.metrics));
        for (const auto& line : r.records) steps.write(ordered_json::parse(line));
    }
    write_csv(dir / "summary.csv", summary);
}

learn::TrainResult train_learner(const ExperimentConfig& cfg, const std::string& policy, learn::ServingEnv& env,
                                 std::size_t epochs, Table* curve, const RunOptions& opts) {
    learn::TrainConfig tc = learner_config(cfg, policy);
    tc.epochs = epochs;
    const std::size_t every = std::max<std::size_t>(1, epochs / 10);
    return learn::train(env, tc, [&](const learn::EpochStats& s) {
        if (curve)
            curve->rows.push_back({fmt(static_cast<std::uint64_t>(s.epoch)), fmt(static_cast<std::uint64_t>(s.steps)),
                                   fmt(static_cast<std::uint64_t>(s.episodes)), fmt(s.mean_cost),
                                   fmt(s.parts.switching), fmt(s.parts.transmission), fmt(s.parts.computation),
                                   fmt(s.parts.accuracy), fmt(s.parts.cloud), fmt(s.ppo.policy_loss),
                                   fmt(s.ppo.value_loss), fmt(s.ppo.entropy), fmt(s.ppo.approx_kl),
                                   fmt(s.ppo.clip_fraction), fmt(s.ppo.grad_norm)});
        if (curve && ((s.epoch + 1) % every == 0 || s.epoch + 1 == epochs))
            progress(opts, policy + " epoch " + std::to_string(s.epoch + 1) + "/" + std::to_string(epochs) +
                               " mean slot cost " + fmt(s.mean_cost));
    });
}

const Row kCurveHeader = {"epoch", "steps", "episodes", "mean_cost", "switching", "transmission", "computation",
                          "accuracy", "cloud", "policy_loss", "value_loss", "entropy", "approx_kl", "clip_fraction",
                          "grad_norm"};

std::string learner_policy(const ExperimentConfig& cfg, const RunOptions& opts) {
    const std::string p = opts.policy.value_or(cfg.policy);
    if (p != "t2drl" && p != "ppo")
        throw Error(ErrorKind::Argument, "--policy must be t2drl or ppo for this command, got '" + p + "'");
    return p;
}

void cmd_train(const ExperimentConfig& cfg, const RunOptions& opts) {
    const std::string policy = learner_policy(cfg, opts);
    learn::ServingEnv env = make_env(cfg);
    Table curve{kCurveHeader, {}};
    const auto result = train_learner(cfg, policy, env, cfg.train.epochs, &curve, opts);
    write_csv(opts.out_dir / "curve.csv", curve);
    learn::save_checkpoint(result.net, config_hash(cfg), (opts.out_dir / "checkpoint.esck").string());

    // Paired comparison on the evaluation seeds.
    std::vector<std::string> names = {"fifo", "lfu", "laot", "cloud"};
    std::vector<PolicyRun> runs(names.size() + 1);
    parallel_for(runs.size(), [&](std::size_t k) {
        if (k == 0)
            runs[0] = run_learned(policy, result.net, env, cfg.eval.episodes, cfg.seed, opts.adapt.value_or(cfg.eval.adapt));
        else
            runs[k] = run_named_baseline(names[k - 1], env, cfg.eval.episodes, cfg.seed);
    });
    write_runs(opts.out_dir, runs);
}

void cmd_evaluate(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (opts.checkpoint.empty()) throw Error(ErrorKind::Argument, "evaluate needs --checkpoint");
    const auto loaded = learn::load_checkpoint(opts.checkpoint);
    learn::ServingEnv env = make_env(cfg, cfg.eval.shifted);
    const auto& nc = loaded.net.config();
    if (nc.obs_dim != env.obs_dim() || nc.bits != env.bits() || nc.fractions != env.fractions())
        throw Error(ErrorKind::Config, "checkpoint '" + opts.checkpoint + "' does not match the configured system");
    const bool adapt = opts.adapt.value_or(cfg.eval.adapt);
    const std::string name = std::string(nc.use_ttt ? "t2drl" : "ppo") + (adapt ? "" : "-frozen");
    write_runs(opts.out_dir, {run_learned(name, loaded.net, env, cfg.eval.episodes, cfg.seed, adapt)});
}

void cmd_baselines(const ExperimentConfig& cfg, const RunOptions& opts) {
    std::vector<std::string> names = {"fifo", "lfu", "laot", "cloud"};
    if (opts.policy) {
        if (!policy::parse_policy(*opts.policy))
            throw Error(ErrorKind::Argument, "--policy must be one of fifo, lfu, laot, cloud for baselines");
        names = {*opts.policy};
    }
    const learn::ServingEnv env = make_env(cfg, cfg.eval.shifted);
    std::vector<PolicyRun> runs(names.size());
    parallel_for(names.size(), [&](std::size_t k) { runs[k] = run_named_baseline(names[k], env, cfg.eval.episodes, cfg.seed); });
    write_runs(opts.out_dir, runs);
}

// Request-weighted reasoning accuracy per dataset.
struct DatasetAccuracy {
    std::map<std::string, std::array<double, 4>> acc;  // edge sum, edge weight, table sum, table weight

    void add(const learn::ServingEnv& env) {
        const auto& sys = env.system();
        const Shape shape = sys.shape();
        const auto& act = env.last_action();
        const auto& req = env.requests();
        for (std::size_t n = 0; n < shape.servers; ++n)
            for (std::size_t i = 0; i < shape.agents; ++i)
                for (std::size_t m = 0; m < shape.models; ++m) {
                    const std::size_t k = shape.index(n, i, m);
                    if (req[k] == 0) continue;
                    const auto& p = sys.params(i, m);
                    auto& a = acc[sys.agent(i).dataset];
                    const double w = req[k] * act.cache[k] * (1.0 - act.offload[k]);
                    a[0] += w * cost::accuracy_value(p.zero_shot_accuracy, p.reasoning_gain, env.state().aot[k]);
                    a[1] += w;
                    if (cot::is_table_model(sys.model(m).name)) {
                        a[2] += req[k] * cot::accuracy_lookup(sys.model(m).name, sys.agent(i).dataset,
                                                              std::min(p.paths, 20), cot::PromptMode::ScCoT);
                        a[3] += req[k];
                    }
                }
    }
};

struct SweepPoint {
    std::string axis;
    double value;
    ExperimentConfig cfg;
};

void cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
    std::vector<SweepPoint> points;
    for (auto v : cfg.sweep.agents) {
        SweepPoint p{"agents", static_cast<double>(v), cfg};
        p.cfg.system.agents = v;
        points.push_back(p);
    }
    for (auto v : cfg.sweep.gpus) {
        SweepPoint p{"gpus", static_cast<double>(v), cfg};
        p.cfg.system.gpus_per_server = v / cfg.system.servers;
        points.push_back(p);
    }
    for (int v : cfg.sweep.paths) {
        SweepPoint p{"paths", static_cast<double>(v), cfg};
        p.cfg.system.paths = v;
        points.push_back(p);
    }
    for (double v : cfg.sweep.vanishing) {
        SweepPoint p{"vanishing", v, cfg};
        p.cfg.system.vanishing = v;
        points.push_back(p);
    }
    std::vector<std::string> policies = cfg.sweep.policies;
    if (opts.policy) policies = {*opts.policy};

    struct Job {
        std::size_t point;
        std::string policy;
    };
    std::vector<Job> jobs;
    for (std::size_t k = 0; k < points.size(); ++k)
        for (const auto& p : policies) jobs.push_back({k, p});

    struct JobResult {
        learn::EvalMetrics metrics;
        DatasetAccuracy accuracy;
    };
    std::vector<JobResult> results(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const auto& pt = points[jobs[j].point];
        const std::string& name = jobs[j].policy;
        learn::ServingEnv env = make_env(pt.cfg);
        JobResult& res = results[j];
        const learn::StepObserver observe = [&](std::size_t, std::size_t, const learn::StepResult&) { res.accuracy.add(env); };
        if (auto kind = policy::parse_policy(name)) {
            res.metrics = run_baseline(*kind, env, cfg.sweep.episodes, cfg.seed, observe);
        } else {
            RunOptions quiet = opts;
            quiet.quiet = true;
            const auto trained = train_learner(pt.cfg, name, env, cfg.sweep.train_epochs, nullptr, quiet);
            learn::EvalConfig ec;
            ec.episodes = cfg.sweep.episodes;
            ec.seed = cfg.seed;
            ec.adapt = true;
            ec.observer = observe;
            res.metrics = learn::evaluate(trained.net, env, ec);
        }
    });

    Table sweep{{"axis", "value", "policy", "mean_cost", "switching", "transmission", "computation", "accuracy", "cloud",
                 "evictions", "violations", "edge_accuracy", "table_accuracy"},
                {}};
    Table accuracy{{"axis", "value", "policy", "dataset", "edge_accuracy", "table_accuracy"}, {}};
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& pt = points[jobs[j].point];
        Row r = summary_row(jobs[j].policy, results[j].metrics);
        r.erase(r.begin() + 1, r.begin() + 3);  // episodes and slots are fixed per sweep
        r.insert(r.begin(), {pt.axis, fmt(pt.value)});
        sweep.rows.push_back(r);
        if (pt.axis == "paths" || pt.axis == "vanishing")
            for (const auto& [dataset, a] : results[j].accuracy.acc)
                accuracy.rows.push_back({pt.axis, fmt(pt.value), jobs[j].policy, dataset,
                                         fmt(a[1] > 0 ? a[0] / a[1] : 0.0), fmt(a[3] > 0 ? a[2] / a[3] : 0.0)});
    }
    write_csv(opts.out_dir / "sweep.csv", sweep);
    write_csv(opts.out_dir / "accuracy.csv", accuracy);
}

void cmd_auction(const ExperimentConfig& cfg, const RunOptions& opts) {
    std::vector<auction::Mechanism> mechs = {auction::Mechanism::Dda, auction::Mechanism::Ida};
    if (opts.mechanism) mechs = {auction::parse_mechanism(*opts.mechanism)};
    std::vector<std::size_t> sizes = cfg.auction.sizes;
    if (opts.market_size) sizes = {*opts.market_size};
    const std::size_t seeds = opts.seeds.value_or(cfg.auction.seeds);
    if (seeds == 0) throw Error(ErrorKind::Argument, "--seeds must be >= 1");
    for (auto n : sizes)
        if (n == 0) throw Error(ErrorKind::Argument, "--market-size must be >= 1");
    const auto& clock = cfg.auction.clock;

    Table outcomes{{"mechanism", "size", "seed", "trades", "price", "social_welfare", "rounds", "admitted_buy",
                    "admitted_sell", "ir_removed"},
                   {}};
    Table summary{{"mechanism", "size", "markets", "mean_social_welfare", "mean_trades", "mean_rounds"}, {}};
    Table props{{"size", "markets", "ir", "bb", "monotone", "critical", "round_bound", "max_regret",
                 "max_regret_untrimmed", "theta"},
                {}};
    std::map<std::size_t, std::map<auction::Mechanism, double>> mean_sw;

    for (auto n : sizes) {
        std::vector<auction::Market> markets;
        for (std::size_t s = 0; s < seeds; ++s)
            markets.push_back(auction::random_market(n, derive_seed(cfg.seed, {0x61756374, n, s}), clock.p_min, clock.p_max));
        for (auto m : mechs) {
            double sw = 0.0, trades = 0.0, rounds = 0.0;
            for (std::size_t s = 0; s < seeds; ++s) {
                const auto o = auction::run(m, markets[s], clock);
                outcomes.rows.push_back({std::string(auction::mechanism_name(m)), fmt(static_cast<std::uint64_t>(n)),
                                         fmt(static_cast<std::uint64_t>(s)), fmt(static_cast<std::uint64_t>(o.trades())),
                                         fmt(o.price), fmt(o.social_welfare), fmt(static_cast<std::uint64_t>(o.rounds)),
                                         fmt(static_cast<std::uint64_t>(o.admitted_buy)),
                                         fmt(static_cast<std::uint64_t>(o.admitted_sell)),
                                         fmt(static_cast<std::uint64_t>(o.ir_removed))});
                sw += o.social_welfare;
                trades += static_cast<double>(o.trades());
                rounds += static_cast<double>(o.rounds);
            }
            const double k = static_cast<double>(seeds);
            mean_sw[n][m] = sw / k;
            summary.rows.push_back({std::string(auction::mechanism_name(m)), fmt(static_cast<std::uint64_t>(n)),
                                    fmt(static_cast<std::uint64_t>(seeds)), fmt(sw / k), fmt(trades / k), fmt(rounds / k)});
            if (m == auction::Mechanism::Dda) {
                const auto rep = auction::check_properties(m, markets, clock, derive_seed(cfg.seed, {0x70, n}));
                auto frac = [&](std::size_t holds) { return fmt(static_cast<double>(holds) / static_cast<double>(rep.markets)); };
                props.rows.push_back({fmt(static_cast<std::uint64_t>(n)), fmt(static_cast<std::uint64_t>(rep.markets)),
                                      frac(rep.ir_holds), frac(rep.bb_holds), frac(rep.monotone_holds),
                                      frac(rep.critical_holds), frac(rep.rounds_hold), fmt(rep.max_regret),
                                      fmt(rep.max_regret_unconstrained), fmt(clock.theta(0))});
            }
        }
    }
    write_csv(opts.out_dir / "outcomes.csv", outcomes);
    write_csv(opts.out_dir / "summary.csv", summary);
    if (!props.rows.empty()) write_csv(opts.out_dir / "properties.csv", props);
    if (mechs.size() == 2) {
        Table ratio{{"size", "dda_social_welfare", "ida_social_welfare", "dda_over_ida"}, {}};
        for (const auto& [n, by] : mean_sw) {
            const double d = by.at(auction::Mechanism::Dda), i = by.at(auction::Mechanism::Ida);
            ratio.rows.push_back({fmt(static_cast<std::uint64_t>(n)), fmt(d), fmt(i), fmt(i > 0 ? d / i : 0.0)});
        }
        write_csv(opts.out_dir / "welfare_vs_size.csv", ratio);
    }
}

void cmd_bounds(const ExperimentConfig&, const RunOptions& opts) {
    const auto fixtures = cot::load_world_fixtures(data_file("fixtures/worlds.json").string());
    Table t{{"world", "assumptions", "input_ambiguity", "consensus", "paths", "bound_max_over_paths",
             "bound_product_over_paths", "empirical_gap", "valid"},
            {}};
    for (const auto& f : fixtures) {
        const bool ok = cot::satisfies_assumptions(f.world, f.query);
        const auto in = cot::bound_inputs(f.world, f.query);
        const auto b = cot::sc_cot_bound(in);
        const double gap = cot::empirical_gap(f.world, f.query);
        const bool valid = !ok || (gap <= b.max_over_paths + 1e-12 && (!b.over_paths || gap <= *b.over_paths + 1e-12));
        t.rows.push_back({f.world.name, ok ? "true" : "false", fmt(in.input_ambiguity), fmt(in.consensus),
                          fmt(static_cast<std::uint64_t>(f.query.paths.size())), fmt(b.max_over_paths),
                          b.over_paths ? fmt(*b.over_paths) : std::string(), fmt(gap), valid ? "true" : "false"});
    }
    write_csv(opts.out_dir / "bounds.csv", t);
}

void cmd_gradcheck(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto results = learn::gradcheck_all(cfg.seed);
    Table t{{"op", "points", "max_rel_error", "passed"}, {}};
    std::string failed;
    for (const auto& r : results) {
        t.rows.push_back({r.op, fmt(static_cast<std::uint64_t>(r.points)), fmt(r.max_rel_error), r.passed ? "true" : "false"});
        if (!r.passed) failed += (failed.empty() ? "" : ", ") + r.op;
    }
    write_csv(opts.out_dir / "gradcheck.csv", t);
    if (!failed.empty()) throw NumericError("gradient check failed for: " + failed);
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
    for (auto [n, c] : kCommands)
        if (n == name) return c;
    return std::nullopt;
}

std::string_view command_name(Command c) {
    for (auto [n, k] : kCommands)
        if (k == c) return n;
    return "?";
}

learn::ServingEnv make_env(const ExperimentConfig& cfg, bool shifted) {
    return learn::ServingEnv(build_system(cfg.system), shifted ? shifted_demand(cfg) : cfg.demand, cfg.horizon);
}

learn::TrainConfig learner_config(const ExperimentConfig& cfg, std::string_view policy) {
    learn::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.net.use_ttt = policy == "t2drl";
    if (!tc.net.use_ttt) tc.adapt = true;
    return tc;
}

learn::EvalMetrics run_baseline(policy::PolicyKind kind, learn::ServingEnv& env, std::size_t episodes,
                                std::uint64_t seed, const learn::StepObserver& observer) {
    if (env.horizon() == 0 || episodes == 0) throw DomainError("evaluate: empty horizon");
    learn::MetricsAccumulator acc;
    for (std::size_t e = 0; e < episodes; ++e) {
        env.reset(learn::eval_episode_seed(seed, e));
        auto book = policy::Bookkeeping::empty(env.system().shape());
        for (std::size_t t = 0; t < env.horizon(); ++t) {
            const auto obs = env.observation();
            const auto r = env.step_action(policy::decide(kind, obs, env.system(), book));
            book = policy::bookkeeping_update(kind, book, obs, env.last_action());
            acc.add(r);
            if (observer) observer(e, t, r);
        }
        acc.end_episode();
    }
    return acc.finish();
}

void run_command(Command c, const ExperimentConfig& cfg, const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    for (const auto& e : fs::directory_iterator(opts.out_dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json" &&
            (e.path().extension() == ".csv" || e.path().extension() == ".jsonl" || e.path().extension() == ".esck"))
            fs::remove(e.path());

    Manifest m;
    m.command = std::string(command_name(c));
    m.config_hash = config_hash(cfg);
    m.config_json = canonical_json(cfg);
    m.seed = cfg.seed;
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(opts.out_dir, m);
    };
    try {
        switch (c) {
            case Command::Train: cmd_train(cfg, opts); break;
            case Command::Evaluate: cmd_evaluate(cfg, opts); break;
            case Command::Baselines: cmd_baselines(cfg, opts); break;
            case Command::Sweep: cmd_sweep(cfg, opts); break;
            case Command::Auction: cmd_auction(cfg, opts); break;
            case Command::Bounds: cmd_bounds(cfg, opts); break;
            case Command::Gradcheck: cmd_gradcheck(cfg, opts); break;
        }
    } catch (const std::exception& e) {
        m.status = "error";
        m.error = e.what();
        finish();
        throw;
    }
    finish();
}

}  // namespace edgeserve::harness
