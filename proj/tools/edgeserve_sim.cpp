// Command-line front end. Talks to the simulator only through the C API.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "edgeserve.h"

namespace {

int fail(es_status s) {
    std::fprintf(stderr, "edgeserve-sim: %s: %s\n", es_status_name(s), es_last_error());
    return es_exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge LLM serving simulator: caching/offloading, T2DRL learner, reasoning bounds and auction"};
    app.set_version_flag("--version", std::string(es_version()));
    app.require_subcommand(1);

    std::string config, out = "out", policy, adapt, checkpoint, mechanism;
    std::uint64_t seed = 0, market_size = 0, seeds = 0;
    bool quiet = false;

    const char* kCommands[][2] = {
        {"train", "train t2drl or ppo, then compare with the baselines on paired seeds"},
        {"evaluate", "evaluate a checkpoint with or without test-time adaptation"},
        {"baselines", "run FIFO, LFU, LAoT and cloud-only on paired seeds"},
        {"sweep", "cost and accuracy versus agents, GPUs, reasoning paths and vanishing factor"},
        {"auction", "double Dutch auction versus iterative double auction over market sizes"},
        {"bounds", "reasoning-error bounds against exact gaps on the world fixtures"},
        {"gradcheck", "finite-difference check of every differentiable op"},
    };
    std::vector<CLI::App*> subs;
    for (auto& c : kCommands) {
        CLI::App* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", config, "TOML config (default: built-in defaults)")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_flag("--quiet", quiet, "no progress lines");
        subs.push_back(sub);
    }
    auto* train = subs[0];
    auto* evaluate = subs[1];
    auto* baselines = subs[2];
    auto* sweep = subs[3];
    auto* auction = subs[4];
    for (auto* s : {train, evaluate, sweep}) s->add_option("--policy", policy, "t2drl or ppo");
    baselines->add_option("--policy", policy, "one of fifo, lfu, laot, cloud");
    for (auto* s : {train, evaluate})
        s->add_option("--adapt", adapt, "test-time adaptation during evaluation")->check(CLI::IsMember({"on", "off"}));
    evaluate->add_option("--checkpoint", checkpoint, "checkpoint written by train")->required()->check(CLI::ExistingFile);
    auction->add_option("--mechanism", mechanism, "dda or ida (default: both)")->check(CLI::IsMember({"dda", "ida"}));
    auction->add_option("--market-size", market_size, "buyers and sellers per side (default: config sizes)")
        ->check(CLI::PositiveNumber);
    auction->add_option("--seeds", seeds, "markets per size")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    CLI::App* chosen = app.get_subcommands().front();

    es_config* cfg = nullptr;
    es_status s = es_config_load(config.empty() ? nullptr : config.c_str(), &cfg);
    if (s != ES_OK) return fail(s);
    if (chosen->count("--seed") && (s = es_config_set_seed(cfg, seed)) != ES_OK) {
        es_config_free(cfg);
        return fail(s);
    }

    es_run_options opts;
    es_run_options_init(&opts);
    opts.out_dir = out.c_str();
    opts.quiet = quiet ? 1 : 0;
    if (!policy.empty()) opts.policy = policy.c_str();
    if (!adapt.empty()) opts.adapt = adapt == "on" ? 1 : 0;
    if (!checkpoint.empty()) opts.checkpoint = checkpoint.c_str();
    if (!mechanism.empty()) opts.mechanism = mechanism.c_str();
    opts.market_size = market_size;
    opts.seeds = seeds;

    s = es_run(cfg, chosen->get_name().c_str(), &opts);
    es_config_free(cfg);
    if (s != ES_OK) return fail(s);
    if (!quiet) std::fprintf(stderr, "%s: outputs and manifest.json written to %s\n", chosen->get_name().c_str(), out.c_str());
    return 0;
}
