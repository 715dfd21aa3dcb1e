#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "common/error.hpp"
#include "doctest.h"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "harness/io.hpp"
#include "support.hpp"

using namespace edgeserve;
using namespace edgeserve::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("edgeserve_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ErrorKind kind_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Argument;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

const char* kSmall = R"(
seed = 3
horizon = 6
[system]
servers = 1
gpus_per_server = 8
agents = 2
gpu_energy = 3000.0
[train]
epochs = 2
steps_per_epoch = 12
hidden = 16
ttt_hidden = 8
ttt_heads = 2
[eval]
episodes = 2
)";

}  // namespace

TEST_CASE("defaults parse and validate") {
    const auto cfg = parse_config("");
    CHECK(cfg.seed == 42);
    CHECK(cfg.horizon == 100);
    CHECK(cfg.policy == "t2drl");
    CHECK(cfg.system.servers == 4);
    CHECK(cfg.train.adapt);
    CHECK(cfg.train.net.use_ttt);
    CHECK(parse_config("policy = \"ppo\"").train.net.use_ttt == false);
}

TEST_CASE("config errors") {
    CHECK(kind_of("bogus = 1") == ErrorKind::Config);
    CHECK(kind_of("[system]\nflux = 2") == ErrorKind::Config);
    CHECK(kind_of("horizon = 0") == ErrorKind::Config);
    CHECK(kind_of("policy = \"dqn\"") == ErrorKind::Config);
    CHECK(kind_of("[train]\nadapt = false") == ErrorKind::Config);
    CHECK(kind_of("horizon = \"ten\"") == ErrorKind::Config);
    CHECK(kind_of("[system]\nservers = 0") == ErrorKind::InvalidSpec);
    CHECK(kind_of("[sweep]\ngpus = [7]") == ErrorKind::Config);
    CHECK_NOTHROW(parse_config("policy = \"ppo\"\n[train]\nadapt = false"));
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_config("seed = 1\nhorizon = = 3\n", "bad.toml");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).rfind("bad.toml:2:", 0) == 0);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.toml"), Error);
}

TEST_CASE("config hash is stable and sensitive") {
    const auto a = parse_config(kSmall);
    const auto b = parse_config(kSmall);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(canonical_json(a) == canonical_json(b));
    auto c = a;
    c.train.adam.lr *= 2.0;
    CHECK(config_hash(c) != config_hash(a));
    // key order in the file does not matter
    const auto d = parse_config("horizon = 6\nseed = 3\n" + std::string(kSmall).substr(std::string(kSmall).find("[system]")));
    CHECK(config_hash(d) == config_hash(a));
}

TEST_CASE("fmt round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5, 0.0})
        CHECK(std::strtod(fmt(v).c_str(), nullptr) == v);
}

TEST_CASE("csv round trip") {
    const auto dir = scratch("csv");
    Table t{{"name", "value"}, {{"plain", "1"}, {"with,comma", "2"}, {"with \"quote\"", "3"}}};
    write_csv(dir / "t.csv", t);
    const auto back = read_csv(dir / "t.csv");
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);

    Table empty{{"a", "b"}, {}};
    write_csv(dir / "e.csv", empty);
    const auto e = read_csv(dir / "e.csv");
    CHECK(e.header == empty.header);
    CHECK(e.rows.empty());
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), Error);
}

TEST_CASE("worker count follows the environment") {
    ::setenv("EDGESERVE_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    ::setenv("EDGESERVE_THREADS", "0", 1);
    CHECK(worker_count() >= 1);
    ::unsetenv("EDGESERVE_THREADS");
    std::vector<int> hit(50, 0);
    parallel_for(50, [&](std::size_t k) { hit[k] += 1; });
    for (int h : hit) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t k) { if (k == 4) throw DomainError("boom"); }), DomainError);
}

TEST_CASE("baselines command writes one record per slot and episode") {
    const auto cfg = parse_config(kSmall);
    const auto dir = scratch("baselines");
    RunOptions o;
    o.out_dir = dir;
    o.quiet = true;
    run_command(Command::Baselines, cfg, o);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
    // four baselines, horizon 6, two episodes
    CHECK(count_lines(dir / "steps.jsonl") == 4 * 6 * 2);
    const auto summary = read_csv(dir / "summary.csv");
    CHECK(summary.rows.size() == 4);
    const auto m = testsupport::read_json((dir / "manifest.json").string());
    CHECK(m.at("status") == "ok");
    CHECK(m.at("command") == "baselines");
}

TEST_CASE("train is reproducible byte for byte") {
    const auto cfg = parse_config(kSmall);
    RunOptions o;
    o.quiet = true;
    o.out_dir = scratch("train_a");
    run_command(Command::Train, cfg, o);
    const auto first = output_hashes(o.out_dir);
    o.out_dir = scratch("train_b");
    run_command(Command::Train, cfg, o);
    const auto second = output_hashes(o.out_dir);
    REQUIRE(first.size() >= 4);
    CHECK(first == second);
    CHECK(count_lines(o.out_dir / "curve.csv") == 1 + cfg.train.epochs);
    // learner plus four baselines
    CHECK(count_lines(o.out_dir / "steps.jsonl") == 5 * 6 * 2);

    RunOptions ev = o;
    ev.out_dir = scratch("eval");
    ev.checkpoint = (o.out_dir / "checkpoint.esck").string();
    ev.adapt = false;
    run_command(Command::Evaluate, cfg, ev);
    CHECK(fs::exists(ev.out_dir / "summary.csv"));
}

TEST_CASE("a failed run still writes a manifest") {
    const auto cfg = parse_config(kSmall);
    RunOptions o;
    o.quiet = true;
    o.out_dir = scratch("failed");
    o.checkpoint = "/nonexistent/ck.esck";
    CHECK_THROWS_AS(run_command(Command::Evaluate, cfg, o), Error);
    const auto m = testsupport::read_json((o.out_dir / "manifest.json").string());
    CHECK(m.at("status") == "error");
    CHECK_FALSE(m.at("error").get<std::string>().empty());
}

TEST_CASE("command names") {
    for (auto c : {Command::Train, Command::Evaluate, Command::Baselines, Command::Sweep, Command::Auction,
                   Command::Bounds, Command::Gradcheck})
        CHECK(parse_command(command_name(c)) == c);
    CHECK_FALSE(parse_command("deploy").has_value());
}
