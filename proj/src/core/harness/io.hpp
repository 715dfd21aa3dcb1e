#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cost/cost_model.hpp"
#include "json.hpp"

namespace edgeserve::harness {

using Row = std::vector<std::string>;

/// Shortest text that reads back to the same double.
std::string fmt(double v);
std::string fmt(std::uint64_t v);

struct Table {
    Row header;
    std::vector<Row> rows;
};

/// Writes `table` as RFC-4180 CSV (fields with commas or quotes are quoted).
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

/// One JSON object per line.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);
    void write(const nlohmann::ordered_json& record);
    std::size_t records() const { return records_; }

private:
    std::ofstream out_;
    std::size_t records_ = 0;
};

nlohmann::ordered_json to_json(const cost::CostBreakdown& b);

/// FNV-1a of the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

/// Run description written as manifest.json next to the outputs. Output
/// hashes cover every file in the directory except the manifest itself.
struct Manifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::string config_json;
    std::uint64_t seed = 0;
    double wall_clock_s = 0.0;
    std::string status = "ok";
    std::string error;
};

void write_manifest(const std::filesystem::path& dir, const Manifest& m);

/// Hashes of every output file in `dir` (manifest excluded), sorted by name.
std::vector<std::pair<std::string, std::string>> output_hashes(const std::filesystem::path& dir);

/// Worker count: EDGESERVE_THREADS when set and positive, else the hardware count.
std::size_t worker_count();

/// Runs body(k) for k in [0, n) on up to worker_count() threads. The first
/// exception (lowest k) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace edgeserve::harness
