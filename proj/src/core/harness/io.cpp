#include "harness/io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace edgeserve::harness {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

namespace {

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

void write_csv(const fs::path& path, const Table& table) {
    auto out = open_out(path);
    auto line = [&](const Row& r) {
        for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << quote(r[k]);
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) {
        if (r.size() != table.header.size())
            throw Error(ErrorKind::Io, "csv row width does not match the header of '" + path.string() + "'");
        line(r);
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Table read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    std::vector<Row> rows;
    Row row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (quoted) {
            if (c == '"' && k + 1 < text.size() && text[k + 1] == '"') field += '"', ++k;
            else if (c == '"') quoted = false;
            else field += c;
        } else if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n') {
            row.push_back(std::move(field));
            rows.push_back(std::move(row));
            field.clear();
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
            any = true;
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorKind::Parse, "csv '" + path.string() + "' has no header");
    Table t;
    t.header = std::move(rows.front());
    t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
    return t;
}

JsonlWriter::JsonlWriter(const fs::path& path) : out_(open_out(path)) {}

void JsonlWriter::write(const nlohmann::ordered_json& record) {
    out_ << record.dump() << '\n';
    if (!out_) throw Error(ErrorKind::Io, "jsonl write failed");
    ++records_;
}

nlohmann::ordered_json to_json(const cost::CostBreakdown& b) {
    return {{"switching", b.switching}, {"transmission", b.transmission}, {"computation", b.computation},
            {"accuracy", b.accuracy},   {"cloud", b.cloud},               {"total", b.total}};
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
    Fnv1a h;
    char buf[1 << 14];
    while (in) {
        in.read(buf, sizeof buf);
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return hex64(h.digest());
}

std::vector<std::pair<std::string, std::string>> output_hashes(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        out.emplace_back(rel, file_hash(e.path()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (const auto& [name, hash] : output_hashes(dir)) outputs.push_back({{"path", name}, {"fnv1a", hash}});
    nlohmann::ordered_json j = {
        {"command", m.command},
        {"status", m.status},
        {"error", m.error},
        {"seed", m.seed},
        {"config_hash", hex64(m.config_hash)},
        {"config", nlohmann::ordered_json::parse(m.config_json.empty() ? "null" : m.config_json)},
        {"git_revision", EDGESERVE_GIT_REVISION},
        {"version", EDGESERVE_VERSION},
        {"modules",
         {{"env-core", EDGESERVE_VERSION},
          {"cost-model", EDGESERVE_VERSION},
          {"cot-bounds", EDGESERVE_VERSION},
          {"policies", EDGESERVE_VERSION},
          {"t2drl", EDGESERVE_VERSION},
          {"auction", EDGESERVE_VERSION},
          {"harness-cli", EDGESERVE_VERSION}}},
        {"wall_clock_s", m.wall_clock_s},
        {"outputs", outputs},
    };
    auto out = open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

std::size_t worker_count() {
    if (const char* env = std::getenv("EDGESERVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto run = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < n;) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (k < failed_at) failed_at = k, failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace edgeserve::harness
