#include "learn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace edgeserve::learn {
namespace {

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error(ErrorKind::Parse, "checkpoint: truncated");
    return v;
}

void put_tensor(std::ostream& out, std::string_view name, const Mat& m) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
}

Mat get_tensor(std::istream& in, std::string_view expected) {
    const auto len = get<std::uint32_t>(in);
    if (len > 256) throw Error(ErrorKind::Parse, "checkpoint: bad tensor name");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw Error(ErrorKind::Parse, "checkpoint: truncated");
    if (name != expected) throw Error(ErrorKind::Parse, "checkpoint: expected tensor '" + std::string(expected) + "', found '" + name + "'");
    const auto rows = get<std::uint64_t>(in), cols = get<std::uint64_t>(in);
    if (rows > (1u << 24) || cols > (1u << 24)) throw Error(ErrorKind::Parse, "checkpoint: bad tensor shape");
    Mat m(static_cast<long>(rows), static_cast<long>(cols));
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
    return m;
}

}  // namespace

void save_checkpoint(const ActorCritic& net, std::uint64_t config_hash, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint '" + path + "'");
    const NetConfig& c = net.config();
    out.write(kCheckpointMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, config_hash);
    for (std::size_t v : {c.obs_dim, c.bits, c.fractions, c.hidden, c.ttt_hidden, c.heads, c.ttt_minibatch})
        put<std::uint64_t>(out, v);
    put<double>(out, c.eta_inner);
    put<double>(out, c.keep_prob);
    put<double>(out, c.init_log_std);
    put<std::uint8_t>(out, c.use_ttt ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.params().size()));
    for (std::size_t p = 0; p < net.params().size(); ++p) put_tensor(out, param_name(p), net.params()[p]);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.masks().size()));
    for (const auto& m : net.masks()) put_tensor(out, "ttt.mask", m);
    if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw Error(ErrorKind::Parse, "checkpoint: bad magic");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw Error(ErrorKind::Parse, "checkpoint: unsupported version " + std::to_string(version));
    LoadedCheckpoint out;
    out.config_hash = get<std::uint64_t>(in);
    NetConfig c;
    for (std::size_t* v : {&c.obs_dim, &c.bits, &c.fractions, &c.hidden, &c.ttt_hidden, &c.heads, &c.ttt_minibatch})
        *v = static_cast<std::size_t>(get<std::uint64_t>(in));
    c.eta_inner = get<double>(in);
    c.keep_prob = get<double>(in);
    c.init_log_std = get<double>(in);
    c.use_ttt = get<std::uint8_t>(in) != 0;

    ActorCritic net(c, 0);
    if (get<std::uint32_t>(in) != kParamCount) throw Error(ErrorKind::Parse, "checkpoint: parameter count mismatch");
    for (std::size_t p = 0; p < kParamCount; ++p) {
        Mat m = get_tensor(in, param_name(p));
        if (m.rows() != net.params()[p].rows() || m.cols() != net.params()[p].cols())
            throw Error(ErrorKind::Parse, "checkpoint: shape mismatch for '" + std::string(param_name(p)) + "'");
        net.params()[p] = std::move(m);
    }
    const auto heads = get<std::uint32_t>(in);
    if (heads != c.heads) throw Error(ErrorKind::Parse, "checkpoint: mask count mismatch");
    std::vector<Vec> masks;
    for (std::uint32_t h = 0; h < heads; ++h) masks.push_back(get_tensor(in, "ttt.mask"));
    net.set_masks(std::move(masks));
    out.net = std::move(net);
    return out;
}

}  // namespace edgeserve::learn
