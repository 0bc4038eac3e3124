#include "ocn/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "ocn/errors.hpp"

namespace ocn {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k)
            c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

template <typename T>
void append_pod(std::vector<char>& buf, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T take_pod(const std::vector<char>& buf, std::size_t& off, const std::string& path) {
    if (off + sizeof(T) > buf.size())
        throw IoError("truncated checkpoint: " + path);
    T v{};
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len) {
    static const std::array<std::uint32_t, 256> table = make_crc_table();
    std::uint32_t c = 0xffffffffu;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i)
        c = table[(c ^ p[i]) & 0xffu] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

void save_checkpoint(const std::string& path, const DetectorParams& params) {
    std::vector<char> payload;
    append_pod<std::uint32_t>(payload, static_cast<std::uint32_t>(params.n));
    append_pod<std::uint32_t>(payload, static_cast<std::uint32_t>(params.num_layers));
    append_pod<std::uint8_t>(payload, static_cast<std::uint8_t>(params.init_mode));
    for (int k = 0; k < params.num_layers; ++k) {
        const auto& w = params.layer_w[static_cast<std::size_t>(k)];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                append_pod<double>(payload, w(r, c));
        const auto& b = params.layer_b[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < b.size(); ++i)
            append_pod<double>(payload, b(i));
        append_pod<double>(payload, params.layer_t[static_cast<std::size_t>(k)]);
    }

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("OCNP", 4);
    const std::uint32_t version = 1;
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    const std::uint32_t crc = crc32(payload.data(), payload.size());
    os.write(reinterpret_cast<const char*>(&crc), 4);
    if (!os) throw IoError("write failure: " + path);
}

DetectorParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "OCNP", 4) != 0)
        throw IoError("bad magic in checkpoint: " + path);
    std::uint32_t version = 0;
    if (!is.read(reinterpret_cast<char*>(&version), 4) || version != 1)
        throw IoError("unsupported checkpoint version: " + path);

    std::vector<char> rest((std::istreambuf_iterator<char>(is)),
                           std::istreambuf_iterator<char>());
    if (rest.size() < 4) throw IoError("truncated checkpoint: " + path);
    std::uint32_t stored_crc = 0;
    std::memcpy(&stored_crc, rest.data() + rest.size() - 4, 4);
    rest.resize(rest.size() - 4);
    if (crc32(rest.data(), rest.size()) != stored_crc)
        throw IoError("checkpoint CRC mismatch: " + path);

    std::size_t off = 0;
    DetectorParams params;
    params.n = static_cast<int>(take_pod<std::uint32_t>(rest, off, path));
    params.num_layers = static_cast<int>(take_pod<std::uint32_t>(rest, off, path));
    params.init_mode = static_cast<InitMode>(take_pod<std::uint8_t>(rest, off, path));
    const int n = params.n;
    for (int k = 0; k < params.num_layers; ++k) {
        Eigen::MatrixXd w(2 * n, 6 * n);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = take_pod<double>(rest, off, path);
        params.layer_w.push_back(std::move(w));
        Eigen::VectorXd b(2 * n);
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b(i) = take_pod<double>(rest, off, path);
        params.layer_b.push_back(std::move(b));
        params.layer_t.push_back(take_pod<double>(rest, off, path));
    }
    if (off != rest.size())
        throw IoError("checkpoint has trailing bytes: " + path);
    return params;
}

}  // namespace ocn
