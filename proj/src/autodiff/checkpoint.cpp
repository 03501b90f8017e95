#include "a2m/autodiff/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "a2m/error.hpp"

namespace a2m::ad {

namespace {

constexpr char kMagic[8] = {'A', '2', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error(ErrorKind::Io, "truncated checkpoint " + path);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, static_cast<std::uint64_t>(params.size()));
    for (const Parameter* p : params) {
        put(out, static_cast<std::uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        put(out, static_cast<std::int64_t>(p->value.rows()));
        put(out, static_cast<std::int64_t>(p->value.cols()));
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(sizeof(double) * p->value.size()));
    }
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

std::vector<Parameter> read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw Error(ErrorKind::SchemaViolation, path + " is not a checkpoint");
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) {
        throw Error(ErrorKind::SchemaViolation, "unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = get<std::uint64_t>(in, path);
    std::vector<Parameter> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = get<std::uint32_t>(in, path);
        std::string name(len, '\0');
        in.read(name.data(), len);
        const auto rows = get<std::int64_t>(in, path);
        const auto cols = get<std::int64_t>(in, path);
        if (rows < 0 || cols < 0) throw Error(ErrorKind::SchemaViolation, "negative shape in " + path);
        Matrix m(rows, cols);
        in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
        if (!in) throw Error(ErrorKind::Io, "truncated checkpoint " + path);
        out.emplace_back(std::move(name), std::move(m));
    }
    return out;
}

void load_checkpoint(const std::string& path, const std::vector<Parameter*>& params) {
    std::unordered_map<std::string, Parameter> stored;
    for (auto& p : read_checkpoint(path)) stored.emplace(p.name, std::move(p));
    for (Parameter* p : params) {
        auto it = stored.find(p->name);
        if (it == stored.end()) throw Error(ErrorKind::SchemaViolation, "checkpoint lacks " + p->name);
        const Matrix& v = it->second.value;
        if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
            throw Error(ErrorKind::ShapeMismatch, "checkpoint shape differs for " + p->name);
        }
        p->value = v;
    }
}

}  // namespace a2m::ad
