#include "classbd/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "classbd/common.hpp"

namespace classbd::io {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

} // namespace

void save_checkpoint(const std::string& path, const ad::ParameterStore& store,
                     const json& meta, bool include_velocity) {
    json header;
    header["meta"] = meta;
    header["params"] = json::array();
    std::uint64_t offset = 0;
    auto add_entry = [&](const std::string& name, const std::vector<std::size_t>& shape,
                         std::size_t count) {
        json e;
        e["name"] = name;
        e["shape"] = shape;
        e["offset"] = offset;
        header["params"].push_back(e);
        offset += count * sizeof(double);
    };
    const auto params = store.all();
    for (const auto* p : params) add_entry(p->name, p->shape, p->size());
    if (include_velocity)
        for (const auto* p : params) add_entry(p->name + "#velocity", p->shape, p->size());

    const std::string htext = header.dump();
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "save_checkpoint: cannot open " + path);
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto* p : params) write_doubles(out, p->value);
    if (include_velocity)
        for (const auto* p : params) write_doubles(out, p->velocity);
    require(out.good(), "save_checkpoint: write failed for " + path);
}

namespace {

json read_header(std::ifstream& in, const std::string& path, std::uint64_t& payload_start) {
    require(in.good(), "checkpoint: cannot open " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    require(in.good() && hlen > 0 && hlen < (1ull << 31), "checkpoint: corrupt header in " + path);
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    require(in.good(), "checkpoint: truncated header in " + path);
    payload_start = sizeof(hlen) + hlen;
    return json::parse(htext);
}

} // namespace

json load_checkpoint(const std::string& path, ad::ParameterStore& store) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t payload_start = 0;
    const json header = read_header(in, path, payload_start);

    for (const auto& e : header.at("params")) {
        const std::string name = e.at("name").get<std::string>();
        const bool is_velocity = name.size() > 9 && name.ends_with("#velocity");
        const std::string base = is_velocity ? name.substr(0, name.size() - 9) : name;
        require(store.contains(base), "load_checkpoint: store has no parameter named " + base);
        ad::Parameter& p = store.at(base);
        const auto shape = e.at("shape").get<std::vector<std::size_t>>();
        require(shape == p.shape, "load_checkpoint: shape mismatch for " + base);
        std::vector<double>& dst = is_velocity ? p.velocity : p.value;
        in.seekg(static_cast<std::streamoff>(payload_start + e.at("offset").get<std::uint64_t>()));
        in.read(reinterpret_cast<char*>(dst.data()),
                static_cast<std::streamsize>(dst.size() * sizeof(double)));
        require(in.good(), "load_checkpoint: truncated payload for " + name);
    }
    return header.at("meta");
}

json peek_checkpoint_meta(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t payload_start = 0;
    return read_header(in, path, payload_start).at("meta");
}

} // namespace classbd::io
