#include "classbd/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "classbd/common.hpp"

namespace classbd {

namespace fs = std::filesystem;
using nlohmann::json;

void DatasetSplit::validate() const {
    require(num_classes > 0, "DatasetSplit: num_classes must be positive");
    require(segment_length > 0, "DatasetSplit: segment_length must be positive");
    auto check = [&](const std::vector<LabeledSegment>& v, const char* name) {
        for (const auto& s : v) {
            require(s.series.size() == segment_length,
                    std::string("DatasetSplit: ") + name + " segment length mismatch");
            require(s.class_id >= 0 && s.class_id < num_classes,
                    std::string("DatasetSplit: ") + name + " class_id out of range");
        }
    };
    check(train, "train");
    check(validation, "validation");
    check(test, "test");
}

void DatasetSplit::merge(const DatasetSplit& other) {
    require(segment_length == 0 || segment_length == other.segment_length,
            "DatasetSplit::merge: segment length mismatch");
    if (segment_length == 0) segment_length = other.segment_length;
    num_classes = std::max(num_classes, other.num_classes);
    train.insert(train.end(), other.train.begin(), other.train.end());
    validation.insert(validation.end(), other.validation.begin(), other.validation.end());
    test.insert(test.end(), other.test.begin(), other.test.end());
}

DatasetSplit segment_signal(const TimeSeries& signal, std::size_t segment_length,
                            std::size_t stride, double test_fraction, double val_fraction,
                            int class_id, std::uint64_t seed) {
    signal.validate("segment_signal");
    require(segment_length > 0 && stride > 0, "segment_signal: segment_length and stride must be positive");
    require(signal.size() >= segment_length, "segment_signal: signal shorter than segment_length");
    require(test_fraction > 0.0 && test_fraction < 1.0, "segment_signal: test_fraction must lie in (0,1)");
    require(val_fraction > 0.0 && val_fraction < 1.0, "segment_signal: val_fraction must lie in (0,1)");
    require(class_id >= 0, "segment_signal: class_id must be non-negative");

    const std::size_t n = signal.size();
    const std::size_t head_len = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (1.0 - test_fraction)));

    auto window_starts = [&](std::size_t region_begin, std::size_t region_end) {
        std::vector<std::size_t> starts;
        if (region_end >= region_begin + segment_length) {
            for (std::size_t s = region_begin; s + segment_length <= region_end; s += stride)
                starts.push_back(s);
        }
        return starts;
    };

    const auto head_starts = window_starts(0, head_len);
    const auto test_starts = window_starts(head_len, n);

    auto cut = [&](std::size_t start) {
        LabeledSegment seg;
        seg.class_id = class_id;
        seg.series.sample_rate_hz = signal.sample_rate_hz;
        seg.series.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                  signal.samples.begin() + static_cast<std::ptrdiff_t>(start + segment_length));
        return seg;
    };

    // Shuffle head windows, then carve the validation share off the back.
    std::vector<std::size_t> order(head_starts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_val = static_cast<std::size_t>(
        std::floor(static_cast<double>(head_starts.size()) * val_fraction));

    DatasetSplit out;
    out.num_classes = class_id + 1;
    out.segment_length = segment_length;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto seg = cut(head_starts[order[i]]);
        if (i < order.size() - n_val)
            out.train.push_back(seg);
        else
            out.validation.push_back(seg);
    }
    for (auto s : test_starts) out.test.push_back(cut(s));
    return out;
}

TimeSeries read_csv_signal(const std::string& path, double sample_rate_hz) {
    std::ifstream in(path);
    require(in.good(), "read_csv_signal: cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "read_csv_signal: empty file " + path);
    // Strip optional BOM / whitespace before checking the header.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    require(line == "value", "read_csv_signal: expected header 'value' in " + path);
    TimeSeries out;
    out.sample_rate_hz = sample_rate_hz;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.samples.push_back(std::stod(line));
    }
    out.validate("read_csv_signal");
    return out;
}

void write_csv_signal(const std::string& path, const TimeSeries& signal) {
    std::ofstream outf(path);
    require(outf.good(), "write_csv_signal: cannot open " + path);
    outf << "value\n";
    char buf[40];
    for (double v : signal.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        outf << buf;
    }
}

void write_f32(const std::string& path, const std::vector<double>& samples) {
    static_assert(std::endian::native == std::endian::little,
                  "f32 record format assumes a little-endian host");
    std::ofstream outf(path, std::ios::binary);
    require(outf.good(), "write_f32: cannot open " + path);
    for (double v : samples) {
        const float f = static_cast<float>(v);
        outf.write(reinterpret_cast<const char*>(&f), sizeof(float));
    }
}

std::vector<double> read_f32(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    require(in.good(), "read_f32: cannot open " + path);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    require(bytes % sizeof(float) == 0, "read_f32: truncated file " + path);
    in.seekg(0);
    std::vector<float> raw(bytes / sizeof(float));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    return {raw.begin(), raw.end()};
}

void save_split_dir(const std::string& dir, const SplitManifest& manifest,
                    const std::vector<LabeledSegment>& segments) {
    require(manifest.records.size() == segments.size(),
            "save_split_dir: record/segment count mismatch");
    fs::create_directories(dir);
    json side;
    side["sample_rate_hz"] = manifest.sample_rate_hz;
    side["segment_length"] = manifest.segment_length;
    side["num_classes"] = manifest.num_classes;
    side["records"] = json::array();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& rec = manifest.records[i];
        write_f32(dir + "/" + rec.file, segments[i].series.samples);
        json jr;
        jr["file"] = rec.file;
        jr["class_id"] = rec.class_id;
        jr["noise_seed"] = rec.noise_seed;
        jr["snr_db"] = rec.snr_db;
        if (rec.clean_file) jr["clean_file"] = *rec.clean_file;
        if (rec.noisy_raw_file) jr["noisy_raw_file"] = *rec.noisy_raw_file;
        side["records"].push_back(jr);
    }
    std::ofstream outf(dir + "/segments.json");
    require(outf.good(), "save_split_dir: cannot write sidecar in " + dir);
    outf << side.dump(2) << "\n";
}

std::pair<SplitManifest, std::vector<LabeledSegment>> load_split_dir(const std::string& dir) {
    std::ifstream in(dir + "/segments.json");
    require(in.good(), "load_split_dir: missing sidecar in " + dir);
    json side = json::parse(in);
    SplitManifest manifest;
    manifest.sample_rate_hz = side.at("sample_rate_hz").get<double>();
    manifest.segment_length = side.at("segment_length").get<std::size_t>();
    manifest.num_classes = side.at("num_classes").get<int>();
    std::vector<LabeledSegment> segments;
    for (const auto& jr : side.at("records")) {
        SegmentRecord rec;
        rec.file = jr.at("file").get<std::string>();
        rec.class_id = jr.at("class_id").get<int>();
        rec.noise_seed = jr.value("noise_seed", std::uint64_t{0});
        rec.snr_db = jr.value("snr_db", 0.0);
        if (jr.contains("clean_file")) rec.clean_file = jr["clean_file"].get<std::string>();
        if (jr.contains("noisy_raw_file")) rec.noisy_raw_file = jr["noisy_raw_file"].get<std::string>();
        manifest.records.push_back(rec);

        LabeledSegment seg;
        seg.class_id = rec.class_id;
        seg.series.sample_rate_hz = manifest.sample_rate_hz;
        seg.series.samples = read_f32(dir + "/" + rec.file);
        require(seg.series.size() == manifest.segment_length,
                "load_split_dir: segment length mismatch in " + rec.file);
        segments.push_back(std::move(seg));
    }
    return {manifest, segments};
}

} // namespace classbd
