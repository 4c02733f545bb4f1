#include "classbd/synthesize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "classbd/common.hpp"

namespace classbd::train {

namespace fs = std::filesystem;
using nlohmann::json;

SynthSummary synthesize_dataset(const io::ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const auto& dc = cfg.dataset;

    DatasetSplit split;
    split.num_classes = static_cast<int>(dc.classes.size());
    split.segment_length = dc.segment_length;
    for (std::size_t i = 0; i < dc.classes.size(); ++i) {
        const auto& cls = dc.classes[i];
        TimeSeries source;
        if (cls.fault) {
            source = synth::generate_fault_signal(*cls.fault, dc.duration_s, dc.sample_rate_hz,
                                                  mix_seed(dc.base_seed, 0xC1A5, i));
        } else {
            source = read_csv_signal(*cls.ingest_path, dc.sample_rate_hz);
        }
        DatasetSplit part = segment_signal(source, dc.segment_length, dc.stride, dc.test_fraction,
                                           dc.val_fraction, static_cast<int>(i),
                                           mix_seed(dc.base_seed, 0x5E67, i));
        part.num_classes = split.num_classes;
        split.merge(part);
    }
    split.validate();

    fs::create_directories(out_dir);
    SynthSummary summary;

    const char* split_names[3] = {"train", "validation", "test"};
    const std::vector<LabeledSegment>* split_segs[3] = {&split.train, &split.validation, &split.test};
    for (int si = 0; si < 3; ++si) {
        const auto& segs = *split_segs[si];
        SplitManifest manifest;
        manifest.sample_rate_hz = dc.sample_rate_hz;
        manifest.segment_length = dc.segment_length;
        manifest.num_classes = split.num_classes;

        std::vector<LabeledSegment> stored;
        stored.reserve(segs.size());
        const std::string dir = out_dir + "/" + split_names[si];
        fs::create_directories(dir);
        for (std::size_t j = 0; j < segs.size(); ++j) {
            char base[32];
            std::snprintf(base, sizeof(base), "seg_%05zu", j);
            SegmentRecord rec;
            rec.file = std::string(base) + ".f32";
            rec.class_id = segs[j].class_id;
            rec.clean_file = std::string(base) + "_clean.f32";

            TimeSeries noisy = segs[j].series;
            if (cfg.noise) {
                rec.noise_seed = mix_seed(cfg.noise->seed, static_cast<std::uint64_t>(si), j);
                rec.snr_db = cfg.noise->snr_db;
                noisy = synth::add_noise_snr(segs[j].series, cfg.noise->snr_db, cfg.noise->kind,
                                             rec.noise_seed);
                rec.noisy_raw_file = std::string(base) + "_raw.f32";
                write_f32(dir + "/" + *rec.noisy_raw_file, noisy.samples);
            }
            write_f32(dir + "/" + *rec.clean_file, segs[j].series.samples);

            LabeledSegment out_seg;
            out_seg.class_id = segs[j].class_id;
            out_seg.series = zscore_normalize(noisy);
            stored.push_back(std::move(out_seg));
            manifest.records.push_back(std::move(rec));
        }
        save_split_dir(dir, manifest, stored);
    }
    summary.train = split.train.size();
    summary.validation = split.validation.size();
    summary.test = split.test.size();

    json manifest;
    manifest["sample_rate_hz"] = dc.sample_rate_hz;
    manifest["segment_length"] = dc.segment_length;
    manifest["num_classes"] = split.num_classes;
    manifest["config_hash"] = cfg.hash();
    manifest["splits"] = {{"train", summary.train},
                          {"validation", summary.validation},
                          {"test", summary.test}};
    manifest["classes"] = json::array();
    for (std::size_t i = 0; i < dc.classes.size(); ++i) {
        const auto& cls = dc.classes[i];
        json jc;
        jc["class_id"] = i;
        jc["name"] = cls.name;
        jc["faulty"] = cls.faulty;
        if (cls.fault) {
            jc["fault"] = io::fault_spec_to_json(*cls.fault);
            jc["fc_hz"] = *cls.fc_hz();
        }
        if (cls.ingest_path) jc["ingest_path"] = *cls.ingest_path;
        jc["source_seed"] = mix_seed(dc.base_seed, 0xC1A5, i);
        manifest["classes"].push_back(jc);
    }
    if (cfg.noise) {
        manifest["noise"] = {{"kind", synth::to_string(cfg.noise->kind)},
                             {"snr_db", cfg.noise->snr_db},
                             {"seed", cfg.noise->seed}};
    } else {
        manifest["noise"] = nullptr;
    }
    summary.manifest_path = out_dir + "/manifest.json";
    std::ofstream out(summary.manifest_path);
    require(out.good(), "synthesize_dataset: cannot write " + summary.manifest_path);
    out << manifest.dump(2) << "\n";
    return summary;
}

std::pair<SplitManifest, std::vector<LabeledSegment>> load_dataset_split(
    const std::string& dataset_dir, const std::string& split) {
    return load_split_dir(dataset_dir + "/" + split);
}

json load_dataset_manifest(const std::string& dataset_dir) {
    std::ifstream in(dataset_dir + "/manifest.json");
    require(in.good(), "load_dataset_manifest: missing manifest.json in " + dataset_dir);
    return json::parse(in);
}

} // namespace classbd::train
