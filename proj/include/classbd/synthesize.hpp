#pragma once

#include <string>

#include "classbd/config.hpp"
#include "classbd/dataset.hpp"

namespace classbd::train {

struct SynthSummary {
    std::size_t train = 0, validation = 0, test = 0;
    std::string manifest_path;
};

/// Generates the configured dataset and writes the on-disk layout:
/// train/validation/test split directories plus a root manifest.json with
/// per-class specs, seeds and the config hash. Each stored segment is the
/// z-scored noisy window; the pre-noise and pre-normalization buffers are
/// kept alongside for verification and SNR re-synthesis.
SynthSummary synthesize_dataset(const io::ExperimentConfig& cfg, const std::string& out_dir);

/// Loads one split ("train", "validation", "test") of a dataset directory.
std::pair<SplitManifest, std::vector<LabeledSegment>> load_dataset_split(
    const std::string& dataset_dir, const std::string& split);

/// Root manifest of a dataset directory.
nlohmann::json load_dataset_manifest(const std::string& dataset_dir);

} // namespace classbd::train
