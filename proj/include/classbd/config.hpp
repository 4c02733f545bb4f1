#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classbd/graph.hpp"
#include "classbd/synth.hpp"
#include "classbd/wdcnn.hpp"

namespace classbd::io {

/// One dataset class: either a synthetic fault spec or an ingested CSV.
struct ClassSpec {
    std::string name;
    std::optional<synth::FaultSpec> fault; ///< synthetic source
    std::optional<std::string> ingest_path; ///< external CSV source
    bool faulty = true; ///< include in FFI diagnostics

    /// Fault characteristic frequency 1/T for synthetic classes.
    std::optional<double> fc_hz() const {
        if (fault) return 1.0 / fault->fault_period_s;
        return std::nullopt;
    }
};

struct DatasetConfig {
    double sample_rate_hz = 8192.0;
    double duration_s = 16.0;
    std::size_t segment_length = 2048;
    std::size_t stride = 2048;
    double test_fraction = 0.25;
    double val_fraction = 0.2;
    std::uint64_t base_seed = 42;
    std::vector<ClassSpec> classes;
};

struct NoiseConfig {
    synth::NoiseKind kind = synth::NoiseKind::gaussian;
    double snr_db = -6.0;
    std::uint64_t seed = 7;
};

struct TimeFilterConfig {
    bool enabled = true;
    std::size_t channels = 16;
    std::size_t kernel_size = 64;
    ad::Activation activation = ad::Activation::identity;
    std::string init = "relinear"; ///< "relinear" or "identity"
};

struct FreqFilterConfig {
    bool enabled = true;
};

struct ModelConfig {
    TimeFilterConfig time_filter;
    FreqFilterConfig freq_filter;
    nn::WdcnnConfig classifier; ///< num_classes is filled from the dataset

    bool bd_enabled() const { return time_filter.enabled || freq_filter.enabled; }
};

struct TrainingConfig {
    double learning_rate = 0.1;
    double eta_min = 0.0;
    double momentum = 0.9;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 50;
    std::uint64_t seed = 1;
    bool enable_lt = true;
    bool enable_lf = true;
    bool uncertainty_weighting = true;
    std::string schedule = "epoch"; ///< cosine annealing granularity: "epoch" or "step"
};

struct OutputConfig {
    std::string dir = "runs/out";
    std::size_t checkpoint_every = 10;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    std::optional<NoiseConfig> noise = NoiseConfig{};
    ModelConfig model;
    TrainingConfig training;
    OutputConfig output;

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);

    /// FNV-1a hash of the canonical JSON dump; stamped into every artifact.
    std::string hash() const;
};

nlohmann::json fault_spec_to_json(const synth::FaultSpec& s);
synth::FaultSpec fault_spec_from_json(const nlohmann::json& j);

} // namespace classbd::io
