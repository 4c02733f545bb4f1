#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "classbd/time_series.hpp"

namespace classbd {

struct LabeledSegment {
    TimeSeries series;
    int class_id = 0;
};

/// Chronologically split, fixed-length dataset. Test segments always come
/// from strictly later source-signal time than train/validation segments.
struct DatasetSplit {
    std::vector<LabeledSegment> train;
    std::vector<LabeledSegment> validation;
    std::vector<LabeledSegment> test;
    int num_classes = 0;
    std::size_t segment_length = 0;

    void validate() const;

    /// Appends another split's segments; class counts and lengths must agree.
    void merge(const DatasetSplit& other);
};

/// Windows one source signal into segments. The trailing test_fraction of
/// the signal (by time) becomes the test region; the remainder is windowed
/// with the given stride and randomly partitioned into train/validation at
/// (1 - val_fraction) : val_fraction using the seed.
DatasetSplit segment_signal(const TimeSeries& signal, std::size_t segment_length,
                            std::size_t stride, double test_fraction, double val_fraction,
                            int class_id, std::uint64_t seed);

/// Reads a single-column CSV (header `value`, one sample per row).
TimeSeries read_csv_signal(const std::string& path, double sample_rate_hz);

void write_csv_signal(const std::string& path, const TimeSeries& signal);

/// Raw 32-bit little-endian float records.
void write_f32(const std::string& path, const std::vector<double>& samples);
std::vector<double> read_f32(const std::string& path);

/// On-disk dataset layout: one directory per split, one .f32 file per
/// segment, JSON sidecar with sample rate, segment length, labels and seeds.
struct SegmentRecord {
    std::string file;
    int class_id = 0;
    std::uint64_t noise_seed = 0;
    double snr_db = 0.0;
    std::optional<std::string> clean_file;     ///< pre-noise source window
    std::optional<std::string> noisy_raw_file; ///< post-noise, pre-normalization
};

struct SplitManifest {
    double sample_rate_hz = 0.0;
    std::size_t segment_length = 0;
    int num_classes = 0;
    std::vector<SegmentRecord> records;
};

void save_split_dir(const std::string& dir, const SplitManifest& manifest,
                    const std::vector<LabeledSegment>& segments);

/// Loads the sidecar and all referenced segment files.
std::pair<SplitManifest, std::vector<LabeledSegment>> load_split_dir(const std::string& dir);

} // namespace classbd
