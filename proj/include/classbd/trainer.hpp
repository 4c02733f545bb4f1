#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "classbd/config.hpp"
#include "classbd/dataset.hpp"
#include "classbd/filters.hpp"
#include "classbd/losses.hpp"
#include "classbd/metrics.hpp"
#include "classbd/wdcnn.hpp"

namespace classbd::train {

/// The assembled pipeline: optional time/frequency deconvolution filters,
/// the classifier, and the three uncertainty log-sigmas, all registered in
/// one parameter store.
class ClassBdModel {
public:
    ClassBdModel(const io::ExperimentConfig& cfg, std::size_t segment_length,
                 std::size_t num_classes);

    void init_params(std::uint64_t seed);

    struct ForwardResult {
        ad::Var xhat = nullptr;  ///< time-filter tap
        ad::Var yhat = nullptr;  ///< frequency-filter tap (classifier input)
        ad::Var logits = nullptr;
        ad::Var total = nullptr; ///< scalar training objective
        loss::LossBreakdown breakdown;
    };

    /// Records the full training forward pass: filters, classifier and the
    /// enabled loss terms under the configured weighting scheme.
    ForwardResult forward(ad::Graph& g, const ad::Tensor& x_batch,
                          const std::vector<int>& labels) const;

    // Gradient-free inference over a (B,N) batch.
    ad::Tensor time_filter_output(const ad::Tensor& x) const;
    ad::Tensor bd_output(const ad::Tensor& x) const;
    ad::Tensor logits(const ad::Tensor& x) const;

    ad::ParameterStore& store() { return store_; }
    const ad::ParameterStore& store() const { return store_; }
    std::size_t segment_length() const { return segment_length_; }
    std::size_t num_classes() const { return num_classes_; }
    const io::ExperimentConfig& config() const { return cfg_; }

    const nn::TimeDomainFilter* time_filter() const { return time_filter_ ? &*time_filter_ : nullptr; }
    const nn::FrequencyDomainFilter* freq_filter() const { return freq_filter_ ? &*freq_filter_ : nullptr; }
    loss::UncertaintyWeights sigmas() const;

private:
    io::ExperimentConfig cfg_;
    std::size_t segment_length_;
    std::size_t num_classes_;
    ad::ParameterStore store_;
    std::optional<nn::TimeDomainFilter> time_filter_;
    std::optional<nn::FrequencyDomainFilter> freq_filter_;
    std::optional<nn::Wdcnn> classifier_;
    ad::Parameter *s_c_, *s_t_, *s_f_;
};

struct LogRow {
    std::size_t epoch = 0, step = 0;
    double lc = 0, lt = 0, lf = 0, total = 0;
    double s_c = 0, s_t = 0, s_f = 0, lr = 0;
};

std::string log_csv_header();
std::string log_row_csv(const LogRow& row);

struct TrainResult {
    std::vector<LogRow> log;
    std::string checkpoint_path;
    std::size_t epochs_completed = 0;
    double wall_clock_s = 0.0;
};

/// Single-threaded SGD + cosine annealing loop. Writes a rolling
/// end-of-epoch checkpoint, cadence checkpoints and the final one under
/// out_dir. A non-finite loss or gradient aborts with the last good
/// checkpoint preserved. Set resume_from to continue a run bit-for-bit.
TrainResult train_model(ClassBdModel& model, const std::vector<LabeledSegment>& train_segs,
                        const std::string& out_dir, const std::string& resume_from = "");

/// Batched prediction over segments.
std::vector<int> predict_segments(const ClassBdModel& model,
                                  const std::vector<LabeledSegment>& segs,
                                  std::size_t batch_size);

metrics::MetricReport evaluate_split(const ClassBdModel& model,
                                     const std::vector<LabeledSegment>& segs,
                                     std::size_t batch_size);

struct FfiStats {
    int class_id = 0;
    double fc_hz = 0.0;
    double mean_before = 0.0;
    double mean_after = 0.0;
    double improved_fraction = 0.0; ///< share of segments with FFI(after) > FFI(before)
    std::size_t count = 0;
};

/// FFI of each faulty segment's envelope spectrum, before vs after the
/// deconvolution front-end.
std::vector<FfiStats> ffi_before_after(const ClassBdModel& model,
                                       const std::vector<LabeledSegment>& segs,
                                       const std::vector<io::ClassSpec>& classes,
                                       double sample_rate_hz);

/// Share of segments whose time-filter output kurtosis exceeds the input's.
double kurtosis_improved_fraction(const ClassBdModel& model,
                                  const std::vector<LabeledSegment>& segs);

/// Writes one CSV row per segment: segment_length feature columns
/// (the deconvolved output) plus a trailing label column.
void export_features_csv(const ClassBdModel& model, const std::vector<LabeledSegment>& segs,
                         const std::string& path, std::size_t batch_size);

struct EvalOptions {
    std::vector<double> snr_list; ///< empty: evaluate the stored split as-is
    std::size_t batch_size = 128;
    std::size_t spectra_to_export = 4;
};

/// Full evaluation report: per-SNR macro F1/FPR (re-noising stored clean
/// segments when a different SNR is requested), FFI before/after, exported
/// sample spectra. Returns the report JSON; also writes CSV/JSON artifacts
/// under out_dir.
nlohmann::json eval_report(const ClassBdModel& model, const std::string& data_dir,
                           const EvalOptions& opts, const std::string& out_dir);

} // namespace classbd::train
