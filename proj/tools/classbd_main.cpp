#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "classbd/analysis.hpp"
#include "classbd/checkpoint.hpp"
#include "classbd/common.hpp"
#include "classbd/config.hpp"
#include "classbd/dataset.hpp"
#include "classbd/losses.hpp"
#include "classbd/med.hpp"
#include "classbd/synthesize.hpp"
#include "classbd/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace classbd;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

TimeSeries read_signal(const std::string& path, double sample_rate_hz) {
    if (path.ends_with(".csv")) return read_csv_signal(path, sample_rate_hz);
    return TimeSeries(read_f32(path), sample_rate_hz);
}

/// Rebuilds the model for a checkpoint: the config decides the topology, the
/// checkpoint meta pins segment length and class count.
train::ClassBdModel model_from_checkpoint(const io::ExperimentConfig& cfg,
                                          const std::string& checkpoint) {
    const json meta = io::peek_checkpoint_meta(checkpoint);
    const std::size_t segment_length = meta.at("segment_length").get<std::size_t>();
    const std::size_t num_classes = meta.at("num_classes").get<std::size_t>();
    train::ClassBdModel model(cfg, segment_length, num_classes);
    io::load_checkpoint(checkpoint, model.store());
    return model;
}

int run_synth(const std::string& config_path, const std::string& out_dir) {
    const auto cfg = io::ExperimentConfig::load(config_path);
    const auto summary = train::synthesize_dataset(cfg, out_dir);
    std::printf("dataset written to %s (train %zu, validation %zu, test %zu)\n", out_dir.c_str(),
                summary.train, summary.validation, summary.test);
    return kExitOk;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir, const std::string& resume_from,
              std::int64_t seed_override) {
    auto cfg = io::ExperimentConfig::load(config_path);
    if (seed_override >= 0) cfg.training.seed = static_cast<std::uint64_t>(seed_override);

    auto [manifest, train_segs] = train::load_dataset_split(data_dir, "train");
    require(manifest.num_classes == static_cast<int>(cfg.dataset.classes.size()),
            "train: dataset class count does not match the config");

    train::ClassBdModel model(cfg, manifest.segment_length,
                              static_cast<std::size_t>(manifest.num_classes));
    if (resume_from.empty()) model.init_params(cfg.training.seed);

    const auto result = train::train_model(model, train_segs, out_dir, resume_from);

    const bool append = !resume_from.empty() && fs::exists(out_dir + "/training_log.csv");
    std::ofstream log(out_dir + "/training_log.csv", append ? std::ios::app : std::ios::out);
    if (!append) log << train::log_csv_header() << "\n";
    for (const auto& row : result.log) log << train::log_row_csv(row) << "\n";

    auto [vmanifest, val_segs] = train::load_dataset_split(data_dir, "validation");
    json report;
    report["config_hash"] = cfg.hash();
    report["seed"] = cfg.training.seed;
    report["wall_clock_s"] = result.wall_clock_s;
    report["epochs"] = result.epochs_completed;
    report["checkpoint"] = result.checkpoint_path;
    report["training_log"] = out_dir + "/training_log.csv";
    if (!val_segs.empty()) {
        const auto vm = train::evaluate_split(model, val_segs, cfg.training.batch_size);
        report["validation"] = {{"macro_f1", vm.macro.f1}, {"macro_fpr", vm.macro.fpr}};
    }
    std::ofstream rep(out_dir + "/train_report.json");
    rep << report.dump(2) << "\n";
    std::printf("trained %zu epochs in %.1f s; checkpoint at %s\n", result.epochs_completed,
                result.wall_clock_s, result.checkpoint_path.c_str());
    return kExitOk;
}

int run_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& data_dir, const std::string& out_dir,
             const std::vector<double>& snr_list) {
    const auto cfg = io::ExperimentConfig::load(config_path);
    const auto model = model_from_checkpoint(cfg, checkpoint);
    train::EvalOptions opts;
    opts.snr_list = snr_list;
    opts.batch_size = cfg.training.batch_size;
    const json report = train::eval_report(model, data_dir, opts, out_dir);
    for (const auto& entry : report.at("per_snr"))
        std::printf("snr %8.3f dB  macro F1 %.4f  macro FPR %.4f\n",
                    entry.at("snr_db").get<double>(),
                    entry.at("macro").at("f1").get<double>(),
                    entry.at("macro").at("fpr").get<double>());
    std::printf("report written to %s/report.json\n", out_dir.c_str());
    return kExitOk;
}

int run_bd(const std::string& method, const std::string& in_path, double sample_rate,
           const std::string& out_dir, std::size_t filter_length, std::size_t max_iters,
           double tol, const std::string& config_path, const std::string& checkpoint) {
    fs::create_directories(out_dir);
    const TimeSeries x = read_signal(in_path, sample_rate);
    if (method == "med") {
        const auto res = med::med_deconvolve(x, filter_length, max_iters, tol);
        write_f32(out_dir + "/deconvolved.f32", res.output.samples);
        write_csv_signal(out_dir + "/deconvolved.csv", res.output);
        std::ofstream trace(out_dir + "/kurtosis_trace.csv");
        trace << "iteration,kurtosis\n";
        for (std::size_t i = 0; i < res.kurtosis_trace.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, res.kurtosis_trace[i]);
            trace << buf;
        }
        std::printf("MED: %zu iterations, kurtosis %.6g -> %.6g (%s)\n", res.iterations,
                    res.kurtosis_trace.front(), res.kurtosis_trace.back(),
                    res.converged ? "converged" : "stopped");
        return kExitOk;
    }
    if (method == "classbd") {
        require(!config_path.empty() && !checkpoint.empty(),
                "bd-run --method classbd needs --config and --checkpoint");
        const auto cfg = io::ExperimentConfig::load(config_path);
        const auto model = model_from_checkpoint(cfg, checkpoint);
        require(x.size() == model.segment_length(),
                "bd-run: input length must match the model segment length");
        const ad::Tensor in({1, x.size()}, x.samples);
        const TimeSeries xhat(model.time_filter_output(in).data, x.sample_rate_hz);
        const TimeSeries yhat(model.bd_output(in).data, x.sample_rate_hz);
        write_f32(out_dir + "/time_filter_out.f32", xhat.samples);
        write_f32(out_dir + "/bd_out.f32", yhat.samples);
        write_csv_signal(out_dir + "/bd_out.csv", yhat);
        std::printf("ClassBD filters applied; kurtosis %.6g -> %.6g\n",
                    loss::kurtosis(x.samples), loss::kurtosis(yhat.samples));
        return kExitOk;
    }
    throw ValidationError("bd-run: unknown method '" + method + "' (expected med or classbd)");
}

int run_ffi(const std::string& in_path, double sample_rate, double fc_hz, int harmonics) {
    const TimeSeries x = read_signal(in_path, sample_rate);
    const auto es = dsp::envelope_spectrum(x);
    const double ffi = dsp::fault_frequency_index(es, fc_hz, harmonics);
    std::printf("FFI(fc=%.6g Hz, %d harmonics) = %.6g\n", fc_hz, harmonics, ffi);
    return kExitOk;
}

int run_export_spectrum(const std::string& in_path, double sample_rate, const std::string& out_path,
                        bool envelope_domain) {
    const TimeSeries x = read_signal(in_path, sample_rate);
    if (envelope_domain)
        dsp::export_envelope_spectrum_csv(out_path, dsp::envelope_spectrum(x));
    else
        dsp::export_spectrum_csv(out_path, fft(x));
    std::printf("spectrum written to %s\n", out_path.c_str());
    return kExitOk;
}

int run_export_features(const std::string& config_path, const std::string& checkpoint,
                        const std::string& data_dir, const std::string& split,
                        const std::string& out_path) {
    const auto cfg = io::ExperimentConfig::load(config_path);
    const auto model = model_from_checkpoint(cfg, checkpoint);
    auto [manifest, segs] = train::load_dataset_split(data_dir, split);
    require(manifest.num_classes == static_cast<int>(model.num_classes()),
            "export-features: dataset and checkpoint class counts differ");
    train::export_features_csv(model, segs, out_path, cfg.training.batch_size);
    std::printf("features written to %s (%zu rows, %zu+1 columns)\n", out_path.c_str(), segs.size(),
                manifest.segment_length);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ClassBD: neural blind deconvolution toolkit for bearing fault diagnosis"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir = "out", checkpoint, resume_from;
    std::int64_t seed_override = -1;

    auto* synth_cmd = app.add_subcommand("synth", "synthesize a labeled dataset");
    synth_cmd->add_option("--config", config_path, "experiment config JSON")->required();
    synth_cmd->add_option("--out", out_dir, "output dataset directory")->required();

    auto* train_cmd = app.add_subcommand("train", "train the ClassBD pipeline");
    train_cmd->add_option("--config", config_path)->required();
    train_cmd->add_option("--data", data_dir, "dataset directory")->required();
    train_cmd->add_option("--out", out_dir, "run output directory");
    train_cmd->add_option("--resume", resume_from, "checkpoint to resume from");
    train_cmd->add_option("--seed", seed_override, "override training seed");

    std::vector<double> snr_list;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--config", config_path)->required();
    eval_cmd->add_option("--checkpoint", checkpoint)->required();
    eval_cmd->add_option("--data", data_dir)->required();
    eval_cmd->add_option("--out", out_dir);
    eval_cmd->add_option("--snr", snr_list, "SNR levels (dB) to re-noise and evaluate");

    std::string method = "med", in_path;
    double sample_rate = 8192.0, tol = 1e-6, fc_hz = 0.0;
    std::size_t filter_length = 64, max_iters = 100;
    auto* bd_cmd = app.add_subcommand("bd-run", "run a deconvolution method on one signal");
    bd_cmd->add_option("--method", method, "med or classbd");
    bd_cmd->add_option("--in", in_path, "input signal (.csv or .f32)")->required();
    bd_cmd->add_option("--sample-rate", sample_rate, "sample rate in Hz");
    bd_cmd->add_option("--out", out_dir);
    bd_cmd->add_option("--filter-length", filter_length, "MED filter length");
    bd_cmd->add_option("--max-iters", max_iters, "MED iteration cap");
    bd_cmd->add_option("--tol", tol, "MED convergence tolerance");
    bd_cmd->add_option("--config", config_path, "required for --method classbd");
    bd_cmd->add_option("--checkpoint", checkpoint, "required for --method classbd");

    int harmonics = 5;
    auto* ffi_cmd = app.add_subcommand("ffi", "fault frequency index of a signal");
    ffi_cmd->add_option("--in", in_path)->required();
    ffi_cmd->add_option("--sample-rate", sample_rate);
    ffi_cmd->add_option("--fc", fc_hz, "fault characteristic frequency (Hz)")->required();
    ffi_cmd->add_option("--harmonics", harmonics);

    std::string out_path = "spectrum.csv", split = "test";
    bool envelope_domain = false;
    auto* spec_cmd = app.add_subcommand("export-spectrum", "one-sided magnitude spectrum CSV");
    spec_cmd->add_option("--in", in_path)->required();
    spec_cmd->add_option("--sample-rate", sample_rate);
    spec_cmd->add_option("--out", out_path);
    spec_cmd->add_flag("--envelope", envelope_domain, "export the envelope spectrum instead");

    auto* feat_cmd = app.add_subcommand("export-features", "deconvolved segments as a feature CSV");
    feat_cmd->add_option("--config", config_path)->required();
    feat_cmd->add_option("--checkpoint", checkpoint)->required();
    feat_cmd->add_option("--data", data_dir)->required();
    feat_cmd->add_option("--split", split, "train, validation or test");
    feat_cmd->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return run_synth(config_path, out_dir);
        if (train_cmd->parsed())
            return run_train(config_path, data_dir, out_dir, resume_from, seed_override);
        if (eval_cmd->parsed()) return run_eval(config_path, checkpoint, data_dir, out_dir, snr_list);
        if (bd_cmd->parsed())
            return run_bd(method, in_path, sample_rate, out_dir, filter_length, max_iters, tol,
                          config_path, checkpoint);
        if (ffi_cmd->parsed()) return run_ffi(in_path, sample_rate, fc_hz, harmonics);
        if (spec_cmd->parsed())
            return run_export_spectrum(in_path, sample_rate, out_path, envelope_domain);
        if (feat_cmd->parsed())
            return run_export_features(config_path, checkpoint, data_dir, split, out_path);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
