#include "classbd/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "classbd/analysis.hpp"
#include "classbd/checkpoint.hpp"
#include "classbd/common.hpp"
#include "classbd/optim.hpp"
#include "classbd/synthesize.hpp"

namespace classbd::train {

namespace fs = std::filesystem;
using nlohmann::json;

ClassBdModel::ClassBdModel(const io::ExperimentConfig& cfg, std::size_t segment_length,
                           std::size_t num_classes)
    : cfg_(cfg), segment_length_(segment_length), num_classes_(num_classes) {
    require(segment_length >= 2, "ClassBdModel: segment_length must be >= 2");
    require(num_classes >= 2, "ClassBdModel: need at least two classes");
    if (cfg_.model.time_filter.enabled) {
        time_filter_.emplace(store_, "time_filter", cfg_.model.time_filter.channels,
                             cfg_.model.time_filter.kernel_size, cfg_.model.time_filter.activation);
    }
    if (cfg_.model.freq_filter.enabled) {
        freq_filter_.emplace(store_, "freq_filter", segment_length);
    }
    nn::WdcnnConfig cls = cfg_.model.classifier;
    cls.num_classes = num_classes;
    classifier_.emplace(store_, "classifier", cls, segment_length);
    s_c_ = &store_.create("loss/s_c", {1});
    s_t_ = &store_.create("loss/s_t", {1});
    s_f_ = &store_.create("loss/s_f", {1});
    s_c_->value[0] = s_t_->value[0] = s_f_->value[0] = -0.5;
}

void ClassBdModel::init_params(std::uint64_t seed) {
    if (time_filter_) {
        if (cfg_.model.time_filter.init == "identity")
            time_filter_->identity_init();
        else
            time_filter_->relinear_init(mix_seed(seed, 0x71F));
    }
    if (freq_filter_) freq_filter_->identity_init();
    classifier_->init(mix_seed(seed, 0xC1A5));
    s_c_->value[0] = s_t_->value[0] = s_f_->value[0] = -0.5;
}

loss::UncertaintyWeights ClassBdModel::sigmas() const {
    return {s_c_->value[0], s_t_->value[0], s_f_->value[0]};
}

ClassBdModel::ForwardResult ClassBdModel::forward(ad::Graph& g, const ad::Tensor& x_batch,
                                                  const std::vector<int>& labels) const {
    require(x_batch.shape.size() == 2, "ClassBdModel::forward: batch must be (B,N)");
    require(x_batch.dim(1) == segment_length_, "ClassBdModel::forward: segment length mismatch");
    const std::size_t batch = x_batch.dim(0);
    require(labels.size() == batch, "ClassBdModel::forward: label count mismatch");

    ad::Var in3 = g.input(ad::Tensor({batch, 1, segment_length_}, x_batch.data));
    ad::Var xhat;
    if (time_filter_) {
        xhat = g.reshape(time_filter_->forward(g, in3), {batch, segment_length_});
    } else {
        xhat = g.reshape(in3, {batch, segment_length_});
    }
    ad::Var yhat = freq_filter_ ? freq_filter_->forward(g, xhat) : xhat;
    ad::Var logits = classifier_->forward(g, yhat);
    ad::Var lc = g.cross_entropy(logits, labels);

    const bool want_lt = cfg_.training.enable_lt;
    const bool want_lf = cfg_.training.enable_lf;
    ad::Var lt = want_lt ? g.scale(g.kurtosis_mean(xhat), -1.0) : nullptr;
    ad::Var lf = want_lf ? g.es_sparsity(g.es_sqmag_nondc(g.analytic_envelope(yhat))) : nullptr;

    ad::Var total;
    if (cfg_.training.uncertainty_weighting) {
        auto weighted = [&](ad::Var l, ad::Parameter& s) {
            ad::Var sv = g.param(s);
            return g.add(g.mul(g.exp_op(g.scale(sv, -2.0)), l), sv);
        };
        total = weighted(lc, *s_c_);
        if (lt) total = g.add(total, weighted(lt, *s_t_));
        if (lf) total = g.add(total, weighted(lf, *s_f_));
    } else {
        total = lc;
        if (lt) total = g.add(total, lt);
        if (lf) total = g.add(total, lf);
    }

    ForwardResult res;
    res.xhat = xhat;
    res.yhat = yhat;
    res.logits = logits;
    res.total = total;
    res.breakdown.lc = lc->value.data[0];
    res.breakdown.lt = lt ? lt->value.data[0] : 0.0;
    res.breakdown.lf = lf ? lf->value.data[0] : 0.0;
    res.breakdown.weighted_total = total->value.data[0];
    res.breakdown.sigmas = sigmas();
    return res;
}

ad::Tensor ClassBdModel::time_filter_output(const ad::Tensor& x) const {
    require(x.shape.size() == 2, "time_filter_output: batch must be (B,N)");
    if (!time_filter_) return x;
    ad::Graph g;
    ad::Var in3 = g.input(ad::Tensor({x.dim(0), 1, x.dim(1)}, x.data));
    ad::Var out = time_filter_->forward(g, in3);
    return ad::Tensor({x.dim(0), x.dim(1)}, out->value.data);
}

ad::Tensor ClassBdModel::bd_output(const ad::Tensor& x) const {
    ad::Tensor xhat = time_filter_output(x);
    if (!freq_filter_) return xhat;
    ad::Graph g;
    ad::Var out = freq_filter_->forward(g, g.input(xhat));
    return out->value;
}

ad::Tensor ClassBdModel::logits(const ad::Tensor& x) const {
    ad::Tensor y = bd_output(x);
    ad::Graph g;
    return classifier_->forward(g, g.input(y))->value;
}

std::string log_csv_header() { return "epoch,step,lc,lt,lf,total,s_c,s_t,s_f,lr"; }

std::string log_row_csv(const LogRow& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  r.epoch, r.step, r.lc, r.lt, r.lf, r.total, r.s_c, r.s_t, r.s_f, r.lr);
    return buf;
}

namespace {

ad::Tensor gather_batch(const std::vector<LabeledSegment>& segs, const std::vector<std::size_t>& order,
                        std::size_t from, std::size_t to, std::vector<int>& labels) {
    const std::size_t b = to - from;
    const std::size_t n = segs[order[from]].series.size();
    ad::Tensor x = ad::Tensor::zeros({b, n});
    labels.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
        const auto& seg = segs[order[from + i]];
        std::copy(seg.series.samples.begin(), seg.series.samples.end(), x.data.begin() + i * n);
        labels[i] = seg.class_id;
    }
    return x;
}

} // namespace

TrainResult train_model(ClassBdModel& model, const std::vector<LabeledSegment>& train_segs,
                        const std::string& out_dir, const std::string& resume_from) {
    const auto& cfg = model.config();
    const auto& tc = cfg.training;
    opt::SgdConfig sgd{tc.learning_rate, tc.momentum, tc.batch_size, tc.max_epochs, tc.seed};
    sgd.validate();
    require(!train_segs.empty(), "train_model: empty training set");
    for (const auto& s : train_segs)
        require(s.series.size() == model.segment_length(), "train_model: segment length mismatch");
    fs::create_directories(out_dir);

    std::size_t start_epoch = 0;
    if (!resume_from.empty()) {
        const json meta = io::load_checkpoint(resume_from, model.store());
        start_epoch = meta.value("epoch", std::size_t{0});
        const std::string h = meta.value("config_hash", std::string());
        require(h == cfg.hash(), "train_model: checkpoint was produced by a different config");
    }

    const std::size_t steps_per_epoch = (train_segs.size() + tc.batch_size - 1) / tc.batch_size;
    opt::CosineSchedule sched;
    sched.eta_max = tc.learning_rate;
    sched.eta_min = tc.eta_min;
    sched.total_steps = tc.schedule == "epoch" ? tc.max_epochs : tc.max_epochs * steps_per_epoch;

    auto save_ck = [&](const std::string& name, std::size_t epoch) {
        json meta{{"epoch", epoch},
                  {"config_hash", cfg.hash()},
                  {"segment_length", model.segment_length()},
                  {"num_classes", model.num_classes()},
                  {"seed", tc.seed}};
        io::save_checkpoint(out_dir + "/" + name, model.store(), meta);
    };
    save_ck("checkpoint_last.bin", start_epoch);

    TrainResult res;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        for (std::size_t epoch = start_epoch; epoch < tc.max_epochs; ++epoch) {
            std::vector<std::size_t> order(train_segs.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::mt19937_64 rng(mix_seed(tc.seed, 0xE90C4, epoch));
            std::shuffle(order.begin(), order.end(), rng);

            for (std::size_t step = 0; step < steps_per_epoch; ++step) {
                const std::size_t from = step * tc.batch_size;
                const std::size_t to = std::min(from + tc.batch_size, train_segs.size());
                std::vector<int> labels;
                const ad::Tensor x = gather_batch(train_segs, order, from, to, labels);

                const std::size_t sched_step =
                    tc.schedule == "epoch" ? epoch : epoch * steps_per_epoch + step;
                const double lr = opt::cosine_lr(sched, sched_step);

                ad::Graph g;
                const auto fwd = model.forward(g, x, labels);
                if (!std::isfinite(fwd.breakdown.weighted_total))
                    throw NumericalError("train_model: non-finite loss at epoch " +
                                         std::to_string(epoch) + " step " + std::to_string(step));
                model.store().zero_grads();
                g.backward(fwd.total);
                opt::sgd_step(model.store(), sgd, lr);

                res.log.push_back({epoch, step, fwd.breakdown.lc, fwd.breakdown.lt,
                                   fwd.breakdown.lf, fwd.breakdown.weighted_total,
                                   fwd.breakdown.sigmas.s_c, fwd.breakdown.sigmas.s_t,
                                   fwd.breakdown.sigmas.s_f, lr});
            }
            res.epochs_completed = epoch + 1;
            save_ck("checkpoint_last.bin", epoch + 1);
            if ((epoch + 1) % cfg.output.checkpoint_every == 0 && epoch + 1 < tc.max_epochs)
                save_ck("checkpoint_epoch" + std::to_string(epoch + 1) + ".bin", epoch + 1);
        }
    } catch (const NumericalError&) {
        // checkpoint_last.bin still holds the state after the last completed epoch
        fs::copy_file(out_dir + "/checkpoint_last.bin", out_dir + "/checkpoint_lastgood.bin",
                      fs::copy_options::overwrite_existing);
        throw;
    }
    save_ck("checkpoint.bin", tc.max_epochs);
    res.checkpoint_path = out_dir + "/checkpoint.bin";
    res.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<int> predict_segments(const ClassBdModel& model,
                                  const std::vector<LabeledSegment>& segs,
                                  std::size_t batch_size) {
    require(batch_size > 0, "predict_segments: batch_size must be positive");
    std::vector<int> preds;
    preds.reserve(segs.size());
    std::vector<std::size_t> order(segs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t from = 0; from < segs.size(); from += batch_size) {
        const std::size_t to = std::min(from + batch_size, segs.size());
        std::vector<int> labels;
        const ad::Tensor x = gather_batch(segs, order, from, to, labels);
        const ad::Tensor lg = model.logits(x);
        const auto p = nn::predict(lg);
        preds.insert(preds.end(), p.begin(), p.end());
    }
    return preds;
}

metrics::MetricReport evaluate_split(const ClassBdModel& model,
                                     const std::vector<LabeledSegment>& segs,
                                     std::size_t batch_size) {
    require(!segs.empty(), "evaluate_split: empty split");
    const auto preds = predict_segments(model, segs, batch_size);
    std::vector<int> labels(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) labels[i] = segs[i].class_id;
    return metrics::evaluate_metrics(preds, labels, static_cast<int>(model.num_classes()));
}

std::vector<FfiStats> ffi_before_after(const ClassBdModel& model,
                                       const std::vector<LabeledSegment>& segs,
                                       const std::vector<io::ClassSpec>& classes,
                                       double sample_rate_hz) {
    std::vector<FfiStats> stats;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (!classes[c].faulty || !classes[c].fc_hz()) continue;
        FfiStats st;
        st.class_id = static_cast<int>(c);
        st.fc_hz = *classes[c].fc_hz();
        std::size_t improved = 0;
        for (const auto& seg : segs) {
            if (seg.class_id != st.class_id) continue;
            const ad::Tensor x({1, seg.series.size()}, seg.series.samples);
            const ad::Tensor y = model.bd_output(x);
            const TimeSeries after(y.data, sample_rate_hz);
            const double before =
                dsp::fault_frequency_index(dsp::envelope_spectrum(seg.series), st.fc_hz);
            const double after_ffi =
                dsp::fault_frequency_index(dsp::envelope_spectrum(after), st.fc_hz);
            st.mean_before += before;
            st.mean_after += after_ffi;
            if (after_ffi > before) ++improved;
            ++st.count;
        }
        if (st.count > 0) {
            st.mean_before /= static_cast<double>(st.count);
            st.mean_after /= static_cast<double>(st.count);
            st.improved_fraction = static_cast<double>(improved) / static_cast<double>(st.count);
        }
        stats.push_back(st);
    }
    return stats;
}

double kurtosis_improved_fraction(const ClassBdModel& model,
                                  const std::vector<LabeledSegment>& segs) {
    require(!segs.empty(), "kurtosis_improved_fraction: empty split");
    std::size_t improved = 0;
    for (const auto& seg : segs) {
        const ad::Tensor x({1, seg.series.size()}, seg.series.samples);
        const ad::Tensor xhat = model.time_filter_output(x);
        if (loss::kurtosis(xhat.data) > loss::kurtosis(seg.series.samples)) ++improved;
    }
    return static_cast<double>(improved) / static_cast<double>(segs.size());
}

void export_features_csv(const ClassBdModel& model, const std::vector<LabeledSegment>& segs,
                         const std::string& path, std::size_t batch_size) {
    require(!segs.empty(), "export_features_csv: empty split");
    std::ofstream out(path);
    require(out.good(), "export_features_csv: cannot open " + path);
    std::vector<std::size_t> order(segs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    char buf[40];
    for (std::size_t from = 0; from < segs.size(); from += batch_size) {
        const std::size_t to = std::min(from + batch_size, segs.size());
        std::vector<int> labels;
        const ad::Tensor x = gather_batch(segs, order, from, to, labels);
        const ad::Tensor y = model.bd_output(x);
        const std::size_t n = y.dim(1);
        for (std::size_t i = 0; i < to - from; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                std::snprintf(buf, sizeof(buf), "%.9g,", y.data[i * n + k]);
                out << buf;
            }
            out << labels[i] << "\n";
        }
    }
}

json eval_report(const ClassBdModel& model, const std::string& data_dir,
                 const EvalOptions& opts, const std::string& out_dir) {
    fs::create_directories(out_dir);
    auto [manifest, test_segs] = load_dataset_split(data_dir, "test");
    require(!test_segs.empty(), "eval_report: empty test split");
    require(manifest.num_classes == static_cast<int>(model.num_classes()),
            "eval_report: dataset and checkpoint class counts differ");

    const json dmanifest = load_dataset_manifest(data_dir);
    std::vector<io::ClassSpec> classes;
    for (const auto& jc : dmanifest.at("classes")) {
        io::ClassSpec c;
        c.name = jc.at("name").get<std::string>();
        c.faulty = jc.value("faulty", false);
        if (jc.contains("fault")) c.fault = io::fault_spec_from_json(jc["fault"]);
        classes.push_back(c);
    }
    synth::NoiseKind noise_kind = synth::NoiseKind::gaussian;
    if (dmanifest.contains("noise") && !dmanifest["noise"].is_null())
        noise_kind = synth::noise_kind_from_string(dmanifest["noise"].value("kind", "gaussian"));

    json report;
    report["config_hash"] = model.config().hash();
    report["num_classes"] = manifest.num_classes;
    report["segment_length"] = manifest.segment_length;
    report["dataset_dir"] = data_dir;
    report["per_snr"] = json::array();

    auto metrics_to_json = [](const metrics::MetricReport& rep) {
        json jm;
        jm["macro"] = {{"precision", rep.macro.precision},
                       {"recall", rep.macro.recall},
                       {"f1", rep.macro.f1},
                       {"fpr", rep.macro.fpr}};
        jm["per_class"] = json::array();
        for (const auto& m : rep.per_class)
            jm["per_class"].push_back({{"precision", m.precision},
                                       {"recall", m.recall},
                                       {"f1", m.f1},
                                       {"fpr", m.fpr}});
        jm["confusion"] = rep.confusion;
        return jm;
    };

    std::ofstream csv(out_dir + "/per_snr.csv");
    require(csv.good(), "eval_report: cannot write per_snr.csv");
    csv << "snr_db,macro_f1,macro_fpr\n";

    std::vector<double> snrs = opts.snr_list;
    const bool stored_only = snrs.empty();
    if (stored_only) snrs.push_back(manifest.records.empty() ? 0.0 : manifest.records[0].snr_db);

    for (std::size_t si = 0; si < snrs.size(); ++si) {
        const double snr = snrs[si];
        std::vector<LabeledSegment> at_snr;
        const bool matches_stored =
            stored_only ||
            (!manifest.records.empty() && std::abs(manifest.records[0].snr_db - snr) < 1e-12);
        if (matches_stored) {
            at_snr = test_segs;
        } else {
            at_snr.reserve(test_segs.size());
            for (std::size_t j = 0; j < manifest.records.size(); ++j) {
                const auto& rec = manifest.records[j];
                require(rec.clean_file.has_value(),
                        "eval_report: dataset lacks clean segments, cannot re-noise at a new SNR");
                TimeSeries clean(read_f32(data_dir + "/test/" + *rec.clean_file),
                                 manifest.sample_rate_hz);
                TimeSeries noisy = synth::add_noise_snr(clean, snr, noise_kind,
                                                        mix_seed(rec.noise_seed, 0x517, si));
                LabeledSegment seg;
                seg.class_id = rec.class_id;
                seg.series = zscore_normalize(noisy);
                at_snr.push_back(std::move(seg));
            }
        }
        const auto rep = evaluate_split(model, at_snr, opts.batch_size);
        json entry = metrics_to_json(rep);
        entry["snr_db"] = snr;
        report["per_snr"].push_back(entry);
        char line[96];
        std::snprintf(line, sizeof(line), "%.6g,%.10g,%.10g\n", snr, rep.macro.f1, rep.macro.fpr);
        csv << line;
    }

    report["ffi"] = json::array();
    const auto ffi = ffi_before_after(model, test_segs, classes, manifest.sample_rate_hz);
    for (const auto& st : ffi)
        report["ffi"].push_back({{"class_id", st.class_id},
                                 {"fc_hz", st.fc_hz},
                                 {"mean_before", st.mean_before},
                                 {"mean_after", st.mean_after},
                                 {"improved_fraction", st.improved_fraction},
                                 {"segments", st.count}});
    report["kurtosis_improved_fraction"] = kurtosis_improved_fraction(model, test_segs);

    // A few before/after envelope spectra for inspection.
    json spectra = json::array();
    std::size_t exported = 0;
    for (const auto& seg : test_segs) {
        if (exported >= opts.spectra_to_export) break;
        if (static_cast<std::size_t>(seg.class_id) >= classes.size() ||
            !classes[static_cast<std::size_t>(seg.class_id)].faulty)
            continue;
        const ad::Tensor x({1, seg.series.size()}, seg.series.samples);
        const TimeSeries after(model.bd_output(x).data, manifest.sample_rate_hz);
        const std::string before_csv = "es_before_" + std::to_string(exported) + ".csv";
        const std::string after_csv = "es_after_" + std::to_string(exported) + ".csv";
        dsp::export_envelope_spectrum_csv(out_dir + "/" + before_csv,
                                          dsp::envelope_spectrum(seg.series));
        dsp::export_envelope_spectrum_csv(out_dir + "/" + after_csv,
                                          dsp::envelope_spectrum(after));
        spectra.push_back({{"class_id", seg.class_id}, {"before", before_csv}, {"after", after_csv}});
        ++exported;
    }
    report["artifacts"] = {{"per_snr_csv", "per_snr.csv"}, {"spectra", spectra}};

    std::ofstream jout(out_dir + "/report.json");
    require(jout.good(), "eval_report: cannot write report.json");
    jout << report.dump(2) << "\n";
    return report;
}

} // namespace classbd::train
