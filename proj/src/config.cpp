#include "classbd/config.hpp"

#include <filesystem>
#include <fstream>

#include "classbd/common.hpp"

namespace classbd::io {

using nlohmann::json;

namespace {

ad::Activation activation_from_string(const std::string& s) {
    if (s == "identity") return ad::Activation::identity;
    if (s == "tanh") return ad::Activation::tanh;
    if (s == "relu") return ad::Activation::relu;
    throw ValidationError("unknown activation: " + s);
}

const char* activation_to_string(ad::Activation a) {
    switch (a) {
        case ad::Activation::identity: return "identity";
        case ad::Activation::tanh: return "tanh";
        case ad::Activation::relu: return "relu";
    }
    return "identity";
}

} // namespace

json fault_spec_to_json(const synth::FaultSpec& s) {
    return json{{"fault_period_s", s.fault_period_s},
                {"resonance_hz", s.resonance_hz},
                {"decay_rate", s.decay_rate},
                {"modulation_period_s", s.modulation_period_s},
                {"impulse_amplitude", s.impulse_amplitude},
                {"jitter_fraction", s.jitter_fraction}};
}

synth::FaultSpec fault_spec_from_json(const json& j) {
    synth::FaultSpec s;
    s.fault_period_s = j.at("fault_period_s").get<double>();
    s.resonance_hz = j.at("resonance_hz").get<double>();
    s.decay_rate = j.at("decay_rate").get<double>();
    s.modulation_period_s = j.value("modulation_period_s", 0.0);
    s.impulse_amplitude = j.value("impulse_amplitude", 1.0);
    s.jitter_fraction = j.value("jitter_fraction", 0.0);
    return s;
}

void ExperimentConfig::validate() const {
    require(dataset.sample_rate_hz > 0.0, "config: dataset.sample_rate_hz must be positive");
    require(dataset.duration_s > 0.0, "config: dataset.duration_s must be positive");
    require(dataset.segment_length >= 2, "config: dataset.segment_length must be >= 2");
    require(dataset.stride >= 1, "config: dataset.stride must be >= 1");
    require(dataset.test_fraction > 0.0 && dataset.test_fraction < 1.0,
            "config: dataset.test_fraction must lie in (0,1)");
    require(dataset.val_fraction > 0.0 && dataset.val_fraction < 1.0,
            "config: dataset.val_fraction must lie in (0,1)");
    require(dataset.classes.size() >= 2, "config: need at least two classes");
    for (const auto& c : dataset.classes) {
        require(!c.name.empty(), "config: class names must be non-empty");
        require(c.fault.has_value() != c.ingest_path.has_value(),
                "config: class '" + c.name + "' needs exactly one of fault spec or ingest path");
        if (c.fault) c.fault->validate(dataset.sample_rate_hz);
        if (c.ingest_path)
            require(std::filesystem::exists(*c.ingest_path),
                    "config: ingest path does not exist: " + *c.ingest_path);
    }
    require(model.time_filter.channels > 0 && model.time_filter.kernel_size > 0,
            "config: time filter dims must be positive");
    require(model.time_filter.init == "relinear" || model.time_filter.init == "identity",
            "config: time_filter.init must be 'relinear' or 'identity'");
    nn::WdcnnConfig cls = model.classifier;
    cls.num_classes = dataset.classes.size();
    cls.validate(dataset.segment_length);
    require(training.learning_rate > 0.0, "config: training.learning_rate must be positive");
    require(training.eta_min >= 0.0 && training.eta_min < training.learning_rate,
            "config: training.eta_min must lie in [0, learning_rate)");
    require(training.momentum >= 0.0 && training.momentum < 1.0,
            "config: training.momentum must lie in [0,1)");
    require(training.batch_size > 0 && training.max_epochs > 0,
            "config: training batch_size/max_epochs must be positive");
    require(training.schedule == "epoch" || training.schedule == "step",
            "config: training.schedule must be 'epoch' or 'step'");
    require(!output.dir.empty(), "config: output.dir must be set");
    require(output.checkpoint_every > 0, "config: output.checkpoint_every must be positive");
}

json ExperimentConfig::to_json() const {
    json j;
    j["dataset"]["sample_rate_hz"] = dataset.sample_rate_hz;
    j["dataset"]["duration_s"] = dataset.duration_s;
    j["dataset"]["segment_length"] = dataset.segment_length;
    j["dataset"]["stride"] = dataset.stride;
    j["dataset"]["test_fraction"] = dataset.test_fraction;
    j["dataset"]["val_fraction"] = dataset.val_fraction;
    j["dataset"]["base_seed"] = dataset.base_seed;
    j["dataset"]["classes"] = json::array();
    for (const auto& c : dataset.classes) {
        json jc;
        jc["name"] = c.name;
        jc["faulty"] = c.faulty;
        if (c.fault) jc["fault"] = fault_spec_to_json(*c.fault);
        if (c.ingest_path) jc["ingest_path"] = *c.ingest_path;
        j["dataset"]["classes"].push_back(jc);
    }
    if (noise) {
        j["noise"]["kind"] = synth::to_string(noise->kind);
        j["noise"]["snr_db"] = noise->snr_db;
        j["noise"]["seed"] = noise->seed;
    } else {
        j["noise"] = nullptr;
    }
    j["model"]["time_filter"] = {{"enabled", model.time_filter.enabled},
                                 {"channels", model.time_filter.channels},
                                 {"kernel_size", model.time_filter.kernel_size},
                                 {"activation", activation_to_string(model.time_filter.activation)},
                                 {"init", model.time_filter.init}};
    j["model"]["freq_filter"] = {{"enabled", model.freq_filter.enabled}};
    j["model"]["classifier"] = {{"first_kernel", model.classifier.first_kernel},
                                {"first_stride", model.classifier.first_stride},
                                {"stage_channels", model.classifier.stage_channels},
                                {"fc_width", model.classifier.fc_width}};
    j["training"] = {{"learning_rate", training.learning_rate},
                     {"eta_min", training.eta_min},
                     {"momentum", training.momentum},
                     {"batch_size", training.batch_size},
                     {"max_epochs", training.max_epochs},
                     {"seed", training.seed},
                     {"enable_lt", training.enable_lt},
                     {"enable_lf", training.enable_lf},
                     {"uncertainty_weighting", training.uncertainty_weighting},
                     {"schedule", training.schedule}};
    j["output"] = {{"dir", output.dir}, {"checkpoint_every", output.checkpoint_every}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    const json& jd = j.at("dataset");
    cfg.dataset.sample_rate_hz = jd.value("sample_rate_hz", cfg.dataset.sample_rate_hz);
    cfg.dataset.duration_s = jd.value("duration_s", cfg.dataset.duration_s);
    cfg.dataset.segment_length = jd.value("segment_length", cfg.dataset.segment_length);
    cfg.dataset.stride = jd.value("stride", cfg.dataset.stride);
    cfg.dataset.test_fraction = jd.value("test_fraction", cfg.dataset.test_fraction);
    cfg.dataset.val_fraction = jd.value("val_fraction", cfg.dataset.val_fraction);
    cfg.dataset.base_seed = jd.value("base_seed", cfg.dataset.base_seed);
    for (const auto& jc : jd.at("classes")) {
        ClassSpec c;
        c.name = jc.at("name").get<std::string>();
        if (jc.contains("fault") && !jc["fault"].is_null())
            c.fault = fault_spec_from_json(jc["fault"]);
        if (jc.contains("ingest_path")) c.ingest_path = jc["ingest_path"].get<std::string>();
        c.faulty = jc.value("faulty", c.fault.has_value());
        cfg.dataset.classes.push_back(c);
    }
    if (j.contains("noise") && !j["noise"].is_null()) {
        NoiseConfig nc;
        const json& jn = j["noise"];
        nc.kind = synth::noise_kind_from_string(jn.value("kind", std::string("gaussian")));
        nc.snr_db = jn.value("snr_db", -6.0);
        nc.seed = jn.value("seed", std::uint64_t{7});
        cfg.noise = nc;
    } else if (j.contains("noise")) {
        cfg.noise.reset();
    }
    if (j.contains("model")) {
        const json& jm = j["model"];
        if (jm.contains("time_filter")) {
            const json& jt = jm["time_filter"];
            cfg.model.time_filter.enabled = jt.value("enabled", true);
            cfg.model.time_filter.channels = jt.value("channels", std::size_t{16});
            cfg.model.time_filter.kernel_size = jt.value("kernel_size", std::size_t{64});
            cfg.model.time_filter.activation =
                activation_from_string(jt.value("activation", std::string("identity")));
            cfg.model.time_filter.init = jt.value("init", std::string("relinear"));
        }
        if (jm.contains("freq_filter"))
            cfg.model.freq_filter.enabled = jm["freq_filter"].value("enabled", true);
        if (jm.contains("classifier")) {
            const json& jc = jm["classifier"];
            cfg.model.classifier.first_kernel = jc.value("first_kernel", std::size_t{64});
            cfg.model.classifier.first_stride = jc.value("first_stride", std::size_t{16});
            if (jc.contains("stage_channels"))
                cfg.model.classifier.stage_channels = jc["stage_channels"].get<std::vector<std::size_t>>();
            cfg.model.classifier.fc_width = jc.value("fc_width", std::size_t{100});
        }
    }
    if (j.contains("training")) {
        const json& jt = j["training"];
        cfg.training.learning_rate = jt.value("learning_rate", cfg.training.learning_rate);
        cfg.training.eta_min = jt.value("eta_min", cfg.training.eta_min);
        cfg.training.momentum = jt.value("momentum", cfg.training.momentum);
        cfg.training.batch_size = jt.value("batch_size", cfg.training.batch_size);
        cfg.training.max_epochs = jt.value("max_epochs", cfg.training.max_epochs);
        cfg.training.seed = jt.value("seed", cfg.training.seed);
        cfg.training.enable_lt = jt.value("enable_lt", true);
        cfg.training.enable_lf = jt.value("enable_lf", true);
        cfg.training.uncertainty_weighting = jt.value("uncertainty_weighting", true);
        cfg.training.schedule = jt.value("schedule", std::string("epoch"));
    }
    if (j.contains("output")) {
        cfg.output.dir = j["output"].value("dir", cfg.output.dir);
        cfg.output.checkpoint_every = j["output"].value("checkpoint_every", cfg.output.checkpoint_every);
    }
    cfg.model.classifier.num_classes = cfg.dataset.classes.size();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "config: cannot open " + path);
    json j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    ExperimentConfig cfg = from_json(j);
    cfg.validate();
    return cfg;
}

std::string ExperimentConfig::hash() const {
    const std::string text = to_json().dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace classbd::io
