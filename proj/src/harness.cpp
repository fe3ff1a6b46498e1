#include "airfl/harness.hpp"

#include "airfl/errors.hpp"
#include "airfl/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace airfl::harness {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
        out += (i ? sep : "") + parts[i];
    return out;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration: " + join(errors, "; ")), errors_(std::move(errors)) {}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

/// Strict view of one JSON object: typed reads record the key as known, and
/// finish() reports whatever is left over.
class Section {
public:
    Section(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (!obj_.is_object())
            fail("", "expected an object");
    }

    bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

    void real(const std::string& key, double& target) {
        if (const json* v = get(key)) {
            if (v->is_number())
                target = v->get<double>();
            else
                fail(key, "expected a number");
        }
    }

    void real(const std::string& key, std::optional<double>& target) {
        double v = 0.0;
        if (has(key)) {
            const auto before = errors_.size();
            real(key, v);
            if (errors_.size() == before)
                target = v;
        } else {
            known_.insert(key);
        }
    }

    void count(const std::string& key, std::size_t& target) {
        if (const json* v = get(key)) {
            if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
                target = static_cast<std::size_t>(v->get<std::int64_t>());
            else if (v->is_number_unsigned())
                target = v->get<std::size_t>();
            else
                fail(key, "expected a nonnegative integer");
        }
    }

    void seed(const std::string& key, std::uint64_t& target) {
        if (const json* v = get(key)) {
            if (v->is_number_unsigned())
                target = v->get<std::uint64_t>();
            else if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
                target = static_cast<std::uint64_t>(v->get<std::int64_t>());
            else
                fail(key, "expected a nonnegative integer");
        }
    }

    void flag(const std::string& key, bool& target) {
        if (const json* v = get(key)) {
            if (v->is_boolean())
                target = v->get<bool>();
            else
                fail(key, "expected true or false");
        }
    }

    void text(const std::string& key, std::string& target) {
        if (const json* v = get(key)) {
            if (v->is_string())
                target = v->get<std::string>();
            else
                fail(key, "expected a string");
        }
    }

    const json* child(const std::string& key) { return get(key); }
    std::vector<std::string>& errors() { return errors_; }

    void require(const std::string& key) {
        if (!has(key))
            fail(key, "required key is missing");
    }

    void fail(const std::string& key, const std::string& what) {
        errors_.push_back(name(key) + ": " + what);
    }

    std::string name(const std::string& key) const {
        if (key.empty())
            return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() {
        if (!obj_.is_object())
            return;
        for (const auto& [key, value] : obj_.items())
            if (!known_.count(key))
                fail(key, "unknown key");
    }

private:
    const json* get(const std::string& key) {
        known_.insert(key);
        if (!obj_.is_object() || !obj_.contains(key))
            return nullptr;
        return &obj_.at(key);
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> known_;
};

void parse_task(Section& sec, learning::TaskSpec& task) {
    sec.count("devices", task.devices);
    sec.count("classes", task.classes);
    sec.count("dim", task.dim);
    sec.count("samples_per_device", task.samples_per_device);
    sec.count("classes_per_device", task.classes_per_device);
    sec.count("test_samples", task.test_samples);
    sec.real("separation", task.separation);
    sec.real("noise_std", task.noise_std);
    sec.count("hidden", task.hidden);
    std::string loss = learning::to_string(task.loss);
    sec.text("loss", loss);
    try {
        task.loss = learning::loss_kind_from_string(loss);
    } catch (const ArgumentError& e) {
        sec.fail("loss", e.what());
    }
    if (task.devices < 1)
        sec.fail("devices", "must be >= 1");
    if (task.classes < 2)
        sec.fail("classes", "must be >= 2");
    if (task.dim < 1)
        sec.fail("dim", "must be >= 1");
    if (task.samples_per_device < 1)
        sec.fail("samples_per_device", "must be >= 1");
    if (task.classes_per_device < 1 || task.classes_per_device > task.classes)
        sec.fail("classes_per_device", "must lie in [1, classes]");
    if (task.test_samples < 1)
        sec.fail("test_samples", "must be >= 1");
    if (!(task.noise_std >= 0.0))
        sec.fail("noise_std", "must be >= 0");
    if (task.loss == learning::LossKind::Perceptron && task.hidden < 1)
        sec.fail("hidden", "must be >= 1");
    sec.finish();
}

void parse_training(Section& sec, learning::TrainingConfig& tr) {
    sec.real("mu", tr.mu);
    sec.count("tau", tr.tau);
    sec.count("rounds", tr.rounds);
    sec.count("batch", tr.batch);
    sec.real("lr_theta", tr.lr_theta);
    std::string schedule = tr.schedule == learning::LrSchedule::Constant ? "constant" : "diminishing";
    sec.text("schedule", schedule);
    if (schedule == "constant")
        tr.schedule = learning::LrSchedule::Constant;
    else if (schedule == "diminishing")
        tr.schedule = learning::LrSchedule::Diminishing;
    else
        sec.fail("schedule", "expected 'constant' or 'diminishing'");
    if (!(tr.mu > 0.0))
        sec.fail("mu", "must be > 0");
    if (tr.tau < 1)
        sec.fail("tau", "must be >= 1");
    if (tr.rounds < 1)
        sec.fail("rounds", "must be >= 1");
    if (tr.batch < 1)
        sec.fail("batch", "must be >= 1");
    if (!(tr.lr_theta > 0.0))
        sec.fail("lr_theta", "must be > 0");
    sec.finish();
}

void parse_radio(Section& sec, ExperimentConfig& cfg) {
    std::optional<double> snr;
    std::optional<double> power;
    std::optional<double> sigma_z2;
    sec.real("snr", snr);
    sec.real("power", power);
    sec.real("sigma_z2", sigma_z2);
    sec.real("sigma_h2", cfg.radio.sigma_h2);
    if (!(cfg.radio.sigma_h2 > 0.0))
        sec.fail("sigma_h2", "must be > 0");
    if (snr && !(*snr > 0.0))
        sec.fail("snr", "must be > 0");
    if (power && !(*power > 0.0))
        sec.fail("power", "must be > 0");
    if (sigma_z2 && !(*sigma_z2 >= 0.0))
        sec.fail("sigma_z2", "must be >= 0");
    if (power.has_value() != sigma_z2.has_value()) {
        sec.fail(power ? "sigma_z2" : "power", "give power and sigma_z2 together, or neither");
    } else if (power) {
        cfg.radio.power = *power;
        cfg.radio.sigma_z2 = *sigma_z2;
        if (snr && *sigma_z2 > 0.0 && std::abs(*power / *sigma_z2 - *snr) > 1e-12 * *snr)
            sec.fail("snr", "disagrees with power / sigma_z2");
    } else {
        cfg.radio.power = snr.value_or(10.0);
        cfg.radio.sigma_z2 = 1.0;
    }
    if (cfg.radio.sigma_z2 > 0.0)
        cfg.snr = cfg.radio.power / cfg.radio.sigma_z2;
    sec.finish();
}

std::optional<NamedScheme> parse_scheme(Section& sec) {
    std::string type;
    sec.require("type");
    sec.text("type", type);
    NamedScheme out;
    out.name = type;
    sec.text("name", out.name);
    if (type == "ideal") {
        out.config = schemes::IdealConfig{};
    } else if (type == "local_csit") {
        schemes::LocalCsitConfig c;
        sec.real("threshold", c.threshold);
        out.config = c;
    } else if (type == "global_csit") {
        schemes::GlobalCsitConfig c;
        sec.count("antennas", c.antennas);
        sec.real("threshold", c.threshold);
        out.config = c;
    } else if (type == "fully_blind") {
        schemes::FullyBlindConfig c;
        sec.count("antennas", c.antennas);
        out.config = c;
    } else if (type == "partial_phase") {
        schemes::PartialPhaseConfig c;
        sec.real("phase_error_bound", c.phase_error_bound);
        if (const json* j = sec.child("interference")) {
            Section isec(*j, sec.name("interference"), sec.errors());
            channel::Interference in{2.0, 1.0};
            isec.require("alpha");
            isec.require("delta");
            isec.real("alpha", in.alpha);
            isec.real("delta", in.delta);
            isec.finish();
            c.interference = in;
        }
        out.config = c;
    } else if (type == "wafel") {
        schemes::WafelConfig c;
        sec.real("mse_budget", c.mse_budget);
        sec.real("phase_error_bound", c.phase_error_bound);
        sec.flag("fixed_uniform", c.fixed_uniform);
        out.config = c;
    } else {
        if (!type.empty())
            sec.fail("type", "unknown scheme '" + type +
                                 "' (ideal, local_csit, global_csit, fully_blind, partial_phase, wafel)");
        sec.finish();
        return std::nullopt;
    }
    sec.finish();
    try {
        schemes::validate_scheme(out.config);
    } catch (const std::exception& e) {
        sec.fail("", e.what());
        return std::nullopt;
    }
    return out;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }
    std::vector<std::string> errors;
    ExperimentConfig cfg;
    Section top(root, "", errors);
    if (!root.is_object())
        throw ConfigError(errors);

    top.require("seed");
    top.require("schemes");
    top.seed("seed", cfg.seed);
    top.count("repetitions", cfg.repetitions);
    if (cfg.repetitions < 1)
        top.fail("repetitions", "must be >= 1");
    std::string out_dir = cfg.output_dir.string();
    top.text("output_dir", out_dir);
    cfg.output_dir = out_dir;

    if (const json* j = top.child("task")) {
        Section sec(*j, "task", errors);
        parse_task(sec, cfg.task);
    }
    if (const json* j = top.child("training")) {
        Section sec(*j, "training", errors);
        parse_training(sec, cfg.training);
    }
    {
        static const json empty = json::object();
        const json* j = top.child("radio");
        Section sec(j ? *j : empty, "radio", errors);
        parse_radio(sec, cfg);
    }
    if (const json* j = top.child("heterogeneity")) {
        Section sec(*j, "heterogeneity", errors);
        sec.require("speeds");
        if (const json* sp = sec.child("speeds")) {
            std::vector<double> speeds;
            if (!sp->is_array()) {
                sec.fail("speeds", "expected an array of numbers");
            } else {
                for (const auto& v : *sp) {
                    if (!v.is_number() || !(v.get<double>() > 0.0)) {
                        sec.fail("speeds", "every speed must be a positive number");
                        break;
                    }
                    speeds.push_back(v.get<double>());
                }
                if (speeds.size() != cfg.task.devices)
                    sec.fail("speeds", "needs one entry per device (" + std::to_string(cfg.task.devices) + ")");
                cfg.speeds = speeds;
            }
        }
        sec.finish();
    }
    if (const json* j = top.child("schemes")) {
        if (!j->is_array() || j->empty()) {
            top.fail("schemes", "expected a nonempty array");
        } else {
            std::set<std::string> names;
            for (std::size_t i = 0; i < j->size(); ++i) {
                Section sec((*j)[i], "schemes[" + std::to_string(i) + "]", errors);
                if (!(*j)[i].is_object())
                    continue;
                if (auto s = parse_scheme(sec)) {
                    if (!names.insert(s->name).second)
                        sec.fail("name", "duplicate scheme name '" + s->name + "'");
                    cfg.schemes.push_back(std::move(*s));
                }
            }
        }
    }
    if (const json* j = top.child("bound")) {
        Section sec(*j, "bound", errors);
        BoundSettings b;
        std::string kind = "wafel";
        sec.text("kind", kind);
        if (kind == "global_csit")
            b.kind = learning::BoundKind::GlobalCsit;
        else if (kind == "wafel")
            b.kind = learning::BoundKind::Wafel;
        else if (kind == "partial_phase")
            b.kind = learning::BoundKind::PartialPhase;
        else if (kind == "wafel_het")
            sec.fail("kind", "wafel_het needs per-device weights, which the record table does not keep");
        else
            sec.fail("kind", "expected global_csit, wafel or partial_phase");
        b.scheme = learning::to_string(b.kind);
        sec.text("scheme", b.scheme);
        sec.flag("measure", b.measure);
        sec.count("variance_draws", b.variance_draws);
        auto& c = b.constants;
        sec.real("L", c.L);
        sec.real("sigma_g2", c.sigma_g2);
        sec.real("gamma", c.gamma);
        sec.real("G", c.G);
        sec.real("C", c.C);
        sec.real("omega", c.omega);
        sec.real("sigma2_h_comp", c.sigma2_h_comp);
        sec.real("gamma_n", c.gamma_n);
        sec.real("loss_gap", c.loss_gap);
        sec.real("tail_alpha", c.tail_alpha);
        if (b.measure && cfg.task.loss != learning::LossKind::LeastSquares)
            sec.fail("measure", "constants can only be measured on the least_squares task");
        if (b.variance_draws < 1)
            sec.fail("variance_draws", "must be >= 1");
        sec.finish();
        cfg.bound = b;
    }
    top.finish();
    if (cfg.speeds && cfg.task.devices != cfg.speeds->size() && errors.empty())
        errors.emplace_back("heterogeneity.speeds: needs one entry per device");
    if (!errors.empty())
        throw ConfigError(std::move(errors));
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"cannot read " + path.string()});
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

json scheme_json(const NamedScheme& s) {
    json j;
    j["type"] = schemes::scheme_id(s.config);
    j["name"] = s.name;
    if (const auto* c = std::get_if<schemes::LocalCsitConfig>(&s.config)) {
        j["threshold"] = c->threshold;
    } else if (const auto* c = std::get_if<schemes::GlobalCsitConfig>(&s.config)) {
        j["antennas"] = c->antennas;
        j["threshold"] = c->threshold;
    } else if (const auto* c = std::get_if<schemes::FullyBlindConfig>(&s.config)) {
        j["antennas"] = c->antennas;
    } else if (const auto* c = std::get_if<schemes::PartialPhaseConfig>(&s.config)) {
        j["phase_error_bound"] = c->phase_error_bound;
        if (c->interference)
            j["interference"] = {{"alpha", c->interference->alpha}, {"delta", c->interference->delta}};
    } else if (const auto* c = std::get_if<schemes::WafelConfig>(&s.config)) {
        j["mse_budget"] = c->mse_budget;
        j["phase_error_bound"] = c->phase_error_bound;
        j["fixed_uniform"] = c->fixed_uniform;
    }
    return j;
}

} // namespace

std::string dump_config(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["repetitions"] = cfg.repetitions;
    j["output_dir"] = cfg.output_dir.string();
    const auto& t = cfg.task;
    j["task"] = {{"devices", t.devices},
                 {"classes", t.classes},
                 {"dim", t.dim},
                 {"samples_per_device", t.samples_per_device},
                 {"classes_per_device", t.classes_per_device},
                 {"test_samples", t.test_samples},
                 {"separation", t.separation},
                 {"noise_std", t.noise_std},
                 {"loss", learning::to_string(t.loss)},
                 {"hidden", t.hidden}};
    const auto& tr = cfg.training;
    j["training"] = {{"mu", tr.mu},
                     {"tau", tr.tau},
                     {"rounds", tr.rounds},
                     {"batch", tr.batch},
                     {"schedule", tr.schedule == learning::LrSchedule::Constant ? "constant" : "diminishing"},
                     {"lr_theta", tr.lr_theta}};
    j["radio"] = {{"power", cfg.radio.power}, {"sigma_z2", cfg.radio.sigma_z2}, {"sigma_h2", cfg.radio.sigma_h2}};
    if (cfg.speeds)
        j["heterogeneity"] = {{"speeds", *cfg.speeds}};
    j["schemes"] = json::array();
    for (const auto& s : cfg.schemes)
        j["schemes"].push_back(scheme_json(s));
    if (cfg.bound) {
        const auto& b = *cfg.bound;
        const auto& c = b.constants;
        j["bound"] = {{"kind", learning::to_string(b.kind)},
                      {"scheme", b.scheme},
                      {"measure", b.measure},
                      {"variance_draws", b.variance_draws},
                      {"L", c.L},
                      {"sigma_g2", c.sigma_g2},
                      {"gamma", c.gamma},
                      {"G", c.G},
                      {"C", c.C},
                      {"omega", c.omega},
                      {"sigma2_h_comp", c.sigma2_h_comp},
                      {"gamma_n", c.gamma_n},
                      {"loss_gap", c.loss_gap},
                      {"tail_alpha", c.tail_alpha}};
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Records.

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

double parse_real(const std::string& field, const char* name) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
        throw ArgumentError(std::string("record field ") + name + ": not a number: '" + field + "'");
    return v;
}

std::size_t parse_count(const std::string& field, const char* name) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(field, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (field.empty() || pos != field.size() || field[0] == '-')
        throw ArgumentError(std::string("record field ") + name + ": not a count: '" + field + "'");
    return static_cast<std::size_t>(v);
}

} // namespace

std::string format_record(const RoundRecord& r) {
    std::string line = std::to_string(r.repetition) + "," + std::to_string(r.round) + "," + r.scheme + "," +
                       fmt(r.loss) + "," + fmt(r.accuracy) + "," + fmt(r.agg_error) + "," +
                       (r.pred_mse ? fmt(*r.pred_mse) : std::string()) + "," + std::to_string(r.active_set) +
                       "," + fmt(r.weight_norm) + "," + join(r.flags, "|");
    return line;
}

RoundRecord parse_record(const std::string& line) {
    const auto f = split(line, ',');
    if (f.size() != 10)
        throw ArgumentError("record: expected 10 fields, got " + std::to_string(f.size()));
    RoundRecord r;
    r.repetition = parse_count(f[0], "repetition");
    r.round = parse_count(f[1], "round");
    r.scheme = f[2];
    r.loss = parse_real(f[3], "loss");
    r.accuracy = parse_real(f[4], "accuracy");
    r.agg_error = parse_real(f[5], "agg_error");
    if (!f[6].empty())
        r.pred_mse = parse_real(f[6], "pred_mse");
    r.active_set = parse_count(f[7], "active_set");
    r.weight_norm = parse_real(f[8], "weight_norm");
    if (!f[9].empty())
        r.flags = split(f[9], '|');
    return r;
}

std::vector<RoundRecord> read_records(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordHeader)
        throw ArgumentError("records: missing or unexpected header line");
    std::vector<RoundRecord> out;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(parse_record(line));
    return out;
}

std::vector<RoundRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    try {
        return read_records(in);
    } catch (const ArgumentError& e) {
        throw ArgumentError(path.string() + ": " + e.what());
    }
}

std::vector<SchemeSeries> summarize(const std::vector<RoundRecord>& records) {
    std::vector<SchemeSeries> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        auto [it, fresh] = index.try_emplace(r.scheme, out.size());
        if (fresh)
            out.push_back({r.scheme, {}, {}, {}});
        auto& s = out[it->second];
        if (s.count.size() <= r.round) {
            s.count.resize(r.round + 1, 0);
            s.mean_accuracy.resize(r.round + 1, 0.0);
            s.mean_loss.resize(r.round + 1, 0.0);
        }
        if (!std::isfinite(r.accuracy) || !std::isfinite(r.loss))
            continue; // the aborted round carries no metrics
        s.count[r.round] += 1;
        s.mean_accuracy[r.round] += r.accuracy;
        s.mean_loss[r.round] += r.loss;
    }
    for (auto& s : out)
        for (std::size_t t = 0; t < s.count.size(); ++t) {
            const double n = static_cast<double>(s.count[t]);
            s.mean_accuracy[t] = n > 0 ? s.mean_accuracy[t] / n : std::numeric_limits<double>::quiet_NaN();
            s.mean_loss[t] = n > 0 ? s.mean_loss[t] / n : std::numeric_limits<double>::quiet_NaN();
        }
    return out;
}

std::string summary_json(const std::vector<SchemeSeries>& series) {
    json j;
    j["schemes"] = json::object();
    for (const auto& s : series) {
        json acc = json::array();
        json loss = json::array();
        for (std::size_t t = 0; t < s.count.size(); ++t) {
            acc.push_back(s.count[t] ? json(s.mean_accuracy[t]) : json(nullptr));
            loss.push_back(s.count[t] ? json(s.mean_loss[t]) : json(nullptr));
        }
        j["schemes"][s.scheme] = {{"mean_accuracy", acc}, {"mean_loss", loss}, {"count", s.count}};
    }
    return j.dump(2) + "\n";
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace

void emit_records(const std::vector<RoundRecord>& records, const std::filesystem::path& dir) {
    ensure_dir(dir);
    const auto table = dir / "records.csv";
    auto out = open_output(table);
    out << kRecordHeader << '\n';
    for (const auto& r : records)
        out << format_record(r) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + table.string());
    write_text(dir / "summary.json", summary_json(summarize(records)));
}

// ---------------------------------------------------------------------------
// Experiments.

learning::FederatedTask repetition_task(const ExperimentConfig& cfg, std::size_t repetition) {
    const numerics::RngStream rng(cfg.seed, repetition);
    return learning::generate_synthetic_task(rng.child(learning::kTaskStream), cfg.task);
}

std::optional<learning::HeterogeneityProfile> heterogeneity(const ExperimentConfig& cfg) {
    if (!cfg.speeds)
        return std::nullopt;
    return learning::assign_heterogeneous_batches(*cfg.speeds, cfg.training.batch);
}

namespace {

RoundRecord to_record(std::size_t rep, const std::string& scheme, const learning::RoundStats& s) {
    RoundRecord r;
    r.repetition = rep;
    r.round = s.round;
    r.scheme = scheme;
    r.loss = s.loss;
    r.accuracy = s.accuracy;
    r.agg_error = s.agg_error;
    r.pred_mse = s.predicted_mse;
    r.active_set = s.active_set;
    r.weight_norm = s.weight_norm;
    if (s.empty_active_set)
        r.flags.emplace_back("empty_active_set");
    if (s.solver_fallback)
        r.flags.emplace_back("solver_fallback");
    return r;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    ensure_dir(cfg.output_dir);
    write_text(cfg.output_dir / "config.json", dump_config(cfg));
    const auto table = cfg.output_dir / "records.csv";
    auto out = open_output(table);
    out << kRecordHeader << '\n';

    RunResult result;
    const auto profile = heterogeneity(cfg);
    learning::RunOptions options;
    options.heterogeneity = profile;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const numerics::RngStream rng(cfg.seed, rep);
        const auto task = learning::generate_synthetic_task(rng.child(learning::kTaskStream), cfg.task);
        for (const auto& scheme : cfg.schemes) {
            std::vector<learning::RoundStats> rounds;
            std::optional<std::string> failure;
            try {
                rounds = learning::run_federated_training(task, scheme.config, cfg.training, cfg.radio, rng, options)
                             .rounds;
            } catch (const learning::TrainingAborted& e) {
                rounds = e.completed();
                failure = e.what();
            } catch (const std::exception& e) {
                failure = e.what();
            }
            for (const auto& s : rounds) {
                result.records.push_back(to_record(rep, scheme.name, s));
                out << format_record(result.records.back()) << '\n';
            }
            if (failure) {
                RoundRecord r;
                r.repetition = rep;
                r.round = rounds.size();
                r.scheme = scheme.name;
                r.loss = r.accuracy = r.agg_error = r.weight_norm = std::numeric_limits<double>::quiet_NaN();
                r.flags.emplace_back("aborted");
                result.records.push_back(r);
                out << format_record(r) << '\n';
                const std::string msg = "repetition " + std::to_string(rep) + ", " + scheme.name + ": " + *failure;
                result.aborted.push_back(msg);
                if (log)
                    *log << "error: " << msg << '\n';
            } else if (log && !rounds.empty()) {
                *log << "repetition " << rep << " " << scheme.name << ": final accuracy "
                     << rounds.back().accuracy << '\n';
            }
            out.flush();
        }
    }
    if (!out)
        throw std::runtime_error("write failed: " + table.string());
    write_text(cfg.output_dir / "summary.json", summary_json(summarize(result.records)));
    return result;
}

BoundReport evaluate_bound(const ExperimentConfig& cfg) {
    if (!cfg.bound)
        throw ConfigError({"bound: section required for the bound command"});
    const auto& settings = *cfg.bound;
    const auto records = read_records(cfg.output_dir / "records.csv");
    BoundReport report;
    report.kind = learning::to_string(settings.kind);
    report.scheme = settings.scheme;

    std::map<std::size_t, std::vector<learning::BoundRound>> by_rep;
    for (const auto& r : records) {
        if (r.scheme != settings.scheme)
            continue;
        if (std::find(r.flags.begin(), r.flags.end(), "aborted") != r.flags.end())
            throw std::runtime_error("bound: repetition " + std::to_string(r.repetition) + " of " + r.scheme +
                                     " aborted; no bound for a partial run");
        learning::BoundRound b;
        b.mse = r.agg_error * r.agg_error;
        b.active = r.active_set;
        b.alpha = {r.weight_norm}; // only ||alpha||^2 enters the homogeneous bound
        by_rep[r.repetition].push_back(b);
    }
    if (by_rep.empty())
        throw std::runtime_error("bound: no records for scheme '" + settings.scheme + "' in " +
                                 (cfg.output_dir / "records.csv").string());

    for (const auto& [rep, rounds] : by_rep) {
        auto constants = settings.constants;
        if (settings.measure) {
            const auto task = repetition_task(cfg, rep);
            const numerics::RngStream rng(cfg.seed, rep);
            const auto w0 = learning::initial_model(task.shape, rng.child(learning::kInitStream));
            const auto w_star = learning::optimal_least_squares_model(task);
            const std::vector<ModelVector> points{w0, w_star};
            constants.L = learning::measure_smoothness(task);
            constants.sigma_g2 = learning::measure_gradient_variance(task, points, cfg.training.batch,
                                                                     settings.variance_draws, rng.child(99));
            constants.loss_gap = learning::global_loss(task, w0) - learning::global_loss(task, w_star);
        }
        constants.model_size = learning::ModelShape{cfg.task.loss, cfg.task.classes, cfg.task.dim, cfg.task.hidden}
                                   .parameter_count();
        constants.devices = cfg.task.devices;
        const auto value = learning::eval_convergence_bound(settings.kind, constants, cfg.training, rounds);
        report.per_repetition.push_back(value.value);
    }
    double total = 0.0;
    for (double v : report.per_repetition)
        total += v;
    report.mean = total / static_cast<double>(report.per_repetition.size());
    return report;
}

} // namespace airfl::harness
