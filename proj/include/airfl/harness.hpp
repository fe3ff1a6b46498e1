#pragma once

#include "airfl/learning.hpp"
#include "airfl/schemes.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace airfl::harness {

/// Configuration failed validation; carries every problem found.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct NamedScheme {
    std::string name; // record id; defaults to the scheme type
    schemes::SchemeConfig config;
};

/// Inputs to the `bound` command. Constants left unset are measured from the
/// task when `measure` is on (least-squares tasks only).
struct BoundSettings {
    learning::BoundKind kind = learning::BoundKind::Wafel;
    std::string scheme; // records to read; defaults to the kind's scheme type
    learning::BoundConstants constants;
    bool measure = false;
    std::size_t variance_draws = 200;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::size_t repetitions = 20;
    std::filesystem::path output_dir = "airfl_out";
    learning::TaskSpec task;
    learning::TrainingConfig training;
    learning::RadioSettings radio;
    std::optional<double> snr;
    std::optional<std::vector<double>> speeds; // heterogeneous devices
    std::vector<NamedScheme> schemes;
    std::optional<BoundSettings> bound;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON of a resolved config; parse_config accepts it back.
std::string dump_config(const ExperimentConfig& cfg);

struct RoundRecord {
    std::size_t repetition = 0;
    std::size_t round = 0;
    std::string scheme;
    double loss = 0.0;
    double accuracy = 0.0;
    double agg_error = 0.0;
    std::optional<double> pred_mse;
    std::size_t active_set = 0;
    double weight_norm = 0.0;
    std::vector<std::string> flags;

    bool operator==(const RoundRecord&) const = default;
};

inline constexpr const char* kRecordHeader =
    "repetition,round,scheme,loss,accuracy,agg_error,pred_mse,active_set,weight_norm,flags";

std::string format_record(const RoundRecord& r);
RoundRecord parse_record(const std::string& line);
std::vector<RoundRecord> read_records(std::istream& in);
std::vector<RoundRecord> read_records(const std::filesystem::path& path);

struct SchemeSeries {
    std::string scheme;
    std::vector<double> mean_accuracy; // per round, over repetitions that reached it
    std::vector<double> mean_loss;
    std::vector<std::size_t> count;
};

std::vector<SchemeSeries> summarize(const std::vector<RoundRecord>& records);
std::string summary_json(const std::vector<SchemeSeries>& series);

/// records.csv (header plus one row per record) and summary.json under dir.
void emit_records(const std::vector<RoundRecord>& records, const std::filesystem::path& dir);

struct RunResult {
    std::vector<RoundRecord> records;
    std::vector<std::string> aborted; // one message per failed (repetition, scheme)
    int exit_code() const { return aborted.empty() ? 0 : 2; }
};

/// Repetition r uses RngStream(seed, r); the task and every scheme share it,
/// so channels, noise, data and initial models are paired across schemes.
/// Writes records.csv (streamed), summary.json and config.json to output_dir.
RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

learning::FederatedTask repetition_task(const ExperimentConfig& cfg, std::size_t repetition);
std::optional<learning::HeterogeneityProfile> heterogeneity(const ExperimentConfig& cfg);

struct BoundReport {
    std::string kind;
    std::string scheme;
    std::vector<double> per_repetition;
    double mean = 0.0;
};

/// Evaluates the configured bound on each repetition's records in output_dir.
BoundReport evaluate_bound(const ExperimentConfig& cfg);

} // namespace airfl::harness
