#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duo/analysis.hpp"
#include "duo/channel.hpp"
#include "duo/combiner.hpp"
#include "duo/denoiser.hpp"
#include "duo/loss.hpp"
#include "duo/smoothing.hpp"

namespace duo {

enum class CleanSourceKind { all_zeros, alternating, iid_bernoulli, file };

/// Clean input x^n, fixed for all trials of an experiment.
struct CleanSource {
    CleanSourceKind kind = CleanSourceKind::all_zeros;
    double p = 0.5;    // iid_bernoulli
    std::string path;  // file

    /// Bernoulli sources draw from rng once; file sources must have length n.
    Sequence generate(std::size_t n, std::size_t alphabet, RngStream rng) const;
};

enum class CombinerKind { plain, randomized };

struct ExperimentConfig {
    nlohmann::json channel = {{"type", "bsc"}, {"delta", 0.2}};
    HChoice h = HChoice::min_norm;
    nlohmann::json loss = {{"type", "hamming"}, {"k", 2}};
    std::size_t n = 1;
    CleanSource clean_source;
    nlohmann::json denoisers;
    CombinerKind combiner = CombinerKind::plain;
    SmoothingConfig smoothing;
    std::size_t trials = 1;
    std::vector<double> epsilons;
    std::uint64_t master_seed = 0;
    std::optional<std::string> output_path;
    std::string output_format = "csv";

    /// Unknown keys and out-of-range values raise ValidationError.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
};

/// Parsed, immutable experiment ingredients shared by all trials.
struct ExperimentSetup {
    Channel channel;
    HMatrix h;
    LossMatrix loss;
    DenoiserPair denoisers;
    Sequence clean;

    static ExperimentSetup from_config(const ExperimentConfig& cfg);
};

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    int parity = -1;  // (number of 1s in z) mod 2; -1 for non-binary channels
    double loss_d1 = 0.0;
    double loss_d2 = 0.0;
    double est_d1 = 0.0;
    double est_d2 = 0.0;
    int chosen = 1;           // emitted combiner's choice
    double loss_combined = 0.0;  // emitted combiner's loss
    int plain_chosen = 1;
    double loss_plain = 0.0;
    bool randomized = false;
    double sm_loss_d1 = 0.0;
    double sm_loss_d2 = 0.0;
    double sm_est_d1 = 0.0;
    double sm_est_d2 = 0.0;
    std::size_t mask_weight = 0;
};

/// One trial; all randomness derives from (master_seed, trial).
TrialRecord run_trial(const ExperimentSetup& setup, const ExperimentConfig& cfg, std::size_t trial);

/// Worker count from DUO_THREADS, else hardware concurrency.
std::size_t default_thread_count();

/// Runs cfg.trials trials on `threads` workers (0 = default_thread_count()).
/// Records come back in trial order regardless of scheduling.
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, std::size_t threads = 0);

/// mean(loss of the combiner) - min(mean loss_d1, mean loss_d2), with a
/// delete-one jackknife standard error. `randomized` needs randomized records.
MeanEstimate regret(const std::vector<TrialRecord>& records, CombinerKind which);

struct Proportion {
    double p = 0.0;
    double standard_error = 0.0;
};

/// Frequency of |estimate - loss| >= eps per denoiser (smoothed quantities
/// when `smoothed`), with binomial standard errors.
std::array<Proportion, 2> deviation_probability(const std::vector<TrialRecord>& records, double eps,
                                                bool smoothed);

std::vector<TrialRecord> odd_parity(const std::vector<TrialRecord>& records);

/// Sample mean of a record field with its standard error.
MeanEstimate mean_of(const std::vector<TrialRecord>& records, double TrialRecord::*field);

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool randomized);
nlohmann::json aggregate(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg);

/// Shortest round-trip decimal form; the CSV and JSON writers use it so that
/// output files are byte-stable.
std::string format_double(double v);

}  // namespace duo
