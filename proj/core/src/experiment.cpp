#include "duo/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "duo/error.hpp"
#include "duo/summation.hpp"
#include "duo/version.hpp"
#include "json_util.hpp"

namespace duo {

// ------------------------------------------------------------------ config

Sequence CleanSource::generate(std::size_t n, std::size_t alphabet, RngStream rng) const {
    switch (kind) {
    case CleanSourceKind::all_zeros:
        return Sequence(n, 0);
    case CleanSourceKind::alternating: {
        Sequence x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<Symbol>(i % 2);
        return x;
    }
    case CleanSourceKind::iid_bernoulli: {
        Sequence x(n);
        for (auto& s : x) s = rng.bernoulli(p) ? 1 : 0;
        return x;
    }
    case CleanSourceKind::file: {
        std::ifstream in(path);
        if (!in) throw ValidationError("clean_source: cannot open '" + path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        Sequence x = parse_sequence(buffer.str());
        if (x.size() != n) {
            throw ValidationError("clean_source: file holds " + std::to_string(x.size()) + " symbols, expected n = " +
                                  std::to_string(n));
        }
        check_alphabet(x, alphabet, "clean_source");
        return x;
    }
    }
    throw ValidationError("clean_source: unknown kind");
}

namespace {

CleanSource clean_source_from_json(const nlohmann::json& j) {
    const std::string what = "clean_source";
    CleanSource src;
    const std::string type = detail::string_at(j, "type", what);
    if (type == "all_zeros") {
        detail::reject_unknown_keys(j, {"type"}, what);
        src.kind = CleanSourceKind::all_zeros;
    } else if (type == "alternating") {
        detail::reject_unknown_keys(j, {"type"}, what);
        src.kind = CleanSourceKind::alternating;
    } else if (type == "iid_bernoulli") {
        detail::reject_unknown_keys(j, {"type", "p"}, what);
        src.kind = CleanSourceKind::iid_bernoulli;
        src.p = detail::number_at(j, "p", what);
        if (!(src.p >= 0.0 && src.p <= 1.0)) throw ValidationError("clean_source: p must lie in [0, 1]");
    } else if (type == "file") {
        detail::reject_unknown_keys(j, {"type", "path"}, what);
        src.kind = CleanSourceKind::file;
        src.path = detail::string_at(j, "path", what);
    } else {
        throw ValidationError("clean_source: unknown type '" + type + "'");
    }
    return src;
}

nlohmann::json clean_source_to_json(const CleanSource& src) {
    switch (src.kind) {
    case CleanSourceKind::all_zeros:
        return {{"type", "all_zeros"}};
    case CleanSourceKind::alternating:
        return {{"type", "alternating"}};
    case CleanSourceKind::iid_bernoulli:
        return {{"type", "iid_bernoulli"}, {"p", src.p}};
    case CleanSourceKind::file:
        return {{"type", "file"}, {"path", src.path}};
    }
    return {};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    const std::string what = "config";
    detail::reject_unknown_keys(j, {"channel", "h", "loss", "n", "clean_source", "denoisers", "combiner", "trials",
                                    "epsilons", "master_seed", "output"},
                                what);
    ExperimentConfig cfg;
    if (!j.contains("channel")) throw ValidationError("config: missing 'channel'");
    cfg.channel = j.at("channel");
    if (j.contains("h")) cfg.h = parse_h_choice(detail::string_at(j, "h", what));
    if (j.contains("loss")) cfg.loss = j.at("loss");
    cfg.n = detail::count_at(j, "n", what);
    if (j.contains("clean_source")) cfg.clean_source = clean_source_from_json(j.at("clean_source"));
    if (!j.contains("denoisers")) throw ValidationError("config: missing 'denoisers'");
    cfg.denoisers = j.at("denoisers");
    if (j.contains("combiner")) {
        const auto& c = j.at("combiner");
        const std::string type = detail::string_at(c, "type", "combiner");
        if (type == "plain") {
            detail::reject_unknown_keys(c, {"type"}, "combiner");
            cfg.combiner = CombinerKind::plain;
        } else if (type == "randomized") {
            detail::reject_unknown_keys(c, {"type", "nu", "q", "mode", "m", "exact_threshold", "sampler"}, "combiner");
            cfg.combiner = CombinerKind::randomized;
            cfg.smoothing = smoothing_from_json(c);
        } else {
            throw ValidationError("combiner: unknown type '" + type + "'");
        }
    }
    cfg.trials = detail::count_at(j, "trials", what);
    if (j.contains("epsilons")) {
        if (!j.at("epsilons").is_array()) throw ValidationError("config: 'epsilons' must be an array");
        for (const auto& e : j.at("epsilons")) {
            if (!e.is_number()) throw ValidationError("config: 'epsilons' must hold numbers");
            cfg.epsilons.push_back(e.get<double>());
        }
    }
    if (j.contains("master_seed")) {
        const auto& s = j.at("master_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ValidationError("config: 'master_seed' must be a nonnegative integer");
        }
        cfg.master_seed = s.get<std::uint64_t>();
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        detail::reject_unknown_keys(o, {"path", "format"}, "output");
        cfg.output_path = detail::string_at(o, "path", "output");
        if (o.contains("format")) cfg.output_format = detail::string_at(o, "format", "output");
    }
    cfg.validate();
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["channel"] = channel;
    j["h"] = h == HChoice::canonical ? "canonical" : "min_norm";
    j["loss"] = loss;
    j["n"] = n;
    j["clean_source"] = clean_source_to_json(clean_source);
    j["denoisers"] = denoisers;
    if (combiner == CombinerKind::plain) {
        j["combiner"] = {{"type", "plain"}};
    } else {
        nlohmann::json c = smoothing_to_json(smoothing);
        c["type"] = "randomized";
        j["combiner"] = c;
    }
    j["trials"] = trials;
    j["epsilons"] = epsilons;
    j["master_seed"] = master_seed;
    if (output_path) j["output"] = {{"path", *output_path}, {"format", output_format}};
    return j;
}

void ExperimentConfig::validate() const {
    if (n < 1) throw ValidationError("config: n must be at least 1");
    if (trials < 1) throw ValidationError("config: trials must be at least 1");
    for (double e : epsilons) {
        if (!(e > 0.0)) throw ValidationError("config: epsilons must be positive");
    }
    if (output_format != "csv" && output_format != "json") {
        throw ValidationError("config: output format must be csv or json");
    }
    if (combiner == CombinerKind::randomized) smoothing.validate();
}

ExperimentSetup ExperimentSetup::from_config(const ExperimentConfig& cfg) {
    cfg.validate();
    Channel ch = channel_from_json(cfg.channel);
    HMatrix h = make_h(ch, cfg.h);
    LossMatrix lm = loss_from_json(cfg.loss);
    if (lm.size() != ch.input_size()) throw ValidationError("config: loss matrix does not match the channel");
    DenoiserPair pair = denoiser_pair_from_json(cfg.denoisers, ch);
    if (cfg.combiner == CombinerKind::randomized && !ch.is_binary()) {
        throw ValidationError("config: the randomized combiner needs a binary channel");
    }
    const RngStream clean_stream = RngStream(cfg.master_seed, 0).derive(stream_tag::clean_source);
    Sequence x = cfg.clean_source.generate(cfg.n, ch.input_size(), clean_stream);
    return ExperimentSetup{std::move(ch), std::move(h), std::move(lm), std::move(pair), std::move(x)};
}

// ------------------------------------------------------------------ trials

TrialRecord run_trial(const ExperimentSetup& setup, const ExperimentConfig& cfg, std::size_t trial) {
    const RngStream stream(cfg.master_seed, mix64(trial));
    const Denoiser& d1 = *setup.denoisers.first;
    const Denoiser& d2 = *setup.denoisers.second;
    const auto& x = setup.clean;

    TrialRecord r;
    r.trial = trial;
    r.seed = stream.stream_id();
    RngStream noise = stream.derive(stream_tag::channel_noise);
    const Sequence z = sample_output(setup.channel, x, noise);
    if (setup.channel.is_binary()) r.parity = ones_parity(z);

    const Sequence out1 = d1.denoise(z);
    const Sequence out2 = d2.denoise(z);
    r.loss_d1 = cumulative_loss(setup.loss, x, out1);
    r.loss_d2 = cumulative_loss(setup.loss, x, out2);
    r.est_d1 = estimate_loss(setup.channel, setup.h, setup.loss, d1, z);
    r.est_d2 = estimate_loss(setup.channel, setup.h, setup.loss, d2, z);
    const Selection plain = select_min_estimate(r.est_d1, r.est_d2);
    r.plain_chosen = plain.chosen_index;
    r.loss_plain = plain.chosen_index == 1 ? r.loss_d1 : r.loss_d2;
    r.chosen = r.plain_chosen;
    r.loss_combined = r.loss_plain;

    if (cfg.combiner == CombinerKind::randomized) {
        r.randomized = true;
        RngStream estimation = stream.derive(stream_tag::estimation_masks);
        RngStream output = stream.derive(stream_tag::output_mask);
        const MaskEnsemble masks = MaskEnsemble::build(cfg.smoothing, z.size(), estimation);
        const RandomizedOutput ru =
            randomized_combined_denoise(d1, d2, setup.channel, setup.h, setup.loss, cfg.smoothing, masks, z, output);
        r.sm_est_d1 = ru.smoothed_estimates[0];
        r.sm_est_d2 = ru.smoothed_estimates[1];
        r.sm_loss_d1 = smoothed_conditional_loss(setup.loss, d1, masks, x, z);
        r.sm_loss_d2 = smoothed_conditional_loss(setup.loss, d2, masks, x, z);
        r.chosen = ru.selection.chosen_index;
        r.loss_combined = cumulative_loss(setup.loss, x, ru.output);
        r.mask_weight = count_symbol(ru.mask, 1);
    }
    return r;
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("DUO_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, std::size_t threads) {
    const ExperimentSetup setup = ExperimentSetup::from_config(cfg);
    std::vector<TrialRecord> records(cfg.trials);
    if (threads == 0) threads = default_thread_count();
    threads = std::min(threads, cfg.trials);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t t = next++; t < cfg.trials; t = next++) {
            try {
                records[t] = run_trial(setup, cfg, t);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.trials;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

// ------------------------------------------------------------------ statistics

namespace {

double field_mean(const std::vector<TrialRecord>& records, double TrialRecord::*field) {
    CompensatedSum s;
    for (const auto& r : records) s.add(r.*field);
    return s.value() / static_cast<double>(records.size());
}

}  // namespace

MeanEstimate mean_of(const std::vector<TrialRecord>& records, double TrialRecord::*field) {
    if (records.empty()) throw ValidationError("mean_of: no records");
    const double mean = field_mean(records, field);
    if (records.size() < 2) return {mean, 0.0};
    CompensatedSum squares;
    for (const auto& r : records) squares.add((r.*field - mean) * (r.*field - mean));
    const double count = static_cast<double>(records.size());
    return {mean, std::sqrt(squares.value() / (count - 1.0) / count)};
}

MeanEstimate regret(const std::vector<TrialRecord>& records, CombinerKind which) {
    if (records.empty()) throw ValidationError("regret: no records");
    double TrialRecord::*combined = &TrialRecord::loss_plain;
    if (which == CombinerKind::randomized) {
        for (const auto& r : records) {
            if (!r.randomized) throw ValidationError("regret: records were not produced by the randomized combiner");
        }
        combined = &TrialRecord::loss_combined;
    }
    const double c = field_mean(records, combined);
    const double a = field_mean(records, &TrialRecord::loss_d1);
    const double b = field_mean(records, &TrialRecord::loss_d2);
    MeanEstimate out{c - std::min(a, b), 0.0};
    const std::size_t count = records.size();
    if (count < 2) return out;

    const double total = static_cast<double>(count);
    const double sc = c * total;
    const double sa = a * total;
    const double sb = b * total;
    std::vector<double> replicates(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& r = records[k];
        const double rest = total - 1.0;
        replicates[k] = (sc - r.*combined) / rest - std::min((sa - r.loss_d1) / rest, (sb - r.loss_d2) / rest);
    }
    const double mean = compensated_sum(replicates) / total;
    CompensatedSum squares;
    for (double v : replicates) squares.add((v - mean) * (v - mean));
    out.standard_error = std::sqrt((total - 1.0) / total * squares.value());
    return out;
}

std::array<Proportion, 2> deviation_probability(const std::vector<TrialRecord>& records, double eps, bool smoothed) {
    if (!(eps > 0.0)) throw ValidationError("deviation_probability: eps must be positive");
    if (records.empty()) throw ValidationError("deviation_probability: no records");
    std::array<std::size_t, 2> hits{0, 0};
    for (const auto& r : records) {
        if (smoothed && !r.randomized) throw ValidationError("deviation_probability: smoothed quantities not recorded");
        const double dev1 = smoothed ? r.sm_est_d1 - r.sm_loss_d1 : r.est_d1 - r.loss_d1;
        const double dev2 = smoothed ? r.sm_est_d2 - r.sm_loss_d2 : r.est_d2 - r.loss_d2;
        hits[0] += std::fabs(dev1) >= eps ? 1 : 0;
        hits[1] += std::fabs(dev2) >= eps ? 1 : 0;
    }
    const double count = static_cast<double>(records.size());
    std::array<Proportion, 2> out;
    for (std::size_t j = 0; j < 2; ++j) {
        const double p = static_cast<double>(hits[j]) / count;
        out[j] = {p, std::sqrt(p * (1.0 - p) / count)};
    }
    return out;
}

std::vector<TrialRecord> odd_parity(const std::vector<TrialRecord>& records) {
    std::vector<TrialRecord> out;
    for (const auto& r : records) {
        if (r.parity == 1) out.push_back(r);
    }
    return out;
}

// ------------------------------------------------------------------ output

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool randomized) {
    out << "trial,seed,parity,loss_d1,loss_d2,est_d1,est_d2,chosen,loss_combined";
    if (randomized) out << ",sm_loss_d1,sm_loss_d2,sm_est_d1,sm_est_d2,mask_weight";
    out << '\n';
    for (const auto& r : records) {
        out << r.trial << ',' << r.seed << ',';
        if (r.parity < 0) {
            out << "NA";
        } else {
            out << r.parity;
        }
        out << ',' << format_double(r.loss_d1) << ',' << format_double(r.loss_d2) << ',' << format_double(r.est_d1)
            << ',' << format_double(r.est_d2) << ',' << r.chosen << ',' << format_double(r.loss_combined);
        if (randomized) {
            out << ',' << format_double(r.sm_loss_d1) << ',' << format_double(r.sm_loss_d2) << ','
                << format_double(r.sm_est_d1) << ',' << format_double(r.sm_est_d2) << ',' << r.mask_weight;
        }
        out << '\n';
    }
}

namespace {

nlohmann::json estimate_json(const MeanEstimate& m) {
    return {{"mean", m.mean}, {"standard_error", m.standard_error}};
}

nlohmann::json summary_json(const std::vector<TrialRecord>& records, bool randomized) {
    nlohmann::json j;
    j["count"] = records.size();
    if (records.empty()) return j;
    j["loss_d1"] = estimate_json(mean_of(records, &TrialRecord::loss_d1));
    j["loss_d2"] = estimate_json(mean_of(records, &TrialRecord::loss_d2));
    j["est_d1"] = estimate_json(mean_of(records, &TrialRecord::est_d1));
    j["est_d2"] = estimate_json(mean_of(records, &TrialRecord::est_d2));
    j["loss_combined"] = estimate_json(mean_of(records, &TrialRecord::loss_combined));
    j["loss_plain_combined"] = estimate_json(mean_of(records, &TrialRecord::loss_plain));
    std::size_t chose2 = 0;
    for (const auto& r : records) chose2 += r.chosen == 2 ? 1 : 0;
    j["fraction_chosen_2"] = static_cast<double>(chose2) / static_cast<double>(records.size());
    if (randomized) {
        j["sm_loss_d1"] = estimate_json(mean_of(records, &TrialRecord::sm_loss_d1));
        j["sm_loss_d2"] = estimate_json(mean_of(records, &TrialRecord::sm_loss_d2));
        j["sm_est_d1"] = estimate_json(mean_of(records, &TrialRecord::sm_est_d1));
        j["sm_est_d2"] = estimate_json(mean_of(records, &TrialRecord::sm_est_d2));
    }
    return j;
}

nlohmann::json regret_json(const MeanEstimate& r, const char* combiner) {
    return {{"combiner", combiner}, {"value", r.mean}, {"standard_error", r.standard_error}};
}

}  // namespace

nlohmann::json aggregate(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg) {
    const bool randomized = cfg.combiner == CombinerKind::randomized;
    nlohmann::json j;
    j["version"] = version;
    j["config"] = cfg.to_json();
    j["trials"] = records.size();
    j["means"] = summary_json(records, randomized);
    j["odd_parity"] = summary_json(odd_parity(records), randomized);
    if (randomized) {
        j["regret"] = regret_json(regret(records, CombinerKind::randomized), "randomized");
        j["smoothing_q"] = cfg.smoothing.resolve_q(cfg.n);
    } else {
        j["regret"] = regret_json(regret(records, CombinerKind::plain), "plain");
    }
    j["regret_plain"] = regret_json(regret(records, CombinerKind::plain), "plain");
    nlohmann::json dev = nlohmann::json::object();
    for (double eps : cfg.epsilons) {
        nlohmann::json entry;
        const auto plain = deviation_probability(records, eps, false);
        entry["d1"] = {{"p", plain[0].p}, {"standard_error", plain[0].standard_error}};
        entry["d2"] = {{"p", plain[1].p}, {"standard_error", plain[1].standard_error}};
        if (randomized) {
            const auto sm = deviation_probability(records, eps, true);
            entry["smoothed_d1"] = {{"p", sm[0].p}, {"standard_error", sm[0].standard_error}};
            entry["smoothed_d2"] = {{"p", sm[1].p}, {"standard_error", sm[1].standard_error}};
        }
        dev[format_double(eps)] = entry;
    }
    j["deviation_probability"] = dev;
    return j;
}

}  // namespace duo
