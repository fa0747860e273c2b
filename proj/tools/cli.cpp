#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "duo/analysis.hpp"
#include "duo/channel.hpp"
#include "duo/combiner.hpp"
#include "duo/error.hpp"
#include "duo/experiment.hpp"
#include "duo/loss.hpp"
#include "duo/version.hpp"

namespace duo::cli {

namespace {

using nlohmann::json;

/// Inline JSON when the text starts with '{' or '[', otherwise a file path.
json load_json(const std::string& text, const char* what) {
    const auto first = text.find_first_not_of(" \t\n");
    try {
        if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) return json::parse(text);
        std::ifstream in(text);
        if (!in) throw ValidationError(std::string(what) + ": cannot open '" + text + "'");
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string(what) + ": malformed JSON (" + e.what() + ")");
    }
}

struct ChannelOptions {
    std::string channel = R"({"type":"bsc","delta":0.2})";
    std::string loss = R"({"type":"hamming","k":2})";
    std::string h = "min_norm";

    void attach(CLI::App& app) {
        app.set_help_flag("--help", "print this help message and exit");
        app.add_option("--channel", channel, "channel spec (inline JSON or file)");
        app.add_option("--loss", loss, "loss spec (inline JSON or file)");
        app.add_option("--h", h, "dual matrix choice: min_norm or canonical");
    }
};

struct Context {
    Channel channel;
    HMatrix h;
    LossMatrix loss;
};

Context make_context(const ChannelOptions& opts) {
    Channel ch = channel_from_json(load_json(opts.channel, "--channel"));
    HMatrix h = make_h(ch, parse_h_choice(opts.h));
    LossMatrix lm = loss_from_json(load_json(opts.loss, "--loss"));
    if (lm.size() != ch.input_size()) throw ValidationError("--loss does not match the channel input alphabet");
    return {std::move(ch), std::move(h), std::move(lm)};
}

Sequence parse_noisy(const std::string& text, const Channel& ch) {
    Sequence z = parse_sequence(text);
    if (z.empty()) throw ValidationError("--z: empty sequence");
    check_alphabet(z, ch.output_size(), "--z");
    return z;
}

json selection_json(const Selection& s) {
    return {{"chosen_index", s.chosen_index}, {"estimates", s.estimates}, {"tie", s.tie}};
}

json symbols_json(std::span<const Symbol> s) {
    json out = json::array();
    for (Symbol v : s) out.push_back(v);
    return out;
}

int cmd_verify(const std::string& suite, std::ostream& out) {
    const auto results = run_verify_suite(suite);
    bool ok = true;
    for (const auto& r : results) {
        out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
        ok = ok && r.passed;
    }
    out << (ok ? "all checks passed" : "some checks failed") << '\n';
    return ok ? exit_ok : exit_check_failed;
}

int cmd_estimate(const ChannelOptions& opts, const std::string& denoiser, const std::string& z_text,
                 const std::string& x_text, std::uint64_t seed, std::ostream& out) {
    const Context ctx = make_context(opts);
    const Sequence z = parse_noisy(z_text, ctx.channel);
    const json spec = load_json(denoiser, "--denoiser");
    json result;
    result["n"] = z.size();
    result["h_method"] = ctx.h.method;
    Sequence x;
    if (!x_text.empty()) {
        x = parse_sequence(x_text);
        if (x.size() != z.size()) throw ValidationError("--x and --z lengths differ");
        check_alphabet(x, ctx.channel.input_size(), "--x");
    }
    if (spec.is_object() && spec.value("type", "") == "smoothed") {
        const SmoothedDenoiserSpec sm = smoothed_from_json(spec, ctx.channel);
        RngStream rng = RngStream(seed, 0).derive(stream_tag::estimation_masks);
        const MaskEnsemble masks = MaskEnsemble::build(sm.smoothing, z.size(), rng);
        result["denoiser"] = spec;
        result["q"] = masks.q();
        result["smoothed_estimate"] = estimate_smoothed_loss(ctx.channel, ctx.h, ctx.loss, *sm.inner, masks, z);
        if (!x.empty()) result["smoothed_loss"] = smoothed_conditional_loss(ctx.loss, *sm.inner, masks, x, z);
    } else {
        const DenoiserPtr d = denoiser_from_json(spec, ctx.channel);
        result["denoiser"] = d->to_json();
        result["estimate"] = estimate_loss(ctx.channel, ctx.h, ctx.loss, *d, z);
        result["output"] = symbols_json(d->denoise(z));
        if (!x.empty()) result["loss"] = cumulative_loss(ctx.loss, x, d->denoise(z));
        if (ctx.channel.is_erasure()) result["erasure_estimate"] = erasure_estimate_loss(ctx.channel, ctx.loss, *d, z);
    }
    out << result.dump(2) << '\n';
    return exit_ok;
}

int cmd_combine(const ChannelOptions& opts, const std::string& denoisers, const std::string& z_text,
                const std::string& smoothing, std::uint64_t seed, std::ostream& out) {
    const Context ctx = make_context(opts);
    const Sequence z = parse_noisy(z_text, ctx.channel);
    const DenoiserPair pair = denoiser_pair_from_json(load_json(denoisers, "--denoisers"), ctx.channel);
    json result;
    if (smoothing.empty()) {
        const CombinedOutput c = combined_denoise(*pair.first, *pair.second, ctx.channel, ctx.h, ctx.loss, z);
        result["combiner"] = "plain";
        result["output"] = symbols_json(c.output);
        result["selection"] = selection_json(c.selection);
    } else {
        const SmoothingConfig cfg = smoothing_from_json(load_json(smoothing, "--smoothing"));
        const RandomizedOutput r = randomized_combined_denoise(*pair.first, *pair.second, ctx.channel, ctx.h, ctx.loss,
                                                               cfg, z, RngStream(seed, 0));
        result["combiner"] = "randomized";
        result["output"] = symbols_json(r.output);
        result["selection"] = selection_json(r.selection);
        result["mask"] = symbols_json(r.mask);
        result["smoothing"] = smoothing_to_json(cfg);
    }
    out << result.dump(2) << '\n';
    return exit_ok;
}

int cmd_experiment(const std::string& config_path, std::string out_path, const std::string& aggregate_path,
                   std::size_t threads, std::ostream& out) {
    const json raw = load_json(config_path, "--config");
    ExperimentConfig cfg = ExperimentConfig::from_json(raw);
    const std::filesystem::path base = std::filesystem::path(config_path).parent_path();
    if (cfg.clean_source.kind == CleanSourceKind::file && std::filesystem::path(cfg.clean_source.path).is_relative() &&
        config_path.find('{') == std::string::npos) {
        cfg.clean_source.path = (base / cfg.clean_source.path).string();
    }
    std::string format = cfg.output_format;
    if (!out_path.empty()) {
        const auto ext = std::filesystem::path(out_path).extension().string();
        format = ext == ".json" ? "json" : "csv";
    } else if (cfg.output_path) {
        out_path = *cfg.output_path;
    }

    const auto records = run_trials(cfg, threads);
    const json summary = aggregate(records, cfg);
    const bool randomized = cfg.combiner == CombinerKind::randomized;

    if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) throw ValidationError("cannot write '" + out_path + "'");
        if (format == "csv") {
            write_csv(file, records, randomized);
        } else {
            std::ostringstream csv;
            write_csv(csv, records, randomized);
            json doc = summary;
            json rows = json::array();
            std::istringstream lines(csv.str());
            std::string header;
            std::getline(lines, header);
            std::vector<std::string> names;
            std::stringstream hs(header);
            for (std::string name; std::getline(hs, name, ',');) names.push_back(name);
            for (std::string line; std::getline(lines, line);) {
                json row;
                std::stringstream ls(line);
                std::size_t col = 0;
                for (std::string cell; std::getline(ls, cell, ','); ++col) row[names.at(col)] = cell;
                rows.push_back(row);
            }
            doc["records"] = rows;
            file << doc.dump(2) << '\n';
        }
    }
    if (!aggregate_path.empty()) {
        std::ofstream file(aggregate_path, std::ios::binary);
        if (!file) throw ValidationError("cannot write '" + aggregate_path + "'");
        file << summary.dump(2) << '\n';
    }
    out << summary.dump(2) << '\n';
    return exit_ok;
}

int cmd_influence(const ChannelOptions& opts, const std::string& denoiser, const std::string& z_text,
                  std::size_t position, const std::string& x_text, std::size_t samples, std::uint64_t seed,
                  std::ostream& out) {
    const Context ctx = make_context(opts);
    const Sequence z = parse_noisy(z_text, ctx.channel);
    if (position >= z.size()) throw ValidationError("--i out of range");
    const SmoothedDenoiserSpec sm = smoothed_from_json(load_json(denoiser, "--denoiser"), ctx.channel);
    RngStream rng = RngStream(seed, 0).derive(stream_tag::estimation_masks);
    const MaskEnsemble masks = MaskEnsemble::build(sm.smoothing, z.size(), rng);
    const MeanEstimate pointwise = pointwise_influence(*sm.inner, position, masks, z);
    json result;
    result["n"] = z.size();
    result["i"] = position;
    result["q"] = masks.q();
    result["exact"] = masks.is_exact();
    result["pointwise"] = {{"value", pointwise.mean}, {"standard_error", pointwise.standard_error}};
    if (!x_text.empty()) {
        const Sequence x = parse_sequence(x_text);
        if (x.size() != z.size()) throw ValidationError("--x and --z lengths differ");
        const SequenceFunctional fbar = [&](std::span<const Symbol> s) {
            return smoothed_expected_output(*sm.inner, masks, s, position);
        };
        RngStream sample_rng = RngStream(seed, 0).derive(stream_tag::channel_noise);
        const MeanEstimate total = empirical_influence(fbar, x, ctx.channel, samples, sample_rng);
        result["empirical"] = {{"value", total.mean}, {"standard_error", total.standard_error}, {"samples", samples}};
    }
    out << result.dump(2) << '\n';
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"duo: loss-estimation combining of two denoisers"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "run the exact-oracle self checks");
    verify->add_option("--suite", suite, "unbiasedness|conditional|type_identity|erasure|influence|all");

    ChannelOptions estimate_opts;
    std::string denoiser;
    std::string z_text;
    std::string x_text;
    std::uint64_t seed = 1;
    auto* estimate = app.add_subcommand("estimate", "estimate a denoiser's loss on one noisy sequence");
    estimate_opts.attach(*estimate);
    estimate->add_option("--denoiser", denoiser, "denoiser spec (inline JSON or file)")->required();
    estimate->add_option("--z", z_text, "noisy sequence, e.g. 0,2,0,2")->required();
    estimate->add_option("--x", x_text, "clean sequence (reports the true loss too)");
    estimate->add_option("--seed", seed, "master seed for Monte Carlo masks");

    ChannelOptions combine_opts;
    std::string denoisers;
    std::string smoothing;
    auto* combine = app.add_subcommand("combine", "denoise with the estimate-minimizing denoiser of a pair");
    combine_opts.attach(*combine);
    combine->add_option("--denoisers", denoisers, "pair spec (inline JSON or file)")->required();
    combine->add_option("--z", z_text, "noisy sequence")->required();
    combine->add_option("--smoothing", smoothing, "smoothing config; selects the randomized combiner");
    combine->add_option("--seed", seed, "master seed");

    std::string config_path;
    std::string out_path;
    std::string aggregate_path;
    std::size_t threads = 0;
    auto* experiment = app.add_subcommand("experiment", "run Monte Carlo trials from a JSON config");
    experiment->add_option("--config", config_path, "experiment config (file or inline JSON)")->required();
    experiment->add_option("--out", out_path, "trial output (.csv or .json)");
    experiment->add_option("--aggregate", aggregate_path, "write the aggregate JSON here as well");
    experiment->add_option("--threads", threads, "worker count (default: DUO_THREADS or all cores)");

    ChannelOptions influence_opts;
    std::size_t position = 0;
    std::size_t samples = 200;
    auto* influence = app.add_subcommand("influence", "total influence of a smoothed denoiser output");
    influence_opts.attach(*influence);
    influence->add_option("--denoiser", denoiser, "smoothed denoiser spec")->required();
    influence->add_option("--z", z_text, "sequence at which to take the pointwise sum")->required();
    influence->add_option("--i", position, "output position");
    influence->add_option("--x", x_text, "clean sequence; adds the Monte Carlo total influence");
    influence->add_option("--samples", samples, "Monte Carlo samples for --x");
    influence->add_option("--seed", seed, "master seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }

    try {
        if (*verify) return cmd_verify(suite, out);
        if (*estimate) return cmd_estimate(estimate_opts, denoiser, z_text, x_text, seed, out);
        if (*combine) return cmd_combine(combine_opts, denoisers, z_text, smoothing, seed, out);
        if (*experiment) return cmd_experiment(config_path, out_path, aggregate_path, threads, out);
        if (*influence) {
            return cmd_influence(influence_opts, denoiser, z_text, position, x_text, samples, seed, out);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
    return exit_validation;
}

}  // namespace duo::cli
