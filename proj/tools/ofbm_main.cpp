// ofbm: synthesis, wavelet analysis and estimation of bivariate operator
// fractional Brownian motion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ofbm/bound.hpp"
#include "ofbm/estimators.hpp"
#include "ofbm/experiment.hpp"
#include "ofbm/io.hpp"
#include "ofbm/model.hpp"
#include "ofbm/normality.hpp"
#include "ofbm/synthesis.hpp"

namespace fs = std::filesystem;
using namespace ofbm;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double number(const std::string& s) {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("not a number: " + s);
    return x;
}

std::size_t axis_of(const std::string& name) {
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (param_name(i) == name) return i;
    }
    throw std::invalid_argument("unknown parameter: " + name);
}

Theta parse_theta(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != kNumParams) throw std::invalid_argument("theta needs 7 comma-separated values");
    std::array<double, kNumParams> v{};
    for (std::size_t i = 0; i < kNumParams; ++i) v[i] = number(parts[i]);
    return Theta::from_array(v);
}

void parse_delta(const std::string& s, BnbConfig& c) {
    const auto parts = split(s, ',');
    if (parts.size() == 1) {
        c.set_delta(number(parts[0]));
    } else if (parts.size() == kNumParams) {
        for (std::size_t i = 0; i < kNumParams; ++i) c.delta[i] = number(parts[i]);
    } else {
        throw std::invalid_argument("--delta takes one value or seven");
    }
}

/// `name=value` pairs.
void parse_freeze(const std::vector<std::string>& items, BnbConfig& c) {
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--freeze expects name=value: " + item);
        c.frozen[axis_of(item.substr(0, eq))] = number(item.substr(eq + 1));
    }
}

fs::path in_dir(const fs::path& dir, const fs::path& file) {
    return file.is_absolute() || dir.empty() ? file : dir / file;
}

struct Common {
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 1;
};

struct AnalysisFlags {
    int n_psi = 2;
    int j1 = 1;
    int j2 = 0;
    std::string boundary = "truncate";

    void add(CLI::App* app) {
        app->add_option("--n-psi", n_psi, "Vanishing moments of the wavelet (2, 3 or 4)")->capture_default_str();
        app->add_option("--j1", j1, "Finest octave")->capture_default_str();
        app->add_option("--j2", j2, "Coarsest octave; 0 for log2(N) - n_psi - 1")->capture_default_str();
        app->add_option("--boundary", boundary, "truncate or periodic")->capture_default_str();
    }

    AnalysisConfig config() const {
        AnalysisConfig c;
        c.n_psi = n_psi;
        c.j1 = j1;
        c.j2 = j2;
        c.boundary = parse_boundary(boundary);
        return c;
    }
};

int run_synth(const Common& common, const std::string& theta_text, std::size_t n, const std::string& out) {
    SynthesisConfig c;
    c.theta = parse_theta(theta_text);
    c.n = n;
    c.seed = common.seed;
    const Path path = synthesize(c);
    const fs::path file = in_dir(common.out_dir, out);
    write_path_csv(path, file);
    std::cout << "wrote " << file.string() << " (" << path.size() << " samples)\n";
    return 0;
}

int run_analyze(const Common& common, const AnalysisFlags& flags, const std::string& in, const std::string& out) {
    const Path path = read_path_csv(in);
    const SampleSpectrum s = analyze(path, flags.config());
    const fs::path file = in_dir(common.out_dir, out);
    write_spectrum_csv(s, file);
    std::cout << "wrote " << file.string() << " (octaves " << s.j1() << ".." << s.j2() << ")\n";
    return 0;
}

struct EstimateFlags {
    std::string in;
    std::string method = "m";
    std::string delta = "0.02";
    int delta_relax = 20;
    std::size_t max_iters = 2'000'000;
    double max_seconds = 0.0;
    double sigma_max = 0.0;
    std::string eta_model = "sampled";
    std::vector<std::string> freeze;
    bool weighted = false;
    bool no_polish = false;
    std::string trace;
    std::string debug_bound;
    std::string out = "estimate.json";
};

int run_estimate(const Common& common, const EstimateFlags& f) {
    const SampleSpectrum spectrum = read_spectrum_csv(f.in);
    const Method method = parse_method(f.method);
    EstimationResult r;
    std::ostringstream config;
    config << "method=" << short_name(method) << " input=" << f.in;
    if (method == Method::m_bb) {
        BnbConfig c;
        parse_delta(f.delta, c);
        c.delta_relax = f.delta_relax;
        c.max_iters = f.max_iters;
        c.max_seconds = f.max_seconds;
        c.threads = common.threads;
        c.sigma_max = f.sigma_max;
        c.polish = !f.no_polish;
        parse_freeze(f.freeze, c);
        std::ofstream trace;
        if (!f.trace.empty()) {
            const fs::path file = in_dir(common.out_dir, f.trace);
            if (file.has_parent_path()) fs::create_directories(file.parent_path());
            trace.open(file);
            if (!trace) throw std::runtime_error("cannot write " + file.string());
            c.trace = &trace;
        }
        const EtaModel eta = parse_eta_model(f.eta_model);
        const Objective objective(spectrum, shared_eta_set(spectrum.n_psi, eta));
        r = estimate_m(objective, c);
        config << " delta=" << f.delta << " delta_relax=" << c.delta_relax << " max_iters=" << c.max_iters
               << " max_seconds=" << c.max_seconds << " eta_model=" << f.eta_model
               << " polish=" << (c.polish ? "true" : "false");
        for (const auto& fr : f.freeze) config << " freeze:" << fr;
        if (!f.debug_bound.empty()) {
            // Box of width delta around the estimate.
            ParamBox box;
            const auto v = r.theta_hat.to_array();
            for (std::size_t i = 0; i < kNumParams; ++i) {
                box[i] = c.frozen[i] ? Interval(*c.frozen[i]) : Interval(v[i] - 0.5 * c.delta[i], v[i] + 0.5 * c.delta[i]);
            }
            const BoundResult b = bound_cn(box, objective);
            write_text(in_dir(common.out_dir, f.debug_bound), bound_terms_json(box, b, bound_terms(box, objective)));
        }
    } else {
        RegressionOptions opt;
        opt.weighted = f.weighted;
        config << " weighted=" << (f.weighted ? "true" : "false");
        r = method == Method::univariate ? estimate_univariate(spectrum, opt) : estimate_eigen(spectrum, opt);
    }
    const std::string json = estimation_json(r, config.str());
    write_text(in_dir(common.out_dir, f.out), json);
    std::cout << json;
    return 0;
}

int run_mc_cmd(const Common& common, const std::string& plan_file, const std::vector<std::string>& sets,
               bool seed_given, bool threads_given) {
    ExperimentPlan plan;
    if (!plan_file.empty()) {
        std::ifstream in(plan_file);
        if (!in) throw std::runtime_error("cannot read " + plan_file);
        plan = parse_plan(in);
    }
    if (seed_given) plan.seed_base = common.seed;
    if (threads_given) plan.threads = common.threads;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value: " + s);
        apply_setting(plan, s.substr(0, eq), s.substr(eq + 1));
    }
    plan.validate();
    const std::string resolved = format_plan(plan);
    const fs::path dir = common.out_dir.empty() ? fs::path("mc_out") : fs::path(common.out_dir);
    fs::create_directories(dir);
    write_text(dir / "plan.txt", resolved);

    const auto t0 = std::chrono::steady_clock::now();
    const McOutput out = run_mc(plan);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream runs, summary, timing;
    write_runs_csv(out.runs, runs);
    write_summary_csv(out.summary, summary);
    write_timing_csv(out.summary, timing);
    write_text(dir / "runs.csv", runs.str());
    write_text(dir / "summary.csv", summary.str());
    write_text(dir / "timing.csv", timing.str());
    write_text(dir / "summary.json", summary_json(out.summary, resolved));
    std::cout << out.runs.size() << " runs, " << out.summary.failures << " failed, " << secs << " s; outputs in "
              << dir.string() << "\n";
    return out.summary.failures == 0 ? 0 : 1;
}

int run_normality(const Common& common, const std::string& in, std::vector<std::string> columns,
                  const std::string& method, long theta_index, long n, std::size_t min_samples,
                  const std::string& out) {
    // Rows of a runs CSV can be filtered by method, theta and sample size.
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    {
        std::ifstream f(in);
        if (!f) throw std::runtime_error("cannot read " + in);
        std::string line;
        if (!std::getline(f, line)) throw std::runtime_error("empty file " + in);
        std::stringstream hs(line);
        for (std::string c; std::getline(hs, c, ',');) header.push_back(c);
        while (std::getline(f, line)) {
            std::vector<std::string> r;
            std::stringstream ls(line);
            for (std::string c; std::getline(ls, c, ',');) r.push_back(c);
            rows.push_back(std::move(r));
        }
    }
    auto col = [&](const std::string& name) -> long {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<long>(i);
        }
        return -1;
    };
    if (columns.empty()) columns = {"h1", "h2"};
    const long mcol = col("method"), tcol = col("theta_index"), ncol = col("n");
    auto keep = [&](const std::vector<std::string>& r) {
        auto at = [&](long c) { return c >= 0 && static_cast<std::size_t>(c) < r.size() ? r[c] : std::string(); };
        if (!method.empty() && mcol >= 0 && at(mcol) != method) return false;
        if (theta_index >= 0 && tcol >= 0 && at(tcol) != std::to_string(theta_index)) return false;
        if (n > 0 && ncol >= 0 && at(ncol) != std::to_string(n)) return false;
        return true;
    };
    std::ostringstream json;
    json.precision(17);
    json << "{\n  \"input\": \"" << in << "\",\n  \"columns\": {";
    bool first = true;
    for (const auto& name : columns) {
        const long c = col(name);
        if (c < 0) throw std::runtime_error("no column '" + name + "' in " + in);
        std::vector<double> x;
        for (const auto& r : rows) {
            if (!keep(r) || static_cast<std::size_t>(c) >= r.size() || r[c].empty()) continue;
            x.push_back(number(r[c]));
        }
        const NormalityResult nr = normality_check(x, min_samples);
        json << (first ? "\n" : ",\n") << "    \"" << name << "\": {\"kl\": " << nr.kl << ", \"bins\": " << nr.bins
             << ", \"n\": " << nr.n << ", \"mean\": " << nr.mean << ", \"sd\": " << nr.sd << "}";
        first = false;
        std::cout << name << ": KL=" << nr.kl << " (" << nr.n << " samples, " << nr.bins << " bins)\n";
    }
    json << "\n  }\n}\n";
    write_text(in_dir(common.out_dir, out), json.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bivariate operator fractional Brownian motion: synthesis, wavelet analysis, estimation"};
    app.require_subcommand(1);
    Common common;
    auto* seed_opt = app.add_option("--seed", common.seed, "Random seed (mc: seed base)");
    app.add_option("--out-dir", common.out_dir, "Directory for output files");
    auto* threads_opt = app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string theta = "0.4,0.8,0.1,1,1,0.5,0.5";
    std::size_t n = 4096;
    std::string synth_out = "path.csv";
    auto* synth = app.add_subcommand("synth", "Synthesize a sample path");
    synth->add_option("--theta", theta, "h1,h2,rho,sigma1,sigma2,beta,gamma")->capture_default_str();
    synth->add_option("-n,--n", n, "Samples per component (power of two)")->capture_default_str();
    synth->add_option("-o,--out", synth_out, "Output CSV")->capture_default_str();

    AnalysisFlags aflags;
    std::string analyze_in, analyze_out = "spectrum.csv";
    auto* analyze_cmd = app.add_subcommand("analyze", "Wavelet spectrum of a path CSV");
    analyze_cmd->add_option("-i,--in", analyze_in, "Path CSV")->required();
    analyze_cmd->add_option("-o,--out", analyze_out, "Output spectrum CSV")->capture_default_str();
    aflags.add(analyze_cmd);

    EstimateFlags ef;
    auto* estimate = app.add_subcommand("estimate", "Estimate parameters from a spectrum CSV");
    estimate->add_option("-i,--in", ef.in, "Spectrum CSV")->required();
    estimate->add_option("--method", ef.method, "m, uni or eig")->capture_default_str();
    estimate->add_option("--delta", ef.delta, "Precision: one value or seven comma-separated")->capture_default_str();
    estimate->add_option("--delta-relax", ef.delta_relax, "Relaxation grid count")->capture_default_str();
    estimate->add_option("--max-iters", ef.max_iters, "Iteration cap")->capture_default_str();
    estimate->add_option("--max-seconds", ef.max_seconds, "Wall-clock cap, 0 for none")->capture_default_str();
    estimate->add_option("--sigma-max", ef.sigma_max, "Upper end of the sigma axes; 0 from the spectrum");
    estimate->add_option("--eta-model", ef.eta_model, "sampled or continuous")->capture_default_str();
    estimate->add_option("--freeze", ef.freeze, "Hold an axis fixed: name=value (repeatable)");
    estimate->add_flag("--weighted", ef.weighted, "Weight baseline regressions by K_j");
    estimate->add_flag("--no-polish", ef.no_polish, "Disable local descent of the incumbent");
    estimate->add_option("--trace", ef.trace, "Region trace CSV");
    estimate->add_option("--debug-bound", ef.debug_bound, "Per-term bound JSON for a delta box at the estimate");
    estimate->add_option("-o,--out", ef.out, "Result JSON")->capture_default_str();

    std::string plan_file;
    std::vector<std::string> sets;
    auto* mc = app.add_subcommand("mc", "Monte Carlo study");
    mc->add_option("--config", plan_file, "Plan file of key = value lines");
    mc->add_option("--set", sets, "Override one plan key: key=value (repeatable)");

    std::string norm_in, norm_method, norm_out = "normality.json";
    std::vector<std::string> norm_cols;
    long norm_theta = -1, norm_n = 0;
    std::size_t norm_min = 100;
    auto* normality = app.add_subcommand("normality", "KL divergence of estimates to a Gaussian fit");
    normality->add_option("-i,--in", norm_in, "runs.csv from mc, or any CSV with a header")->required();
    normality->add_option("--column", norm_cols, "Columns to check (default h1 h2)");
    normality->add_option("--method", norm_method, "Keep rows of this method (m, uni, eig)");
    normality->add_option("--theta-index", norm_theta, "Keep rows of this theta");
    normality->add_option("--n", norm_n, "Keep rows of this sample size");
    normality->add_option("--min-samples", norm_min, "Minimum sample count")->capture_default_str();
    normality->add_option("-o,--out", norm_out, "Output JSON")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return run_synth(common, theta, n, synth_out);
        if (*analyze_cmd) return run_analyze(common, aflags, analyze_in, analyze_out);
        if (*estimate) return run_estimate(common, ef);
        if (*mc) return run_mc_cmd(common, plan_file, sets, seed_opt->count() > 0, threads_opt->count() > 0);
        if (*normality) {
            return run_normality(common, norm_in, norm_cols, norm_method, norm_theta, norm_n, norm_min, norm_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
