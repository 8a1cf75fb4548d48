#include "ofbm/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ofbm/model.hpp"
#include "ofbm/parallel.hpp"

namespace ofbm {

std::vector<Theta> study_theta_grid() {
    std::vector<Theta> grid;
    const double rhos[] = {0.1, 0.45, 0.8};
    const std::pair<double, double> mixing[] = {{0.0, 0.0}, {0.5, 0.5}, {0.5, -0.5}};
    for (double rho : rhos) {
        for (auto [b, g] : mixing) grid.push_back(Theta{0.4, 0.8, rho, 1.0, 1.0, b, g});
    }
    return grid;
}

BnbConfig ExperimentPlan::desk_bnb() {
    BnbConfig c;
    c.set_delta(0.02);
    c.delta_relax = 20;
    return c;
}

void ExperimentPlan::validate() const {
    if (theta_grid.empty()) throw std::invalid_argument("empty theta grid");
    for (const Theta& t : theta_grid) require_feasible(t);
    if (n_list.empty()) throw std::invalid_argument("empty sample-size list");
    for (std::size_t n : n_list) {
        if (n < 256 || (n & (n - 1)) != 0) throw std::invalid_argument("sample sizes must be powers of two >= 256");
    }
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (methods.empty()) throw std::invalid_argument("no methods requested");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    bnb.validate();
}

namespace {

std::string trim(std::string s) {
    auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), blank));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), blank).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw std::invalid_argument(key + ": not a number: " + v);
    return x;
}

unsigned long long to_unsigned(const std::string& key, const std::string& v) {
    if (v.empty() || v[0] == '-') throw std::invalid_argument(key + ": not a non-negative integer: " + v);
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw std::invalid_argument(key + ": not a non-negative integer: " + v);
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument(key + ": not a boolean: " + v);
}

std::size_t axis_of(const std::string& name) {
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (param_name(i) == name) return i;
    }
    throw std::invalid_argument("unknown parameter: " + name);
}

std::string number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

void apply_setting(ExperimentPlan& plan, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "thetas") {
        if (value == "study") {
            plan.theta_grid = study_theta_grid();
            return;
        }
        plan.theta_grid.clear();
        for (const std::string& item : split(value, ';')) {
            const auto parts = split(item, ',');
            if (parts.size() != kNumParams) throw std::invalid_argument("thetas: each entry needs 7 values");
            std::array<double, kNumParams> v{};
            for (std::size_t i = 0; i < kNumParams; ++i) v[i] = to_double(key, parts[i]);
            plan.theta_grid.push_back(Theta::from_array(v));
        }
    } else if (key == "n") {
        plan.n_list.clear();
        for (const std::string& s : split(value, ',')) plan.n_list.push_back(to_unsigned(key, s));
    } else if (key == "replications") {
        plan.replications = to_unsigned(key, value);
    } else if (key == "methods") {
        plan.methods.clear();
        for (const std::string& s : split(value, ',')) plan.methods.push_back(parse_method(s));
    } else if (key == "seed_base") {
        plan.seed_base = to_unsigned(key, value);
    } else if (key == "threads") {
        plan.threads = static_cast<int>(to_unsigned(key, value));
    } else if (key == "n_psi") {
        plan.analysis.n_psi = static_cast<int>(to_unsigned(key, value));
    } else if (key == "j1") {
        plan.analysis.j1 = static_cast<int>(to_unsigned(key, value));
    } else if (key == "j2") {
        plan.analysis.j2 = static_cast<int>(to_unsigned(key, value));
    } else if (key == "boundary") {
        plan.analysis.boundary = parse_boundary(value);
    } else if (key == "eta_model") {
        plan.eta_model = parse_eta_model(value);
    } else if (key == "weighted") {
        plan.regression.weighted = to_bool(key, value);
    } else if (key == "delta") {
        const auto parts = split(value, ',');
        if (parts.size() == 1) {
            plan.bnb.set_delta(to_double(key, parts[0]));
        } else if (parts.size() == kNumParams) {
            for (std::size_t i = 0; i < kNumParams; ++i) plan.bnb.delta[i] = to_double(key, parts[i]);
        } else {
            throw std::invalid_argument("delta: give one value or seven");
        }
    } else if (key == "delta_relax") {
        plan.bnb.delta_relax = static_cast<int>(to_unsigned(key, value));
    } else if (key == "max_iters") {
        plan.bnb.max_iters = to_unsigned(key, value);
    } else if (key == "max_seconds") {
        plan.bnb.max_seconds = to_double(key, value);
    } else if (key == "polish") {
        plan.bnb.polish = to_bool(key, value);
    } else if (key == "freeze") {
        plan.freeze_true.fill(false);
        for (const std::string& s : split(value, ',')) plan.freeze_true[axis_of(s)] = true;
    } else {
        throw std::invalid_argument("unknown plan key: " + key);
    }
}

ExperimentPlan parse_plan(std::istream& in, ExperimentPlan base) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("plan line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

std::string format_plan(const ExperimentPlan& plan) {
    std::ostringstream os;
    os << "thetas = ";
    for (std::size_t k = 0; k < plan.theta_grid.size(); ++k) {
        const auto v = plan.theta_grid[k].to_array();
        if (k > 0) os << "; ";
        for (std::size_t i = 0; i < kNumParams; ++i) os << (i ? "," : "") << number(v[i]);
    }
    os << "\nn = ";
    for (std::size_t k = 0; k < plan.n_list.size(); ++k) os << (k ? "," : "") << plan.n_list[k];
    os << "\nreplications = " << plan.replications << "\nmethods = ";
    for (std::size_t k = 0; k < plan.methods.size(); ++k) os << (k ? "," : "") << short_name(plan.methods[k]);
    os << "\nseed_base = " << plan.seed_base << "\nthreads = " << plan.threads << "\nn_psi = " << plan.analysis.n_psi
       << "\nj1 = " << plan.analysis.j1 << "\nj2 = " << plan.analysis.j2
       << "\nboundary = " << to_string(plan.analysis.boundary) << "\neta_model = " << to_string(plan.eta_model)
       << "\nweighted = " << (plan.regression.weighted ? "true" : "false") << "\ndelta = ";
    for (std::size_t i = 0; i < kNumParams; ++i) os << (i ? "," : "") << number(plan.bnb.delta[i]);
    os << "\ndelta_relax = " << plan.bnb.delta_relax << "\nmax_iters = " << plan.bnb.max_iters
       << "\nmax_seconds = " << number(plan.bnb.max_seconds) << "\npolish = " << (plan.bnb.polish ? "true" : "false")
       << "\nfreeze = ";
    bool first = true;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (!plan.freeze_true[i]) continue;
        os << (first ? "" : ",") << param_name(i);
        first = false;
    }
    os << "\n";
    return os.str();
}

RunRecord run_one(const ExperimentPlan& plan, const Path& path, std::size_t theta_index, Method method) {
    RunRecord rec;
    rec.theta_index = theta_index;
    rec.theta_true = path.theta_true;
    rec.n = path.size();
    rec.seed = path.seed;
    rec.method = method;
    try {
        const SampleSpectrum spectrum = analyze(path, plan.analysis);
        switch (method) {
            case Method::m_bb: {
                BnbConfig config = plan.bnb;
                config.threads = 1;
                config.trace = nullptr;
                const auto truth = path.theta_true.to_array();
                for (std::size_t i = 0; i < kNumParams; ++i) {
                    if (plan.freeze_true[i]) config.frozen[i] = truth[i];
                }
                rec.result = estimate_m(spectrum, config, plan.eta_model);
                break;
            }
            case Method::univariate: rec.result = estimate_univariate(spectrum, plan.regression); break;
            case Method::eigenvalue: rec.result = estimate_eigen(spectrum, plan.regression); break;
        }
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

McOutput run_mc(const ExperimentPlan& plan) {
    plan.validate();
    // Shared setup is built before the workers start.
    (void)shared_eta_set(plan.analysis.n_psi, plan.eta_model);
    std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Synthesizer>> synth;
    std::map<std::pair<std::size_t, std::size_t>, std::string> synth_error;
    for (std::size_t t = 0; t < plan.theta_grid.size(); ++t) {
        for (std::size_t n : plan.n_list) {
            try {
                synth[{t, n}] = std::make_unique<Synthesizer>(plan.theta_grid[t], n);
            } catch (const std::exception& e) {
                synth_error[{t, n}] = e.what();
            }
        }
    }

    const std::size_t cells = plan.theta_grid.size() * plan.n_list.size();
    const std::size_t tasks = cells * plan.replications;
    std::vector<std::vector<RunRecord>> slots(tasks);
    parallel_for(tasks, plan.threads, [&](std::size_t task) {
        const std::size_t rep = task % plan.replications;
        const std::size_t cell = task / plan.replications;
        const std::size_t t = cell / plan.n_list.size();
        const std::size_t n = plan.n_list[cell % plan.n_list.size()];
        const std::uint64_t seed = plan.seed_base + rep;
        auto& out = slots[task];
        const auto it = synth.find({t, n});
        if (it == synth.end()) {
            for (Method m : plan.methods) {
                RunRecord rec;
                rec.theta_index = t;
                rec.theta_true = plan.theta_grid[t];
                rec.n = n;
                rec.seed = seed;
                rec.method = m;
                rec.error = synth_error[{t, n}];
                out.push_back(std::move(rec));
            }
            return;
        }
        Path path;
        std::string error;
        try {
            path = it->second->sample(seed);
        } catch (const std::exception& e) {
            error = e.what();
        }
        for (Method m : plan.methods) {
            if (!error.empty()) {
                RunRecord rec;
                rec.theta_index = t;
                rec.theta_true = plan.theta_grid[t];
                rec.n = n;
                rec.seed = seed;
                rec.method = m;
                rec.error = error;
                out.push_back(std::move(rec));
            } else {
                out.push_back(run_one(plan, path, t, m));
            }
        }
    });

    McOutput output;
    for (auto& s : slots) {
        for (auto& r : s) output.runs.push_back(std::move(r));
    }
    std::stable_sort(output.runs.begin(), output.runs.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tuple(a.theta_index, a.n, a.seed, static_cast<int>(a.method)) <
               std::tuple(b.theta_index, b.n, b.seed, static_cast<int>(b.method));
    });
    output.summary = summarize(output.runs);
    return output;
}

McSummary summarize(const std::vector<RunRecord>& runs) {
    using Key = std::tuple<std::size_t, std::size_t, int>;
    struct Cell {
        Theta truth;
        std::array<std::vector<double>, kNumParams> values;
        CostSummary cost;
        double iter_sum = 0.0, time_sum = 0.0, percent_sum = 0.0;
    };
    std::map<Key, Cell> cells;
    McSummary summary;
    for (const RunRecord& r : runs) {
        Cell& c = cells[Key{r.theta_index, r.n, static_cast<int>(r.method)}];
        c.truth = r.theta_true;
        c.cost.theta_index = r.theta_index;
        c.cost.n = r.n;
        c.cost.method = r.method;
        ++c.cost.runs;
        if (!r.ok) {
            ++c.cost.failures;
            ++summary.failures;
            continue;
        }
        if (r.result.incomplete) ++c.cost.incomplete;
        c.iter_sum += static_cast<double>(r.result.iterations);
        c.time_sum += r.result.wall_time;
        if (r.result.grid_count > 0.0) {
            c.percent_sum += 100.0 * static_cast<double>(r.result.iterations) / r.result.grid_count;
        }
        const auto v = r.result.theta_hat.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) {
            if (r.result.estimated[i]) c.values[i].push_back(v[i]);
        }
    }
    for (auto& [key, c] : cells) {
        const std::size_t ok = c.cost.runs - c.cost.failures;
        if (ok > 0) {
            c.cost.mean_iterations = c.iter_sum / static_cast<double>(ok);
            c.cost.mean_wall_time = c.time_sum / static_cast<double>(ok);
            c.cost.mean_iteration_percent = c.percent_sum / static_cast<double>(ok);
        }
        summary.costs.push_back(c.cost);
        const auto truth = c.truth.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) {
            const auto& x = c.values[i];
            if (x.empty()) continue;
            CoordinateSummary s;
            s.theta_index = c.cost.theta_index;
            s.n = c.cost.n;
            s.method = c.cost.method;
            s.axis = i;
            s.count = x.size();
            s.q = quartiles(x);
            s.mean = mean(x);
            s.sd = stddev(x);
            s.bias = s.mean - truth[i];
            if (x.size() >= 100) {
                try {
                    s.kl = normality_check(x).kl;
                } catch (const std::exception&) {
                    s.kl.reset();
                }
            }
            summary.coordinates.push_back(s);
        }
    }
    return summary;
}

}  // namespace ofbm
