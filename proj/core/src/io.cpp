#include "ofbm/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ofbm {

using nlohmann::json;

namespace {

json theta_json(const Theta& t) {
    json j = json::object();
    const auto v = t.to_array();
    for (std::size_t i = 0; i < kNumParams; ++i) j[std::string(param_name(i))] = v[i];
    return j;
}

Theta theta_from(const json& j) {
    std::array<double, kNumParams> v{};
    for (std::size_t i = 0; i < kNumParams; ++i) v[i] = j.at(std::string(param_name(i))).get<double>();
    return Theta::from_array(v);
}

json interval_json(const Interval& x) { return json::array({x.lo, x.hi}); }

std::ifstream open_in(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << std::setprecision(17);
    return out;
}

std::vector<std::string> cells(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

bool parse_number(const std::string& s, double& x) {
    if (s.empty()) return false;
    std::size_t used = 0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size();
}

json read_json(const std::filesystem::path& file) {
    auto in = open_in(file);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("bad JSON in " + file.string() + ": " + e.what());
    }
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    auto out = open_out(file);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_path_csv(const Path& path, const std::filesystem::path& csv) {
    {
        auto out = open_out(csv);
        out << "t,y1,y2\n";
        for (std::size_t t = 0; t < path.size(); ++t) out << t << ',' << path.y1[t] << ',' << path.y2[t] << '\n';
        if (!out) throw std::runtime_error("write failed: " + csv.string());
    }
    json side;
    side["n"] = path.size();
    side["seed"] = path.seed;
    side["theta"] = theta_json(path.theta_true);
    write_text(sidecar_path(csv), side.dump(2) + "\n");
}

Path read_path_csv(const std::filesystem::path& csv) {
    auto in = open_in(csv);
    Path path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto c = cells(line);
        if (c.empty() || (c.size() == 1 && c[0].empty())) continue;
        std::vector<double> v(c.size());
        bool numeric = true;
        for (std::size_t i = 0; i < c.size(); ++i) numeric = numeric && parse_number(c[i], v[i]);
        if (!numeric) {
            if (lineno == 1) continue;
            throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": non-numeric row");
        }
        if (v.size() == 3) {
            path.y1.push_back(v[1]);
            path.y2.push_back(v[2]);
        } else if (v.size() == 2) {
            path.y1.push_back(v[0]);
            path.y2.push_back(v[1]);
        } else {
            throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": expected 2 or 3 columns");
        }
    }
    if (path.y1.empty()) throw std::runtime_error("no samples in " + csv.string());
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side)) {
        const json j = read_json(side);
        if (j.contains("seed")) path.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("theta")) path.theta_true = theta_from(j["theta"]);
    }
    return path;
}

void write_spectrum_csv(const SampleSpectrum& s, const std::filesystem::path& csv) {
    {
        auto out = open_out(csv);
        out << "j,count,s11,s12,s22\n";
        for (const auto& o : s.octaves) {
            out << o.j << ',' << o.count << ',' << o.s.s11 << ',' << o.s.s12 << ',' << o.s.s22 << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + csv.string());
    }
    json side;
    side["n"] = s.n;
    side["n_psi"] = s.n_psi;
    side["increment_var1"] = s.increment_var1;
    side["increment_var2"] = s.increment_var2;
    side["sigma_max"] = s.sigma_max();
    side["excluded"] = s.excluded;
    write_text(sidecar_path(csv), side.dump(2) + "\n");
}

SampleSpectrum read_spectrum_csv(const std::filesystem::path& csv) {
    auto in = open_in(csv);
    SampleSpectrum s;
    std::string line;
    std::getline(in, line);
    if (cells(line) != std::vector<std::string>{"j", "count", "s11", "s12", "s22"}) {
        throw std::runtime_error("bad spectrum header in " + csv.string());
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto c = cells(line);
        if (c.empty() || (c.size() == 1 && c[0].empty())) continue;
        std::array<double, 5> v{};
        if (c.size() != 5) throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": expected 5 columns");
        for (std::size_t i = 0; i < 5; ++i) {
            if (!parse_number(c[i], v[i])) {
                throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
            }
        }
        SpectrumOctave o;
        o.j = static_cast<int>(v[0]);
        o.count = static_cast<std::size_t>(v[1]);
        o.s = Sym2{v[2], v[3], v[4]};
        s.octaves.push_back(o);
    }
    if (s.octaves.empty()) throw std::runtime_error("no octaves in " + csv.string());
    const auto side = sidecar_path(csv);
    if (std::filesystem::exists(side)) {
        const json j = read_json(side);
        s.n = j.value("n", std::size_t{0});
        s.n_psi = j.value("n_psi", 2);
        s.increment_var1 = j.value("increment_var1", 0.0);
        s.increment_var2 = j.value("increment_var2", 0.0);
        if (j.contains("excluded")) s.excluded = j["excluded"].get<std::vector<int>>();
    }
    return s;
}

std::string estimation_json(const EstimationResult& r, const std::string& config) {
    json j;
    j["method"] = std::string(to_string(r.method));
    json theta = json::object();
    const auto v = r.theta_hat.to_array();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (r.estimated[i]) theta[std::string(param_name(i))] = v[i];
    }
    j["theta_hat"] = theta;
    if (r.method == Method::m_bb) {
        j["objective"] = r.objective_value;
        j["lower_bound"] = r.lower_bound;
        j["iterations"] = r.iterations;
        j["grid_count"] = r.grid_count;
        j["wall_time"] = r.wall_time;
        j["candidates_count"] = r.candidates;
        j["incomplete"] = r.incomplete;
    }
    if (!r.note.empty()) j["note"] = r.note;
    if (!config.empty()) j["config"] = config;
    return j.dump(2) + "\n";
}

std::string bound_terms_json(const ParamBox& box, const BoundResult& bound, const std::vector<BoundTerm>& terms) {
    json j;
    json b = json::object();
    for (std::size_t i = 0; i < kNumParams; ++i) b[std::string(param_name(i))] = interval_json(box[i]);
    j["box"] = b;
    j["lower"] = bound.lower;
    j["weak"] = bound.weak;
    json rows = json::array();
    static const char* entries[] = {"11", "12", "22"};
    for (const BoundTerm& t : terms) {
        json row;
        row["j"] = t.j;
        row["entry"] = entries[t.entry];
        row["model"] = interval_json(t.model);
        row["residual"] = interval_json(t.residual);
        row["lower"] = t.lower;
        row["weak"] = t.weak;
        row["dropped"] = t.dropped;
        rows.push_back(row);
    }
    j["terms"] = rows;
    return j.dump(2) + "\n";
}

void write_runs_csv(const std::vector<RunRecord>& runs, std::ostream& out) {
    out << std::setprecision(17);
    out << "theta_index,n,seed,method,ok";
    for (std::size_t i = 0; i < kNumParams; ++i) out << ",true_" << param_name(i);
    for (std::size_t i = 0; i < kNumParams; ++i) out << ',' << param_name(i);
    out << ",objective,iterations,grid_count,wall_time,candidates,incomplete,error\n";
    for (const RunRecord& r : runs) {
        out << r.theta_index << ',' << r.n << ',' << r.seed << ',' << short_name(r.method) << ',' << (r.ok ? 1 : 0);
        const auto t = r.theta_true.to_array();
        for (double x : t) out << ',' << x;
        const auto v = r.result.theta_hat.to_array();
        for (std::size_t i = 0; i < kNumParams; ++i) {
            out << ',';
            if (r.ok && r.result.estimated[i]) out << v[i];
        }
        out << ',';
        if (r.ok && r.method == Method::m_bb) out << r.result.objective_value;
        out << ',' << r.result.iterations << ',' << r.result.grid_count << ',' << r.result.wall_time << ','
            << r.result.candidates << ',' << (r.result.incomplete ? 1 : 0) << ',';
        std::string err = r.error;
        for (char& c : err) {
            if (c == ',' || c == '\n' || c == '\r') c = ' ';
        }
        out << err << '\n';
    }
}

void write_summary_csv(const McSummary& s, std::ostream& out) {
    out << std::setprecision(17);
    out << "theta_index,n,method,param,count,q25,q50,q75,mean,sd,bias,kl\n";
    for (const auto& c : s.coordinates) {
        out << c.theta_index << ',' << c.n << ',' << short_name(c.method) << ',' << param_name(c.axis) << ','
            << c.count << ',' << c.q.q25 << ',' << c.q.q50 << ',' << c.q.q75 << ',' << c.mean << ',' << c.sd << ','
            << c.bias << ',';
        if (c.kl) out << *c.kl;
        out << '\n';
    }
}

void write_timing_csv(const McSummary& s, std::ostream& out) {
    out << std::setprecision(17);
    out << "theta_index,n,method,runs,failures,incomplete,mean_iterations,mean_wall_time,iteration_percent\n";
    for (const auto& c : s.costs) {
        out << c.theta_index << ',' << c.n << ',' << short_name(c.method) << ',' << c.runs << ',' << c.failures << ','
            << c.incomplete << ',' << c.mean_iterations << ',' << c.mean_wall_time << ','
            << c.mean_iteration_percent << '\n';
    }
}

std::string summary_json(const McSummary& s, const std::string& config) {
    json j;
    j["failures"] = s.failures;
    json coords = json::array();
    for (const auto& c : s.coordinates) {
        json row;
        row["theta_index"] = c.theta_index;
        row["n"] = c.n;
        row["method"] = std::string(short_name(c.method));
        row["param"] = std::string(param_name(c.axis));
        row["count"] = c.count;
        row["quartiles"] = json::array({c.q.q25, c.q.q50, c.q.q75});
        row["mean"] = c.mean;
        row["sd"] = c.sd;
        row["bias"] = c.bias;
        if (c.kl) row["kl"] = *c.kl;
        coords.push_back(row);
    }
    j["coordinates"] = coords;
    json costs = json::array();
    for (const auto& c : s.costs) {
        json row;
        row["theta_index"] = c.theta_index;
        row["n"] = c.n;
        row["method"] = std::string(short_name(c.method));
        row["runs"] = c.runs;
        row["failures"] = c.failures;
        row["incomplete"] = c.incomplete;
        row["mean_iterations"] = c.mean_iterations;
        row["mean_wall_time"] = c.mean_wall_time;
        row["iteration_percent"] = c.mean_iteration_percent;
        costs.push_back(row);
    }
    j["costs"] = costs;
    j["config"] = config;
    return j.dump(2) + "\n";
}

std::vector<double> read_csv_column(const std::filesystem::path& csv, const std::string& column) {
    auto in = open_in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file " + csv.string());
    const auto header = cells(line);
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw std::runtime_error("no column '" + column + "' in " + csv.string());
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto c = cells(line);
        if (col >= c.size() || c[col].empty()) continue;
        double x = 0.0;
        if (!parse_number(c[col], x)) {
            throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
        }
        out.push_back(x);
    }
    return out;
}

}  // namespace ofbm
