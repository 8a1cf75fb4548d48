#include "ofbm/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "ofbm/model.hpp"

namespace ofbm {

namespace {

double log2_floored(double x, double floor) { return std::log2(std::max(std::fabs(x), floor)); }

// Non-owning handle for the one-shot helper.
std::shared_ptr<const EtaSet> borrow(const EtaSet& eta) {
    return std::shared_ptr<const EtaSet>(&eta, [](const EtaSet*) {});
}

}  // namespace

Objective::Objective(const SampleSpectrum& spectrum, std::shared_ptr<const EtaSet> eta,
                     ObjectiveOptions options)
    : spectrum_(spectrum), eta_(std::move(eta)), options_(options) {
    if (!eta_) throw std::invalid_argument("objective needs an eta set");
    if (spectrum.octaves.empty()) throw std::invalid_argument("empty spectrum");
    for (const auto& o : spectrum.octaves) {
        OctaveTarget t;
        t.j = o.j;
        t.log2_s = {log2_floored(o.s.s11, options_.floor), log2_floored(o.s.s12, options_.floor),
                    log2_floored(o.s.s22, options_.floor)};
        const double scale = std::sqrt(std::max(o.s.s11, 0.0) * std::max(o.s.s22, 0.0));
        t.use12 = std::fabs(o.s.s12) >= options_.s12_drop_ratio * scale;
        if (!t.use12) ++dropped_;
        targets_.push_back(t);
    }
}

double Objective::operator()(const Theta& theta) const {
    double sum = 0.0;
    for (const auto& t : targets_) {
        const Sym2 e = model_spectrum_at(theta, t.j, *eta_);
        const double r11 = t.log2_s[0] - log2_floored(e.s11, options_.floor);
        const double r22 = t.log2_s[2] - log2_floored(e.s22, options_.floor);
        sum += r11 * r11 + r22 * r22;
        if (t.use12) {
            const double r12 = t.log2_s[1] - log2_floored(e.s12, options_.floor);
            sum += r12 * r12;
        }
    }
    return sum;
}

std::vector<std::array<double, 3>> Objective::terms(const Theta& theta) const {
    std::vector<std::array<double, 3>> out;
    out.reserve(targets_.size());
    for (const auto& t : targets_) {
        const Sym2 e = model_spectrum_at(theta, t.j, *eta_);
        const std::array<double, 3> ev{e.s11, e.s12, e.s22};
        std::array<double, 3> row{};
        for (int k = 0; k < 3; ++k) {
            if (k == 1 && !t.use12) continue;
            const double r = t.log2_s[static_cast<std::size_t>(k)] - log2_floored(ev[static_cast<std::size_t>(k)], options_.floor);
            row[static_cast<std::size_t>(k)] = r * r;
        }
        out.push_back(row);
    }
    return out;
}

std::vector<double> Objective::residuals(const Theta& theta) const {
    std::vector<double> out;
    out.reserve(targets_.size() * 3);
    for (const auto& t : targets_) {
        const Sym2 e = model_spectrum_at(theta, t.j, *eta_);
        out.push_back(t.log2_s[0] - log2_floored(e.s11, options_.floor));
        if (t.use12) out.push_back(t.log2_s[1] - log2_floored(e.s12, options_.floor));
        out.push_back(t.log2_s[2] - log2_floored(e.s22, options_.floor));
    }
    return out;
}

double objective_cn(const Theta& theta, const SampleSpectrum& spectrum, const EtaSet& eta,
                    ObjectiveOptions options) {
    return Objective(spectrum, borrow(eta), options)(theta);
}

}  // namespace ofbm
