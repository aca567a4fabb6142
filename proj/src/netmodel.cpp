#include "blueice/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "blueice/error.hpp"

namespace blueice {

DelayModel DelayModel::constant(double ms) {
    DelayModel m;
    m.kind = DelayKind::Constant;
    m.constant_ms = ms;
    m.validate();
    return m;
}

DelayModel DelayModel::uniform(double low, double high) {
    DelayModel m;
    m.kind = DelayKind::Uniform;
    m.low_ms = low;
    m.high_ms = high;
    m.validate();
    return m;
}

DelayModel DelayModel::empirical(std::vector<double> samples) {
    DelayModel m;
    m.kind = DelayKind::Empirical;
    std::sort(samples.begin(), samples.end());
    m.samples_ms = std::move(samples);
    m.validate();
    return m;
}

void DelayModel::validate() const {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    switch (kind) {
        case DelayKind::Constant:
            if (bad(constant_ms)) throw ConfigError("constant_ms must be a finite non-negative number");
            break;
        case DelayKind::Uniform:
            if (bad(low_ms) || bad(high_ms)) throw ConfigError("uniform bounds must be finite and non-negative");
            if (low_ms > high_ms) throw ConfigError("uniform model requires low_ms <= high_ms");
            break;
        case DelayKind::Empirical:
            if (samples_ms.empty()) throw ConfigError("empirical model requires at least one sample");
            if (std::any_of(samples_ms.begin(), samples_ms.end(), bad))
                throw ConfigError("empirical samples must be finite and non-negative");
            if (!std::is_sorted(samples_ms.begin(), samples_ms.end()))
                throw ConfigError("empirical samples must be sorted ascending");
            break;
    }
}

double sample_delay(const DelayModel& model, PrngState& prng) {
    switch (model.kind) {
        case DelayKind::Constant:
            return model.constant_ms;
        case DelayKind::Uniform: {
            const double u = prng_uniform(prng);
            return model.low_ms + u * (model.high_ms - model.low_ms);
        }
        case DelayKind::Empirical: {
            const double u = prng_uniform(prng);
            const auto n = model.samples_ms.size();
            const auto idx = std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
            return model.samples_ms[idx];
        }
    }
    return 0.0;
}

bool sample_loss(double p, PrngState& prng) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("loss probability must lie in [0, 1]");
    return prng_uniform(prng) < p;
}

const LatencyStation& nearest_station(Position query, std::span<const LatencyStation> stations) {
    if (stations.empty()) throw ConfigError("nearest_station: no stations configured");
    const LatencyStation* best = nullptr;
    double best_d2 = 0.0;
    for (const auto& s : stations) {
        const double dx = s.position.x - query.x;
        const double dy = s.position.y - query.y;
        const double d2 = dx * dx + dy * dy;
        if (!best || d2 < best_d2 || (d2 == best_d2 && s.id < best->id)) {
            best = &s;
            best_d2 = d2;
        }
    }
    return *best;
}

LatencySampleSet::LatencySampleSet(std::vector<double> samples_ms) : sorted_(std::move(samples_ms)) {
    if (sorted_.empty()) throw ConfigError("latency sample set must not be empty");
    for (double v : sorted_) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("latency samples must be finite and non-negative");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double ecdf_eval(const LatencySampleSet& samples, double x) {
    const auto s = samples.sorted();
    const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
    return static_cast<double>(count) / static_cast<double>(s.size());
}

double ecdf_quantile(const LatencySampleSet& samples, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("quantile level must lie in (0, 1]");
    const auto s = samples.sorted();
    const auto n = s.size();
    // Smallest k (1-based count) with k/n >= p; compare in integer-ish form to dodge
    // rounding in p*n, then confirm against the exact fraction.
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    while (k > 1 && static_cast<double>(k - 1) / static_cast<double>(n) >= p) --k;
    while (k < n && static_cast<double>(k) / static_cast<double>(n) < p) ++k;
    return s[k - 1];
}

LatencySampleSet load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample file: " + path);
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        double v = 0.0;
        if (!(ss >> v)) throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number");
        values.push_back(v);
    }
    return LatencySampleSet(std::move(values));
}

}  // namespace blueice
