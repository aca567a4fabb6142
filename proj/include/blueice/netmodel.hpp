#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blueice/prng.hpp"

namespace blueice {

enum class DelayKind { Constant, Uniform, Empirical };

/// Per-link communication delay distribution, in milliseconds.
struct DelayModel {
    DelayKind kind = DelayKind::Constant;
    double constant_ms = 0.0;
    double low_ms = 0.0;
    double high_ms = 0.0;
    std::vector<double> samples_ms;  // sorted ascending, EMPIRICAL only

    static DelayModel constant(double ms);
    static DelayModel uniform(double low, double high);
    /// Sorts the samples; throws ConfigError if empty or negative.
    static DelayModel empirical(std::vector<double> samples);

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    friend bool operator==(const DelayModel&, const DelayModel&) = default;
};

struct Position {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Position&, const Position&) = default;
};

/// A world-positioned radio endpoint that reports delay and loss for units near it.
struct LatencyStation {
    std::string id;
    Position position;
    DelayModel delay;
    double loss_probability = 0.0;
};

/// Draws one delay. CONSTANT never touches the generator; the others take one draw.
double sample_delay(const DelayModel& model, PrngState& prng);

/// Bernoulli loss; always consumes exactly one draw. Throws ConfigError if p is outside [0,1].
bool sample_loss(double p, PrngState& prng);

/// Closest station by Euclidean distance, ties to the smallest id.
/// Throws ConfigError on an empty list.
const LatencyStation& nearest_station(Position query, std::span<const LatencyStation> stations);

/// Measured latencies, kept sorted for the ECDF routines.
class LatencySampleSet {
public:
    explicit LatencySampleSet(std::vector<double> samples_ms);

    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> sorted() const noexcept { return sorted_; }

private:
    std::vector<double> sorted_;
};

/// Right-continuous empirical CDF: fraction of samples <= x.
double ecdf_eval(const LatencySampleSet& samples, double x);

/// Smallest sample x with ecdf_eval(x) >= p, for p in (0, 1].
double ecdf_quantile(const LatencySampleSet& samples, double p);

/// Plain-text sample file: one millisecond value per line, blank lines and '#' comments skipped.
LatencySampleSet load_samples(const std::string& path);

}  // namespace blueice
