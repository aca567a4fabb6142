#pragma once

#include <cstdint>

namespace blueice {

using Tick = std::uint64_t;

/// Shared simulation clock. Simulated time is derived from the tick index only.
class SimClock {
public:
    explicit SimClock(double tick_size_ms) : tick_size_ms_(tick_size_ms) {}

    Tick tick() const noexcept { return tick_; }
    double tick_size_ms() const noexcept { return tick_size_ms_; }
    double now_ms() const noexcept { return static_cast<double>(tick_) * tick_size_ms_; }

    void advance() noexcept { ++tick_; }

private:
    Tick tick_ = 0;
    double tick_size_ms_;
};

}  // namespace blueice
