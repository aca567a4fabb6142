#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blueice/clock.hpp"
#include "blueice/envelope.hpp"

namespace blueice {

struct RunLogHeader {
    std::uint64_t config_hash = 0;
    double tick_size_ms = 10.0;
    std::uint64_t global_seed = 0;

    friend bool operator==(const RunLogHeader&, const RunLogHeader&) = default;
};

std::string encode_header(const RunLogHeader& header);
RunLogHeader decode_header(std::string_view line);

/// A canonical run log: header plus body records (each without its trailing LF).
struct RunLog {
    RunLogHeader header;
    std::vector<std::string> body;

    /// Decodes every body line. Throws DecodeError naming the file line number.
    std::vector<Envelope> envelopes() const;
    std::string text() const;
};

/// Appends canonical records; optionally mirrors them to `<path>` and wall-clock
/// stamps to `<path>.timing` (`line_number wall_ns`). Wall time never enters the log.
class Recorder {
public:
    explicit Recorder(RunLogHeader header);
    Recorder(RunLogHeader header, const std::string& path);

    /// Throws IoError when the file write fails.
    void record(const Envelope& envelope);
    void flush();

    const RunLog& log() const noexcept { return log_; }

private:
    RunLog log_;
    std::optional<std::ofstream> file_;
    std::optional<std::ofstream> timing_;
    std::string path_;
};

RunLog parse_run_log(std::string_view text);
RunLog read_run_log(const std::string& path);
void write_run_log(const RunLog& log, const std::string& path);

struct LogDiff {
    bool equal = true;
    std::size_t line_a = 0;  // file line numbers (header is line 1); 0 when past the end
    std::size_t line_b = 0;
    std::string text_a;
    std::string text_b;
};

/// Byte comparison of canonical bodies. With `topics`, only PUB/DELIVER records on
/// those topics take part.
LogDiff logs_equal(const RunLog& a, const RunLog& b,
                   const std::optional<std::set<std::string>>& topics = std::nullopt);

/// Per-tick PUBs reconstructed from a log.
struct ReplaySchedule {
    RunLogHeader header;
    std::map<Tick, std::vector<Envelope>> pubs;

    bool empty() const noexcept { return pubs.empty(); }
    std::size_t size() const;
    /// Keeps only PUBs originally sent by `federate`.
    ReplaySchedule for_source(const std::string& federate) const;
};

/// Extracts the PUB records on `topics` (all topics when empty). Throws ConfigError
/// if `expected_tick_size_ms` is given and differs from the log's.
ReplaySchedule replay_load(const RunLog& log, const std::set<std::string>& topics,
                           std::optional<double> expected_tick_size_ms = std::nullopt);

/// PUBs originally published at `tick`, in original order.
std::vector<Envelope> replay_step(const ReplaySchedule& schedule, Tick tick);

}  // namespace blueice
