#include "blueice/recorder.hpp"

#include <chrono>
#include <sstream>

#include "blueice/canonical.hpp"
#include "blueice/config.hpp"
#include "blueice/error.hpp"

namespace blueice {

std::string encode_header(const RunLogHeader& h) {
    Value v{{"config_hash", hash_hex(h.config_hash)}, {"tick_size_ms", h.tick_size_ms}, {"global_seed", h.global_seed}};
    return encode_value(v);
}

RunLogHeader decode_header(std::string_view line) {
    Value v;
    try {
        v = decode_value(line);
    } catch (const DecodeError& e) {
        throw DecodeError("header", std::string("line 1: bad header: ") + e.what());
    }
    if (!v.is_object() || !v.contains("config_hash") || !v["config_hash"].is_string() ||
        !v.contains("tick_size_ms") || !v["tick_size_ms"].is_number() || !v.contains("global_seed") ||
        !v["global_seed"].is_number_unsigned())
        throw DecodeError("header", "line 1: header needs config_hash, tick_size_ms, global_seed");
    RunLogHeader h;
    h.config_hash = std::stoull(v["config_hash"].get<std::string>(), nullptr, 16);
    h.tick_size_ms = v["tick_size_ms"].get<double>();
    h.global_seed = v["global_seed"].get<std::uint64_t>();
    return h;
}

std::vector<Envelope> RunLog::envelopes() const {
    std::vector<Envelope> out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
        try {
            out.push_back(canonical_decode(body[i]));
        } catch (const DecodeError& e) {
            throw DecodeError(e.key(), "line " + std::to_string(i + 2) + ": " + e.what());
        }
    }
    return out;
}

std::string RunLog::text() const {
    std::string out = encode_header(header);
    out.push_back('\n');
    for (const auto& line : body) {
        out += line;
        out.push_back('\n');
    }
    return out;
}

Recorder::Recorder(RunLogHeader header) { log_.header = header; }

Recorder::Recorder(RunLogHeader header, const std::string& path) : Recorder(header) {
    path_ = path;
    file_.emplace(path, std::ios::binary | std::ios::trunc);
    timing_.emplace(path + ".timing", std::ios::binary | std::ios::trunc);
    if (!*file_ || !*timing_) throw IoError("cannot open run log for writing: " + path);
    *file_ << encode_header(header) << '\n';
    if (!*file_) throw IoError("write failed: " + path);
}

void Recorder::record(const Envelope& envelope) {
    std::string line = canonical_encode(envelope);
    line.pop_back();
    if (file_) {
        *file_ << line << '\n';
        const auto wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count();
        *timing_ << (log_.body.size() + 2) << ' ' << wall_ns << '\n';
        if (!*file_ || !*timing_) throw IoError("write failed: " + path_);
    }
    log_.body.push_back(std::move(line));
}

void Recorder::flush() {
    if (file_) {
        file_->flush();
        timing_->flush();
        if (!*file_ || !*timing_) throw IoError("flush failed: " + path_);
    }
}

RunLog parse_run_log(std::string_view text) {
    RunLog log;
    std::size_t lineno = 0;
    bool have_header = false;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        if (nl == std::string_view::npos)
            throw DecodeError("", "line " + std::to_string(lineno) + ": truncated record (no line feed)");
        const auto line = text.substr(0, nl);
        text.remove_prefix(nl + 1);
        if (!have_header) {
            log.header = decode_header(line);
            have_header = true;
            continue;
        }
        try {
            canonical_decode(line);
        } catch (const DecodeError& e) {
            throw DecodeError(e.key(), "line " + std::to_string(lineno) + ": " + e.what());
        }
        log.body.emplace_back(line);
    }
    if (!have_header) throw DecodeError("header", "line 1: empty log");
    return log;
}

RunLog read_run_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open run log: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_log(ss.str());
}

void write_run_log(const RunLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << log.text();
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::size_t> selected_lines(const RunLog& log, const std::optional<std::set<std::string>>& topics) {
    std::vector<std::size_t> idx;
    idx.reserve(log.body.size());
    for (std::size_t i = 0; i < log.body.size(); ++i) {
        if (topics) {
            const Envelope e = canonical_decode(log.body[i]);
            if ((e.kind != Kind::Pub && e.kind != Kind::Deliver) || !topics->contains(e.topic)) continue;
        }
        idx.push_back(i);
    }
    return idx;
}

}  // namespace

LogDiff logs_equal(const RunLog& a, const RunLog& b, const std::optional<std::set<std::string>>& topics) {
    const auto ia = selected_lines(a, topics);
    const auto ib = selected_lines(b, topics);
    const std::size_t n = std::max(ia.size(), ib.size());
    for (std::size_t k = 0; k < n; ++k) {
        const bool has_a = k < ia.size();
        const bool has_b = k < ib.size();
        if (has_a && has_b && a.body[ia[k]] == b.body[ib[k]]) continue;
        LogDiff d;
        d.equal = false;
        if (has_a) {
            d.line_a = ia[k] + 2;
            d.text_a = a.body[ia[k]];
        }
        if (has_b) {
            d.line_b = ib[k] + 2;
            d.text_b = b.body[ib[k]];
        }
        return d;
    }
    return {};
}

std::size_t ReplaySchedule::size() const {
    std::size_t n = 0;
    for (const auto& [_, v] : pubs) n += v.size();
    return n;
}

ReplaySchedule ReplaySchedule::for_source(const std::string& federate) const {
    ReplaySchedule out;
    out.header = header;
    for (const auto& [tick, envs] : pubs) {
        for (const auto& e : envs) {
            if (e.federate == federate) out.pubs[tick].push_back(e);
        }
    }
    return out;
}

ReplaySchedule replay_load(const RunLog& log, const std::set<std::string>& topics,
                           std::optional<double> expected_tick_size_ms) {
    if (expected_tick_size_ms && *expected_tick_size_ms != log.header.tick_size_ms)
        throw ConfigError("log tick_size_ms " + format_number(log.header.tick_size_ms) +
                          " does not match federation tick_size_ms " + format_number(*expected_tick_size_ms));
    ReplaySchedule s;
    s.header = log.header;
    for (auto& e : log.envelopes()) {
        if (e.kind != Kind::Pub) continue;
        if (!topics.empty() && !topics.contains(e.topic)) continue;
        s.pubs[e.tick].push_back(std::move(e));
    }
    return s;
}

std::vector<Envelope> replay_step(const ReplaySchedule& schedule, Tick tick) {
    auto it = schedule.pubs.find(tick);
    return it == schedule.pubs.end() ? std::vector<Envelope>{} : it->second;
}

}  // namespace blueice
