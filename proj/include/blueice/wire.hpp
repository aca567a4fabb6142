#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "blueice/bus.hpp"
#include "blueice/config.hpp"
#include "blueice/envelope.hpp"
#include "blueice/error.hpp"

namespace blueice {

inline constexpr std::size_t kDefaultMaxRecordBytes = 1u << 20;
inline constexpr const char* kDefaultListenAddress = "127.0.0.1:7447";

/// Framing failure that must close the connection ("MSG_TOO_BIG" or "BAD_MSG").
class FrameError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

/// Peer went away (EOF, possibly mid-record) or the socket failed.
class ConnectionError : public IoError {
public:
    using IoError::IoError;
};

/// Anything that yields bytes; read_some returns 0 at end of stream.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    virtual std::size_t read_some(char* buffer, std::size_t size) = 0;
};

class ByteSink {
public:
    virtual ~ByteSink() = default;
    virtual void write_all(std::string_view bytes) = 0;
};

/// Buffers a byte stream and splits it into LF-terminated records.
class LineReader {
public:
    explicit LineReader(ByteSource& source, std::size_t max_record_bytes = kDefaultMaxRecordBytes)
        : source_(source), max_(max_record_bytes) {}

    /// Next record without its LF. Throws FrameError("MSG_TOO_BIG") or ConnectionError.
    std::string read_line();

private:
    ByteSource& source_;
    std::size_t max_;
    std::string buffer_;
    std::size_t scanned_ = 0;
};

/// Reads and decodes one envelope. Decode failures become FrameError("BAD_MSG").
Envelope frame_read(LineReader& reader);
void frame_write(ByteSink& sink, const Envelope& envelope);

/// Validates a HELLO and registers the federate with the bus. Returns WELCOME
/// (tick_size_ms, max_ticks, config_hash, subscriptions) or ERROR
/// (BAD_VERSION, LATE_JOIN, UNKNOWN_ID, DUP_ID, AUTH).
Envelope handshake(const Envelope& hello, const FederationConfig& config, Bus& bus, bool run_started);

/// Owning POSIX socket.
class Socket final : public ByteSource, public ByteSink {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() override;

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }

    std::size_t read_some(char* buffer, std::size_t size) override;
    void write_all(std::string_view bytes) override;
    /// Stops further reads and writes; a blocked reader sees EOF.
    void shutdown() noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

struct HostPort {
    std::string host;
    std::uint16_t port = 0;
};

/// Parses "host:port". Throws ConfigError.
HostPort parse_address(std::string_view address);

/// TCP listener bound to host:port (port 0 picks a free port).
class Listener {
public:
    explicit Listener(const HostPort& address);
    std::uint16_t port() const noexcept { return port_; }
    /// Waits up to timeout_ms for a connection; returns an invalid Socket on timeout.
    Socket accept(int timeout_ms);
    void close() noexcept { socket_.close(); }

private:
    Socket socket_;
    std::uint16_t port_ = 0;
};

Socket connect_to(const HostPort& address);

}  // namespace blueice
