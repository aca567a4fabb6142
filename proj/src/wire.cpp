#include "blueice/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "blueice/canonical.hpp"

namespace blueice {

std::string LineReader::read_line() {
    while (true) {
        const auto nl = buffer_.find('\n', scanned_);
        if (nl != std::string::npos) {
            if (nl > max_) throw FrameError("MSG_TOO_BIG", "record exceeds " + std::to_string(max_) + " bytes");
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            scanned_ = 0;
            return line;
        }
        scanned_ = buffer_.size();
        if (buffer_.size() > max_) throw FrameError("MSG_TOO_BIG", "record exceeds " + std::to_string(max_) + " bytes");
        char chunk[64 * 1024];
        const std::size_t n = source_.read_some(chunk, sizeof chunk);
        if (n == 0) {
            throw ConnectionError(buffer_.empty() ? "connection closed" : "connection closed mid-record");
        }
        buffer_.append(chunk, n);
    }
}

Envelope frame_read(LineReader& reader) {
    const std::string line = reader.read_line();
    try {
        return canonical_decode(line);
    } catch (const DecodeError& e) {
        throw FrameError("BAD_MSG", e.what());
    }
}

void frame_write(ByteSink& sink, const Envelope& envelope) { sink.write_all(canonical_encode(envelope)); }

Envelope handshake(const Envelope& hello, const FederationConfig& config, Bus& bus, bool run_started) {
    if (hello.kind != Kind::Hello) return make_error(hello.federate, "NOT_HELLO", "first envelope must be HELLO");
    if (hello.protocol_version != kProtocolVersion)
        return make_error(hello.federate, "BAD_VERSION",
                          "protocol_version " + std::to_string(hello.protocol_version) + " is not supported");
    if (run_started && !config.late_join)
        return make_error(hello.federate, "LATE_JOIN", "federation already running");
    try {
        bus.register_federate(hello.federate, hello.token);
    } catch (const ProtocolError& e) {
        return make_error(hello.federate, e.code(), e.what());
    }
    Envelope welcome;
    welcome.kind = Kind::Welcome;
    welcome.federate = hello.federate;
    welcome.payload = Value{{"tick_size_ms", config.tick_size_ms},
                            {"max_ticks", config.max_ticks},
                            {"config_hash", hash_hex(config_hash(config.document))},
                            {"subscriptions", bus.effective_subscriptions(hello.federate)}};
    return welcome;
}

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

Socket::~Socket() { close(); }

std::size_t Socket::read_some(char* buffer, std::size_t size) {
    while (true) {
        const ssize_t n = ::recv(fd_, buffer, size, 0);
        if (n >= 0) return static_cast<std::size_t>(n);
        if (errno == EINTR) continue;
        if (errno == ECONNRESET || errno == EBADF || errno == ENOTCONN) return 0;
        throw ConnectionError(std::string("recv: ") + std::strerror(errno));
    }
}

void Socket::write_all(std::string_view bytes) {
    while (!bytes.empty()) {
        const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConnectionError(std::string("send: ") + std::strerror(errno));
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
}

void Socket::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

HostPort parse_address(std::string_view address) {
    const auto colon = address.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw ConfigError("address must be host:port");
    HostPort hp;
    hp.host = std::string(address.substr(0, colon));
    const auto port = address.substr(colon + 1);
    unsigned value = 0;
    auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || end != port.data() + port.size() || value > 65535)
        throw ConfigError("bad port in address '" + std::string(address) + "'");
    hp.port = static_cast<std::uint16_t>(value);
    return hp;
}

namespace {

sockaddr_in resolve(const HostPort& a) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(a.port);
    const std::string host = a.host == "localhost" ? "127.0.0.1" : a.host;
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        addrinfo* res = nullptr;
        if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
            throw ConfigError("cannot resolve host '" + a.host + "'");
        addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
        ::freeaddrinfo(res);
    }
    return addr;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

Listener::Listener(const HostPort& address) {
    const sockaddr_in addr = resolve(address);
    socket_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!socket_.valid()) throw IoError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(socket_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        throw IoError("bind " + address.host + ":" + std::to_string(address.port) + ": " + std::strerror(errno));
    if (::listen(socket_.fd(), 64) != 0) throw IoError(std::string("listen: ") + std::strerror(errno));
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

Socket Listener::accept(int timeout_ms) {
    pollfd pfd{socket_.fd(), POLLIN, 0};
    const int r = ::poll(&pfd, 1, timeout_ms);
    if (r <= 0) return Socket();
    const int fd = ::accept4(socket_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) return Socket();
    set_nodelay(fd);
    return Socket(fd);
}

Socket connect_to(const HostPort& address) {
    const sockaddr_in addr = resolve(address);
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) throw ConnectionError(std::string("socket: ") + std::strerror(errno));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
        throw ConnectionError("connect " + address.host + ":" + std::to_string(address.port) + ": " +
                              std::strerror(errno));
    set_nodelay(s.fd());
    return s;
}

}  // namespace blueice
