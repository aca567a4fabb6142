#include "blueice/launcher.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "blueice/canonical.hpp"
#include "blueice/error.hpp"
#include "blueice/server.hpp"

namespace blueice {

std::string self_executable() {
    std::error_code ec;
    auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (ec) throw IoError("cannot resolve own executable: " + ec.message());
    return p.string();
}

std::vector<std::string> launch_arguments(const FederateDescriptor& f, const std::string& address,
                                          const std::string& config_dir) {
    const Value& launch = f.launch;
    std::vector<std::string> args{launch.at("command").get<std::string>(), "--connect", address, "--id", f.id,
                                  "--token", f.token};
    if (auto it = launch.find("scenario"); it != launch.end() && !it->is_null()) {
        if (it->is_string()) {
            std::filesystem::path p(it->get<std::string>());
            if (p.is_relative()) p = std::filesystem::path(config_dir) / p;
            args.insert(args.end(), {"--scenario", p.string()});
        } else {
            args.insert(args.end(), {"--scenario-json", encode_value(*it)});
        }
    }
    for (const auto& a : launch.value("args", Value::array())) args.push_back(a.get<std::string>());
    return args;
}

namespace {

struct Child {
    std::string federate;
    pid_t pid = -1;
    bool reaped = false;
    int status = 0;
};

pid_t spawn(const std::string& exe, const std::vector<std::string>& args) {
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    const pid_t pid = ::fork();
    if (pid < 0) throw IoError("fork failed");
    if (pid == 0) {
        ::execv(exe.c_str(), argv.data());
        std::_Exit(127);
    }
    return pid;
}

void reap_all(std::vector<Child>& children, bool kill_first) {
    using namespace std::chrono;
    const auto deadline = steady_clock::now() + seconds(5);
    if (kill_first) {
        for (auto& c : children) {
            if (!c.reaped) ::kill(c.pid, SIGTERM);
        }
    }
    for (auto& c : children) {
        while (!c.reaped) {
            const pid_t r = ::waitpid(c.pid, &c.status, WNOHANG);
            if (r == c.pid || r < 0) {
                c.reaped = true;
                break;
            }
            if (steady_clock::now() > deadline) {
                ::kill(c.pid, SIGKILL);
                ::waitpid(c.pid, &c.status, 0);
                c.reaped = true;
                break;
            }
            std::this_thread::sleep_for(milliseconds(5));
        }
    }
}

}  // namespace

RunOutcome run_federation(const FederationConfig& config, const RunOptions& options) {
    std::string address = config.listen_address;
    if (const char* env = std::getenv(kListenEnvVar); env && *env) address = env;
    if (options.listen_address) address = *options.listen_address;

    const RunLogHeader header{config_hash(config.document), config.tick_size_ms, config.global_seed};
    std::optional<Recorder> recorder;
    if (options.record_path) recorder.emplace(header, *options.record_path);
    else recorder.emplace(header);

    Listener listener(parse_address(address));
    const std::string bound = parse_address(address).host + ":" + std::to_string(listener.port());

    std::vector<Child> children;
    if (!options.external_only) {
        const std::string exe = options.federate_executable.empty() ? self_executable() : options.federate_executable;
        for (const auto& f : config.federates) {
            if (f.launch.is_null()) continue;
            children.push_back({f.id, spawn(exe, launch_arguments(f, bound, options.config_dir))});
        }
    }

    ServeOptions serve_opts;
    serve_opts.pace = options.pace;
    serve_opts.health_check = [&]() -> std::optional<std::pair<std::string, std::string>> {
        for (auto& c : children) {
            if (c.reaped) continue;
            if (::waitpid(c.pid, &c.status, WNOHANG) == c.pid) {
                c.reaped = true;
                const bool clean = WIFEXITED(c.status) && WEXITSTATUS(c.status) == 0;
                if (!clean) {
                    const std::string how = WIFEXITED(c.status)
                                                ? "exited with status " + std::to_string(WEXITSTATUS(c.status))
                                                : "killed by signal " + std::to_string(WTERMSIG(c.status));
                    return std::make_pair(c.federate, "federate '" + c.federate + "' " + how);
                }
            }
        }
        return std::nullopt;
    };

    ServeResult result = serve(config, &*recorder, listener, serve_opts);
    listener.close();
    reap_all(children, result.status != ExitStatus::Success);

    RunOutcome out;
    out.status = result.status;
    out.abort = result.abort;
    out.log = recorder->log();
    return out;
}

}  // namespace blueice
