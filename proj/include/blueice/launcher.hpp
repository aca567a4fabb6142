#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blueice/config.hpp"
#include "blueice/coordinator.hpp"
#include "blueice/recorder.hpp"

namespace blueice {

inline constexpr const char* kListenEnvVar = "BLUEICE_LISTEN";

struct RunOptions {
    std::optional<std::string> record_path;
    bool pace = false;
    /// Do not spawn any federate; wait for all of them to connect.
    bool external_only = false;
    /// Overrides the config's listen_address (and the environment variable).
    std::optional<std::string> listen_address;
    /// Executable providing the demo-federate subcommands.
    std::string federate_executable;
    /// Directory against which relative scenario paths resolve.
    std::string config_dir = ".";
};

struct RunOutcome {
    ExitStatus status = ExitStatus::Success;
    AbortInfo abort;
    RunLog log;
};

/// Starts the coordinator, launches every federate with a `launch` section as a
/// child process, and runs the federation to completion or abort.
RunOutcome run_federation(const FederationConfig& config, const RunOptions& options);

/// argv (after the executable) a launched federate receives.
std::vector<std::string> launch_arguments(const FederateDescriptor& federate, const std::string& address,
                                          const std::string& config_dir);

/// Path of the running executable.
std::string self_executable();

}  // namespace blueice
