#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace mmreach {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitUnsound = 2 };

struct CliOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<std::filesystem::path> out;
    bool quiet = false;
    /// verify only: scale the computed regions about their centres before
    /// auditing (values < 1 plant violations).
    double debug_scale = 1.0;
};

int cmd_check(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_reach(const CliOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const CliOptions& opts, std::ostream& out, std::ostream& err);

} // namespace mmreach
