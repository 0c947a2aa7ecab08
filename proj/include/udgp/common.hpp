#ifndef UDGP_COMMON_HPP
#define UDGP_COMMON_HPP

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace udgp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; carries the offending line number (1-based, 0 = n/a).
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, long line = 0)
        : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    long line() const { return line_; }

  private:
    long line_;
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

inline std::string strfmt(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[1024];
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return std::string(buf);
}

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

// Diagnostics verbosity, controlled by the UDGP_LOG environment variable
// (quiet|info|debug). Messages go to stderr; normal outputs are unaffected.
inline LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("UDGP_LOG");
        if (!env) return LogLevel::Quiet;
        std::string value(env);
        if (value == "debug") return LogLevel::Debug;
        if (value == "info") return LogLevel::Info;
        return LogLevel::Quiet;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[udgp] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::fprintf(stderr, "[udgp:debug] %s\n", msg.c_str());
}

namespace tol {
// Spectral decomposition accuracy, relative to ||X||_F.
inline constexpr double spectral = 1e-10;
// Integer feasibility for MILP incumbents.
inline constexpr double integrality = 1e-6;
// Constraint feasibility for LP/MILP solutions.
inline constexpr double feasibility = 1e-7;
// Relative optimality gap for branch-and-bound termination.
inline constexpr double mip_gap = 1e-6;
// Gradient norm threshold for the local DGP solver.
inline constexpr double gradient = 1e-8;
}  // namespace tol

}  // namespace udgp

#endif
