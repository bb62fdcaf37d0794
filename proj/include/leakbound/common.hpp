#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace leakbound {

enum class LogBase { bits, nats };

inline double log_in_base(double v, LogBase base) {
    return base == LogBase::bits ? std::log2(v) : std::log(v);
}

// H_nats = H_base * nats_per_unit(base)
inline double nats_per_unit(LogBase base) {
    return base == LogBase::bits ? std::log(2.0) : 1.0;
}

inline double to_nats(double v, LogBase base) { return v * nats_per_unit(base); }
inline double from_nats(double v, LogBase base) { return v / nats_per_unit(base); }

// Shared tolerances. Normalization is strict because inputs arrive verbatim
// from JSON; inequality slack absorbs the accumulated error of SVD and LU
// solves plus simplex pivoting on well-conditioned instances.
inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kInequalityTol = 1e-9;
inline constexpr double kOrthonormalityTol = 1e-10;
inline constexpr double kConditionLimit = 1e12;
inline constexpr double kPositivityTol = 1e-12;

enum class ErrorCode {
    NegativeEntry,
    NotNormalized,
    ZeroMarginal,
    LengthMismatch,
    ZeroWeightU,
    SupportViolation,
    RankDeficient,
    EmptyOmega1,
    InfeasiblePoint,
    Infeasible,
    Unbounded,
    CycleLimitExceeded,
    ReconstructionMismatch,
    RegimeViolation,
    BisectionFailure,
    NoFeasiblePoint,
    BadInput,
};

const char* error_code_name(ErrorCode code);

// Exit code contract: 1 for validation and input problems, 2 when a
// feasibility region or validity regime is empty.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Deterministic RNG. The mapping from raw 64-bit draws to doubles is written
// out explicitly so that generated instances and mechanisms are byte-identical
// across standard libraries (std::uniform_real_distribution is not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform on [0, 1) with 53 significant bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Standard exponential; uniform() < 1 keeps the log argument positive.
    double exponential() { return -std::log(1.0 - uniform()); }

    // Uniform on {0, ..., n-1}; modulo bias is irrelevant at test sizes.
    int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

private:
    std::mt19937_64 engine_;
};

// Fixed-width-free deterministic formatting used for CSV and text dumps.
std::string format_double(double v);

}  // namespace leakbound
