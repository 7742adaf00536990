#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cofipara {

// Error taxonomy shared across modules. All derive from std::runtime_error so
// callers that only care about "it failed" can catch one type; the CLI maps
// each to a stable machine-parsable code.

// A caller handed us input that violates a precondition (empty text, bad raster, ...).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// An internal contract was broken (shape mismatch, missing rationale at pack time, ...).
struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// A dataset record failed schema validation. Message names record id and field.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Transient backend failure (timeout, refusal); retriable.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Permanent generation failure after retries were exhausted. Carries the stance
// that failed so the caller can report it.
struct GenerationError : std::runtime_error {
    GenerationError(const std::string& msg, std::string stance_value)
        : std::runtime_error(msg), stance(std::move(stance_value)) {}
    std::string stance;
};

// Checkpoint file is unreadable or shape-incompatible with the target model.
struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG helpers. std::mt19937_64 is portable bit-for-bit, but the
// standard distributions are not, so we map raw draws ourselves.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // xorshift64* : small, fast, and identical on every platform.
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (always consumes two draws).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

private:
    std::uint64_t state_;
};

// Wall-clock seconds since epoch, overridable through COFIPARA_FIXED_TIME for
// byte-identical pipeline outputs.
std::int64_t current_time_seconds();

}  // namespace cofipara
