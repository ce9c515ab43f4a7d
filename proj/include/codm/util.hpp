#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace codm {

/// Seeded random source injected wherever the system makes a random choice.
///
/// Integer draws use rejection sampling on the raw 64-bit engine output rather
/// than std::uniform_int_distribution, whose algorithm is implementation
/// defined, so a seed produces the same encounter on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in the closed range [lo, hi]. Requires lo <= hi.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// A fresh seed from the OS entropy source, for requests that do not pin one.
std::uint64_t entropy_seed();

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::system_clock::time_point now() = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::system_clock::time_point now() override { return std::chrono::system_clock::now(); }
};

// Starts at a fixed instant and advances by `step` on every read.
class SteppingClock final : public Clock {
public:
    explicit SteppingClock(std::chrono::system_clock::time_point start,
                           std::chrono::milliseconds step = std::chrono::milliseconds(1000))
        : current_(start), step_(step) {}

    std::chrono::system_clock::time_point now() override;
    void advance(std::chrono::milliseconds by);

private:
    std::mutex mutex_;
    std::chrono::system_clock::time_point current_;
    std::chrono::milliseconds step_;
};

/// ISO-8601 UTC with millisecond precision, e.g. "2023-06-01T12:00:00.000Z".
std::string format_timestamp(std::chrono::system_clock::time_point tp);
std::chrono::system_clock::time_point parse_timestamp(std::string_view text);

class IdGenerator {
public:
    virtual ~IdGenerator() = default;
    virtual std::string next(std::string_view prefix) = 0;
};

// prefix + 16 random hex digits
class RandomIdGenerator final : public IdGenerator {
public:
    RandomIdGenerator();
    std::string next(std::string_view prefix) override;

private:
    std::mutex mutex_;
    std::mt19937_64 engine_;
};

// prefix + zero-padded counter; used for reproducible runs
class SequentialIdGenerator final : public IdGenerator {
public:
    std::string next(std::string_view prefix) override;

private:
    std::atomic<std::uint64_t> counter_{0};
};

/// Splits on Unicode whitespace (UTF-8 input) and counts the non-empty tokens.
std::size_t count_words(std::string_view text);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace codm
