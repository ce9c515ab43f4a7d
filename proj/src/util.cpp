#include "codm/util.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace codm {

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) {
        throw std::invalid_argument("Rng::uniform: empty range");
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) {  // full 64-bit range
        return static_cast<std::int64_t>(engine_());
    }
    // Values below 2^64 mod span would bias the low residues.
    const std::uint64_t threshold = (0 - span) % span;
    std::uint64_t x = engine_();
    while (x < threshold) {
        x = engine_();
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % span);
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::chrono::system_clock::time_point SteppingClock::now() {
    std::lock_guard lock(mutex_);
    const auto t = current_;
    current_ += step_;
    return t;
}

void SteppingClock::advance(std::chrono::milliseconds by) {
    std::lock_guard lock(mutex_);
    current_ += by;
}

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
    using namespace std::chrono;
    const auto ms = duration_cast<milliseconds>(tp.time_since_epoch()).count();
    std::time_t secs = static_cast<std::time_t>(ms / 1000);
    long millis = static_cast<long>(ms % 1000);
    if (millis < 0) {
        millis += 1000;
        secs -= 1;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03ldZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
    return buf;
}

std::chrono::system_clock::time_point parse_timestamp(std::string_view text) {
    std::tm tm{};
    int millis = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                    &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &millis) != 7) {
        throw std::invalid_argument("bad timestamp '" + s + "'");
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const std::time_t secs = timegm(&tm);
    return std::chrono::system_clock::time_point(std::chrono::seconds(secs)) +
           std::chrono::milliseconds(millis);
}

RandomIdGenerator::RandomIdGenerator() : engine_(entropy_seed()) {}

std::string RandomIdGenerator::next(std::string_view prefix) {
    std::uint64_t v;
    {
        std::lock_guard lock(mutex_);
        v = engine_();
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(prefix) + "-" + buf;
}

std::string SequentialIdGenerator::next(std::string_view prefix) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(++counter_));
    return std::string(prefix) + "-" + buf;
}

namespace {

// Length in bytes of a Unicode whitespace code point starting at text[i], or 0.
std::size_t whitespace_length(std::string_view text, std::size_t i) {
    const auto byte = [&](std::size_t k) -> unsigned {
        return k < text.size() ? static_cast<unsigned char>(text[k]) : 0u;
    };
    const unsigned b0 = byte(i);
    if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0D)) {
        return 1;
    }
    if (b0 == 0xC2) {  // U+0085 NEL, U+00A0 NBSP
        const unsigned b1 = byte(i + 1);
        return (b1 == 0x85 || b1 == 0xA0) ? 2 : 0;
    }
    if (b0 == 0xE1 && byte(i + 1) == 0x9A && byte(i + 2) == 0x80) {  // U+1680
        return 3;
    }
    if (b0 == 0xE2) {
        const unsigned b1 = byte(i + 1);
        const unsigned b2 = byte(i + 2);
        if (b1 == 0x80 && ((b2 >= 0x80 && b2 <= 0x8A) || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF)) {
            return 3;  // U+2000..U+200A, U+2028, U+2029, U+202F
        }
        if (b1 == 0x81 && b2 == 0x9F) {  // U+205F
            return 3;
        }
        return 0;
    }
    if (b0 == 0xE3 && byte(i + 1) == 0x80 && byte(i + 2) == 0x80) {  // U+3000
        return 3;
    }
    return 0;
}

}  // namespace

std::size_t count_words(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t ws = whitespace_length(text, i);
        if (ws > 0) {
            in_word = false;
            i += ws;
        } else {
            if (!in_word) {
                ++words;
                in_word = true;
            }
            ++i;
        }
    }
    return words;
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("EVP_Digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0F]);
    }
    return out;
}

}  // namespace codm
