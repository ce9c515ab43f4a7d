#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace codm {

// Every error raised by the library carries a stable machine-readable code so
// the HTTP layer and the CLI can map it without string matching on messages.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

    // Provider attempts made before this error surfaced (0 when not applicable).
    int attempts() const noexcept { return attempts_; }
    void set_attempts(int n) noexcept { attempts_ = n; }

private:
    std::string code_;
    int attempts_ = 0;
};

// ---- knowledge base ---------------------------------------------------------

class SchemaError : public Error {
public:
    SchemaError(std::string file, std::string field, const std::string& detail)
        : Error("schema_error", file + ": field '" + field + "': " + detail),
          file_(std::move(file)), field_(std::move(field)) {}

    const std::string& file() const noexcept { return file_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string file_;
    std::string field_;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(std::string id)
        : Error("duplicate_id", "duplicate id '" + id + "'"), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class EmptyCorpusError : public Error {
public:
    EmptyCorpusError() : Error("empty_corpus", "knowledge base contains no monsters") {}
};

class UnknownSettingError : public Error {
public:
    explicit UnknownSettingError(const std::string& id)
        : Error("unknown_setting", "unknown setting '" + id + "'") {}
};

// ---- encounter engine -------------------------------------------------------

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& expected)
        : Error("parse_error", "at byte " + std::to_string(offset) + ": " + expected),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EmptyTableError : public Error {
public:
    EmptyTableError() : Error("empty_table", "encounter table has no entries") {}
};

class UnresolvedMonsterError : public Error {
public:
    explicit UnresolvedMonsterError(std::string id)
        : Error("unresolved_monster", "monster '" + id + "' is not in the knowledge base"),
          id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

// ---- prompts / profiles -----------------------------------------------------

class UnknownKindError : public Error {
public:
    explicit UnknownKindError(const std::string& kind)
        : Error("unknown_kind", "unknown interface kind '" + kind + "'") {}
};

class ProfileMismatchError : public Error {
public:
    explicit ProfileMismatchError(const std::string& kind)
        : Error("profile_mismatch",
                "decoding profile differs from the registered profile for '" + kind +
                    "' and no override was requested") {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("validation_error", message) {}
};

// ---- llm gateway ------------------------------------------------------------

class AuthError : public Error {
public:
    explicit AuthError(const std::string& message) : Error("auth_error", message) {}
};

class RateLimitError : public Error {
public:
    explicit RateLimitError(const std::string& message,
                            std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
        : Error("rate_limited", message), retry_after_(retry_after) {}
    std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

private:
    std::optional<std::chrono::milliseconds> retry_after_;
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& message) : Error("timeout", message) {}
};

// Opaque upstream failure. Transient failures (5xx, dropped connections) are
// retried by the gateway; permanent ones are not.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& message, bool transient = true)
        : Error("provider_error", message), transient_(transient) {}
    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

// ---- sessions ---------------------------------------------------------------

class UnknownEncounterError : public Error {
public:
    explicit UnknownEncounterError(const std::string& id)
        : Error("unknown_encounter", "unknown encounter '" + id + "'") {}
};

class UnknownThreadError : public Error {
public:
    explicit UnknownThreadError(const std::string& id)
        : Error("unknown_thread", "unknown thread '" + id + "'") {}
};

class UnknownGenerationError : public Error {
public:
    explicit UnknownGenerationError(const std::string& id)
        : Error("unknown_generation", "unknown generation '" + id + "'") {}
};

class NoSummaryError : public Error {
public:
    explicit NoSummaryError(const std::string& encounter_id)
        : Error("no_summary",
                "encounter '" + encounter_id + "' has no encounter-understanding generation yet") {}
};

class ThreadBusyError : public Error {
public:
    explicit ThreadBusyError(const std::string& thread_id)
        : Error("thread_busy", "message queue for thread '" + thread_id + "' is full") {}
};

class ThreadClosedError : public Error {
public:
    explicit ThreadClosedError(const std::string& thread_id)
        : Error("thread_closed", "thread '" + thread_id + "' was closed after being idle; reopen it first") {}
};

class PendingMessageError : public Error {
public:
    explicit PendingMessageError(const std::string& thread_id)
        : Error("pending_message",
                "thread '" + thread_id + "' has a failed message awaiting retry") {}
};

class NoPendingMessageError : public Error {
public:
    explicit NoPendingMessageError(const std::string& thread_id)
        : Error("no_pending_message", "thread '" + thread_id + "' has nothing to retry") {}
};

class ToolInvocationError : public Error {
public:
    ToolInvocationError()
        : Error("tool_invocation",
                "Bot commands are not run inside Calypso threads. Use the command outside the "
                "thread and paste its result here if you want Calypso to use it.") {}
};

class DuplicateFeedbackError : public Error {
public:
    DuplicateFeedbackError(const std::string& generation_id, const std::string& user_id)
        : Error("duplicate_feedback",
                "user '" + user_id + "' already left feedback on generation '" + generation_id + "'") {}
};

// ---- infrastructure ---------------------------------------------------------

class StoreError : public Error {
public:
    explicit StoreError(const std::string& message) : Error("store_error", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

}  // namespace codm
