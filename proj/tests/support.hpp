#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "codm/config.hpp"
#include "codm/encounter.hpp"
#include "codm/gateway.hpp"
#include "codm/knowledge_base.hpp"
#include "codm/prompt_forge.hpp"
#include "codm/session.hpp"
#include "codm/store.hpp"
#include "codm/util.hpp"

namespace codm::test {

inline std::filesystem::path data_dir() { return CODM_DATA_DIR; }
inline std::filesystem::path test_dir() { return CODM_TEST_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string golden(const std::string& name) { return read_file(test_dir() / "golden" / name); }

inline const KnowledgeBase& fixture_kb() {
    static const KnowledgeBase kb = load_knowledge_base(data_dir() / "monsters", data_dir() / "settings");
    return kb;
}

inline EncounterTable fixture_table(const std::string& name) {
    return load_encounter_table(data_dir() / "tables" / (name + ".json"), fixture_kb());
}

/// Encounter with the given groups in a setting, without id or timestamp.
inline Encounter make_encounter(std::vector<RolledGroup> rolled, const std::string& setting = "autumn-forest") {
    Encounter e;
    e.setting_id = setting;
    e.rolled = std::move(rolled);
    e.rendered = render_encounter(e.rolled, fixture_kb());
    return e;
}

inline Encounter blink_dog_encounter() { return make_encounter({{"blink-dog", 12}}); }

inline std::chrono::system_clock::time_point epoch() {
    return parse_timestamp("2023-06-01T18:00:00.000Z");
}

/// Mock-backed service config over the fixture corpus.
inline ApiConfig fixture_config() {
    ApiConfig c;
    c.monsters_dir = data_dir() / "monsters";
    c.settings_dir = data_dir() / "settings";
    c.tables = {{"wilderness", data_dir() / "tables" / "wilderness.json"},
                {"blink-dogs", data_dir() / "tables" / "blink-dogs.json"}};
    c.default_table = "wilderness";
    c.database = ":memory:";
    c.provider.kind = "mock";
    c.provider.mock_responses = data_dir() / "mock_responses.json";
    return c;
}

/// Deterministic overrides: stepping clock, sequential ids, no real sleeping.
inline AppOverrides deterministic_overrides(std::shared_ptr<Provider> provider = nullptr) {
    AppOverrides o;
    o.provider = std::move(provider);
    o.clock = std::make_shared<SteppingClock>(epoch());
    o.ids = std::make_shared<SequentialIdGenerator>();
    o.sleeper = [](std::chrono::milliseconds) {};
    return o;
}

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "codm-test-XXXXXX").string();
        if (mkdtemp(tmpl.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Provider whose behavior a test can swap at any time; can also hold calls
// until released.
class ControlledProvider final : public Provider {
public:
    std::string name() const override { return "controlled"; }

    std::string complete(const PromptBundle& bundle) override {
        std::function<std::string(const PromptBundle&)> fn;
        {
            std::unique_lock lock(mutex_);
            sent_.push_back(bundle);
            ++entered_;
            cv_.notify_all();
            cv_.wait(lock, [&] { return !hold_; });
            fn = behavior_;
        }
        return fn(bundle);
    }

    void set_behavior(std::function<std::string(const PromptBundle&)> fn) {
        std::lock_guard lock(mutex_);
        behavior_ = std::move(fn);
    }
    void hold() {
        std::lock_guard lock(mutex_);
        hold_ = true;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            hold_ = false;
        }
        cv_.notify_all();
    }
    void wait_entered(int n) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return entered_ >= n; });
    }
    std::vector<PromptBundle> sent() {
        std::lock_guard lock(mutex_);
        return sent_;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    bool hold_ = false;
    int entered_ = 0;
    std::vector<PromptBundle> sent_;
    std::function<std::string(const PromptBundle&)> behavior_ = [](const PromptBundle& b) {
        return "reply to: " + b.messages().back().content;
    };
};

// ---- synthetic usage log ---------------------------------------------------

inline nlohmann::json usage_log() { return nlohmann::json::parse(read_file(test_dir() / "fixtures" / "usage_log.json")); }

/// Writes the log's encounters, generations and feedback straight into the
/// store. Generations carry real prompt bundles for a fixture encounter.
inline void replay_usage_log(Store& store, const nlohmann::json& log) {
    const auto& kb = fixture_kb();
    const std::string at = format_timestamp(epoch());
    Rng rng(1);
    for (const auto& id : log["encounters"]) {
        Encounter e = blink_dog_encounter();
        e.id = id.get<std::string>();
        e.created_at = at;
        store.insert_encounter(e);
    }
    const Encounter base = blink_dog_encounter();
    const PromptBundle summ = build_summarization_prompt(base, kb);
    const PromptBundle und = build_understanding_prompt(base, kb, rng);
    const PromptBundle brain = build_brainstorm_seed(base, kb, std::nullopt, rng);
    for (const auto& g : log["generations"]) {
        const auto kind = parse_interface_kind(g["kind"].get<std::string>());
        const PromptBundle& bundle = kind == InterfaceKind::summarization   ? summ
                                     : kind == InterfaceKind::understanding ? und
                                                                            : brain;
        GenerationRecord r{.id = g["id"],
                           .request_id = "req-" + g["id"].get<std::string>(),
                           .bundle = bundle,
                           .output_text = "logged output",
                           .provider = "log",
                           .latency_ms = 0,
                           .attempts = 1,
                           .created_at = at,
                           .thread_id = std::nullopt,
                           .encounter_id = g["encounter_id"].get<std::string>()};
        store.persist_generation(r);
    }
    int n = 0;
    for (const auto& f : log["feedback"]) {
        store.insert_feedback({.id = "fb-" + std::to_string(++n),
                               .generation_id = f["generation_id"],
                               .user_id = f["user_id"],
                               .polarity = parse_polarity(f["polarity"].get<std::string>()),
                               .comment = std::nullopt,
                               .created_at = at});
    }
}

/// Tallies by nested scans over every stored row, with no SQL aggregation.
inline FeedbackTally brute_force_tally(Store& store, InterfaceKind kind) {
    const auto generations = store.all_generations();
    const auto feedback = store.all_feedback();
    FeedbackTally t;
    for (const auto& f : feedback) {
        for (const auto& g : generations) {
            if (g.id == f.generation_id && g.bundle.kind() == kind) {
                (f.polarity == Polarity::positive ? t.positive : t.negative) += 1;
            }
        }
    }
    std::vector<std::string> seen;
    for (const auto& g : generations) {
        if (g.bundle.kind() != kind || !g.encounter_id) {
            continue;
        }
        bool dup = false;
        for (const auto& s : seen) {
            dup = dup || s == *g.encounter_id;
        }
        if (!dup) {
            seen.push_back(*g.encounter_id);
        }
    }
    t.total_encounters = static_cast<std::int64_t>(seen.size());
    return t;
}

}  // namespace codm::test
