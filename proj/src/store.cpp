#include "codm/store.hpp"

#include <sqlite3.h>

#include "codm/errors.hpp"

namespace codm {

using nlohmann::json;

std::string_view to_string(ThreadKind kind) {
    return kind == ThreadKind::brainstorm ? "brainstorm" : "open_chat";
}

ThreadKind parse_thread_kind(std::string_view text) {
    if (text == "brainstorm") return ThreadKind::brainstorm;
    if (text == "open_chat") return ThreadKind::open_chat;
    throw ValidationError("unknown thread kind '" + std::string(text) + "'");
}

std::string_view to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }

Polarity parse_polarity(std::string_view text) {
    if (text == "positive" || text == "up") return Polarity::positive;
    if (text == "negative" || text == "down") return Polarity::negative;
    throw ValidationError("polarity must be 'positive' or 'negative'");
}

json to_json(const FeedbackRecord& f) {
    return {{"id", f.id},
            {"generation_id", f.generation_id},
            {"user_id", f.user_id},
            {"polarity", to_string(f.polarity)},
            {"comment", f.comment ? json(*f.comment) : json(nullptr)},
            {"created_at", f.created_at}};
}

json to_json(const FeedbackTally& t) {
    return {{"positive", t.positive}, {"negative", t.negative}, {"total_encounters", t.total_encounters}};
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS encounters (
    id          TEXT PRIMARY KEY,
    setting_id  TEXT NOT NULL,
    rolled_json TEXT NOT NULL,
    rendered    TEXT NOT NULL,
    flavor      TEXT,
    created_at  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS threads (
    id               TEXT PRIMARY KEY,
    kind             TEXT NOT NULL CHECK (kind IN ('brainstorm', 'open_chat')),
    encounter_id     TEXT REFERENCES encounters(id),
    visibility       TEXT NOT NULL,
    created_by       TEXT NOT NULL,
    seed_bundle      TEXT NOT NULL,
    seed_count       INTEGER NOT NULL,
    summary_included INTEGER NOT NULL,
    created_at       TEXT NOT NULL,
    last_activity    TEXT NOT NULL,
    CHECK ((kind = 'brainstorm') = (encounter_id IS NOT NULL))
);
CREATE TABLE IF NOT EXISTS messages (
    thread_id  TEXT NOT NULL REFERENCES threads(id),
    seq        INTEGER NOT NULL,
    role       TEXT NOT NULL CHECK (role IN ('system', 'user', 'assistant')),
    content    TEXT NOT NULL,
    user_id    TEXT,
    created_at TEXT NOT NULL,
    pending    INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (thread_id, seq)
);
CREATE TABLE IF NOT EXISTS generations (
    id           TEXT PRIMARY KEY,
    request_id   TEXT NOT NULL UNIQUE,
    kind         TEXT NOT NULL,
    bundle_json  TEXT NOT NULL,
    output_text  TEXT NOT NULL,
    provider     TEXT NOT NULL,
    latency_ms   INTEGER NOT NULL,
    attempts     INTEGER NOT NULL,
    created_at   TEXT NOT NULL,
    thread_id    TEXT,
    encounter_id TEXT
);
CREATE INDEX IF NOT EXISTS generations_by_encounter ON generations(encounter_id, kind);
CREATE TABLE IF NOT EXISTS feedback (
    id            TEXT PRIMARY KEY,
    generation_id TEXT NOT NULL REFERENCES generations(id),
    user_id       TEXT NOT NULL,
    polarity      TEXT NOT NULL CHECK (polarity IN ('positive', 'negative')),
    comment       TEXT,
    created_at    TEXT NOT NULL,
    UNIQUE (generation_id, user_id)
);
)sql";

}  // namespace

// Prepared statement with positional binding helpers; finalized on scope exit.
class Store::Statement {
public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            throw StoreError(std::string("prepare failed: ") + sqlite3_errmsg(db));
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int i, const std::string& v) {
        check(sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int i, const std::optional<std::string>& v) {
        if (v) {
            return bind(i, *v);
        }
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }
    Statement& bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }

    // True while rows remain.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) {
            return true;
        }
        if (rc == SQLITE_DONE) {
            return false;
        }
        last_rc_ = sqlite3_extended_errcode(db_);
        throw StoreError(std::string("step failed: ") + sqlite3_errmsg(db_));
    }

    // Runs a statement that returns no rows; returns the extended result code.
    int run() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_DONE || rc == SQLITE_ROW) {
            return SQLITE_OK;
        }
        return sqlite3_extended_errcode(db_);
    }

    std::string text(int col) const {
        const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
        return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
    }
    std::optional<std::string> optional_text(int col) const {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) {
            return std::nullopt;
        }
        return text(col);
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) {
            throw StoreError(std::string("bind failed: ") + sqlite3_errmsg(db_));
        }
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
    int last_rc_ = SQLITE_OK;
};

namespace {

// BEGIN IMMEDIATE ... COMMIT, rolled back if the scope exits without commit().
class Transaction {
public:
    explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
    ~Transaction() {
        if (!done_) {
            sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
        }
    }
    void commit() {
        run("COMMIT");
        done_ = true;
    }

private:
    void run(const char* sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown";
            sqlite3_free(err);
            throw StoreError(std::string(sql) + " failed: " + msg);
        }
    }

    sqlite3* db_;
    bool done_ = false;
};

}  // namespace

Store::Store(const std::string& path) {
    const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
    if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open database '" + path + "': " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA synchronous=FULL");
    exec("PRAGMA foreign_keys=ON");
    migrate();
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw StoreError(msg);
    }
}

void Store::migrate() { exec(kSchema); }

void Store::insert_encounter(const Encounter& e) {
    json rolled = json::array();
    for (const auto& g : e.rolled) {
        rolled.push_back({{"monster_id", g.monster_id}, {"quantity", g.quantity}});
    }
    std::lock_guard lock(mutex_);
    Statement st(db_,
                 "INSERT INTO encounters (id, setting_id, rolled_json, rendered, flavor, created_at) "
                 "VALUES (?, ?, ?, ?, ?, ?)");
    st.bind(1, e.id).bind(2, e.setting_id).bind(3, rolled.dump()).bind(4, e.rendered).bind(5, e.flavor).bind(
        6, e.created_at);
    if (const int rc = st.run(); rc != SQLITE_OK) {
        throw StoreError("cannot insert encounter '" + e.id + "': " + sqlite3_errstr(rc));
    }
}

std::optional<Encounter> Store::find_encounter(const std::string& id) {
    std::lock_guard lock(mutex_);
    Statement st(db_,
                 "SELECT id, setting_id, rolled_json, rendered, flavor, created_at FROM encounters WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) {
        return std::nullopt;
    }
    Encounter e;
    e.id = st.text(0);
    e.setting_id = st.text(1);
    for (const auto& g : json::parse(st.text(2))) {
        e.rolled.push_back({g.at("monster_id").get<std::string>(), g.at("quantity").get<int>()});
    }
    e.rendered = st.text(3);
    e.flavor = st.optional_text(4);
    e.created_at = st.text(5);
    return e;
}

void Store::create_thread(const ThreadRecord& t, const PromptBundle& seed) {
    std::lock_guard lock(mutex_);
    Transaction tx(db_);
    {
        Statement st(db_,
                     "INSERT INTO threads (id, kind, encounter_id, visibility, created_by, seed_bundle, seed_count, "
                     "summary_included, created_at, last_activity) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
        st.bind(1, t.id)
            .bind(2, std::string(to_string(t.kind)))
            .bind(3, t.encounter_id)
            .bind(4, t.visibility)
            .bind(5, t.created_by)
            .bind(6, to_json(seed).dump())
            .bind(7, static_cast<std::int64_t>(seed.messages().size()))
            .bind(8, static_cast<std::int64_t>(t.summary_included ? 1 : 0))
            .bind(9, t.created_at)
            .bind(10, t.last_activity);
        if (const int rc = st.run(); rc != SQLITE_OK) {
            throw StoreError("cannot insert thread '" + t.id + "': " + sqlite3_errstr(rc));
        }
    }
    int seq = 0;
    for (const auto& m : seed.messages()) {
        Statement st(db_,
                     "INSERT INTO messages (thread_id, seq, role, content, user_id, created_at, pending) "
                     "VALUES (?, ?, ?, ?, NULL, ?, 0)");
        st.bind(1, t.id).bind(2, static_cast<std::int64_t>(seq++)).bind(3, std::string(to_string(m.role)));
        st.bind(4, m.content).bind(5, t.created_at);
        if (const int rc = st.run(); rc != SQLITE_OK) {
            throw StoreError(std::string("cannot insert seed message: ") + sqlite3_errstr(rc));
        }
    }
    tx.commit();
}

std::optional<ThreadRecord> Store::find_thread(const std::string& id) {
    std::lock_guard lock(mutex_);
    Statement st(db_,
                 "SELECT id, kind, encounter_id, visibility, created_by, seed_count, summary_included, created_at, "
                 "last_activity FROM threads WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) {
        return std::nullopt;
    }
    ThreadRecord t;
    t.id = st.text(0);
    t.kind = parse_thread_kind(st.text(1));
    t.encounter_id = st.optional_text(2);
    t.visibility = st.text(3);
    t.created_by = st.text(4);
    t.seed_count = static_cast<int>(st.integer(5));
    t.summary_included = st.integer(6) != 0;
    t.created_at = st.text(7);
    t.last_activity = st.text(8);
    return t;
}

PromptBundle Store::thread_seed(const std::string& thread_id) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT seed_bundle FROM threads WHERE id = ?");
    st.bind(1, thread_id);
    if (!st.step()) {
        throw UnknownThreadError(thread_id);
    }
    return bundle_from_json(json::parse(st.text(0)));
}

std::vector<StoredMessage> Store::thread_messages(const std::string& thread_id) {
    std::lock_guard lock(mutex_);
    Statement st(db_,
                 "SELECT seq, role, content, user_id, created_at, pending FROM messages WHERE thread_id = ? "
                 "ORDER BY seq");
    st.bind(1, thread_id);
    std::vector<StoredMessage> out;
    while (st.step()) {
        StoredMessage m;
        m.seq = static_cast<int>(st.integer(0));
        m.role = parse_role(st.text(1));
        m.content = st.text(2);
        m.user_id = st.optional_text(3);
        m.created_at = st.text(4);
        m.pending = st.integer(5) != 0;
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<std::string> Store::list_thread_ids() {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT id FROM threads ORDER BY created_at, id");
    std::vector<std::string> out;
    while (st.step()) {
        out.push_back(st.text(0));
    }
    return out;
}

int Store::append_pending_user_message(const std::string& thread_id, const std::string& content,
                                       const std::string& user_id, const std::string& created_at) {
    std::lock_guard lock(mutex_);
    Transaction tx(db_);
    int seq = 0;
    {
        Statement st(db_, "SELECT COALESCE(MAX(seq) + 1, 0) FROM messages WHERE thread_id = ?");
        st.bind(1, thread_id);
        st.step();
        seq = static_cast<int>(st.integer(0));
    }
    {
        Statement st(db_,
                     "INSERT INTO messages (thread_id, seq, role, content, user_id, created_at, pending) "
                     "VALUES (?, ?, 'user', ?, ?, ?, 1)");
        st.bind(1, thread_id).bind(2, static_cast<std::int64_t>(seq)).bind(3, content).bind(4, user_id).bind(
            5, created_at);
        if (const int rc = st.run(); rc != SQLITE_OK) {
            throw StoreError(std::string("cannot append message: ") + sqlite3_errstr(rc));
        }
    }
    {
        Statement st(db_, "UPDATE threads SET last_activity = ? WHERE id = ?");
        st.bind(1, created_at).bind(2, thread_id);
        st.run();
    }
    tx.commit();
    return seq;
}

void Store::commit_reply(const std::string& thread_id, int user_seq, const std::string& reply,
                         const std::string& created_at) {
    std::lock_guard lock(mutex_);
    Transaction tx(db_);
    {
        Statement st(db_, "UPDATE messages SET pending = 0 WHERE thread_id = ? AND seq = ? AND pending = 1");
        st.bind(1, thread_id).bind(2, static_cast<std::int64_t>(user_seq));
        st.run();
        if (sqlite3_changes(db_) != 1) {
            throw StoreError("no pending message " + std::to_string(user_seq) + " in thread '" + thread_id + "'");
        }
    }
    {
        Statement st(db_,
                     "INSERT INTO messages (thread_id, seq, role, content, user_id, created_at, pending) "
                     "VALUES (?, ?, 'assistant', ?, NULL, ?, 0)");
        st.bind(1, thread_id).bind(2, static_cast<std::int64_t>(user_seq + 1)).bind(3, reply).bind(4, created_at);
        if (const int rc = st.run(); rc != SQLITE_OK) {
            throw StoreError(std::string("cannot append reply: ") + sqlite3_errstr(rc));
        }
    }
    {
        Statement st(db_, "UPDATE threads SET last_activity = ? WHERE id = ?");
        st.bind(1, created_at).bind(2, thread_id);
        st.run();
    }
    tx.commit();
}

void Store::touch_thread(const std::string& thread_id, const std::string& at) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "UPDATE threads SET last_activity = ? WHERE id = ?");
    st.bind(1, at).bind(2, thread_id);
    st.run();
}

GenerationRecord Store::read_generation(Statement& st) {
    return GenerationRecord{
        .id = st.text(0),
        .request_id = st.text(1),
        .bundle = bundle_from_json(json::parse(st.text(3))),
        .output_text = st.text(4),
        .provider = st.text(5),
        .latency_ms = st.integer(6),
        .attempts = static_cast<int>(st.integer(7)),
        .created_at = st.text(8),
        .thread_id = st.optional_text(9),
        .encounter_id = st.optional_text(10),
    };
}

#define CODM_GENERATION_COLUMNS \
    "id, request_id, kind, bundle_json, output_text, provider, latency_ms, attempts, created_at, thread_id, " \
    "encounter_id"

std::optional<GenerationRecord> Store::find_generation_by_request(const std::string& request_id) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT " CODM_GENERATION_COLUMNS " FROM generations WHERE request_id = ?");
    st.bind(1, request_id);
    if (!st.step()) {
        return std::nullopt;
    }
    return read_generation(st);
}

std::optional<GenerationRecord> Store::find_generation(const std::string& id) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT " CODM_GENERATION_COLUMNS " FROM generations WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) {
        return std::nullopt;
    }
    return read_generation(st);
}

GenerationRecord Store::persist_generation(const GenerationRecord& r) {
    std::lock_guard lock(mutex_);
    Transaction tx(db_);
    {
        Statement st(db_, "INSERT OR IGNORE INTO generations (" CODM_GENERATION_COLUMNS
                          ") VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
        st.bind(1, r.id)
            .bind(2, r.request_id)
            .bind(3, std::string(to_string(r.bundle.kind())))
            .bind(4, to_json(r.bundle).dump())
            .bind(5, r.output_text)
            .bind(6, r.provider)
            .bind(7, r.latency_ms)
            .bind(8, static_cast<std::int64_t>(r.attempts))
            .bind(9, r.created_at)
            .bind(10, r.thread_id)
            .bind(11, r.encounter_id);
        if (const int rc = st.run(); rc != SQLITE_OK) {
            throw StoreError(std::string("cannot persist generation: ") + sqlite3_errstr(rc));
        }
    }
    Statement st(db_, "SELECT " CODM_GENERATION_COLUMNS " FROM generations WHERE request_id = ?");
    st.bind(1, r.request_id);
    if (!st.step()) {
        throw StoreError("generation vanished after insert");
    }
    GenerationRecord stored = read_generation(st);
    tx.commit();
    return stored;
}

std::optional<GenerationRecord> Store::latest_generation_for_encounter(const std::string& encounter_id,
                                                                        const std::vector<InterfaceKind>& kinds) {
    std::optional<GenerationRecord> best;
    std::lock_guard lock(mutex_);
    for (const auto kind : kinds) {
        Statement st(db_, "SELECT " CODM_GENERATION_COLUMNS
                          " FROM generations WHERE encounter_id = ? AND kind = ? "
                          "ORDER BY created_at DESC, rowid DESC LIMIT 1");
        st.bind(1, encounter_id).bind(2, std::string(to_string(kind)));
        if (st.step()) {
            GenerationRecord g = read_generation(st);
            if (!best || g.created_at >= best->created_at) {
                best = std::move(g);
            }
        }
    }
    return best;
}

std::vector<GenerationRecord> Store::all_generations() {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT " CODM_GENERATION_COLUMNS " FROM generations ORDER BY rowid");
    std::vector<GenerationRecord> out;
    while (st.step()) {
        out.push_back(read_generation(st));
    }
    return out;
}

#undef CODM_GENERATION_COLUMNS

void Store::insert_feedback(const FeedbackRecord& f) {
    std::lock_guard lock(mutex_);
    Transaction tx(db_);
    {
        Statement st(db_, "SELECT 1 FROM generations WHERE id = ?");
        st.bind(1, f.generation_id);
        if (!st.step()) {
            throw UnknownGenerationError(f.generation_id);
        }
    }
    Statement st(db_,
                 "INSERT INTO feedback (id, generation_id, user_id, polarity, comment, created_at) "
                 "VALUES (?, ?, ?, ?, ?, ?)");
    st.bind(1, f.id)
        .bind(2, f.generation_id)
        .bind(3, f.user_id)
        .bind(4, std::string(to_string(f.polarity)))
        .bind(5, f.comment)
        .bind(6, f.created_at);
    const int rc = st.run();
    if (rc == SQLITE_CONSTRAINT_UNIQUE) {
        throw DuplicateFeedbackError(f.generation_id, f.user_id);
    }
    if (rc != SQLITE_OK) {
        throw StoreError(std::string("cannot insert feedback: ") + sqlite3_errstr(rc));
    }
    tx.commit();
}

std::vector<FeedbackRecord> Store::all_feedback() {
    std::lock_guard lock(mutex_);
    Statement st(db_,
                 "SELECT id, generation_id, user_id, polarity, comment, created_at FROM feedback ORDER BY rowid");
    std::vector<FeedbackRecord> out;
    while (st.step()) {
        out.push_back(FeedbackRecord{st.text(0), st.text(1), st.text(2), parse_polarity(st.text(3)),
                                     st.optional_text(4), st.text(5)});
    }
    return out;
}

FeedbackTally Store::tally_feedback(InterfaceKind kind) {
    const std::string k(to_string(kind));
    std::lock_guard lock(mutex_);
    FeedbackTally t;
    {
        Statement st(db_,
                     "SELECT "
                     "  COALESCE(SUM(f.polarity = 'positive'), 0), COALESCE(SUM(f.polarity = 'negative'), 0) "
                     "FROM feedback f JOIN generations g ON g.id = f.generation_id WHERE g.kind = ?");
        st.bind(1, k);
        st.step();
        t.positive = st.integer(0);
        t.negative = st.integer(1);
    }
    {
        Statement st(db_,
                     "SELECT COUNT(DISTINCT encounter_id) FROM generations WHERE kind = ? AND encounter_id IS NOT NULL");
        st.bind(1, k);
        st.step();
        t.total_encounters = st.integer(0);
    }
    return t;
}

StoreCounts Store::counts() {
    std::lock_guard lock(mutex_);
    const auto count = [&](const char* sql) {
        Statement st(db_, sql);
        st.step();
        return st.integer(0);
    };
    return StoreCounts{
        count("SELECT COUNT(*) FROM encounters"),  count("SELECT COUNT(*) FROM threads"),
        count("SELECT COUNT(*) FROM messages"),    count("SELECT COUNT(*) FROM generations"),
        count("SELECT COUNT(*) FROM feedback"),
    };
}

}  // namespace codm
