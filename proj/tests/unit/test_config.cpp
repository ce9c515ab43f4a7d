#include <doctest.h>

#include <cstdlib>

#include "codm/errors.hpp"
#include "support.hpp"

using namespace codm;
using nlohmann::json;

namespace {

json base_doc() {
    return {{"monsters_dir", "monsters"},
            {"settings_dir", "settings"},
            {"tables", {{"wilderness", "tables/wilderness.json"}, {"blink-dogs", "tables/blink-dogs.json"}}},
            {"database", ":memory:"}};
}

}  // namespace

TEST_CASE("config resolves relative paths and applies defaults") {
    const auto c = parse_config(base_doc(), codm::test::data_dir());
    CHECK(c.monsters_dir == codm::test::data_dir() / "monsters");
    CHECK(c.default_table == "blink-dogs");  // first by name when unset
    CHECK(c.port == 8080);
    CHECK(c.token_budget == 12000);
    CHECK(c.idle_timeout == std::chrono::hours(24));
    CHECK(c.provider.kind == "mock");
    CHECK(c.provider.retry.max_attempts == 3);
    CHECK(c.provider.timeout == std::chrono::seconds(120));
    CHECK(c.persona == kDefaultPersona);
}

TEST_CASE("config rejects invalid values") {
    auto missing = base_doc();
    missing.erase("monsters_dir");
    CHECK_THROWS_AS(parse_config(missing, "."), ConfigError);

    auto bad_default = base_doc();
    bad_default["default_table"] = "dungeon";
    CHECK_THROWS_AS(parse_config(bad_default, "."), ConfigError);

    auto key_in_file = base_doc();
    key_in_file["provider"] = {{"kind", "http"}, {"base_url", "http://x"}, {"api_key", "sk-123"}};
    CHECK_THROWS_AS(parse_config(key_in_file, "."), ConfigError);

    auto http_without_url = base_doc();
    http_without_url["provider"] = {{"kind", "http"}};
    CHECK_THROWS_AS(parse_config(http_without_url, "."), ConfigError);

    auto bad_kind = base_doc();
    bad_kind["provider"] = {{"models", {{"poetry", "m"}}}};
    CHECK_THROWS_AS(parse_config(bad_kind, "."), ConfigError);

    auto wrong_type = base_doc();
    wrong_type["port"] = "eighty";
    CHECK_THROWS_AS(parse_config(wrong_type, "."), ConfigError);

    CHECK_THROWS_AS(load_config("/nonexistent/codm.json"), ConfigError);
}

TEST_CASE("configured models and max_tokens reach the registry without touching sampling values") {
    auto doc = base_doc();
    doc["provider"] = {{"max_tokens", 512}, {"models", {{"brainstorm", "chat-model"}}}};
    const auto reg = configured_profiles(parse_config(doc, codm::test::data_dir()).provider);
    const auto b = reg.get_profile(InterfaceKind::brainstorm);
    CHECK(b.model_id == "chat-model");
    CHECK(b.max_tokens == 512);
    CHECK(b.temperature == published_profile(InterfaceKind::brainstorm).temperature);
    CHECK(b.frequency_penalty == published_profile(InterfaceKind::brainstorm).frequency_penalty);
    CHECK(reg.get_profile(InterfaceKind::summarization).model_id.empty());
}

TEST_CASE("service refuses to start on an invalid knowledge base") {
    codm::test::TempDir dir;
    std::filesystem::create_directories(dir.path() / "monsters");
    std::filesystem::create_directories(dir.path() / "settings");
    std::filesystem::copy(codm::test::data_dir() / "settings", dir.path() / "settings",
                          std::filesystem::copy_options::recursive);
    std::ofstream(dir.path() / "monsters" / "bad.json") << R"({"id": "bad"})";
    auto cfg = codm::test::fixture_config();
    cfg.monsters_dir = dir.path() / "monsters";
    CHECK_THROWS_AS(Application(cfg, codm::test::deterministic_overrides()), SchemaError);

    auto missing_monster = codm::test::fixture_config();
    std::ofstream(dir.path() / "table.json") << R"([{"weight": 1, "monsters": [{"id": "dragon", "quantity": "1"}]}])";
    missing_monster.tables = {{"t", dir.path() / "table.json"}};
    missing_monster.default_table = "t";
    CHECK_THROWS_AS(Application(missing_monster, codm::test::deterministic_overrides()), UnresolvedMonsterError);
}

TEST_CASE("shared token must be present in the environment when configured") {
    auto cfg = codm::test::fixture_config();
    cfg.auth_token_env = "CODM_TEST_TOKEN_UNSET_XYZ";
    unsetenv("CODM_TEST_TOKEN_UNSET_XYZ");
    CHECK_THROWS_AS(Application(cfg, codm::test::deterministic_overrides()), ConfigError);
    setenv("CODM_TEST_TOKEN_UNSET_XYZ", "s3cret", 1);
    Application app(cfg, codm::test::deterministic_overrides());
    CHECK(app.auth_token() == std::optional<std::string>("s3cret"));
    unsetenv("CODM_TEST_TOKEN_UNSET_XYZ");
}

TEST_CASE("shipped sample config loads") {
    const auto c = load_config(codm::test::test_dir().parent_path() / "config" / "codm.json");
    CHECK(c.tables.size() == 2);
    CHECK(c.default_table == "wilderness");
    AppOverrides o;
    o.database = ":memory:";
    Application app(c, o);
    CHECK(app.provider().name() == "mock");
}
