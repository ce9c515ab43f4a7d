#include <doctest.h>

#include <array>
#include <cmath>
#include <map>

#include "codm/errors.hpp"
#include "support.hpp"

using namespace codm;
using codm::test::fixture_kb;

TEST_CASE("dice parsing accepts the documented forms") {
    CHECK(parse_dice("12") == DiceExpr::constant(12));
    CHECK(parse_dice("2d6") == DiceExpr::dice(2, 6));
    CHECK(parse_dice(" 2D6 + 3 ") == DiceExpr::dice(2, 6, 3));
    CHECK(parse_dice("3d4-1") == DiceExpr::dice(3, 4, -1));
    CHECK(parse_dice("1d1") == DiceExpr::dice(1, 1));
}

TEST_CASE("dice parse errors carry the offending offset") {
    const std::array<std::pair<const char*, std::size_t>, 7> cases = {{
        {"", 0}, {"d6", 0}, {"2d", 2}, {"2x6", 1}, {"2d6+", 4}, {"2d6 3", 4}, {"abc", 0},
    }};
    for (const auto& [text, offset] : cases) {
        CAPTURE(text);
        try {
            parse_dice(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.offset() == offset);
        }
    }
    CHECK_THROWS_AS(parse_dice("3d4-5"), ParseError);  // minimum would be negative
    CHECK_THROWS_AS(parse_dice("0d6"), ParseError);
    CHECK_THROWS_AS(parse_dice("2d0"), ParseError);
    CHECK_THROWS_AS(parse_dice("99999999999999999999"), ParseError);
}

TEST_CASE("render_dice is a canonical fixed point") {
    for (const char* text : {"12", "2d6", " 2D6 + 3 ", "3d4-1", "10d10+0", "1d20 - 1"}) {
        CAPTURE(text);
        const auto canonical = render_dice(parse_dice(text));
        CHECK(render_dice(parse_dice(canonical)) == canonical);
        CHECK(parse_dice(canonical) == parse_dice(text));
    }
    CHECK(render_dice(parse_dice("10d10+0")) == "10d10");
    CHECK(render_dice(parse_dice("1d20 - 1")) == "1d20-1");
}

TEST_CASE("rolls stay within bounds for random expressions") {
    Rng gen(99);
    for (int i = 0; i < 2000; ++i) {
        const int count = static_cast<int>(gen.uniform(1, 12));
        const int sides = static_cast<int>(gen.uniform(1, 20));
        const int mod = static_cast<int>(gen.uniform(-count + 0, 10));
        const auto e = DiceExpr::dice(count, sides, mod);
        CHECK(e.min_value() == count + mod);
        CHECK(e.max_value() == count * sides + mod);
        for (int r = 0; r < 20; ++r) {
            const int v = roll_dice(e, gen);
            REQUIRE(v >= e.min_value());
            REQUIRE(v <= e.max_value());
        }
    }
}

TEST_CASE("2d6 distribution matches the exact pmf") {
    // pmf x36 from tests/oracles/derived_values.py; chi2 critical value for
    // 10 dof at p = 0.001 is 29.5883.
    const std::array<int, 11> pmf36 = {1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1};
    Rng rng(2024);
    const auto e = parse_dice("2d6");
    constexpr int kRolls = 100000;
    std::array<int, 11> seen{};
    long long total = 0;
    for (int i = 0; i < kRolls; ++i) {
        const int v = roll_dice(e, rng);
        total += v;
        ++seen[v - 2];
    }
    CHECK(std::abs(static_cast<double>(total) / kRolls - 7.0) <= 0.05);
    double chi2 = 0;
    for (int i = 0; i < 11; ++i) {
        const double expected = kRolls * pmf36[i] / 36.0;
        chi2 += (seen[i] - expected) * (seen[i] - expected) / expected;
    }
    CHECK(chi2 < 29.5883);
}

TEST_CASE("table validation") {
    const auto& kb = fixture_kb();
    CHECK_THROWS_AS(validate_encounter_table({}, kb), EmptyTableError);
    EncounterTableEntry ok{1, {{"wolf", DiceExpr::constant(2)}}, std::nullopt};
    auto zero = ok;
    zero.weight = 0;
    CHECK_THROWS_AS(validate_encounter_table({zero}, kb), ValidationError);
    auto empty = ok;
    empty.monsters.clear();
    CHECK_THROWS_AS(validate_encounter_table({empty}, kb), ValidationError);
    auto unknown = ok;
    unknown.monsters[0].monster_id = "dragon";
    CHECK_THROWS_AS(validate_encounter_table({unknown}, kb), UnresolvedMonsterError);
    CHECK_NOTHROW(validate_encounter_table({ok}, kb));

    const nlohmann::json zero_qty = nlohmann::json::array(
        {{{"weight", 1}, {"monsters", {{{"id", "wolf"}, {"quantity", "1d4-1"}}}}}});
    CHECK_THROWS_AS(parse_encounter_table(zero_qty, kb, "t"), ValidationError);
}

TEST_CASE("weighted selection 1:3 picks the heavy entry three quarters of the time") {
    // se over 400k draws is 0.000685 (derived_values.py); tolerance 0.005.
    const EncounterTable table = {
        {1, {{"wolf", DiceExpr::constant(1)}}, std::nullopt},
        {3, {{"goblin", DiceExpr::constant(1)}}, std::nullopt},
    };
    Rng rng(7);
    constexpr int kDraws = 400000;
    int heavy = 0;
    for (int i = 0; i < kDraws; ++i) {
        heavy += select_entry(table, rng) == 1 ? 1 : 0;
    }
    const double share = static_cast<double>(heavy) / kDraws;
    CHECK(std::abs(share - 0.75) <= 0.005);
    const double e1 = kDraws * 0.25;
    const double e3 = kDraws * 0.75;
    const double chi2 = (kDraws - heavy - e1) * (kDraws - heavy - e1) / e1 + (heavy - e3) * (heavy - e3) / e3;
    CHECK(chi2 < 10.8276);  // 1 dof, p = 0.001
}

TEST_CASE("selection never picks a zero-probability entry and covers every entry") {
    const auto table = codm::test::fixture_table("wilderness");
    Rng rng(3);
    std::map<std::size_t, int> hits;
    for (int i = 0; i < 20000; ++i) {
        const auto idx = select_entry(table, rng);
        REQUIRE(idx < table.size());
        ++hits[idx];
    }
    CHECK(hits.size() == table.size());
}

TEST_CASE("single-entry table rolls twelve blink dogs") {
    const auto table = codm::test::fixture_table("blink-dogs");
    Rng rng(1);
    const auto enc = roll_encounter(table, fixture_kb().setting("autumn-forest"), fixture_kb(), rng);
    CHECK(enc.rendered == "12 x Blink Dog");
    REQUIRE(enc.rolled.size() == 1);
    CHECK(enc.rolled[0] == RolledGroup{"blink-dog", 12});
    CHECK(enc.setting_id == "autumn-forest");
    CHECK(enc.flavor.has_value());
}

TEST_CASE("rolling is deterministic under a fixed seed") {
    const auto table = codm::test::fixture_table("wilderness");
    const auto& setting = fixture_kb().setting("frozen-pass");
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
        Rng a(seed);
        Rng b(seed);
        CHECK(roll_encounter(table, setting, fixture_kb(), a) == roll_encounter(table, setting, fixture_kb(), b));
    }
}

TEST_CASE("every rolled group resolves and is within its quantity bounds") {
    const auto table = codm::test::fixture_table("wilderness");
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const auto enc = roll_encounter(table, fixture_kb().setting("sunken-coast"), fixture_kb(), rng);
        REQUIRE_FALSE(enc.rolled.empty());
        for (const auto& g : enc.rolled) {
            CHECK(fixture_kb().find_monster(g.monster_id) != nullptr);
            CHECK(g.quantity >= 1);
        }
    }
}

TEST_CASE("rendering and json round trip") {
    const auto enc = codm::test::make_encounter({{"blink-dog", 12}, {"wolf", 2}});
    CHECK(enc.rendered == "12 x Blink Dog, 2 x Wolf");
    auto stamped = enc;
    stamped.id = "enc-1";
    stamped.created_at = "2023-06-01T18:00:00.000Z";
    CHECK(encounter_from_json(to_json(stamped)) == stamped);
}
