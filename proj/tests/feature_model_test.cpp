#include "doctest.h"

#include <set>

#include "splat/feature_model.hpp"
#include "support.hpp"

using namespace splat;

TEST_CASE("parse declares variables in order") {
    auto fm = FeatureModel::parse("feature A\nfeature B mandatory true\nfeature C mandatory false\n");
    REQUIRE(fm.variables().size() == 3);
    CHECK(fm.variables()[0].name == "A");
    CHECK(fm.index_of("B") == 1);
    CHECK(fm.index_of("missing") == -1);
    CHECK(!fm.is_mandatory("A"));
    CHECK(fm.is_mandatory("B"));
    CHECK(fm.get_mandatory_value("B"));
    CHECK(fm.is_mandatory("C"));
    CHECK(!fm.get_mandatory_value("C"));
}

TEST_CASE("parse accepts comments and blank lines") {
    auto fm = FeatureModel::parse("# header\n\nfeature A  # trailing\nconstraint A\n");
    CHECK(fm.variables().size() == 1);
    CHECK(fm.clauses().size() == 1);
}

TEST_CASE("parse rejects malformed input") {
    CHECK_THROWS_AS(FeatureModel::parse("feature A\nfeature A\n"), ParseError);
    CHECK_THROWS_AS(FeatureModel::parse("constraint A\n"), ParseError);
    CHECK_THROWS_AS(FeatureModel::parse("feature A mandatory maybe\n"), ParseError);
    CHECK_THROWS_AS(FeatureModel::parse("feature A\nwhatever A\n"), ParseError);
    CHECK_THROWS_AS(FeatureModel::parse("feature A\nconstraint A | B\n"), ParseError);
}

TEST_CASE("mandatory variables become unit clauses") {
    auto fm = FeatureModel::parse("feature A mandatory true\nfeature B mandatory false\n");
    Assignment a;
    a.set("A", false);
    CHECK(!fm.is_satisfiable(a));
    Assignment b;
    b.set("A", true);
    b.set("B", false);
    CHECK(fm.is_satisfiable(b));
}

TEST_CASE("constraint semantics on the graph fixture") {
    auto fm = FeatureModel::parse(support::kGraphModel);
    Assignment both_off;
    both_off.set("WEIGHTED", false);
    both_off.set("SEARCH", false);
    CHECK(!fm.is_satisfiable(both_off));
    CHECK(fm.get_valid({}).size() == 6);
}

TEST_CASE("get_valid enumerates in declaration order, false first") {
    auto fm = FeatureModel::parse("feature A\nfeature B\n");
    auto configs = fm.get_valid({});
    REQUIRE(configs.size() == 4);
    auto bit = [](const Assignment& a, const char* n) { return *a.get(n); };
    CHECK((bit(configs[0], "A") == false && bit(configs[0], "B") == false));
    CHECK((bit(configs[1], "A") == false && bit(configs[1], "B") == true));
    CHECK((bit(configs[2], "A") == true && bit(configs[2], "B") == false));
    CHECK((bit(configs[3], "A") == true && bit(configs[3], "B") == true));
}

TEST_CASE("get_valid respects pinned values") {
    auto fm = FeatureModel::parse(support::kGraphModel);
    Assignment pin;
    pin.set("WEIGHTED", false);
    auto configs = fm.get_valid(pin);
    REQUIRE(configs.size() == 2);
    for (const auto& c : configs) {
        CHECK(*c.get("WEIGHTED") == false);
        CHECK(*c.get("SEARCH") == true);
    }
}

TEST_CASE("get_valid enforces the enumeration cap as an error") {
    std::string text;
    for (int i = 0; i < 13; ++i) text += "feature F" + std::to_string(i) + "\n";
    auto fm = FeatureModel::parse(text);
    CHECK_THROWS_AS(fm.get_valid({}), EnumerationCapError);
    CHECK_NOTHROW(fm.get_valid({}, 1u << 13));
}

TEST_CASE("solver agrees with exhaustive enumeration on random models") {
    support::Rng rng(20240901);
    for (int round = 0; round < 150; ++round) {
        auto fm = FeatureModel::parse(support::random_model_text(rng, 8));
        const auto& vars = fm.variables();
        for (int q = 0; q < 20; ++q) {
            Assignment a;
            for (const auto& var : vars)
                if (support::chance(rng, 0.5)) a.set(var.name, support::chance(rng, 0.5));
            CHECK(fm.is_satisfiable(a) == support::brute_sat(fm, a));
        }
        std::set<Assignment> valid;
        if (fm.is_satisfiable({}))
            for (const auto& c : fm.get_valid({})) valid.insert(c);
        CHECK(valid == support::brute_valid(fm, {}));
    }
}

TEST_CASE("satisfiability is monotone under removing bindings") {
    support::Rng rng(7);
    for (int round = 0; round < 100; ++round) {
        auto fm = support::random_sat_model(rng, 8);
        const auto& vars = fm.variables();
        Assignment full;
        for (const auto& var : vars) full.set(var.name, support::chance(rng, 0.5));
        Assignment partial = full;
        for (const auto& var : vars)
            if (support::chance(rng, 0.5)) partial.unset(var.name);
        if (fm.is_satisfiable(full)) CHECK(fm.is_satisfiable(partial));
    }
}

TEST_CASE("digest is stable and text-sensitive") {
    auto a = FeatureModel::parse("feature A\n");
    auto b = FeatureModel::parse("feature A\n");
    auto c = FeatureModel::parse("feature A\nfeature B\n");
    CHECK(a.digest() == b.digest());
    CHECK(a.digest() != c.digest());
}
