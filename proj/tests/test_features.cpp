#include <doctest.h>

#include <bit>
#include <sstream>

#include "stylemill/errors.hpp"
#include "stylemill/features.hpp"

using namespace stylemill;

namespace {

EventRecord event(const std::string& user, const std::string& name, const std::string& component,
                  const std::string& context) {
    EventRecord r;
    parse_timestamp("2024-09-02 08:00", r.timestamp);
    r.user_id = user;
    r.event_name = name;
    r.component = component;
    r.event_context = context;
    return r;
}

} // namespace

TEST_CASE("mapping validation rejects malformed rule sets") {
    FeatureMapping m;
    CHECK_THROWS_AS(m.validate(), ConfigError); // no features

    m.feature_names = {"a", "a"};
    CHECK_THROWS_AS(m.validate(), ConfigError); // duplicate names

    m.feature_names = {"a"};
    m.rules = {{MatchField::Component, "x", "missing"}};
    CHECK_THROWS_AS(m.validate(), ConfigError); // rule targets unknown feature

    m.rules = {{MatchField::Component, "x", "a"}};
    CHECK_NOTHROW(m.validate());
    CHECK_NOTHROW(FeatureMapping::default_mapping().validate());
}

TEST_CASE("mapping JSON round-trips") {
    FeatureMapping m = FeatureMapping::default_mapping();
    FeatureMapping back = FeatureMapping::from_json(m.to_json());
    CHECK(back.feature_names == m.feature_names);
    REQUIRE(back.rules.size() == m.rules.size());
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
        CHECK(back.rules[i].field == m.rules[i].field);
        CHECK(back.rules[i].contains == m.rules[i].contains);
        CHECK(back.rules[i].feature == m.rules[i].feature);
    }
}

TEST_CASE("profiles count events with first-match-wins, case-insensitive rules") {
    FeatureMapping m;
    m.feature_names = {"quiz", "reading"};
    m.rules = {{MatchField::Component, "quiz", "quiz"},
               {MatchField::Component, "file", "reading"},
               {MatchField::EventContext, "quiz", "reading"}}; // shadowed for component hits
    m.validate();

    std::vector<EventRecord> events = {
        event("u1", "Attempt", "QUIZ", "Quiz: W1"),  // quiz (case-insensitive, first match)
        event("u1", "Viewed", "File", "File: notes"),
        event("u2", "Viewed", "Folderish", "Quiz: W1"), // context rule -> reading
        event("u1", "Viewed", "Forum", "Forum: general"), // unmapped
        event("u2", "Viewed", "Badge", "x"),              // unmapped
    };
    auto profiles = build_profiles(events, m);
    REQUIRE(profiles.size() == 2);
    CHECK(profiles[0].user_id == "u1"); // first-appearance order
    CHECK(profiles[0].counts == std::vector<std::uint64_t>{1, 1});
    CHECK(profiles[0].unmapped_events == 1);
    CHECK(profiles[1].user_id == "u2");
    CHECK(profiles[1].counts == std::vector<std::uint64_t>{0, 1});
    CHECK(profiles[1].unmapped_events == 1);
}

TEST_CASE("ILS scoring is the a/b difference per 11-item block") {
    ILSResponse r;
    r.user_id = "u";
    for (int i = 0; i < 44; ++i) r.answers[i] = 'a';
    CHECK(score_ils(r) == std::array<int, 4>{11, 11, 11, 11});

    for (int i = 0; i < 11; ++i) r.answers[i] = 'b';        // processing all b
    for (int i = 11; i < 15; ++i) r.answers[i] = 'b';       // input: 4 b, 7 a
    CHECK(score_ils(r) == std::array<int, 4>{-11, 3, 11, 11});

    r.answers[40] = 'x';
    CHECK_THROWS_AS(score_ils(r), DataError);
}

TEST_CASE("ILS scores are odd, nonzero, and in range over all 2^11 patterns") {
    for (std::size_t d = 0; d < 4; ++d) {
        for (unsigned mask = 0; mask < 2048; ++mask) {
            ILSResponse r;
            r.user_id = "u";
            for (int i = 0; i < 44; ++i) r.answers[i] = 'a';
            for (int i = 0; i < 11; ++i)
                if (mask & (1u << i)) r.answers[11 * d + i] = 'b';
            int score = score_ils(r)[d];
            int n_a = 11 - std::popcount(mask);
            CHECK(score == 2 * n_a - 11);
            CHECK(score % 2 != 0);
            CHECK(score != 0);
            CHECK(score >= -11);
            CHECK(score <= 11);
            DimensionLabel label = label_from_score(kAllDimensions[d], score);
            CHECK(label.first_pole() == (score > 0));
        }
    }
}

TEST_CASE("ILS files accept split or concatenated answers and detect headers") {
    std::istringstream split_form(
        "user,answers\n"
        "u1," + std::string(44, 'a') + "\n"
        "u2,aba," + std::string(41, 'b') + "\n");
    auto rs = parse_ils_file(split_form);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].user_id == "u1");
    CHECK(rs[1].answers[0] == 'a');
    CHECK(rs[1].answers[1] == 'b');
    CHECK(rs[1].answers[3] == 'b');

    std::istringstream headerless("u3," + std::string(44, 'b') + "\n");
    CHECK(parse_ils_file(headerless).size() == 1);

    std::istringstream short_row("u1," + std::string(43, 'a') + "\n");
    CHECK_THROWS_AS(parse_ils_file(short_row), DataError);

    // A first line whose answers are not all a/b is taken for a header...
    std::istringstream bad_first("u1," + std::string(43, 'a') + "c\n");
    CHECK(parse_ils_file(bad_first).empty());
    // ...but a later row with a stray character is rejected.
    std::istringstream bad_char("u0," + std::string(44, 'a') + "\nu1," + std::string(43, 'a') +
                                "c\n");
    CHECK_THROWS_AS(parse_ils_file(bad_char), DataError);

    std::istringstream dup("u1," + std::string(44, 'a') + "\nu1," + std::string(44, 'b') + "\n");
    CHECK_THROWS_AS(parse_ils_file(dup), DataError);
}

TEST_CASE("dataset assembly attaches labels and reports unknown users") {
    std::vector<StudentProfile> profiles = {{"u1", {1, 2}, 0}, {"u2", {3, 4}, 0}};
    std::vector<std::pair<std::string, DimensionLabel>> labels = {
        {"u1", label_from_score(Dimension::Input, 5)},
        {"ghost", label_from_score(Dimension::Input, -3)},
    };
    AssembleResult r = assemble_dataset(profiles, {"f1", "f2"}, labels);
    CHECK(r.dataset.rows.size() == 2);
    CHECK(r.dataset.rows[0].counts == std::vector<double>{1.0, 2.0});
    CHECK(r.dataset.labels_for(Dimension::Input).at("u1").score == 5);
    CHECK(r.dataset.labels_for(Dimension::Input).count("ghost") == 0);
    CHECK(r.rejected_users == std::vector<std::string>{"ghost"});

    labels.push_back({"u1", label_from_score(Dimension::Input, 7)});
    CHECK_THROWS_AS(assemble_dataset(profiles, {"f1", "f2"}, labels), DataError);
}

TEST_CASE("assembly from ILS scores every dimension") {
    std::vector<StudentProfile> profiles = {{"u1", {1}, 0}};
    ILSResponse resp;
    resp.user_id = "u1";
    for (int i = 0; i < 44; ++i) resp.answers[i] = i < 22 ? 'a' : 'b';
    AssembleResult r = assemble_dataset_from_ils(profiles, {"f1"}, {resp});
    CHECK(r.dataset.labels_for(Dimension::Processing).at("u1").score == 11);
    CHECK(r.dataset.labels_for(Dimension::Input).at("u1").score == 11);
    CHECK(r.dataset.labels_for(Dimension::Understanding).at("u1").score == -11);
    CHECK(r.dataset.labels_for(Dimension::Perception).at("u1").score == -11);
    CHECK(r.rejected_users.empty());
}
