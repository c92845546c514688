#include <doctest.h>

#include <sstream>

#include "stylemill/csv.hpp"
#include "stylemill/errors.hpp"
#include "stylemill/ingest.hpp"

using namespace stylemill;

namespace {

std::vector<std::vector<std::string>> read_all(const std::string& text) {
    std::istringstream in(text);
    CsvReader reader(in);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) rows.push_back(fields);
    return rows;
}

} // namespace

TEST_CASE("csv reader handles quoting, separators, and line endings") {
    auto rows = read_all("a,b,c\n\"x,y\",\"he said \"\"hi\"\"\",plain\r\n\"multi\nline\",2,3\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1] == std::vector<std::string>{"x,y", "he said \"hi\"", "plain"});
    CHECK(rows[2] == std::vector<std::string>{"multi\nline", "2", "3"});
}

TEST_CASE("csv reader reports the record's starting line") {
    std::istringstream in("one,1\n\"two\nstill two\",2\nthree,3\n");
    CsvReader reader(in);
    std::vector<std::string> fields;
    REQUIRE(reader.next(fields));
    CHECK(reader.record_line() == 1);
    REQUIRE(reader.next(fields));
    CHECK(reader.record_line() == 2);
    REQUIRE(reader.next(fields));
    CHECK(reader.record_line() == 4);
}

TEST_CASE("csv reader rejects an unterminated quote") {
    std::istringstream in("a,\"oops\n");
    CsvReader reader(in);
    std::vector<std::string> fields;
    CHECK_THROWS_AS(reader.next(fields), DataError);
}

TEST_CASE("csv quoting round-trips through the reader") {
    std::vector<std::string> fields = {"plain", "with,comma", "with\"quote", "with\nnewline", ""};
    auto rows = read_all(csv_join(fields) + "\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == fields);
}

TEST_CASE("timestamps parse from ISO and day-first forms") {
    Timestamp t;
    REQUIRE(parse_timestamp("2024-09-02 08:05", t));
    CHECK(t.to_string() == "2024-09-02 08:05");
    REQUIRE(parse_timestamp("2024-09-02T08:05:59", t)); // seconds truncated
    CHECK(t.to_string() == "2024-09-02 08:05");
    REQUIRE(parse_timestamp("2/9/24, 08:05", t));
    CHECK(t.to_string() == "2024-09-02 08:05");
    REQUIRE(parse_timestamp("12/11/2023 23:59", t)); // day-first
    CHECK(t.to_string() == "2023-11-12 23:59");

    CHECK_FALSE(parse_timestamp("not-a-date", t));
    CHECK_FALSE(parse_timestamp("2024-02-30 10:00", t)); // not a calendar day
    CHECK_FALSE(parse_timestamp("31/2/24, 10:00", t));
    REQUIRE(parse_timestamp("2024-09-02", t)); // date only: midnight
    CHECK(t.to_string() == "2024-09-02 00:00");
    CHECK_FALSE(parse_timestamp("", t));
}

TEST_CASE("event log parsing keeps the five canonical fields and reports the rest") {
    std::istringstream in(
        "Time,User full name,Event name,Component,Event context,Description,IP address\n"
        "\"2/9/24, 08:00\",Ada,Course viewed,System,Course: C1,d,1.2.3.4\n"
        "\"2/9/24, 08:01\",Bob,Quiz attempt started,Quiz,\"Quiz: Week 1\",d,1.2.3.4\n"
        "bad-date,Ada,Course viewed,System,Course: C1,d,1.2.3.4\n"
        "\"2/9/24, 08:02\",Ada,too,few\n");
    ParseResult r = parse_event_log(in);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].user_id == "Ada");
    CHECK(r.records[0].timestamp.to_string() == "2024-09-02 08:00");
    CHECK(r.records[1].component == "Quiz");
    CHECK(r.records[1].event_context == "Quiz: Week 1");
    CHECK(r.report.rows_read == 4);
    CHECK(r.report.rows_kept == 2);
    CHECK(r.report.rows_dropped_malformed == 2);
    CHECK(r.report.fields_dropped == std::vector<std::string>{"Description", "IP address"});
}

TEST_CASE("strict mode aborts on the first malformed row") {
    std::istringstream in(
        "timestamp,user_id,event_name,component,event_context\n"
        "bad-date,Ada,E,C,X\n");
    ParseOptions opts;
    opts.strict = true;
    CHECK_THROWS_AS(parse_event_log(in, opts), DataError);
}

TEST_CASE("missing required column is a config error") {
    std::istringstream in("Time,Event name,Component,Event context\nx,y,z,w\n");
    CHECK_THROWS_AS(parse_event_log(in), ConfigError);
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_event_log(empty), ConfigError);
}

TEST_CASE("custom aliases extend the built-in header spellings") {
    std::istringstream in(
        "Uhrzeit,Teilnehmer,Event name,Component,Event context\n"
        "\"2/9/24, 09:00\",Cara,Course viewed,System,Course: C1\n");
    ParseOptions opts;
    opts.aliases = {{"timestamp", {"Uhrzeit"}}, {"user_id", {"Teilnehmer"}}};
    ParseResult r = parse_event_log(in, opts);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].user_id == "Cara");
}

TEST_CASE("incomplete users are removed with their rows") {
    std::istringstream in(
        "timestamp,user_id,event_name,component,event_context\n"
        "2024-09-02 08:00,A,E,C,X\n"
        "2024-09-02 08:01,B,E,C,X\n"
        "2024-09-02 08:02,A,E,C,X\n"
        "2024-09-02 08:03,A,E,C,X\n"
        "2024-09-02 08:04,B,E,C,X\n");
    ParseResult parsed = parse_event_log(in);
    FilterResult f = remove_incomplete_users(parsed.records, 3);
    REQUIRE(f.records.size() == 3);
    for (const auto& rec : f.records) CHECK(rec.user_id == "A");
    CHECK(f.report.users_removed_incomplete == 1);
    CHECK(f.report.rows_kept == 3);

    FilterResult all = remove_incomplete_users(parsed.records, 1);
    CHECK(all.records.size() == 5);
    CHECK(all.report.users_removed_incomplete == 0);
}

TEST_CASE("canonical events round-trip exactly") {
    std::vector<EventRecord> records;
    EventRecord r1;
    parse_timestamp("2024-09-02 08:00", r1.timestamp);
    r1.user_id = "Student, 01"; // forces quoting
    r1.event_name = "Course viewed";
    r1.component = "System";
    r1.event_context = "Course: \"Intro\"";
    records.push_back(r1);
    EventRecord r2 = r1;
    parse_timestamp("2024-09-03 10:30", r2.timestamp);
    r2.user_id = "Bob";
    r2.component = "Quiz";
    records.push_back(r2);

    std::ostringstream out;
    write_canonical_events(out, records);
    std::istringstream in(out.str());
    std::vector<EventRecord> back = read_canonical_events(in);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].timestamp == records[i].timestamp);
        CHECK(back[i].user_id == records[i].user_id);
        CHECK(back[i].event_name == records[i].event_name);
        CHECK(back[i].component == records[i].component);
        CHECK(back[i].event_context == records[i].event_context);
    }
}
