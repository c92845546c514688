#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace stylemill {

// Minute-precision calendar timestamp. Parsed from either ISO
// "YYYY-MM-DD[ T]HH:MM[:SS]" or day-first "D/M/YY[YY][,] HH:MM" (the shape
// Moodle log exports use); seconds are truncated.
struct Timestamp {
    int year = 0;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;

    std::string to_string() const; // canonical "YYYY-MM-DD HH:MM"
    bool operator==(const Timestamp&) const = default;
};

// Returns false if `text` is not a recognizable, calendar-valid timestamp.
bool parse_timestamp(const std::string& text, Timestamp& out);

// One cleaned row of an LMS activity log. Only these five fields survive
// ingestion; everything else in the export is discarded.
struct EventRecord {
    Timestamp timestamp;
    std::string user_id;
    std::string event_name;
    std::string component;
    std::string event_context;
};

struct CleaningReport {
    std::uint64_t rows_read = 0;
    std::uint64_t rows_kept = 0;
    std::uint64_t rows_dropped_malformed = 0;
    std::vector<std::string> fields_dropped;
    std::uint64_t users_removed_incomplete = 0;
};

struct ParseOptions {
    // Canonical field -> accepted header spellings (matched case-insensitively,
    // in addition to the built-in defaults). Real Moodle exports vary by
    // locale and version.
    std::map<std::string, std::vector<std::string>> aliases;
    // When true, a malformed row aborts parsing with a DataError naming the
    // row; default is skip-and-count.
    bool strict = false;
};

inline const std::vector<std::string> kCanonicalEventFields = {
    "timestamp", "user_id", "event_name", "component", "event_context"};

struct ParseResult {
    std::vector<EventRecord> records;
    CleaningReport report;
};

// Parses a delimited export with a header row; keeps exactly the five
// canonical fields and reports every other column as dropped.
// Throws ConfigError when a required column is missing from the header.
ParseResult parse_event_log(std::istream& source, const ParseOptions& options = {});

// Drops every user with fewer than `min_events` records; order preserved.
struct FilterResult {
    std::vector<EventRecord> records;
    CleaningReport report;
};
FilterResult remove_incomplete_users(const std::vector<EventRecord>& records,
                                     std::uint64_t min_events);

// Canonical five-column CSV round trip.
void write_canonical_events(std::ostream& out, const std::vector<EventRecord>& records);
std::vector<EventRecord> read_canonical_events(std::istream& in);

} // namespace stylemill
