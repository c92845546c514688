#include "stylemill/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "stylemill/csv.hpp"
#include "stylemill/errors.hpp"

namespace stylemill {

namespace {

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return d[m - 1];
}

bool valid_date(const Timestamp& t) {
    return t.year >= 1970 && t.year <= 9999 && t.month >= 1 && t.month <= 12 && t.day >= 1 &&
           t.day <= days_in_month(t.year, t.month) && t.hour >= 0 && t.hour <= 23 &&
           t.minute >= 0 && t.minute <= 59;
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

// Built-in header spellings; ParseOptions aliases extend these.
const std::map<std::string, std::vector<std::string>>& default_aliases() {
    static const std::map<std::string, std::vector<std::string>> a = {
        {"timestamp", {"timestamp", "time"}},
        {"user_id", {"user_id", "user full name", "user", "user fullname"}},
        {"event_name", {"event_name", "event name"}},
        {"component", {"component"}},
        {"event_context", {"event_context", "event context"}},
    };
    return a;
}

} // namespace

std::string Timestamp::to_string() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", year, month, day, hour, minute);
    return buf;
}

bool parse_timestamp(const std::string& text, Timestamp& out) {
    std::string s = trim(text);
    if (s.empty()) return false;

    // Split date and time on the first space, 'T', or ", ".
    std::string date_part = s, time_part;
    std::size_t cut = s.find_first_of(" T");
    if (std::size_t comma = s.find(','); comma != std::string::npos) cut = comma;
    if (cut != std::string::npos) {
        date_part = trim(s.substr(0, cut));
        time_part = trim(s.substr(cut + 1));
        if (!date_part.empty() && date_part.back() == ',') date_part.pop_back();
    }

    Timestamp t;
    if (date_part.find('-') != std::string::npos) {
        auto parts = split(date_part, '-');
        if (parts.size() != 3) return false;
        if (!parse_int(parts[0], t.year) || !parse_int(parts[1], t.month) ||
            !parse_int(parts[2], t.day))
            return false;
    } else if (date_part.find('/') != std::string::npos) {
        auto parts = split(date_part, '/'); // day-first
        if (parts.size() != 3) return false;
        if (!parse_int(parts[0], t.day) || !parse_int(parts[1], t.month) ||
            !parse_int(parts[2], t.year))
            return false;
        if (t.year < 100) t.year += 2000;
    } else {
        return false;
    }

    if (!time_part.empty()) {
        auto parts = split(time_part, ':');
        if (parts.size() != 2 && parts.size() != 3) return false;
        if (!parse_int(parts[0], t.hour) || !parse_int(parts[1], t.minute)) return false;
        // seconds, if present, are validated then truncated
        if (parts.size() == 3) {
            int sec;
            if (!parse_int(parts[2], sec) || sec < 0 || sec > 59) return false;
        }
    }

    if (!valid_date(t)) return false;
    out = t;
    return true;
}

ParseResult parse_event_log(std::istream& source, const ParseOptions& options) {
    CsvReader reader(source);
    std::vector<std::string> header;
    if (!reader.next(header)) {
        throw ConfigError("event log is empty: no header row");
    }

    // Resolve each canonical field to a column index.
    std::map<std::string, std::size_t> column_of;
    std::vector<bool> used(header.size(), false);
    for (const auto& field : kCanonicalEventFields) {
        std::vector<std::string> names = default_aliases().at(field);
        if (auto it = options.aliases.find(field); it != options.aliases.end()) {
            names.insert(names.end(), it->second.begin(), it->second.end());
        }
        bool found = false;
        for (std::size_t c = 0; c < header.size() && !found; ++c) {
            std::string h = ascii_lower(trim(header[c]));
            for (const auto& name : names) {
                if (h == ascii_lower(name)) {
                    column_of[field] = c;
                    used[c] = true;
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            throw ConfigError("required column '" + field +
                              "' not found in event log header (aliases checked: " +
                              [&] {
                                  std::string joined;
                                  for (const auto& n : names) {
                                      if (!joined.empty()) joined += ", ";
                                      joined += n;
                                  }
                                  return joined;
                              }() +
                              ")");
        }
    }

    ParseResult result;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!used[c]) result.report.fields_dropped.push_back(trim(header[c]));
    }

    std::vector<std::string> fields;
    while (reader.next(fields)) {
        // Tolerate a trailing blank line.
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        ++result.report.rows_read;

        auto fail = [&](const std::string& why) {
            if (options.strict) {
                throw DataError("malformed row " + std::to_string(result.report.rows_read) +
                                " (line " + std::to_string(reader.record_line()) + "): " + why);
            }
            ++result.report.rows_dropped_malformed;
        };

        if (fields.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(fields.size()));
            continue;
        }
        EventRecord rec;
        if (!parse_timestamp(fields[column_of["timestamp"]], rec.timestamp)) {
            fail("unparseable timestamp '" + fields[column_of["timestamp"]] + "'");
            continue;
        }
        rec.user_id = trim(fields[column_of["user_id"]]);
        if (rec.user_id.empty()) {
            fail("empty user id");
            continue;
        }
        rec.event_name = trim(fields[column_of["event_name"]]);
        rec.component = trim(fields[column_of["component"]]);
        rec.event_context = trim(fields[column_of["event_context"]]);
        result.records.push_back(std::move(rec));
        ++result.report.rows_kept;
    }
    return result;
}

FilterResult remove_incomplete_users(const std::vector<EventRecord>& records,
                                     std::uint64_t min_events) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& r : records) ++counts[r.user_id];

    FilterResult result;
    result.report.rows_read = records.size();
    for (const auto& [user, n] : counts) {
        if (n < min_events) ++result.report.users_removed_incomplete;
    }
    for (const auto& r : records) {
        if (counts[r.user_id] >= min_events) {
            result.records.push_back(r);
            ++result.report.rows_kept;
        }
    }
    result.report.rows_dropped_malformed = 0;
    return result;
}

void write_canonical_events(std::ostream& out, const std::vector<EventRecord>& records) {
    out << csv_join(kCanonicalEventFields) << "\n";
    for (const auto& r : records) {
        out << csv_join({r.timestamp.to_string(), r.user_id, r.event_name, r.component,
                         r.event_context})
            << "\n";
    }
}

std::vector<EventRecord> read_canonical_events(std::istream& in) {
    ParseOptions opts;
    opts.strict = true; // canonical files are machine-written; any defect is a bug
    return parse_event_log(in, opts).records;
}

} // namespace stylemill
