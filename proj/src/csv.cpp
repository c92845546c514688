#include "stylemill/csv.hpp"

#include "stylemill/errors.hpp"

namespace stylemill {

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    record_line_ = line_;

    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    while (true) {
        if (c == EOF) {
            if (in_quotes) {
                throw DataError("unterminated quoted field starting near line " +
                                std::to_string(record_line_));
            }
            fields.push_back(field);
            return true;
        }
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !saw_any) {
            in_quotes = true;
            saw_any = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
            saw_any = false;
        } else if (ch == '\n') {
            ++line_;
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(field);
            return true;
        } else {
            field.push_back(ch);
            saw_any = true;
        }
        c = in_.get();
    }
}

std::string csv_quote(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_quote(fields[i]);
    }
    return out;
}

} // namespace stylemill
