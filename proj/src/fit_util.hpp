#pragma once

#include <string>
#include <vector>

#include "stylemill/errors.hpp"

namespace stylemill::detail {

inline void check_matrix(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         const char* what) {
    if (x.empty()) throw DataError(std::string("cannot fit ") + what + " on an empty dataset");
    if (x.size() != y.size()) throw DataError("feature rows and labels differ in length");
    for (const auto& row : x)
        if (row.size() != x[0].size())
            throw DataError(std::string("ragged feature matrix passed to ") + what);
}

inline void check_two_classes(const std::vector<int>& y, const char* what) {
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == +1) pos = true;
        else if (v == -1) neg = true;
        else throw DataError(std::string("labels for ") + what + " must be +1 or -1");
    }
    if (!pos || !neg) throw DataError(std::string("cannot fit ") + what + " on a single class");
}

} // namespace stylemill::detail
