#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace blpp {

// Uniform result row for verification routines. `pass` is authoritative;
// `value` vs `threshold` documents the binding comparison (meaning depends on
// the check: worst deviation, KS distance, violation magnitude, ...).
struct CheckReport {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    long n_used = 0;
    long n_excluded = 0;
    std::string detail;
};

inline CheckReport make_check(std::string name, double value, double threshold,
                              long n_used = 0, long n_excluded = 0,
                              std::string detail = {}) {
    CheckReport r;
    r.name = std::move(name);
    r.value = value;
    r.threshold = threshold;
    r.pass = value <= threshold;
    r.n_used = n_used;
    r.n_excluded = n_excluded;
    r.detail = std::move(detail);
    return r;
}

inline std::string format_check_line(const CheckReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-34s %s  value=%.6g threshold=%.6g n=%ld excluded=%ld",
                  r.name.c_str(), r.pass ? "[PASS]" : "[FAIL]", r.value, r.threshold,
                  r.n_used, r.n_excluded);
    std::string line(buf);
    if (!r.detail.empty()) {
        line += "  (";
        line += r.detail;
        line += ")";
    }
    return line;
}

}  // namespace blpp
