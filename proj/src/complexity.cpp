#include "rrstap/complexity.hpp"

#include <stdexcept>

namespace rrstap {

namespace {

long long sq(long long x) { return x * x; }

void check_jm(int jm) {
    if (jm < 1) throw std::domain_error("complexity: JM must be >= 1");
}

void check_rank(int d) {
    if (d < 1) throw std::domain_error("complexity: D must be >= 1");
}

void check_range(int d_min, int d_max) {
    if (d_min < 1 || d_max < d_min)
        throw std::domain_error("complexity: need 1 <= D_min <= D_max");
}

}  // namespace

OpCount cost_full_rank(int jm) {
    check_jm(jm);
    const long long m = jm;
    return {3 * sq(m) - 2 * m + 3, 6 * sq(m) + 2 * m + 2};
}

OpCount cost_proposed(int jm, int d) {
    check_jm(jm);
    check_rank(d);
    const long long m = jm, dd = d;
    return {3 * sq(m) - 2 * m + 3 + 6 * sq(dd) - 8 * dd + 3,
            7 * sq(m) + 2 * m + 7 * sq(dd) + 9 * dd};
}

OpCount cost_mswf(int jm, int d) {
    check_jm(jm);
    check_rank(d);
    const long long m = jm, dd = d;
    return {dd * sq(m) + sq(m) + 6 * sq(dd) - 8 * dd + 2,
            dd * sq(m) + sq(m) + 2 * dd * m + 3 * dd + 2};
}

OpCount cost_avf(int jm, int d) {
    check_jm(jm);
    check_rank(d);
    const long long m = jm, dd = d;
    return {dd * (sq(m) + 3 * sq(m - 1)) + dd * (5 * (m - 1) + 1) + 2 * m - 1,
            dd * (4 * sq(m) + 4 * m + 1) + 4 * m + 2};
}

OpCount cost_rank_selection(RankSelectionMode mode, int jm, int d_min, int d_max) {
    check_jm(jm);
    check_range(d_min, d_max);
    const long long m = jm, span = d_max - d_min, count = span + 1, dmax = d_max;
    switch (mode) {
        case RankSelectionMode::extended:
            return {2 * span + 1, 0};
        case RankSelectionMode::multiple:
            return {2 * span + 1 + count * (3 * sq(m) - 2 * m + 3 + 6 * sq(dmax) - 8 * dmax + 3),
                    count * (7 * sq(m) + 2 * m + 7 * sq(dmax) + 9 * dmax)};
        case RankSelectionMode::stopping:
            return {2 * (2 * m - 1) * span + 1, (sq(m) + m + 1) * count};
        case RankSelectionMode::cv:
            return {(2 * m - 1) * (2 * span + 1), count * (m + 1)};
    }
    throw std::domain_error("complexity: unknown rank selection mode");
}

const std::vector<CostRow>& cost_rows() {
    static const std::vector<CostRow> rows = {
        {"full_rank", "3(JM)^2 - 2JM + 3", "6(JM)^2 + 2JM + 2", ""},
        {"proposed", "3(JM)^2 - 2JM + 3 + 6D^2 - 8D + 3", "7(JM)^2 + 2JM + 7D^2 + 9D", ""},
        {"mswf", "D(JM)^2 + (JM)^2 + 6D^2 - 8D + 2", "D(JM)^2 + (JM)^2 + 2DJM + 3D + 2", ""},
        {"avf", "D((JM)^2 + 3(JM-1)^2) + D(5(JM-1) + 1) + 2JM - 1", "D(4(JM)^2 + 4JM + 1) + 4JM + 2",
         ""},
        {"rank_extended", "2(Dmax - Dmin) + 1", "0",
         "companion prose also quotes 3(Dmax-Dmin)+1 and 2(Dmax-Dmin); the table row is used"},
        {"rank_multiple",
         "2(Dmax - Dmin) + 1 + (Dmax - Dmin + 1)(3(JM)^2 - 2JM + 3 + 6Dmax^2 - 8Dmax + 3)",
         "(Dmax - Dmin + 1)(7(JM)^2 + 2JM + 7Dmax^2 + 9Dmax)", ""},
        {"rank_stopping", "2(2JM - 1)(Dmax - Dmin) + 1", "((JM)^2 + JM + 1)(Dmax - Dmin + 1)",
         "raw additions string '2(2JM-1)x(Dmax-Dmin)+1' read with the +1 outside the product"},
        {"rank_cv", "(2JM - 1)(2(Dmax - Dmin) + 1)", "(Dmax - Dmin + 1)(JM + 1)",
         "raw multiplications string '(Dmax-Dmin+1)x / JM + 1' read as a single product"},
    };
    return rows;
}

std::vector<CostSample> cost_sweep(const std::vector<int>& jm_values, int d) {
    std::vector<CostSample> out;
    out.reserve(jm_values.size() * 4);
    for (int jm : jm_values) {
        out.push_back({jm, "full_rank", cost_full_rank(jm)});
        out.push_back({jm, "proposed", cost_proposed(jm, d)});
        out.push_back({jm, "mswf", cost_mswf(jm, d)});
        out.push_back({jm, "avf", cost_avf(jm, d)});
    }
    return out;
}

}  // namespace rrstap
