#pragma once

#include <string>
#include <vector>

namespace rrstap {

/// Arithmetic cost of one adaptation step, counted analytically.
struct OpCount {
    long long additions = 0;
    long long multiplications = 0;
};

OpCount cost_full_rank(int jm);
OpCount cost_proposed(int jm, int d);
OpCount cost_mswf(int jm, int d);
OpCount cost_avf(int jm, int d);

enum class RankSelectionMode { extended, multiple, stopping, cv };

/// Per-step cost of a rank-selection mode alone (the host algorithm's cost
/// is added separately by the caller, matching how the tables are split).
OpCount cost_rank_selection(RankSelectionMode mode, int jm, int d_min, int d_max);

/// Raw printed expressions behind each cost row. A few rows are typeset
/// ambiguously across line breaks; the chosen reading is recorded here next
/// to the raw string so revising a reading touches only this table.
struct CostRow {
    std::string name;
    std::string additions_expr;
    std::string multiplications_expr;
    std::string note;
};

const std::vector<CostRow>& cost_rows();

struct CostSample {
    int jm = 0;
    std::string algorithm;
    OpCount cost;
};

/// Cost-versus-dimension sweep at fixed rank for all four algorithms,
/// suitable for CSV emission and crossover inspection.
std::vector<CostSample> cost_sweep(const std::vector<int>& jm_values, int d);

}  // namespace rrstap
