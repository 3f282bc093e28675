#pragma once

#include <vector>

#include "rrstap/estimators.hpp"

namespace rrstap {

struct RankDecision {
    int rank = 0;
    std::vector<double> costs;  // indexed d_min .. d_max

    double cost_at(int d, int d_min) const { return costs.at(std::size_t(d - d_min)); }
};

/// Joint filter adapted at d_max whose leading-d column/entry prefixes serve
/// every candidate rank, plus the alpha-weighted moments needed to score the
/// candidates over the whole past with the *current* filters.
struct ExtendedJioState {
    JioRlsState filter;  // sized at d_max
    int d_min = 3;
    int d_max = 8;
    double alpha = 0.99;
    CMat r_alpha;       // alpha-weighted input Gram
    CVec p_alpha;       // alpha-weighted cross-correlation
    double sigma_alpha = 0.0;
    long samples = 0;
    int selected_rank = 0;

    static ExtendedJioState init(int dim, int d_min, int d_max, double lambda, double alpha = 0.99,
                                 double delta = 0.01);

    /// Output through the currently selected rank prefix.
    cplx output(const CVec& r) const;

    /// Joint-filter step, moment update, and rank reselection.
    cplx step(const CVec& r, cplx d);
};

/// Exponentially weighted a posteriori cost of the rank-d prefix evaluated
/// with the current filters over all past samples. Empty history gives 0.
double aposteriori_cost(const ExtendedJioState& state, int rank);

/// argmin of aposteriori_cost over [d_min, d_max]; ties go to the smaller
/// rank. Costs for all candidates are computed from one pass of prefix sums.
RankDecision select_rank_extended(const ExtendedJioState& state);

/// Independent joint filter per candidate rank, all fed the same stream and
/// scored by the same alpha-weighted criterion.
struct MultiFilterBank {
    std::vector<JioRlsState> filters;  // one per d in [d_min, d_max]
    int d_min = 3;
    int d_max = 8;
    double alpha = 0.99;
    CMat r_alpha;
    CVec p_alpha;
    double sigma_alpha = 0.0;
    long samples = 0;
    int selected_rank = 0;

    static MultiFilterBank init(int dim, int d_min, int d_max, double lambda, double alpha = 0.99,
                                double delta = 0.01);

    cplx output(const CVec& r) const;
    cplx step(const CVec& r, cplx d);
};

RankDecision select_rank_multiple(const MultiFilterBank& bank);

/// Stopping-rule selector on the columns of a d_max-wide projection: for each
/// d, the ratio ||proj of column d onto span(columns 1..d-1)|| / ||column d||.
/// Returns the largest d in range whose ratio exceeds the threshold, else
/// d_min. Zero-norm columns are skipped.
RankDecision select_rank_stopping(const CMat& T, double threshold, int d_min, int d_max);

struct CvHistory {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    double lambda = 1.0;  // training weight used by the per-candidate fits
};

/// Leave-one-out selector: for each candidate rank the filters scoring
/// sample l are refit on moments with sample l's contribution removed
/// (moment deflation), and the alpha-weighted errors are summed. Candidates
/// with fewer than rank+1 samples are skipped.
RankDecision select_rank_cv(const CvHistory& history, int d_min, int d_max, double alpha);

}  // namespace rrstap
