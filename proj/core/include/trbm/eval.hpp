#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>

#include "trbm/deep.hpp"

namespace trbm {

// (1/m) sum (v_i - r_i)^2
double mse(const BitVector& original, const RealVector& reconstruction);

struct EvalOptions {
    bool binarize_reconstruction = false;  // threshold at 0.5 before scoring
    std::size_t mean_field_iterations = 0;
};

// Mean per-item reconstruction MSE over the test set.
double dataset_mse(const StackedModel& model, const std::vector<BitVector>& test,
                   const EvalOptions& opts = {});

struct WilcoxonOutcome {
    double statistic = 0.0;   // min(W+, W-)
    std::size_t n_effective = 0;
    double p_value = 1.0;     // two-sided
    bool significant = false;
};

// Two-sided Wilcoxon signed-rank test on paired samples.  Zero
// differences are dropped, tied absolute differences get mid-ranks.
// Exact null distribution for n_effective <= 25, normal approximation
// with continuity correction above.
WilcoxonOutcome wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y,
                                     double alpha = 0.05);

// Per-run MSE samples keyed by temperature.
using TemperatureResults = std::map<double, std::vector<double>>;

// Minimum-mean cell plus every cell not significantly different from it
// pairwise at alpha.
std::set<double> mark_best_group(const TemperatureResults& results, double alpha = 0.05);

struct RunResult {
    std::string model_kind;  // "DBM" or "DBN"
    std::string algorithm;   // "CD" or "PCD"
    double temperature = 0.0;
    std::size_t run_index = 0;
    double test_mse = 0.0;
};

void write_results_csv(const std::vector<RunResult>& results, std::ostream& out);
std::vector<RunResult> read_results_csv(std::istream& in);

// Text table mirroring the row-per-(kind,algorithm), column-per-
// temperature layout, statistically tied best cells starred.
void render_results_table(const std::vector<RunResult>& results, std::ostream& out,
                          double alpha = 0.05);

}  // namespace trbm
