#include "trbm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace trbm {

double mse(const BitVector& original, const RealVector& reconstruction) {
    if (original.size() != reconstruction.size())
        throw DimensionError("mse: vector lengths differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double d = static_cast<double>(original[i]) - reconstruction[i];
        acc += d * d;
    }
    return acc / static_cast<double>(original.size());
}

double dataset_mse(const StackedModel& model, const std::vector<BitVector>& test,
                   const EvalOptions& opts) {
    if (test.empty()) throw std::invalid_argument("dataset_mse: empty test set");
    double acc = 0.0;
    for (const BitVector& v : test) {
        RealVector r = reconstruct(model, v, opts.mean_field_iterations);
        if (opts.binarize_reconstruction) {
            for (double& x : r) x = x > 0.5 ? 1.0 : 0.0;
        }
        acc += mse(v, r);
    }
    return acc / static_cast<double>(test.size());
}

namespace {

// Ranks doubled so mid-ranks stay integral; exact counting then runs in
// integer arithmetic.
struct RankedDiffs {
    std::vector<int> doubled_ranks;  // of |d|, aligned with signs
    std::vector<int> signs;          // +1 / -1
};

RankedDiffs rank_differences(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("wilcoxon_signed_rank: sample sizes differ");
    std::vector<double> absd;
    std::vector<int> sign;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d == 0.0) continue;
        absd.push_back(std::fabs(d));
        sign.push_back(d > 0.0 ? 1 : -1);
    }
    const std::size_t n = absd.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return absd[a] < absd[b]; });

    RankedDiffs out;
    out.doubled_ranks.resize(n);
    out.signs = std::move(sign);
    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos;
        while (end + 1 < n && absd[order[end + 1]] == absd[order[pos]]) ++end;
        // mid-rank of positions pos..end (1-based), doubled
        const int doubled = static_cast<int>(pos + 1 + end + 1);
        for (std::size_t t = pos; t <= end; ++t) out.doubled_ranks[order[t]] = doubled;
        pos = end + 1;
    }
    return out;
}

// Exact null: number of sign assignments with doubled W+ equal to each
// possible sum.
std::vector<double> exact_null_counts(const std::vector<int>& doubled_ranks) {
    int total = 0;
    for (int r : doubled_ranks) total += r;
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    for (int r : doubled_ranks) {
        for (int s = total - r; s >= 0; --s) {
            if (count[static_cast<std::size_t>(s)] != 0.0)
                count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
        }
    }
    return count;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

WilcoxonOutcome wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y,
                                     double alpha) {
    RankedDiffs rd = rank_differences(x, y);
    const std::size_t n = rd.signs.size();
    if (n < 5) {
        throw std::invalid_argument("wilcoxon_signed_rank: fewer than 5 nonzero pairs (" +
                                    std::to_string(n) + ")");
    }

    int w_plus2 = 0, total2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total2 += rd.doubled_ranks[i];
        if (rd.signs[i] > 0) w_plus2 += rd.doubled_ranks[i];
    }
    const int w_minus2 = total2 - w_plus2;

    WilcoxonOutcome out;
    out.n_effective = n;
    out.statistic = static_cast<double>(std::min(w_plus2, w_minus2)) / 2.0;

    if (n <= 25) {
        const std::vector<double> counts = exact_null_counts(rd.doubled_ranks);
        const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
        double le = 0.0, ge = 0.0;
        for (int s = 0; s <= total2; ++s) {
            if (s <= w_plus2) le += counts[static_cast<std::size_t>(s)];
            if (s >= w_plus2) ge += counts[static_cast<std::size_t>(s)];
        }
        out.p_value = std::min(1.0, 2.0 * std::min(le, ge) / denom);
    } else {
        // tie correction over groups of equal absolute difference
        std::map<int, int> tie_sizes;
        for (int r : rd.doubled_ranks) ++tie_sizes[r];
        double tie_term = 0.0;
        for (auto& [rank, t] : tie_sizes) {
            tie_term += static_cast<double>(t) * t * t - t;
        }
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double w = static_cast<double>(w_plus2) / 2.0;
        const double cc = w > mean ? -0.5 : (w < mean ? 0.5 : 0.0);
        const double z = (w - mean + cc) / std::sqrt(var);
        out.p_value = std::min(1.0, 2.0 * normal_cdf(-std::fabs(z)));
    }
    out.significant = out.p_value < alpha;
    return out;
}

std::set<double> mark_best_group(const TemperatureResults& results, double alpha) {
    if (results.size() < 2)
        throw std::invalid_argument("mark_best_group: need at least 2 temperature columns");
    for (const auto& [t, runs] : results) {
        if (runs.size() < 5)
            throw std::invalid_argument("mark_best_group: need >= 5 runs per column");
    }

    double best_t = 0.0;
    double best_mean = std::numeric_limits<double>::infinity();
    std::map<double, double> means;
    for (const auto& [t, runs] : results) {
        double m = 0.0;
        for (double v : runs) m += v;
        m /= static_cast<double>(runs.size());
        means[t] = m;
        if (m < best_mean) {
            best_mean = m;
            best_t = t;
        }
    }

    std::set<double> group{best_t};
    const std::vector<double>& best_runs = results.at(best_t);
    for (const auto& [t, runs] : results) {
        if (t == best_t) continue;
        if (runs.size() != best_runs.size()) continue;
        bool tied;
        try {
            tied = !wilcoxon_signed_rank(runs, best_runs, alpha).significant;
        } catch (const std::invalid_argument&) {
            // nearly identical columns: statistically indistinguishable
            tied = true;
        }
        if (tied) group.insert(t);
    }
    return group;
}

void write_results_csv(const std::vector<RunResult>& results, std::ostream& out) {
    out << "model,algorithm,temperature,run,test_mse\n";
    for (const RunResult& r : results) {
        out << r.model_kind << ',' << r.algorithm << ',' << std::setprecision(17) << r.temperature
            << ',' << r.run_index << ',' << std::setprecision(17) << r.test_mse << '\n';
    }
}

std::vector<RunResult> read_results_csv(std::istream& in) {
    std::vector<RunResult> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        RunResult r;
        std::string field;
        std::getline(ss, r.model_kind, ',');
        std::getline(ss, r.algorithm, ',');
        std::getline(ss, field, ',');
        r.temperature = std::stod(field);
        std::getline(ss, field, ',');
        r.run_index = static_cast<std::size_t>(std::stoul(field));
        std::getline(ss, field, ',');
        r.test_mse = std::stod(field);
        out.push_back(std::move(r));
    }
    return out;
}

void render_results_table(const std::vector<RunResult>& results, std::ostream& out, double alpha) {
    std::map<std::string, TemperatureResults> rows;
    std::set<double> temps;
    for (const RunResult& r : results) {
        rows[r.model_kind + "-" + r.algorithm][r.temperature].push_back(r.test_mse);
        temps.insert(r.temperature);
    }

    out << std::left << std::setw(10) << "";
    for (double t : temps) out << std::setw(12) << t;
    out << '\n';
    for (auto& [label, cols] : rows) {
        std::set<double> best;
        bool have_best = false;
        if (cols.size() >= 2) {
            bool enough = true;
            for (auto& [t, runs] : cols) enough = enough && runs.size() >= 5;
            if (enough) {
                best = mark_best_group(cols, alpha);
                have_best = true;
            }
        }
        out << std::setw(10) << label;
        for (double t : temps) {
            auto it = cols.find(t);
            if (it == cols.end()) {
                out << std::setw(12) << "-";
                continue;
            }
            double mean = 0.0;
            for (double v : it->second) mean += v;
            mean /= static_cast<double>(it->second.size());
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(5) << mean;
            if (have_best && best.count(t)) cell << '*';
            out << std::setw(12) << cell.str();
        }
        out << '\n';
    }
    out << "(* = statistically tied best per row, Wilcoxon signed-rank at alpha=" << alpha << ")\n";
}

}  // namespace trbm
