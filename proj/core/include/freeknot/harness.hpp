#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "freeknot/paths.hpp"
#include "freeknot/sde.hpp"
#include "freeknot/spline.hpp"

namespace freeknot {

/// Monte Carlo estimate of e_q = (E ||X - X^||^q)^(1/q).
struct ErrorEstimate {
    double q = 2.0;
    double e_q = 0.0;
    double raw_mean = 0.0;   // mean of error^q
    double std_error = 0.0;  // standard error of raw_mean
    double e_q_std_error = 0.0;  // delta-method standard error of e_q
    std::size_t reps = 0;
    double ci_low = 0.0;     // 95% interval for e_q, delta method
    double ci_high = 0.0;
};

/// Builds an ErrorEstimate from per-path errors summed in the given order.
/// Throws ConfigError for fewer than two errors or q < 1, NumericError for a
/// non-finite or negative error (the message carries its index).
ErrorEstimate estimate_from_errors(std::span<const double> errors, double q);

enum class Method { xtilde, euler };

const char* method_name(Method m);

struct ExperimentConfig {
    SdeSpec sde;
    Method method = Method::xtilde;
    std::vector<double> eps_ladder{0.1, 0.05, 0.025};
    std::vector<std::size_t> k_ladder{64, 256, 1024};
    std::size_t reps = 500;
    std::size_t grid_steps = 100000;
    /// When positive, an eps ladder point runs on
    /// max(grid_steps, ceil(grid_scale / eps^2)) steps so that eps / sqrt(h)
    /// stays fixed along the ladder. Must be at least the guard ratio 50.
    double grid_scale = 0.0;
    double q = 2.0;
    std::uint64_t seed = 0;
    /// Worker count; results do not depend on it.
    std::size_t threads = 1;
    std::string output;

    /// Throws ConfigError when the ladder for `method` is empty or invalid,
    /// reps < 2, q < 1, or an eps violates the resolution guard.
    void validate(Method m) const;
    void validate() const { validate(method); }

    /// Grid size used for one ladder point.
    std::size_t grid_steps_for(Method m, double parameter) const;

    /// Space-separated key=value list of everything that affects results.
    std::string describe() const;
};

/// Largest |reference - approx| over the grid points, also probing the
/// right limit of approx at every knot so that jumps count. Knot times must
/// lie on the grid; reference must hold one value per grid point.
double sup_norm_error(std::span<const double> reference, const SplinePath& approx, const GridPath& grid,
                      const KnotPath& knots);

/// Variant probing the breakpoints of approx itself.
double sup_norm_error(std::span<const double> reference, const SplinePath& approx, const GridPath& grid);

/// Per-path outcome of one Monte Carlo replication.
struct PathRecord {
    double error = 0.0;      // sup-norm error of the method
    double sigma_sup = 0.0;  // sup_t |sigma(t, X(t))| on the same path
    std::size_t n_knots = 0; // interior knots (xtilde) or k - 1 (euler)
};

/// Runs config.reps paths for one ladder point: eps for xtilde, k for euler.
/// Path i uses the stream (seed, method_paths, i) for every ladder point.
std::vector<PathRecord> simulate_paths(const ExperimentConfig& config, Method method, double parameter);

ErrorEstimate estimate_eq(const ExperimentConfig& config, Method method, double parameter);

/// Independent estimate of (E ||sigma(., X)||_inf^q)^(1/q) from reference
/// paths on streams (seed, reference_paths, i), sampled on the finest grid
/// used by the eps ladder.
ErrorEstimate sigma_sup_constant(const ExperimentConfig& config);

struct KnotCountSummary {
    double eps = 0.0;
    std::size_t reps = 0;
    double mean = 0.0;                    // mean of N_eps
    double variance = 0.0;                // sample variance of N_eps
    double scaled_mean = 0.0;             // eps^2 * mean
    double scaled_mean_stderr = 0.0;
    double scaled_variance = 0.0;         // variance of eps^2 * N_eps
    double scaled_variance_stderr = 0.0;
    double reference = 0.0;               // 1 / E tau(1,1)
};

/// N_eps statistics from the distributional knot sampler; replication i
/// uses the stream (seed, knot_sequences, i).
KnotCountSummary knot_count_stats(double eps, std::size_t reps, std::uint64_t seed, std::size_t threads = 1);

struct ConvergenceRow {
    double parameter = 0.0;          // eps or k
    ErrorEstimate estimate;
    double normalized = 0.0;         // e_q / eps, or e_q * sqrt(k / ln k)
    double ratio = 0.0;              // xtilde: normalized / sigma constant; euler: normalized
    double mean_knots = 0.0;
    double knots_scaled_error = 0.0; // sqrt(mean N) * e_q
    double pathwise_ratio_sd = 0.0;  // sd over paths of error / (eps * sigma_sup)
};

struct ConvergenceTable {
    Method method = Method::xtilde;
    ErrorEstimate sigma_constant;    // xtilde only
    std::vector<ConvergenceRow> rows;
};

ConvergenceTable convergence_table(const ExperimentConfig& config);

/// Writes "# ..." provenance, the header row and one row per ladder point;
/// floats carry 17 significant digits.
void write_csv(std::ostream& out, const ConvergenceTable& table, const ExperimentConfig& config);

void write_csv(std::ostream& out, std::span<const KnotCountSummary> rows, std::uint64_t seed);

/// 17-significant-digit rendering used in every CSV file.
std::string format_real(double v);

}  // namespace freeknot
