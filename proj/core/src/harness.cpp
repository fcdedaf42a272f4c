#include "freeknot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "freeknot/errors.hpp"
#include "freeknot/schemes.hpp"
#include "freeknot/summation.hpp"
#include "freeknot/tau11.hpp"
#include "parallel.hpp"

namespace freeknot {
namespace {

constexpr double z_95 = 1.959963984540054;

double mean_of(std::span<const double> values) {
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    return sum.value() / static_cast<double>(values.size());
}

// Sample variance around a given mean.
double variance_of(std::span<const double> values, double mean) {
    CompensatedSum sum;
    for (double v : values) sum.add((v - mean) * (v - mean));
    return sum.value() / static_cast<double>(values.size() - 1);
}

std::size_t grid_index_of(const GridPath& grid, double t) {
    const double n = static_cast<double>(grid.steps());
    const auto i = static_cast<std::size_t>(std::llround(t * n));
    if (i > grid.steps() || grid.time(i) != t)
        throw ConfigError("sup_norm_error: breakpoint " + format_real(t) + " is not a grid time");
    return i;
}

// Grid-point part of the sup-norm error; walks the segments once.
double grid_sup(std::span<const double> reference, const SplinePath& approx, const GridPath& grid) {
    if (reference.size() != grid.steps() + 1)
        throw ConfigError("sup_norm_error: reference has " + std::to_string(reference.size()) +
                          " values for a grid of " + std::to_string(grid.steps() + 1) + " points");
    const auto segments = approx.segments();
    double worst = std::abs(reference[0] - approx.initial_value());
    std::size_t s = 0;
    for (std::size_t i = 1; i < reference.size(); ++i) {
        const double t = grid.time(i);
        while (segments[s].t_end < t) ++s;
        const double y = t == segments[s].t_end ? segments[s].y_end : segments[s].at(t);
        worst = std::max(worst, std::abs(reference[i] - y));
    }
    return worst;
}

double sigma_sup_on(const ScalarSde& sde, std::span<const double> reference, const GridPath& grid) {
    double worst = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i)
        worst = std::max(worst, std::abs(sde.diffusion(grid.time(i), reference[i])));
    return worst;
}

void validate_common(const ExperimentConfig& c) {
    if (c.reps < 2) throw ConfigError("experiment: reps must be at least 2");
    if (!(c.q >= 1.0) || !std::isfinite(c.q)) throw ConfigError("experiment: q must be a finite value >= 1");
    if (c.grid_steps == 0) throw ConfigError("experiment: grid size must be positive");
    if (c.threads == 0) throw ConfigError("experiment: threads must be positive");
    if (c.grid_scale != 0.0 && !(c.grid_scale >= resolution_guard_ratio && std::isfinite(c.grid_scale)))
        throw ConfigError("experiment: grid scale must be 0 or at least 50");
    make_sde(c.sde);
}

void validate_eps(const ExperimentConfig& c, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("experiment: eps must be positive");
    const std::size_t n = c.grid_steps_for(Method::xtilde, eps);
    const double h = 1.0 / static_cast<double>(n);
    if (h * resolution_guard_ratio > eps * eps)
        throw ConfigError("experiment: eps = " + format_real(eps) + " needs h <= eps^2/50; grid size " +
                          std::to_string(n) + " is too coarse");
}

void validate_k(const ExperimentConfig& c, std::size_t k) {
    if (k < 2) throw ConfigError("experiment: Euler k must be at least 2");
    if (c.grid_steps % k != 0)
        throw ConfigError("experiment: k = " + std::to_string(k) + " does not divide the grid size " +
                          std::to_string(c.grid_steps));
}

std::string join(const auto& values) {
    std::string s;
    for (const auto& v : values) {
        if (!s.empty()) s += ',';
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
            s += format_real(v);
        else
            s += std::to_string(v);
    }
    return s;
}

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* method_name(Method m) { return m == Method::xtilde ? "xtilde" : "euler"; }

ErrorEstimate estimate_from_errors(std::span<const double> errors, double q) {
    if (errors.size() < 2) throw ConfigError("estimate_from_errors: need at least two paths");
    if (!(q >= 1.0) || !std::isfinite(q)) throw ConfigError("estimate_from_errors: q must be >= 1");
    std::vector<double> powered(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!std::isfinite(errors[i]) || errors[i] < 0.0)
            throw NumericError("estimate_from_errors: invalid error " + format_real(errors[i]) + " at path " +
                               std::to_string(i));
        powered[i] = std::pow(errors[i], q);
    }
    ErrorEstimate e;
    e.q = q;
    e.reps = errors.size();
    e.raw_mean = mean_of(powered);
    e.std_error = std::sqrt(variance_of(powered, e.raw_mean) / static_cast<double>(e.reps));
    e.e_q = std::pow(e.raw_mean, 1.0 / q);
    if (e.raw_mean > 0.0) {
        // d(m^(1/q))/dm = m^(1/q - 1) / q
        e.e_q_std_error = std::pow(e.raw_mean, 1.0 / q - 1.0) / q * e.std_error;
        e.ci_low = std::max(0.0, e.e_q - z_95 * e.e_q_std_error);
        e.ci_high = e.e_q + z_95 * e.e_q_std_error;
    } else {
        e.ci_low = e.ci_high = e.e_q;
    }
    return e;
}

void ExperimentConfig::validate(Method m) const {
    validate_common(*this);
    if (m == Method::xtilde) {
        if (eps_ladder.empty()) throw ConfigError("experiment: empty eps ladder");
        for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
            validate_eps(*this, eps_ladder[i]);
            if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
                throw ConfigError("experiment: eps ladder must be strictly decreasing");
        }
    } else {
        if (k_ladder.empty()) throw ConfigError("experiment: empty k ladder");
        for (std::size_t k : k_ladder) validate_k(*this, k);
    }
}

std::size_t ExperimentConfig::grid_steps_for(Method m, double parameter) const {
    if (m != Method::xtilde || grid_scale <= 0.0 || !(parameter > 0.0)) return grid_steps;
    const double scaled = std::ceil(grid_scale / (parameter * parameter));
    return std::max(grid_steps, static_cast<std::size_t>(scaled));
}

std::string ExperimentConfig::describe() const {
    std::ostringstream out;
    out << "method=" << method_name(method) << ' ' << sde.describe();
    if (method == Method::xtilde)
        out << " eps=" << join(eps_ladder);
    else
        out << " k=" << join(k_ladder);
    out << " reps=" << reps << " n=" << grid_steps;
    if (method == Method::xtilde && grid_scale > 0.0) out << " grid_scale=" << format_real(grid_scale);
    out << " q=" << format_real(q) << " seed=" << seed;
    return out.str();
}

double sup_norm_error(std::span<const double> reference, const SplinePath& approx, const GridPath& grid,
                      const KnotPath& knots) {
    double worst = grid_sup(reference, approx, grid);
    for (std::size_t j = 1; j + 1 < knots.knot_times.size(); ++j) {
        const std::size_t i =
            knots.regime == KnotRegime::grid_oracle ? knots.grid_indices[j] : grid_index_of(grid, knots.knot_times[j]);
        if (i > grid.steps()) throw ConfigError("sup_norm_error: knot index outside the grid");
        worst = std::max(worst, std::abs(reference[i] - approx.right_limit(knots.knot_times[j])));
    }
    return worst;
}

double sup_norm_error(std::span<const double> reference, const SplinePath& approx, const GridPath& grid) {
    double worst = grid_sup(reference, approx, grid);
    const auto segments = approx.segments();
    for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
        const std::size_t i = grid_index_of(grid, segments[s].t_end);
        worst = std::max(worst, std::abs(reference[i] - segments[s + 1].y_start));
    }
    return worst;
}

std::vector<PathRecord> simulate_paths(const ExperimentConfig& config, Method method, double parameter) {
    validate_common(config);
    if (method == Method::xtilde) validate_eps(config, parameter);
    const auto k = static_cast<std::size_t>(parameter);
    if (method == Method::euler) {
        if (static_cast<double>(k) != parameter) throw ConfigError("experiment: k must be an integer");
        validate_k(config, k);
    }
    const ScalarSde sde = make_sde(config.sde);
    const std::size_t n = config.grid_steps_for(method, parameter);
    return detail::parallel_map<PathRecord>(config.reps, config.threads, [&](std::size_t i) {
        auto rng = RandomStream::derive(config.seed, StreamTag::method_paths, i);
        const GridPath path = sample_grid_path(n, rng);
        const auto reference = reference_solution(config.sde, path);
        PathRecord record;
        record.sigma_sup = sigma_sup_on(sde, reference, path);
        if (method == Method::xtilde) {
            const KnotPath knots = detect_knots_on_grid(path, parameter);
            const auto milstein = run_milstein_knots(sde, knots);
            const SplinePath approx = build_xtilde(sde, knots, milstein);
            record.error = sup_norm_error(reference, approx, path, knots);
            record.n_knots = knots.n_knots();
        } else {
            const SplinePath approx = euler_fixed_interpolated(sde, k, path);
            record.error = sup_norm_error(reference, approx, path);
            record.n_knots = k - 1;
        }
        if (!std::isfinite(record.error))
            throw NumericError("experiment: non-finite sup-norm error on path " + std::to_string(i));
        return record;
    });
}

ErrorEstimate estimate_eq(const ExperimentConfig& config, Method method, double parameter) {
    const auto records = simulate_paths(config, method, parameter);
    std::vector<double> errors(records.size());
    std::transform(records.begin(), records.end(), errors.begin(), [](const PathRecord& r) { return r.error; });
    return estimate_from_errors(errors, config.q);
}

ErrorEstimate sigma_sup_constant(const ExperimentConfig& config) {
    validate_common(config);
    const ScalarSde sde = make_sde(config.sde);
    std::size_t n = config.grid_steps;
    for (double eps : config.eps_ladder) n = std::max(n, config.grid_steps_for(Method::xtilde, eps));
    const auto sups = detail::parallel_map<double>(config.reps, config.threads, [&](std::size_t i) {
        auto rng = RandomStream::derive(config.seed, StreamTag::reference_paths, i);
        const GridPath path = sample_grid_path(n, rng);
        return sigma_sup_on(sde, reference_solution(config.sde, path), path);
    });
    return estimate_from_errors(sups, config.q);
}

KnotCountSummary knot_count_stats(double eps, std::size_t reps, std::uint64_t seed, std::size_t threads) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("knot_count_stats: eps must be positive");
    if (reps < 2) throw ConfigError("knot_count_stats: reps must be at least 2");
    const Tau11Dist dist;
    const auto counts = detail::parallel_map<double>(reps, threads, [&](std::size_t i) {
        auto rng = RandomStream::derive(seed, StreamTag::knot_sequences, i);
        return static_cast<double>(sample_knot_sequence(eps, rng, dist).n_knots());
    });
    KnotCountSummary s;
    s.eps = eps;
    s.reps = reps;
    s.mean = mean_of(counts);
    s.variance = variance_of(counts, s.mean);
    CompensatedSum fourth;
    for (double c : counts) fourth.add(std::pow(c - s.mean, 4));
    const double n = static_cast<double>(reps);
    const double m4 = fourth.value() / n;
    const double var_of_variance = std::max(0.0, m4 - s.variance * s.variance * (n - 3.0) / (n - 1.0)) / n;
    const double e2 = eps * eps;
    s.scaled_mean = e2 * s.mean;
    s.scaled_mean_stderr = e2 * std::sqrt(s.variance / n);
    s.scaled_variance = e2 * e2 * s.variance;
    s.scaled_variance_stderr = e2 * e2 * std::sqrt(var_of_variance);
    s.reference = 1.0 / tau11_mean();
    return s;
}

ConvergenceTable convergence_table(const ExperimentConfig& config) {
    config.validate();
    ConvergenceTable table;
    table.method = config.method;
    if (config.method == Method::xtilde) table.sigma_constant = sigma_sup_constant(config);

    std::vector<double> ladder;
    if (config.method == Method::xtilde)
        ladder = config.eps_ladder;
    else
        for (std::size_t k : config.k_ladder) ladder.push_back(static_cast<double>(k));

    for (double parameter : ladder) {
        const auto records = simulate_paths(config, config.method, parameter);
        std::vector<double> errors(records.size());
        std::vector<double> knots(records.size());
        std::vector<double> pathwise(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            errors[i] = records[i].error;
            knots[i] = static_cast<double>(records[i].n_knots);
            pathwise[i] =
                records[i].sigma_sup > 0.0 ? records[i].error / (parameter * records[i].sigma_sup) : 0.0;
        }
        ConvergenceRow row;
        row.parameter = parameter;
        row.estimate = estimate_from_errors(errors, config.q);
        row.mean_knots = mean_of(knots);
        row.knots_scaled_error = std::sqrt(row.mean_knots) * row.estimate.e_q;
        if (config.method == Method::xtilde) {
            row.normalized = row.estimate.e_q / parameter;
            row.ratio = table.sigma_constant.e_q > 0.0 ? row.normalized / table.sigma_constant.e_q : 0.0;
            row.pathwise_ratio_sd = std::sqrt(variance_of(pathwise, mean_of(pathwise)));
        } else {
            row.normalized = row.estimate.e_q * std::sqrt(parameter / std::log(parameter));
            row.ratio = row.normalized;
        }
        table.rows.push_back(row);
    }
    return table;
}

void write_csv(std::ostream& out, const ConvergenceTable& table, const ExperimentConfig& config) {
    out << "# freeknot convergence " << config.describe() << '\n';
    if (table.method == Method::xtilde) {
        out << "# sigma_constant=" << format_real(table.sigma_constant.e_q)
            << " sigma_constant_stderr=" << format_real(table.sigma_constant.e_q_std_error) << '\n';
        out << "eps,e_q,stderr,ratio,ci_low,ci_high,reps,seed,normalized,sigma_constant,mean_knots,"
               "knots_scaled_error,pathwise_ratio_sd\n";
    } else {
        out << "k,e_q,stderr,ratio,ci_low,ci_high,reps,seed,normalized\n";
    }
    for (const auto& row : table.rows) {
        const auto& e = row.estimate;
        if (table.method == Method::xtilde)
            out << format_real(row.parameter);
        else
            out << static_cast<std::size_t>(row.parameter);
        out << ',' << format_real(e.e_q) << ',' << format_real(e.e_q_std_error) << ',' << format_real(row.ratio)
            << ',' << format_real(e.ci_low) << ',' << format_real(e.ci_high) << ',' << e.reps << ',' << config.seed
            << ',' << format_real(row.normalized);
        if (table.method == Method::xtilde)
            out << ',' << format_real(table.sigma_constant.e_q) << ',' << format_real(row.mean_knots) << ','
                << format_real(row.knots_scaled_error) << ',' << format_real(row.pathwise_ratio_sd);
        out << '\n';
    }
}

void write_csv(std::ostream& out, std::span<const KnotCountSummary> rows, std::uint64_t seed) {
    out << "# freeknot knot-stats seed=" << seed << " eps=";
    for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? "," : "") << format_real(rows[i].eps);
    out << " reps=" << (rows.empty() ? 0 : rows.front().reps) << '\n';
    out << "eps,reps,mean_knots,var_knots,scaled_mean,scaled_mean_stderr,scaled_variance,scaled_variance_stderr,"
           "reference,seed\n";
    for (const auto& r : rows)
        out << format_real(r.eps) << ',' << r.reps << ',' << format_real(r.mean) << ',' << format_real(r.variance)
            << ',' << format_real(r.scaled_mean) << ',' << format_real(r.scaled_mean_stderr) << ','
            << format_real(r.scaled_variance) << ',' << format_real(r.scaled_variance_stderr) << ','
            << format_real(r.reference) << ',' << seed << '\n';
}

}  // namespace freeknot
