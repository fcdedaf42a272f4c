#include "freeknot/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "CLI11.hpp"
#include "freeknot/errors.hpp"
#include "freeknot/harness.hpp"
#include "freeknot/paths.hpp"
#include "freeknot/random.hpp"
#include "freeknot/schemes.hpp"
#include "freeknot/sde.hpp"
#include "freeknot/summation.hpp"
#include "freeknot/tau11.hpp"

namespace freeknot::cli {

namespace fs = std::filesystem;

std::string default_output_dir() {
    if (const char* env = std::getenv("FREEKNOT_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "out";
}

namespace {

constexpr const char* version_string = "0.1.0";

struct Common {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string out;
    bool force = false;
    std::string config;
};

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Master seed for every random stream")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "Output directory (default $FREEKNOT_OUT_DIR or ./out)");
    sub->add_flag("--force", c.force, "Overwrite existing output files");
    sub->add_option("--config", c.config, "Flat key=value file; command-line flags take precedence");
}

void add_sde(CLI::App* sub, SdeSpec& spec) {
    sub->add_option("--sde", spec.name, "Bundled SDE")
        ->capture_default_str()
        ->check(CLI::IsMember(bundled_sde_names()));
    sub->add_option("--mu", spec.mu, "gbm drift")->capture_default_str();
    sub->add_option("--sigma0", spec.sigma0, "gbm volatility")->capture_default_str();
    sub->add_option("--x0", spec.x0, "Initial value")->capture_default_str();
    sub->add_option("--theta", spec.theta, "ou / sin-diffusion mean reversion")->capture_default_str();
    sub->add_option("--mean", spec.mean, "ou long-run mean")->capture_default_str();
    sub->add_option("--sigma", spec.sigma, "ou noise level")->capture_default_str();
    sub->add_option("--c1", spec.c1, "sin-diffusion constant part")->capture_default_str();
    sub->add_option("--c2", spec.c2, "sin-diffusion sine amplitude")->capture_default_str();
}

void add_experiment(CLI::App* sub, ExperimentConfig& cfg, bool with_scale) {
    sub->add_option("--reps", cfg.reps, "Monte Carlo paths per ladder point")->capture_default_str();
    sub->add_option("--n", cfg.grid_steps, "Brownian grid steps on [0, 1]")->capture_default_str();
    if (with_scale)
        sub->add_option("--grid-scale", cfg.grid_scale,
                        "Use max(n, grid-scale / eps^2) steps per eps; 0 keeps n fixed")
            ->capture_default_str();
    sub->add_option("--q", cfg.q, "Error moment q >= 1")->capture_default_str();
}

/// Reads a flat key=value file and feeds every key that was not given on the
/// command line into the matching option of `sub`.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");

    std::set<std::string> from_command_line;
    for (const CLI::Option* opt : sub->get_options())
        if (opt->count() > 0) from_command_line.insert(opt->get_name());

    std::set<std::string> seen;
    CLI::ConfigINI format;
    for (const CLI::ConfigItem& item : format.from_config(in)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty())
            throw ConfigError("config file '" + path + "': sections are not supported (key '" + item.fullname() +
                              "')");
        std::string key = item.name;
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config" || key == "help")
            throw ConfigError("config file '" + path + "': key '" + key + "' is not allowed");
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw ConfigError("config file '" + path + "': unknown key '" + item.name + "' for " + sub->get_name());
        if (!seen.insert(opt->get_name()).second)
            throw ConfigError("config file '" + path + "': duplicate key '" + item.name + "'");
        if (from_command_line.count(opt->get_name()) != 0) continue;
        try {
            opt->add_result(item.inputs);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config file '" + path + "': " + e.what());
        }
    }
}

fs::path output_file(const Common& c, const std::string& name) {
    const fs::path dir = c.out.empty() ? fs::path(default_output_dir()) : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const fs::path file = dir / name;
    if (fs::exists(file) && !c.force)
        throw ConfigError("output file '" + file.string() + "' exists; pass --force to overwrite");
    return file;
}

void write_file(const fs::path& file, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + file.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw ConfigError("failed writing '" + file.string() + "'");
}

int cmd_tau_sample(const Common& c, std::size_t reps, std::ostream& out) {
    if (reps < 2) throw ConfigError("tau-sample: reps must be at least 2");
    const fs::path file = output_file(c, "tau_samples.csv");

    const Tau11Dist dist;
    RandomStream rng = RandomStream::derive(c.seed, StreamTag::tau_samples, 0);
    std::vector<double> draws(reps);
    CompensatedSum sum;
    for (double& d : draws) {
        d = dist.sample(rng);
        sum.add(d);
    }
    const double mean = sum.value() / static_cast<double>(reps);
    CompensatedSum sq;
    for (double d : draws) sq.add((d - mean) * (d - mean));
    const double se = std::sqrt(sq.value() / static_cast<double>(reps - 1) / static_cast<double>(reps));

    write_file(file, [&](std::ostream& csv) {
        csv << "# freeknot tau-sample seed=" << c.seed << " reps=" << reps << " cdf_tol="
            << format_real(dist.cdf_tolerance()) << " quantile_tol=" << format_real(dist.quantile_tolerance())
            << '\n';
        csv << "index,tau\n";
        for (std::size_t i = 0; i < reps; ++i) csv << i << ',' << format_real(draws[i]) << '\n';
    });

    const double ref = tau11_mean();
    out << "tau(1,1) samples: " << reps << " (seed " << c.seed << ")\n"
        << "  sample mean     " << fixed(mean, 6) << " +- " << fixed(se, 6) << '\n'
        << "  14 zeta(3)/pi^2 " << fixed(ref, 6) << '\n'
        << "  z-score         " << fixed((mean - ref) / se, 3) << '\n'
        << "  wrote " << file.string() << '\n';
    return exit_ok;
}

int cmd_knot_stats(const Common& c, const std::vector<double>& eps, std::size_t reps, std::ostream& out) {
    if (eps.empty()) throw ConfigError("knot-stats: empty eps list");
    if (reps < 2) throw ConfigError("knot-stats: reps must be at least 2");
    for (double e : eps)
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("knot-stats: eps must lie in (0, 1)");
    const fs::path file = output_file(c, "knot_stats.csv");

    std::vector<KnotCountSummary> rows;
    for (double e : eps) rows.push_back(knot_count_stats(e, reps, c.seed, c.threads));
    write_file(file, [&](std::ostream& csv) { write_csv(csv, rows, c.seed); });

    out << "knot counts, distributional regime (seed " << c.seed << ", " << reps << " reps)\n"
        << "  eps        mean N      eps^2 mean N      eps^4 var N    target " << fixed(rows.front().reference, 6)
        << '\n';
    for (const KnotCountSummary& r : rows)
        out << "  " << fixed(r.eps, 4) << "   " << fixed(r.mean, 2) << "   " << fixed(r.scaled_mean, 5) << " +- "
            << fixed(r.scaled_mean_stderr, 5) << "   " << fixed(r.scaled_variance, 6) << '\n';
    out << "  wrote " << file.string() << '\n';
    return exit_ok;
}

int cmd_dist_check(std::ostream& out) {
    const Tau11Dist dist;
    bool all = true;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        all = all && ok;
        out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    };

    double series_gap = 0.0;
    for (int i = 0; i <= 270; ++i) {
        const double x = 0.3 + 0.01 * i;
        series_gap = std::max(series_gap, std::abs(kolmogorov_cdf_alternating(x, 1e-15) -
                                                   kolmogorov_cdf_theta(x, 1e-15)));
    }
    report("series agreement on [0.3, 3]", series_gap <= 1e-10, "max gap " + format_real(series_gap));

    double round_trip = 0.0;
    for (int i = 1; i < 1000; ++i) {
        const double p = i / 1000.0;
        round_trip = std::max(round_trip, std::abs(dist.cdf(dist.quantile(p)) - p));
    }
    report("quantile round trip", round_trip <= 1e-9, "max |F(Q(p)) - p| " + format_real(round_trip));

    bool monotone = true;
    double prev = 0.0;
    for (int i = 1; i <= 6400; ++i) {
        const double f = dist.cdf(0.01 * i);
        monotone = monotone && f >= prev && f <= 1.0;
        prev = f;
    }
    report("cdf monotone on (0, 64]", monotone, "checked 6400 points");

    const double k_gap = std::abs(dist.cdf(1.0) - (1.0 - dist.kolmogorov_cdf(1.0)));
    report("tau cdf(1) = 1 - K(1)", k_gap <= 1e-12, "gap " + format_real(k_gap));

    auto survival = [&](double x) { return 1.0 - dist.cdf(x); };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        survival, 0.0, Tau11Dist::bracket_upper, 15, 1e-13);
    const double mean_gap = std::abs(integral - tau11_mean());
    report("mean by survival quadrature", mean_gap <= 1e-9,
           fixed(integral, 12) + " vs 14 zeta(3)/pi^2 = " + fixed(tau11_mean(), 12));

    return all ? exit_ok : exit_numeric;
}

int cmd_simulate(const Common& c, ExperimentConfig cfg, double eps, std::ostream& out) {
    cfg.eps_ladder = {eps};
    cfg.seed = c.seed;
    cfg.reps = std::max<std::size_t>(cfg.reps, 2);
    cfg.validate(Method::xtilde);
    const std::size_t n = cfg.grid_steps_for(Method::xtilde, eps);
    const fs::path knots_file = output_file(c, "simulate_knots.csv");
    const fs::path segments_file = output_file(c, "simulate_segments.csv");

    const ScalarSde sde = make_sde(cfg.sde);
    RandomStream rng = RandomStream::derive(c.seed, StreamTag::single_path, 0);
    const GridPath path = sample_grid_path(n, rng);
    const KnotPath knots = detect_knots_on_grid(path, eps);
    const std::vector<double> milstein = run_milstein_knots(sde, knots);
    const SplinePath xtilde = build_xtilde(sde, knots, milstein);
    const std::vector<double> reference = reference_solution(cfg.sde, path);
    const double error = sup_norm_error(reference, xtilde, path, knots);

    std::ostringstream provenance;
    provenance << "# freeknot simulate " << cfg.sde.describe() << " eps=" << format_real(eps) << " n=" << n
               << " seed=" << c.seed << '\n';
    write_file(knots_file, [&](std::ostream& csv) {
        csv << provenance.str();
        csv << "index,grid_index,time,w,milstein,reference\n";
        for (std::size_t j = 0; j < knots.knot_times.size(); ++j) {
            const std::size_t gi = knots.grid_indices[j];
            csv << j << ',' << gi << ',' << format_real(knots.knot_times[j]) << ','
                << format_real(knots.knot_values[j]) << ',' << format_real(milstein[j]) << ','
                << format_real(reference[gi]) << '\n';
        }
    });
    write_file(segments_file, [&](std::ostream& csv) {
        csv << provenance.str();
        csv << "segment,t_start,t_end,y_start,y_end\n";
        const auto segments = xtilde.segments();
        for (std::size_t s = 0; s < segments.size(); ++s)
            csv << s << ',' << format_real(segments[s].t_start) << ',' << format_real(segments[s].t_end) << ','
                << format_real(segments[s].y_start) << ',' << format_real(segments[s].y_end) << '\n';
    });

    out << "single path, " << cfg.sde.describe() << ", eps " << format_real(eps) << ", n " << n << '\n'
        << "  interior knots   " << knots.n_knots() << '\n'
        << "  sup error        " << format_real(error) << '\n'
        << "  sup error / eps  " << fixed(error / eps, 4) << '\n'
        << "  wrote " << knots_file.string() << " and " << segments_file.string() << '\n';
    return exit_ok;
}

int cmd_convergence(const Common& c, ExperimentConfig cfg, std::ostream& out) {
    cfg.method = Method::xtilde;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    cfg.validate();
    const fs::path file = output_file(c, "convergence.csv");
    const ConvergenceTable table = convergence_table(cfg);
    write_file(file, [&](std::ostream& csv) { write_csv(csv, table, cfg); });

    out << "free-knot method, " << cfg.describe() << '\n'
        << "  sigma constant " << fixed(table.sigma_constant.e_q, 5) << " +- "
        << fixed(table.sigma_constant.e_q_std_error, 5) << '\n'
        << "  eps        e_q            e_q/eps    ratio    mean N\n";
    for (const ConvergenceRow& r : table.rows)
        out << "  " << fixed(r.parameter, 4) << "   " << format_real(r.estimate.e_q).substr(0, 12) << "   "
            << fixed(r.normalized, 4) << "   " << fixed(r.ratio, 4) << "   " << fixed(r.mean_knots, 1) << '\n';
    out << "  wrote " << file.string() << '\n';
    return exit_ok;
}

int cmd_euler(const Common& c, ExperimentConfig cfg, std::ostream& out) {
    cfg.method = Method::euler;
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    cfg.validate();
    const fs::path file = output_file(c, "euler_baseline.csv");
    const ConvergenceTable table = convergence_table(cfg);
    write_file(file, [&](std::ostream& csv) { write_csv(csv, table, cfg); });

    out << "Euler baseline, " << cfg.describe() << '\n' << "  k        e_q            e_q sqrt(k/ln k)\n";
    for (const ConvergenceRow& r : table.rows)
        out << "  " << static_cast<std::size_t>(r.parameter) << "   " << format_real(r.estimate.e_q).substr(0, 12)
            << "   " << fixed(r.normalized, 4) << '\n';
    out << "  wrote " << file.string() << '\n';
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"freeknot: free-knot spline approximation of scalar SDEs", "freeknot"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(1, 1);

    Common common;
    ExperimentConfig cfg;
    std::size_t tau_reps = 100000;
    std::size_t knot_reps = 10000;
    std::vector<double> knot_eps{0.1, 0.05, 0.025};
    double simulate_eps = 0.1;

    CLI::App* tau = app.add_subcommand("tau-sample", "Draw tau(1,1) samples and compare the mean with 14 zeta(3)/pi^2");
    add_common(tau, common);
    tau->add_option("--reps", tau_reps, "Number of draws")->capture_default_str();

    CLI::App* knots = app.add_subcommand("knot-stats", "Knot-count statistics of the distributional sampler");
    add_common(knots, common);
    knots->add_option("--eps", knot_eps, "Comma-separated accuracies")->delimiter(',')->capture_default_str();
    knots->add_option("--reps", knot_reps, "Replications per eps")->capture_default_str();

    CLI::App* check = app.add_subcommand("dist-check", "Self-tests of the Kolmogorov and tau(1,1) routines");
    add_common(check, common);

    CLI::App* simulate = app.add_subcommand("simulate", "One path: knots and spline segments written to CSV");
    add_common(simulate, common);
    add_sde(simulate, cfg.sde);
    simulate->add_option("--eps", simulate_eps, "Accuracy")->capture_default_str();
    simulate->add_option("--n", cfg.grid_steps, "Brownian grid steps on [0, 1]")->capture_default_str();
    simulate->add_option("--grid-scale", cfg.grid_scale, "Use max(n, grid-scale / eps^2) steps")
        ->capture_default_str();

    ExperimentConfig conv_cfg;
    CLI::App* conv = app.add_subcommand("convergence", "Error ladder of the free-knot method over eps");
    add_common(conv, common);
    add_sde(conv, conv_cfg.sde);
    add_experiment(conv, conv_cfg, true);
    conv->add_option("--eps", conv_cfg.eps_ladder, "Comma-separated, strictly decreasing")
        ->delimiter(',')
        ->capture_default_str();

    ExperimentConfig euler_cfg;
    euler_cfg.grid_steps = 131072;
    CLI::App* euler = app.add_subcommand("euler-baseline", "Error ladder of interpolated Euler over k");
    add_common(euler, common);
    add_sde(euler, euler_cfg.sde);
    add_experiment(euler, euler_cfg, false);
    euler->add_option("--k", euler_cfg.k_ladder, "Comma-separated step counts dividing n")
        ->delimiter(',')
        ->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version_string << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_config;
    }

    try {
        CLI::App* chosen = app.get_subcommands().front();
        if (!common.config.empty()) apply_config(chosen, common.config);

        if (chosen == tau) return cmd_tau_sample(common, tau_reps, out);
        if (chosen == knots) return cmd_knot_stats(common, knot_eps, knot_reps, out);
        if (chosen == check) return cmd_dist_check(out);
        if (chosen == simulate) return cmd_simulate(common, cfg, simulate_eps, out);
        if (chosen == conv) return cmd_convergence(common, conv_cfg, out);
        return cmd_euler(common, euler_cfg, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const DomainError& e) {
        err << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return exit_numeric;
    }
}

}  // namespace freeknot::cli
