#include "freeknot/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "freeknot/errors.hpp"

namespace freeknot {

ScalarSde make_gbm(double mu, double sigma0, double x0) {
    return ScalarSde{
        .name = "gbm",
        .drift = [mu](double, double x) { return mu * x; },
        .diffusion = [sigma0](double, double x) { return sigma0 * x; },
        .diffusion_dx = [sigma0](double, double) { return sigma0; },
        .x0 = x0,
        .initial_sampler = {},
    };
}

ScalarSde make_ou(double theta, double mean, double sigma, double x0) {
    return ScalarSde{
        .name = "ou",
        .drift = [theta, mean](double, double x) { return theta * (mean - x); },
        .diffusion = [sigma](double, double) { return sigma; },
        .diffusion_dx = [](double, double) { return 0.0; },
        .x0 = x0,
        .initial_sampler = {},
    };
}

ScalarSde make_sin_diffusion(double theta, double c1, double c2, double x0) {
    return ScalarSde{
        .name = "sin-diffusion",
        .drift = [theta](double, double x) { return -theta * x; },
        .diffusion = [c1, c2](double, double x) { return c1 + c2 * std::sin(x); },
        .diffusion_dx = [c2](double, double x) { return c2 * std::cos(x); },
        .x0 = x0,
        .initial_sampler = {},
    };
}

std::string SdeSpec::describe() const {
    std::ostringstream out;
    out.precision(17);
    out << "sde=" << name;
    if (name == "gbm")
        out << " mu=" << mu << " sigma0=" << sigma0;
    else if (name == "ou")
        out << " theta=" << theta << " mean=" << mean << " sigma=" << sigma;
    else if (name == "sin-diffusion")
        out << " theta=" << theta << " c1=" << c1 << " c2=" << c2;
    out << " x0=" << x0;
    return out.str();
}

const std::vector<std::string>& bundled_sde_names() {
    static const std::vector<std::string> names{"gbm", "ou", "sin-diffusion"};
    return names;
}

ScalarSde make_sde(const SdeSpec& spec) {
    if (spec.name == "gbm") return make_gbm(spec.mu, spec.sigma0, spec.x0);
    if (spec.name == "ou") return make_ou(spec.theta, spec.mean, spec.sigma, spec.x0);
    if (spec.name == "sin-diffusion") return make_sin_diffusion(spec.theta, spec.c1, spec.c2, spec.x0);
    throw ConfigError("unknown SDE '" + spec.name + "' (expected gbm, ou or sin-diffusion)");
}

bool has_closed_form(const SdeSpec& spec) { return spec.name == "gbm" || spec.name == "ou"; }

double diffusion_derivative_mismatch(const ScalarSde& sde, double x_lo, double x_hi, std::size_t samples) {
    double worst = 0.0;
    const std::size_t m = std::max<std::size_t>(samples, 2);
    for (std::size_t it = 0; it < m; ++it) {
        const double t = static_cast<double>(it) / static_cast<double>(m - 1);
        for (std::size_t ix = 0; ix < m; ++ix) {
            const double x = x_lo + (x_hi - x_lo) * static_cast<double>(ix) / static_cast<double>(m - 1);
            const double h = 1e-5 * std::max(1.0, std::abs(x));
            const double fd = (sde.diffusion(t, x + h) - sde.diffusion(t, x - h)) / (2.0 * h);
            const double err = std::abs(sde.diffusion_dx(t, x) - fd) / std::max(1.0, std::abs(fd));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace freeknot
