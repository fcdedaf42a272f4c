#pragma once

#include <functional>
#include <string>
#include <vector>

#include "freeknot/random.hpp"

namespace freeknot {

using Coefficient = std::function<double(double t, double x)>;

/// Scalar SDE dX = a(t, X) dt + sigma(t, X) dW on [0, 1].
///
/// Coefficients are expected to be differentiable in x and globally
/// Lipschitz (linear growth follows); this is not enforced. They must be
/// re-entrant since paths are evaluated concurrently.
struct ScalarSde {
    std::string name;
    Coefficient drift;
    Coefficient diffusion;
    /// d sigma / dx.
    Coefficient diffusion_dx;
    double x0 = 0.0;
    /// Optional random initial value, drawn independently of W.
    std::function<double(RandomStream&)> initial_sampler;

    double initial_value(RandomStream& rng) const { return initial_sampler ? initial_sampler(rng) : x0; }
};

/// dX = mu X dt + sigma0 X dW.
ScalarSde make_gbm(double mu, double sigma0, double x0);

/// dX = theta (mean - X) dt + sigma dW (additive noise).
ScalarSde make_ou(double theta, double mean, double sigma, double x0);

/// dX = -theta X dt + (c1 + c2 sin X) dW; bounded diffusion, no closed form.
ScalarSde make_sin_diffusion(double theta, double c1, double c2, double x0);

/// Named, parameterised member of the bundled SDE set.
/// "gbm" reads mu, sigma0, x0; "ou" reads theta, mean, sigma, x0;
/// "sin-diffusion" reads theta, c1, c2, x0.
struct SdeSpec {
    std::string name = "gbm";
    double mu = 0.1;
    double sigma0 = 0.5;
    double x0 = 1.0;
    double theta = 1.0;
    double mean = 0.0;
    double sigma = 1.0;
    double c1 = 1.0;
    double c2 = 0.5;

    /// "name=... key=value ..." listing only the parameters the model reads.
    std::string describe() const;
};

const std::vector<std::string>& bundled_sde_names();

/// Throws ConfigError for an unknown name.
ScalarSde make_sde(const SdeSpec& spec);

bool has_closed_form(const SdeSpec& spec);

/// Largest relative mismatch between diffusion_dx and a central difference
/// of diffusion over a (t, x) box sampled on a samples x samples lattice.
/// Relative to max(1, |difference quotient|).
double diffusion_derivative_mismatch(const ScalarSde& sde, double x_lo, double x_hi, std::size_t samples = 16);

}  // namespace freeknot
