#pragma once

// Probability laws shared by the rest of the library: the unit-variance
// (re-normalised) Student-t family, the law of its square, the Frechet
// extreme-value law, and seeded samplers for the volatility and noise models.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evspec/rng.hpp"

namespace evspec {

// ---------------------------------------------------------------------------
// Model descriptors

struct VolatilityModel {
    enum class Kind { StudentRenormalised, Constant, StandardNormal };

    Kind kind = Kind::StudentRenormalised;
    double nu = 3.0;       // StudentRenormalised: degrees of freedom, > 2
    double sigma0 = 1.0;   // Constant: the fixed scale

    static VolatilityModel student(double nu) {
        if (!(nu > 2.0)) throw std::domain_error("VolatilityModel: Student nu must exceed 2");
        VolatilityModel m;
        m.kind = Kind::StudentRenormalised;
        m.nu = nu;
        return m;
    }
    static VolatilityModel constant(double sigma0) {
        if (!(sigma0 > 0.0)) throw std::domain_error("VolatilityModel: constant sigma must be positive");
        VolatilityModel m;
        m.kind = Kind::Constant;
        m.sigma0 = sigma0;
        return m;
    }
    static VolatilityModel standard_normal() {
        VolatilityModel m;
        m.kind = Kind::StandardNormal;
        return m;
    }

    // E[sigma^2]; unit for every variant except Constant.
    double second_moment() const { return kind == Kind::Constant ? sigma0 * sigma0 : 1.0; }
};

struct NoiseModel {
    enum class Kind { Gaussian, Rademacher, UniformRenormalised };
    Kind kind = Kind::Gaussian;

    static NoiseModel gaussian() { return {Kind::Gaussian}; }
    static NoiseModel rademacher() { return {Kind::Rademacher}; }
    static NoiseModel uniform_renormalised() { return {Kind::UniformRenormalised}; }
};

struct FrechetLaw {
    double shape;  // alpha/2 in the extreme-value scaling

    explicit FrechetLaw(double s) : shape(s) {
        if (!(s > 0.0)) throw std::domain_error("FrechetLaw: shape must be positive");
    }
};

// ---------------------------------------------------------------------------
// Densities and tails

// Density of the unit-variance Student-t with nu > 2 degrees of freedom:
//   Gamma((nu+1)/2) / (sqrt((nu-2) pi) Gamma(nu/2)) * (1 + t^2/(nu-2))^(-(nu+1)/2)
inline double student_renorm_pdf(double nu, double t) {
    if (!(nu > 2.0)) throw std::domain_error("student_renorm_pdf: nu must exceed 2");
    const double log_coeff =
        std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log((nu - 2.0) * M_PI);
    return std::exp(log_coeff - 0.5 * (nu + 1.0) * std::log1p(t * t / (nu - 2.0)));
}

// Density of sigma^2 when sigma follows the unit-variance Student(nu) law.
inline double h_nu_pdf(double nu, double tau) {
    if (!(nu > 2.0)) throw std::domain_error("h_nu_pdf: nu must exceed 2");
    if (!(tau > 0.0)) throw std::domain_error("h_nu_pdf: tau must be positive");
    const double root = std::sqrt(tau);
    return student_renorm_pdf(nu, root) / root;
}

// Upper tail 1 - H3(tau) of the squared unit-variance Student(3) law,
// in closed form: (2/pi) (arctan(1/sqrt(tau)) - sqrt(tau)/(1+tau)).
inline double h3_tail(double tau) {
    if (!(tau > 0.0)) throw std::domain_error("h3_tail: tau must be positive");
    const double r = std::sqrt(tau);
    return (2.0 / M_PI) * (std::atan(1.0 / r) - r / (1.0 + tau));
}

inline double frechet_cdf(const FrechetLaw& law, double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(-std::pow(x, -law.shape));
}

inline double frechet_pdf(const FrechetLaw& law, double x) {
    if (x <= 0.0) return 0.0;
    return law.shape * std::pow(x, -law.shape - 1.0) * std::exp(-std::pow(x, -law.shape));
}

// ---------------------------------------------------------------------------
// Samplers

// One volatility draw. Student: normal / sqrt(chi2(nu)/nu), rescaled to unit
// variance, i.e. N * sqrt((nu-2)/chi2(nu)).
inline double draw(const VolatilityModel& model, Philox& gen) {
    switch (model.kind) {
        case VolatilityModel::Kind::StudentRenormalised:
            return gen.normal() * std::sqrt((model.nu - 2.0) / gen.chi_square(model.nu));
        case VolatilityModel::Kind::Constant:
            return model.sigma0;
        case VolatilityModel::Kind::StandardNormal:
            return gen.normal();
    }
    return 0.0;  // unreachable
}

inline double draw(const NoiseModel& model, Philox& gen) {
    switch (model.kind) {
        case NoiseModel::Kind::Gaussian:
            return gen.normal();
        case NoiseModel::Kind::Rademacher:
            return (gen.next_u32() & 1u) ? 1.0 : -1.0;
        case NoiseModel::Kind::UniformRenormalised:
            return (2.0 * gen.uniform() - 1.0) * std::sqrt(3.0);
    }
    return 0.0;  // unreachable
}

template <class Model>
std::vector<double> sample(const Model& model, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("sample: count must be positive");
    Philox gen(seed, /*substream=*/0);
    std::vector<double> out(count);
    for (auto& v : out) v = draw(model, gen);
    return out;
}

}  // namespace evspec
