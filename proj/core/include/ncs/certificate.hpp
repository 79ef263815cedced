#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ncs/geometry.hpp"
#include "ncs/plant.hpp"

namespace ncs {

// Class-K-infinity function; c * r^p has a closed-form inverse, anything else is inverted
// by bisection.
class KFunction {
public:
    KFunction() = default;
    static KFunction power(double coeff, double exponent);
    static KFunction custom(std::function<double(double)> f, std::string name);

    double operator()(double r) const;
    // Smallest r in [0, upper] with f(r) >= y, to 1e-10 when bisecting; upper doubles
    // while f(upper) < y.
    double inverse(double y, double upper = 1.0) const;

    bool is_power() const { return !custom_; }
    double coeff() const { return coeff_; }
    double exponent() const { return exponent_; }
    std::string describe() const;

private:
    double coeff_ = 1.0;
    double exponent_ = 1.0;
    std::function<double(double)> custom_;
    std::string name_;
};

enum class CertificateShape { SquaredEuclidean, Euclidean, InfNorm, Custom };

struct LyapunovCertificate {
    CertificateShape shape = CertificateShape::SquaredEuclidean;
    double scale = 0.5;
    std::function<double(const Vec&, const Vec&)> custom_v;
    double lambda = 0.0;
    KFunction alpha_lower;
    KFunction alpha_upper;
    KFunction gamma;
    bool symmetric = true;

    double v(const Vec& a, const Vec& b) const;
    std::string describe() const;

    static LyapunovCertificate squared_euclidean(double scale, double lambda, KFunction lower, KFunction upper,
                                                 KFunction gamma);
    static LyapunovCertificate inf_norm(double scale, double lambda, KFunction lower, KFunction upper,
                                        KFunction gamma);
    static LyapunovCertificate euclidean(double scale, double lambda, KFunction lower, KFunction upper,
                                         KFunction gamma);
};

struct CertificateCheck {
    std::size_t samples = 0;
    std::size_t lower_violations = 0;
    std::size_t upper_violations = 0;
    std::size_t gamma_violations = 0;
    std::size_t decay_violations = 0;
    std::size_t symmetry_violations = 0;
    double worst_decay_excess = 0.0;

    bool ok() const {
        return lower_violations + upper_violations + gamma_violations + decay_violations + symmetry_violations == 0;
    }
};

// Randomized check of the sandwich bounds, the mismatch gain, symmetry, and the integrated
// decay V(f(x1,u), f(x2,u)) <= e^{lambda tau} V(x1,x2) + tol on the plant's state box.
CertificateCheck spot_check(const LyapunovCertificate& cert, const PlantModel& plant, std::size_t samples,
                            std::uint64_t seed, double tol = 1e-7);

}  // namespace ncs
