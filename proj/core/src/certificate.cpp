#include "ncs/certificate.hpp"

#include <fmt/format.h>
#include <cmath>
#include <random>

#include "ncs/error.hpp"

namespace ncs {

KFunction KFunction::power(double coeff, double exponent) {
    if (!(coeff > 0.0) || !(exponent > 0.0)) throw InvalidArgument("K-infinity power law needs positive coefficient and exponent");
    KFunction k;
    k.coeff_ = coeff;
    k.exponent_ = exponent;
    return k;
}

KFunction KFunction::custom(std::function<double(double)> f, std::string name) {
    KFunction k;
    k.custom_ = std::move(f);
    k.name_ = std::move(name);
    return k;
}

double KFunction::operator()(double r) const {
    if (custom_) return custom_(r);
    return coeff_ * std::pow(r, exponent_);
}

double KFunction::inverse(double y, double upper) const {
    if (y <= 0.0) return 0.0;
    if (!custom_) return std::pow(y / coeff_, 1.0 / exponent_);
    double hi = upper > 0.0 ? upper : 1.0;
    for (int i = 0; i < 200 && custom_(hi) < y; ++i) hi *= 2.0;
    if (custom_(hi) < y) throw InvalidArgument("K-infinity inverse: function does not reach " + std::to_string(y));
    double lo = 0.0;
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (custom_(mid) < y ? lo : hi) = mid;
    }
    return hi;
}

std::string KFunction::describe() const {
    if (custom_) return name_.empty() ? "custom" : name_;
    if (exponent_ == 1.0) return fmt::format("{}*r", coeff_);
    return fmt::format("{}*r^{}", coeff_, exponent_);
}

double LyapunovCertificate::v(const Vec& a, const Vec& b) const {
    switch (shape) {
        case CertificateShape::SquaredEuclidean: {
            double d = euclid_dist(a, b);
            return scale * d * d;
        }
        case CertificateShape::Euclidean: return scale * euclid_dist(a, b);
        case CertificateShape::InfNorm: return scale * inf_dist(a, b);
        case CertificateShape::Custom: return custom_v(a, b);
    }
    return 0.0;
}

std::string LyapunovCertificate::describe() const {
    std::string form;
    switch (shape) {
        case CertificateShape::SquaredEuclidean: form = fmt::format("{}*|x-y|_2^2", scale); break;
        case CertificateShape::Euclidean: form = fmt::format("{}*|x-y|_2", scale); break;
        case CertificateShape::InfNorm: form = fmt::format("{}*|x-y|_inf", scale); break;
        case CertificateShape::Custom: form = "custom"; break;
    }
    return fmt::format("V={} lambda={} alpha_lower={} alpha_upper={} gamma={}", form, lambda, alpha_lower.describe(),
                       alpha_upper.describe(), gamma.describe());
}

static LyapunovCertificate make(CertificateShape shape, double scale, double lambda, KFunction lower,
                                KFunction upper, KFunction gamma) {
    if (!(scale > 0.0)) throw InvalidArgument("certificate scale must be positive");
    LyapunovCertificate c;
    c.shape = shape;
    c.scale = scale;
    c.lambda = lambda;
    c.alpha_lower = std::move(lower);
    c.alpha_upper = std::move(upper);
    c.gamma = std::move(gamma);
    return c;
}

LyapunovCertificate LyapunovCertificate::squared_euclidean(double scale, double lambda, KFunction lower,
                                                           KFunction upper, KFunction gamma) {
    return make(CertificateShape::SquaredEuclidean, scale, lambda, std::move(lower), std::move(upper), std::move(gamma));
}

LyapunovCertificate LyapunovCertificate::inf_norm(double scale, double lambda, KFunction lower, KFunction upper,
                                                  KFunction gamma) {
    return make(CertificateShape::InfNorm, scale, lambda, std::move(lower), std::move(upper), std::move(gamma));
}

LyapunovCertificate LyapunovCertificate::euclidean(double scale, double lambda, KFunction lower, KFunction upper,
                                                   KFunction gamma) {
    return make(CertificateShape::Euclidean, scale, lambda, std::move(lower), std::move(upper), std::move(gamma));
}

CertificateCheck spot_check(const LyapunovCertificate& cert, const PlantModel& plant, std::size_t samples,
                            std::uint64_t seed, double tol) {
    CertificateCheck out;
    std::mt19937_64 rng(seed);
    const auto& boxes = plant.state_box.boxes();
    auto draw = [&]() {
        const Box& b = boxes[rng() % boxes.size()];
        Vec x(b.dim());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(b.lo[i], b.hi[i])(rng);
        return x;
    };
    double growth = std::exp(cert.lambda * plant.tau);
    for (std::size_t k = 0; k < samples; ++k) {
        Vec x1 = draw(), x2 = draw(), x3 = draw();
        double v12 = cert.v(x1, x2);
        double r = inf_dist(x1, x2);
        ++out.samples;
        if (cert.alpha_lower(r) > v12 + tol) ++out.lower_violations;
        if (v12 > cert.alpha_upper(r) + tol) ++out.upper_violations;
        if (cert.v(x1, x2) - cert.v(x1, x3) > cert.gamma(inf_dist(x2, x3)) + tol) ++out.gamma_violations;
        if (cert.symmetric && std::abs(v12 - cert.v(x2, x1)) > tol) ++out.symmetry_violations;
        const Vec& u = plant.inputs[rng() % plant.inputs.size()];
        Vec y1, y2;
        try {
            y1 = step_map(plant, x1, u);
            y2 = step_map(plant, x2, u);
        } catch (const IntegrationDiverged&) {
            continue;
        }
        double excess = cert.v(y1, y2) - growth * v12;
        if (excess > tol) {
            ++out.decay_violations;
            out.worst_decay_excess = std::max(out.worst_decay_excess, excess);
        }
    }
    return out;
}

}  // namespace ncs
