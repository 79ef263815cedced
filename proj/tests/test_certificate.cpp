#include <gtest/gtest.h>

#include <cmath>

#include "ncs/certificate.hpp"
#include "ncs/error.hpp"
#include "ncs/vehicle.hpp"

using namespace ncs;

TEST(KFunction, PowerAndInverse) {
    auto f = KFunction::power(0.5, 2.0);
    EXPECT_DOUBLE_EQ(f(0.5), 0.125);
    EXPECT_NEAR(f.inverse(0.125), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(f(0.0), 0.0);
    auto id = KFunction::power(1.0, 1.0);
    EXPECT_DOUBLE_EQ(id.inverse(0.3), 0.3);
}

TEST(KFunction, CustomInverseByBisection) {
    auto f = KFunction::custom([](double r) { return r + r * r * r; }, "r+r^3");
    for (double r : {0.0, 0.1, 0.7, 2.0, 5.0}) EXPECT_NEAR(f.inverse(f(r)), r, 1e-9);
    EXPECT_FALSE(f.is_power());
}

TEST(KFunction, InverseIsMonotone) {
    auto f = KFunction::power(2.0, 1.5);
    double prev = -1.0;
    for (double y = 0.0; y < 10.0; y += 0.37) {
        double r = f.inverse(y);
        EXPECT_GT(r, prev);
        EXPECT_NEAR(f(r), y, 1e-9);
        prev = r;
    }
}

TEST(Certificate, ShapesEvaluate) {
    auto sq = LyapunovCertificate::squared_euclidean(0.5, -2.0, KFunction::power(0.5, 2), KFunction::power(0.5, 2),
                                                     KFunction::power(2, 1));
    EXPECT_DOUBLE_EQ(sq.v({1.0, 0.0}, {0.0, 1.0}), 1.0);
    auto inf = LyapunovCertificate::inf_norm(1.0, 0.0, KFunction::power(1, 1), KFunction::power(1, 1),
                                             KFunction::power(1, 1));
    EXPECT_DOUBLE_EQ(inf.v({1.0, 0.0}, {0.0, -0.5}), 1.0);
    auto eu = LyapunovCertificate::euclidean(2.0, 0.0, KFunction::power(2, 1), KFunction::power(2, 1),
                                             KFunction::power(2, 1));
    EXPECT_DOUBLE_EQ(eu.v({3.0, 0.0}, {0.0, 4.0}), 10.0);
    EXPECT_THROW(LyapunovCertificate::inf_norm(0.0, 0.0, KFunction::power(1, 1), KFunction::power(1, 1),
                                               KFunction::power(1, 1)),
                 InvalidArgument);
}

TEST(Certificate, ScalarCertificatePassesSpotCheck) {
    auto sc = scalar_gas_scenario();
    auto check = spot_check(sc.certificate, sc.plant, 2000, 1);
    EXPECT_TRUE(check.ok());
    EXPECT_EQ(check.samples, 2000u);
}

TEST(Certificate, TooFastDecayIsCaught) {
    auto sc = scalar_gas_scenario();
    auto cert = sc.certificate;
    cert.lambda = -5.0;
    auto check = spot_check(cert, sc.plant, 2000, 1);
    EXPECT_FALSE(check.ok());
    EXPECT_GT(check.decay_violations, 0u);
    EXPECT_GT(check.worst_decay_excess, 0.0);
}

TEST(Certificate, WrongSandwichIsCaught) {
    auto sc = scalar_gas_scenario();
    auto cert = sc.certificate;
    cert.alpha_lower = KFunction::power(1.0, 2.0);
    EXPECT_GT(spot_check(cert, sc.plant, 500, 2).lower_violations, 0u);
}

TEST(Certificate, VehicleInfNormCertificateHolds) {
    auto sc = vehicle_scenario(21);
    auto check = spot_check(sc.certificate, sc.plant, 3000, 7);
    EXPECT_TRUE(check.ok()) << "decay violations " << check.decay_violations;
}

TEST(Certificate, SurrogateCertificateHolds) {
    auto sc = surrogate_gas_scenario();
    EXPECT_TRUE(spot_check(sc.certificate, sc.plant, 2000, 3).ok());
}
