#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "leraykit/invariants.hpp"

#include <cmath>
#include <random>

using namespace leray;

namespace {

VecC lp_point(double p, cd z1, double angle) {
    VecC z(2);
    z << z1, std::polar(std::pow(1 - std::pow(std::abs(z1), p), 1 / p), angle);
    return z;
}

VecC graph_point(cd z1, double u, double height) {
    VecC z(2);
    z << z1, cd(u, height);
    return z;
}

MobiusMap random_unimodular(std::mt19937_64& rng, int n, double eps) {
    std::normal_distribution<double> nd;
    MatC A = MatC::Identity(n + 1, n + 1);
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) A(a, b) += eps * cd(nd(rng), nd(rng));
    A /= std::pow(A.determinant(), 1.0 / (n + 1));
    return MobiusMap(A);
}

}  // namespace

TEST_CASE("closed-form |b| on the model families") {
    for (double p : {1.5, 3.0, 4.0}) {
        auto s = make_lp_sphere(p);
        for (double a : {0.3, 1.1, 2.0}) {
            VecC z = lp_point(p, std::polar(0.7, a), 0.4 + a);
            double expected = std::abs(2 - p) / p;
            CHECK(std::abs(std::abs(beltrami_b(jet2(*s, z, JetMode::Analytic))) - expected) < 1e-10);
            CHECK(std::abs(std::abs(beltrami_b(jet2(*s, z, JetMode::Numeric))) - expected) < 1e-4);
        }
    }
    for (double g : {1.5, 3.0}) {
        auto s = make_power_graph(g);
        cd z1(0.9, 0.3);
        VecC z = graph_point(z1, 0.2, std::pow(std::abs(z1), g));
        CHECK(std::abs(std::abs(beltrami_b(*s, z)) - std::abs(g - 2) / g) < 1e-10);
    }
    {
        cd beta(0.3, 0.2);
        auto s = make_sigma3(1.0, beta);
        cd z1(0.2, -0.4);
        VecC z = graph_point(z1, 0.1, std::norm(z1) + (beta * z1 * z1).real());
        CHECK(std::abs(std::abs(beltrami_b(*s, z)) - std::abs(beta) / 1.0) < 1e-10);
    }
    {
        auto s = make_tube(2.0);
        VecC z = graph_point(cd(0.3, 0.5), -0.2, 2.0 * 0.09);
        CHECK(std::abs(std::abs(beltrami_b(*s, z)) - 1) < 1e-10);
    }
    {
        auto s = make_sphere(2);
        VecC z(2);
        z << cd(0.6, 0), cd(0, 0.8);
        CHECK(std::abs(beltrami_b(*s, z)) < 1e-12);
    }
}

TEST_CASE("phi identities") {
    auto s = make_lp_sphere(3.0);
    VecC z = lp_point(3.0, cd(0.5, 0.4), 1.3);
    Jet2 j = jet2(*s, z);
    PointInvariants pi = point_invariants(j);
    CHECK(std::abs(pi.phi - (1 - std::norm(pi.b))) < 1e-12);
    CHECK(std::abs(pi.phi_det - pi.phi) < 1e-6);
    CHECK(pi.convexity.strongly_convexlike);
    CHECK(pi.convexity.pseudoconvex);

    auto q = make_sigma3(1.0, 0.5);
    cd z1(0.2, 0.1);
    VecC w = graph_point(z1, 0.0, std::norm(z1) + 0.5 * (z1 * z1).real());
    CHECK(std::abs(phi(*q, w) - 0.75) < 1e-12);
    CHECK(std::abs(phi_det(*q, w) - 0.75) < 1e-6);
}

TEST_CASE("phi and |b| are invariant under unimodular Mobius maps") {
    std::mt19937_64 rng(3);
    auto base = make_lp_sphere(3.0);
    VecC z = lp_point(3.0, cd(0.6, 0.2), 0.9);
    double b0 = std::abs(beltrami_b(*base, z)), p0 = phi(*base, z);
    for (int trial = 0; trial < 5; ++trial) {
        MobiusMap M = random_unimodular(rng, 2, 0.1);
        auto img = make_mobius_image(base, M);
        VecC w = M.apply(z);
        CHECK(std::abs(std::abs(beltrami_b(*img, w)) - b0) < 1e-6);
        CHECK(std::abs(phi(*img, w) - p0) < 1e-6);
    }
}

TEST_CASE("Fefferman density is homogeneous under dilation") {
    // r(z / t): the gradient scales by 1/t and the bordered Levi determinant by t^-4 (n = 2),
    // so |det|^(1/3) / |grad| scales by t^(-1/3)
    auto s1 = make_sphere(2, 1.0), s2 = make_sphere(2, 2.0);
    VecC z(2);
    z << cd(0.6, 0), cd(0, 0.8);
    double w1 = fefferman_weight(*s1, z), w2 = fefferman_weight(*s2, 2.0 * z);
    CHECK(w2 / w1 == doctest::Approx(std::pow(2.0, -1.0 / 3)).epsilon(1e-10));
}

TEST_CASE("convexity classification") {
    auto tube = make_tube(1.0);
    VecC z = graph_point(cd(0.3, 0.5), 0.0, 0.09);
    CHECK_FALSE(classify(*tube, z).strongly_convexlike);
    CHECK(classify(*tube, z).pseudoconvex);
    auto sph = make_sphere(2);
    VecC w(2);
    w << cd(0.6, 0), cd(0, 0.8);
    CHECK(classify(*sph, w).strongly_convexlike);
}
