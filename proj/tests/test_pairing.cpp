#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "leraykit/pairing.hpp"

#include <cmath>
#include <random>

using namespace leray;

namespace {

PairingContext context(SurfacePtr s, int res) {
    return make_pairing_context(std::make_shared<QuadratureMesh>(mesh(s, res)));
}

VecC random_vec(std::mt19937_64& rng, int N) {
    std::normal_distribution<double> nd;
    VecC v(N);
    for (int i = 0; i < N; ++i) v(i) = cd(nd(rng), nd(rng));
    return v;
}

}  // namespace

TEST_CASE("transfer identities on the sphere and an lp sphere") {
    for (auto s : {make_sphere(2), make_lp_sphere(3.0)}) {
        PairingContext c = context(s, 12);
        TransferResiduals r = transfer_residuals(c);
        CHECK(r.isometry < 1e-5);
        CHECK(r.double_transfer < 1e-5);
        CHECK(r.route_agreement < 1e-8);
    }
}

TEST_CASE("transfer identities on curves") {
    for (auto s : {make_circle(1.0), make_ellipse(2.0, 1.0)}) {
        PairingContext c = context(s, 64);
        TransferResiduals r = transfer_residuals(c);
        CHECK(r.isometry < 1e-8);
        CHECK(r.double_transfer < 1e-8);
    }
}

TEST_CASE("pairing symmetry and Cauchy-Schwarz on arbitrary samples") {
    std::mt19937_64 rng(5);
    PairingContext c = context(make_lp_sphere(3.0), 10);
    for (int trial = 0; trial < 5; ++trial) {
        VecC f = random_vec(rng, c.size()), g = random_vec(rng, c.size());
        cd a = pair(c, f, g), b = pair_dualside(c, g, f);
        CHECK(std::abs(a - b) < 1e-9 * std::max(1.0, std::abs(a)));
        CHECK(std::abs(a) <= norm_sharp(c, f) * norm_sharp_dual(c, g) * (1 + 1e-10));
    }
    // g = conj(f tau w_F dS) / (w*_sharp dS*) attains the bound exactly when the transfer is isometric
    VecC f = random_vec(rng, c.size());
    VecC g(c.size());
    for (int i = 0; i < c.size(); ++i)
        g(i) = std::conj(f(i) * c.tau(i) * c.fef(i) * c.dS(i)) / (c.sharp_dual(i) * c.dS_dual(i));
    double ratio = std::abs(pair(c, f, g)) / (norm_sharp(c, f) * norm_sharp_dual(c, g));
    CHECK(ratio == doctest::Approx(1).epsilon(1e-8));
}

TEST_CASE("Hardy bases are orthonormal") {
    PairingContext c = context(make_sphere(2), 12);
    MatC B = hardy_basis(c, 3);
    VecR w = c.weight_sharp();
    // monomials of degree <= 3 in two variables
    CHECK(B.cols() == 10);
    MatC G = B.adjoint() * w.cast<cd>().asDiagonal() * B;
    CHECK((G - MatC::Identity(B.cols(), B.cols())).cwiseAbs().maxCoeff() < 1e-10);
    MatC D = dual_hardy_basis(c, 3);
    VecR wd = c.weight_sharp_dual();
    MatC Gd = D.adjoint() * wd.cast<cd>().asDiagonal() * D;
    CHECK((Gd - MatC::Identity(D.cols(), D.cols())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Krylov basis drops dependent directions") {
    VecR w = VecR::Ones(5);
    VecC start = VecC::Ones(5);
    VecC x(5);
    x << 0, 1, 2, 3, 4;
    MatC B = krylov_basis(start, {x, 2.0 * x}, 2, w);
    // span{1, x, x^2} only
    CHECK(B.cols() == 3);
}

TEST_CASE("pairing efficiency on the circle and the sphere") {
    PairingContext c = context(make_circle(1.0), 128);
    MatC B = hardy_basis(c, 8), D = dual_hardy_basis(c, 40);
    CHECK(std::abs(infsup(c, B, D) - 1) < 1e-6);
    PairingContext s = context(make_sphere(2), 12);
    CHECK(std::abs(infsup(s, hardy_basis(s, 3), dual_hardy_basis(s, 3)) - 1) < 1e-6);
    // sup over the dual basis of a unit vector never exceeds 1
    CHECK(sup_pairing(s, hardy_basis(s, 3).col(2), dual_hardy_basis(s, 3)) <= 1 + 1e-10);
}
