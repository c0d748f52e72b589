#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "leraykit/rigid.hpp"

#include <cmath>

using namespace leray;

namespace {

Grid2D window(double h) { return Grid2D::with_spacing(0.5, 1.5, -0.5, 0.5, h); }

}  // namespace

TEST_CASE("grid derivatives are exact on quadratics") {
    Grid2D g = window(1.0 / 16);
    MatC v(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            cd z = g.node(i, j);
            v(i, j) = z * z + cd(0, 2) * std::norm(z) + std::conj(z);
        }
    GridDerivatives d = grid_derivatives(g, v);
    double e_dz = 0, e_dzb = 0, e_zz = 0, e_zzb = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            cd z = g.node(i, j);
            e_dz = std::max(e_dz, std::abs(d.dz()(i, j) - (2.0 * z + cd(0, 2) * std::conj(z))));
            e_dzb = std::max(e_dzb, std::abs(d.dzbar()(i, j) - (cd(0, 2) * z + 1.0)));
            e_zz = std::max(e_zz, std::abs(d.dzz()(i, j) - 2.0));
            e_zzb = std::max(e_zzb, std::abs(d.dzzbar()(i, j) - cd(0, 2)));
        }
    CHECK(e_dz < 1e-10);
    CHECK(e_dzb < 1e-10);
    CHECK(e_zz < 1e-8);
    CHECK(e_zzb < 1e-8);
}

TEST_CASE("constant and model Beltrami fields satisfy the compatibility condition") {
    LambdaField k = make_lambda(window(1.0 / 32), [](cd) { return cd(0.3, 0.1); });
    CHECK(rigid_residual(k).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(closedness_check(k) < 1e-12);

    auto model = [](cd z) { return std::conj(z) / z / 3.0; };
    double r32 = cropped_max(rigid_residual(make_lambda(window(1.0 / 32), model)), 0.2);
    double r128 = cropped_max(rigid_residual(make_lambda(window(1.0 / 128), model)), 0.2);
    CHECK(r128 < 1e-3);
    CHECK(std::log(r32 / r128) / std::log(4.0) > 1.8);
}

TEST_CASE("an incompatible field is detected by both discretizations") {
    LambdaField bad = make_lambda(window(1.0 / 64), [](cd z) { return 0.5 * std::conj(z); });
    MatR res = rigid_residual(bad);
    CHECK(cropped_max(res, 0.2) > 1e-2);
    MatR curl = closedness_field(bad), cells = residual_at_cells(bad);
    CHECK(cropped_max(curl - cells, 0.2) < 0.05 * cropped_max(curl, 0.2));
}

TEST_CASE("reconstruction from a constant field") {
    RigidSurfaceField r = rigid_reconstruct(make_lambda(window(1.0 / 128), [](cd) { return cd(0.3, 0); }));
    CHECK(r.b_error < 2e-4);
    CHECK(r.min_levi > 0);
    CHECK(r.holomorphy_residual < 1e-2);
    RigidSurfaceField r0 = rigid_reconstruct(make_lambda(window(1.0 / 64), [](cd) { return cd(0); }));
    // the discrete Poisson solution carries an O(h^2) error into b
    CHECK(r0.b_error < 1e-3);
}

TEST_CASE("reconstruction residual is second order") {
    auto lam = [](cd) { return cd(0.3, 0); };
    RigidSurfaceField a = rigid_reconstruct(make_lambda(window(1.0 / 64), lam));
    RigidSurfaceField b = rigid_reconstruct(make_lambda(window(1.0 / 256), lam));
    CHECK(std::log(a.pde_residual / b.pde_residual) / std::log(4.0) > 1.8);
}
