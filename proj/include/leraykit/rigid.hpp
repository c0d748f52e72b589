#pragma once

#include "leraykit/core.hpp"
#include "leraykit/expression.hpp"

#include <functional>

namespace leray {

// Uniform rectangular grid in the z-plane; values stored as nx x ny matrices
// indexed (i along x, j along y).
struct Grid2D {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    int nx = 2, ny = 2;
    double hx() const { return (x1 - x0) / (nx - 1); }
    double hy() const { return (y1 - y0) / (ny - 1); }
    cd node(int i, int j) const { return {x0 + i * hx(), y0 + j * hy()}; }
    // grid with spacing close to h on the given rectangle
    static Grid2D with_spacing(double x0, double x1, double y0, double y1, double h);
};

struct LambdaField {
    Grid2D grid;
    MatC values;
};

LambdaField make_lambda(const Grid2D& g, const std::function<cd(cd)>& fn);
LambdaField make_lambda(const Grid2D& g, const Expression& e);

// first and second partial derivatives with centered stencils in the interior
// and second-order one-sided stencils on the edges
struct GridDerivatives {
    MatC x, y, xx, yy, xy;
    MatC dz() const;
    MatC dzbar() const;
    MatC dzz() const;
    MatC dzzbar() const;
    MatC dzbarzbar() const;
};
GridDerivatives grid_derivatives(const Grid2D& g, const MatC& v);

// pointwise residual of the compatibility condition on lambda
MatR rigid_residual(const LambdaField& lam);
// curl of the real 1-form 2 Re(A dz), A = (lam_zbar + lam conj(lam)_z) / (1 - |lam|^2),
// from cell circulations; (nx-1) x (ny-1) values at cell centres
MatR closedness_field(const LambdaField& lam);
double closedness_check(const LambdaField& lam);

// the same residual transported to cell centres and scaled like the curl,
// for pointwise comparison with closedness_field
MatR residual_at_cells(const LambdaField& lam);

struct RigidSurfaceField {
    Grid2D grid;
    MatR f;      // Im z2 = f(z1)
    MatR h_log;  // log f_{z zbar}
    MatR g;      // Poisson part, g_{z zbar} = e^h
    MatC H;      // holomorphic correction, f = g + 2 Re H
    MatC b;      // Beltrami coefficient of the reconstructed surface
    double pde_residual = 0;         // max |f_zz - lam f_zzbar| over the cropped interior
    double holomorphy_residual = 0;  // max |d/dzbar (lam e^h - g_zz)| over the cropped interior
    double b_error = 0;              // max |b - lam| over the cropped interior
    double min_levi = 0;             // min f_{z zbar} over the cropped interior
    double compat_residual = 0;      // max |rigid_residual| over the cropped interior
};

// margin: fraction of each side excluded from the reported maxima
RigidSurfaceField rigid_reconstruct(const LambdaField& lam, double margin = 0.2);

double cropped_max(const MatR& v, double margin);

}  // namespace leray
