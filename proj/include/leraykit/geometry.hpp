#pragma once

#include "leraykit/core.hpp"
#include "leraykit/expression.hpp"

#include <memory>
#include <optional>

namespace leray {

// Second-order jet of a real defining function r at an affine point.
// grad_j = dr/dz_j, hess_holo_jk = d2r/dz_j dz_k, hess_mixed_jk = d2r/dz_j dzbar_k.
struct Jet2 {
    double r = 0;
    VecC grad;
    MatC hess_holo;
    MatC hess_mixed;
    int n() const { return static_cast<int>(grad.size()); }
    // real gradient (d/dx_1, d/dy_1, ...)
    VecR real_grad() const;
};

struct ChartWindow {
    VecR lo, hi;  // bounds on (x1, y1, ..., x_{n-1}, y_{n-1}, u)
};

// Abstract jet provider. The defining function is evaluated in real
// coordinates, either plainly or complexified for complex-step derivatives.
class Hypersurface {
public:
    virtual ~Hypersurface() = default;
    virtual int dim() const = 0;
    virtual std::string family() const = 0;
    virtual double value(const std::vector<Cx<double>>& z) const = 0;
    virtual cd value(const std::vector<Cx<cd>>& z) const = 0;
    virtual std::optional<Jet2> analytic_jet(const VecC&) const { return std::nullopt; }
    virtual bool in_chart(const VecC& z) const { return z.allFinite(); }

    // parametrizations used by mesh(); each returns false when not provided
    virtual bool curve_point(double /*s*/, cd& /*z*/, cd& /*dz*/) const { return false; }
    virtual bool reinhardt_profile(double /*t*/, double* /*rho*/, double* /*drho*/) const { return false; }
    virtual bool is_graph() const { return false; }
    virtual std::optional<ChartWindow> default_window() const { return std::nullopt; }
};

using SurfacePtr = std::shared_ptr<const Hypersurface>;

enum class JetMode { Auto, Analytic, Numeric };

Jet2 numeric_jet(const Hypersurface& s, const VecC& z, double h_fd = 1e-5);
// complex jet from the real gradient and Hessian in (x1, y1, ..., xn, yn)
Jet2 jet_from_real(double value, const VecR& g, const MatR& H);
Jet2 jet2(const Hypersurface& s, const VecC& z, JetMode mode = JetMode::Auto);

// families
SurfacePtr make_sphere(int n, double radius = 1.0);
SurfacePtr make_circle(double radius = 1.0, cd center = 0.0);
SurfacePtr make_ellipse(double a, double b);
SurfacePtr make_lp_sphere(double p);
SurfacePtr make_power_graph(double gamma);
SurfacePtr make_quadric(const MatC& alpha, const MatC& beta);
SurfacePtr make_sigma3(double alpha, cd beta);
SurfacePtr make_tube(double c = 1.0);
SurfacePtr make_custom_graph(const std::string& expr, int n);

// Mobius maps on CP^n, acting on affine points by Psi_M.
struct MobiusMap {
    MatC M;
    MobiusMap() = default;
    explicit MobiusMap(MatC m) : M(std::move(m)) {}
    int n() const { return static_cast<int>(M.rows()) - 1; }
    static MobiusMap identity(int n);
    static MobiusMap translation(const VecC& a);
    // affine map w -> p + T w, scaled into SL(n+1); lift picks the root of unity
    static MobiusMap affine(const VecC& p, const MatC& T, int lift = 0);
    MobiusMap inverse() const;
    MobiusMap operator*(const MobiusMap& o) const { return MobiusMap(M * o.M); }
    cd denominator(const VecC& z) const;
    VecC apply(const VecC& z) const;
    // holomorphic Jacobian and second derivatives of Psi_M at z
    MatC jacobian(const VecC& z) const;
    std::vector<MatC> hessians(const VecC& z) const;  // [a](j,k) = d2 Psi^a / dz_j dz_k
    double det_residual() const;
};

// (M^* f)(z_i) given f sampled at Psi_M(z_i)
VecC mobius_pullback_section(const MobiusMap& M, const std::vector<VecC>& nodes, const VecC& f_at_images,
                             int j, int k);

// S' = Psi_M(S) with defining function r o Psi_M^{-1}
SurfacePtr make_mobius_image(SurfacePtr base, const MobiusMap& M);

// Jet of r o G at z where G is holomorphic with value Gz, Jacobian DG and Hessians
Jet2 pullback_jet(const Jet2& j, const MatC& DG, const std::vector<MatC>& D2G);

struct NormalFrame {
    VecC point;
    MatC T;          // columns: tangential frame vectors then the normal direction
    VecR alpha;      // pre-dilation
    VecR beta;       // pre-dilation, >= 0
    double grad_norm = 0;  // |dr| at the point
    bool strongly_convex = false;
    // dilated data with alpha^2 - beta^2 = 1/4
    VecR dilation() const;
    VecR alpha_hat() const;
    VecR beta_hat() const;
    MatC T_hat() const;
    // affine map from model coordinates to the chart, and its inverse
    MobiusMap from_model(bool dilate, int lift = 0) const;
    MobiusMap to_model(bool dilate, int lift = 0) const { return from_model(dilate, lift).inverse(); }
};

NormalFrame normalize_at(const Jet2& jet, const VecC& p);
NormalFrame normalize_at(const Hypersurface& s, const VecC& p);

// Takagi factorization A = V diag(sigma) V^T of a complex symmetric matrix,
// sigma descending.
void takagi(const MatC& A, MatC& V, VecR& sigma);

// orthonormal basis (columns) of {X : sum grad_j X_j = 0}
MatC complex_tangent_basis(const VecC& grad);

enum class MeshLayout { Curve, Torus, GraphWindow };

struct QuadratureMesh {
    int n = 0;
    MeshLayout layout = MeshLayout::Curve;
    int resolution = 0;
    SurfacePtr surface;
    std::vector<VecC> nodes;
    VecR weights;
    std::vector<VecR> normals;
    std::vector<Jet2> jets;
    // curve layout: z'(s) on a uniform periodic grid with spacing h
    VecC dzds;
    double h = 0;
    // torus layout: nt Gauss-Legendre profile nodes times nth x nth angles
    int nt = 0, nth = 0;
    VecR t, tw;
    MatR rho, drho;  // nt x 2
    int size() const { return static_cast<int>(nodes.size()); }
    int torus_index(int it, int k1, int k2) const { return (it * nth + k1) * nth + k2; }
};

QuadratureMesh mesh(SurfacePtr s, int resolution, JetMode mode = JetMode::Auto,
                    std::optional<ChartWindow> window = std::nullopt);

void gauss_legendre(int n, double a, double b, VecR& x, VecR& w);

}  // namespace leray
