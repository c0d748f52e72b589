#include "leraykit/rigid.hpp"

#include "leraykit/invariants.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

namespace leray {

Grid2D Grid2D::with_spacing(double x0, double x1, double y0, double y1, double h) {
    Grid2D g;
    g.x0 = x0;
    g.x1 = x1;
    g.y0 = y0;
    g.y1 = y1;
    g.nx = std::max(4, static_cast<int>(std::lround((x1 - x0) / h)) + 1);
    g.ny = std::max(4, static_cast<int>(std::lround((y1 - y0) / h)) + 1);
    return g;
}

LambdaField make_lambda(const Grid2D& g, const std::function<cd(cd)>& fn) {
    LambdaField L;
    L.grid = g;
    L.values.resize(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) L.values(i, j) = fn(g.node(i, j));
    return L;
}

LambdaField make_lambda(const Grid2D& g, const Expression& e) {
    return make_lambda(g, [&](cd z) {
        Cx<double> v = e.eval({Cx<double>(z.real(), z.imag())});
        return cd(v.re, v.im);
    });
}

namespace {

// derivative along one axis (axis 0 = x, rows; axis 1 = y, columns)
MatC diff(const MatC& v, int axis, double h, int order) {
    const int n = axis == 0 ? static_cast<int>(v.rows()) : static_cast<int>(v.cols());
    if (n < 4) throw std::invalid_argument("grid: need at least 4 nodes per direction");
    MatC out(v.rows(), v.cols());
    auto at = [&](int k, int other) -> cd { return axis == 0 ? v(k, other) : v(other, k); };
    auto put = [&](int k, int other, cd x) {
        if (axis == 0) out(k, other) = x;
        else out(other, k) = x;
    };
    const int m = axis == 0 ? static_cast<int>(v.cols()) : static_cast<int>(v.rows());
    for (int o = 0; o < m; ++o)
        for (int k = 0; k < n; ++k) {
            cd d;
            if (order == 1) {
                if (k == 0) d = (-3.0 * at(0, o) + 4.0 * at(1, o) - at(2, o)) / (2 * h);
                else if (k == n - 1) d = (3.0 * at(n - 1, o) - 4.0 * at(n - 2, o) + at(n - 3, o)) / (2 * h);
                else d = (at(k + 1, o) - at(k - 1, o)) / (2 * h);
            } else {
                if (k == 0) d = (2.0 * at(0, o) - 5.0 * at(1, o) + 4.0 * at(2, o) - at(3, o)) / (h * h);
                else if (k == n - 1)
                    d = (2.0 * at(n - 1, o) - 5.0 * at(n - 2, o) + 4.0 * at(n - 3, o) - at(n - 4, o)) / (h * h);
                else d = (at(k + 1, o) - 2.0 * at(k, o) + at(k - 1, o)) / (h * h);
            }
            put(k, o, d);
        }
    return out;
}

MatC compat_A(const LambdaField& lam, const GridDerivatives& d) {
    const MatC& l = lam.values;
    MatC lz = d.dz(), lzb = d.dzbar();
    MatC A(l.rows(), l.cols());
    for (Eigen::Index k = 0; k < l.size(); ++k) {
        double den = 1 - std::norm(l(k));
        if (!(den > 0)) throw NumericalError("rigid: |lambda| reaches 1 on the grid");
        // conj(lambda)_z = conj(lambda_zbar)
        A(k) = (lzb(k) + l(k) * std::conj(lzb(k))) / den;
    }
    return A;
}

struct Range {
    int lo, hi;
};
Range crop(int n, double margin) {
    int lo = static_cast<int>(std::ceil(margin * (n - 1) - 1e-9));
    int hi = static_cast<int>(std::floor((1 - margin) * (n - 1) + 1e-9));
    return {lo, std::max(lo, hi)};
}

// integrate the exact differential P dx + Q dy from the grid centre, first
// along the central column, then along rows
template <class M>
M path_integrate(const M& P, const M& Q, double hx, double hy) {
    const int nx = static_cast<int>(P.rows()), ny = static_cast<int>(P.cols());
    const int ic = nx / 2, jc = ny / 2;
    M out = M::Zero(nx, ny);
    for (int j = jc + 1; j < ny; ++j) out(ic, j) = out(ic, j - 1) + 0.5 * (Q(ic, j - 1) + Q(ic, j)) * hy;
    for (int j = jc - 1; j >= 0; --j) out(ic, j) = out(ic, j + 1) - 0.5 * (Q(ic, j + 1) + Q(ic, j)) * hy;
    for (int j = 0; j < ny; ++j) {
        for (int i = ic + 1; i < nx; ++i) out(i, j) = out(i - 1, j) + 0.5 * (P(i - 1, j) + P(i, j)) * hx;
        for (int i = ic - 1; i >= 0; --i) out(i, j) = out(i + 1, j) - 0.5 * (P(i + 1, j) + P(i, j)) * hx;
    }
    return out;
}

}  // namespace

MatC GridDerivatives::dz() const { return 0.5 * (x - kI * y); }
MatC GridDerivatives::dzbar() const { return 0.5 * (x + kI * y); }
MatC GridDerivatives::dzz() const { return 0.25 * (xx - yy - 2.0 * kI * xy); }
MatC GridDerivatives::dzzbar() const { return 0.25 * (xx + yy); }
MatC GridDerivatives::dzbarzbar() const { return 0.25 * (xx - yy + 2.0 * kI * xy); }

GridDerivatives grid_derivatives(const Grid2D& g, const MatC& v) {
    GridDerivatives d;
    d.x = diff(v, 0, g.hx(), 1);
    d.y = diff(v, 1, g.hy(), 1);
    d.xx = diff(v, 0, g.hx(), 2);
    d.yy = diff(v, 1, g.hy(), 2);
    d.xy = diff(d.x, 1, g.hy(), 1);
    return d;
}

MatR rigid_residual(const LambdaField& lam) {
    const MatC& l = lam.values;
    GridDerivatives d = grid_derivatives(lam.grid, l);
    MatC lz = d.dz(), lzb = d.dzbar(), lzzb = d.dzzbar(), lzbzb = d.dzbarzbar();
    MatR r(l.rows(), l.cols());
    for (Eigen::Index k = 0; k < l.size(); ++k) {
        cd L = l(k), Lb = std::conj(L);
        double den = 1 - std::norm(L);
        if (!(den > 0)) throw NumericalError("rigid: |lambda| reaches 1 on the grid");
        cd Lb_zb = std::conj(lz(k));
        cd num = Lb * lzb(k) * lzb(k) + L * lzb(k) * Lb_zb - Lb * Lb * lz(k) * lzb(k);
        r(k) = (lzbzb(k) - Lb * lzzb(k) + num / den).imag();
    }
    return r;
}

MatR closedness_field(const LambdaField& lam) {
    const Grid2D& g = lam.grid;
    MatC A = compat_A(lam, grid_derivatives(g, lam.values));
    MatR P = 2 * A.real(), Q = -2 * A.imag();
    const double hx = g.hx(), hy = g.hy();
    MatR curl(g.nx - 1, g.ny - 1);
    for (int i = 0; i + 1 < g.nx; ++i)
        for (int j = 0; j + 1 < g.ny; ++j) {
            double circ = 0.5 * (P(i, j) + P(i + 1, j)) * hx + 0.5 * (Q(i + 1, j) + Q(i + 1, j + 1)) * hy -
                          0.5 * (P(i, j + 1) + P(i + 1, j + 1)) * hx - 0.5 * (Q(i, j) + Q(i, j + 1)) * hy;
            curl(i, j) = circ / (hx * hy);
        }
    return curl;
}

double closedness_check(const LambdaField& lam) { return closedness_field(lam).cwiseAbs().maxCoeff(); }

MatR residual_at_cells(const LambdaField& lam) {
    MatR r = rigid_residual(lam);
    const MatC& l = lam.values;
    MatR s(r.rows(), r.cols());
    for (Eigen::Index k = 0; k < r.size(); ++k) s(k) = -4 * r(k) / (1 - std::norm(l(k)));
    MatR c(r.rows() - 1, r.cols() - 1);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j)
            c(i, j) = 0.25 * (s(i, j) + s(i + 1, j) + s(i, j + 1) + s(i + 1, j + 1));
    return c;
}

double cropped_max(const MatR& v, double margin) {
    Range ri = crop(static_cast<int>(v.rows()), margin), rj = crop(static_cast<int>(v.cols()), margin);
    double m = 0;
    for (int i = ri.lo; i <= ri.hi; ++i)
        for (int j = rj.lo; j <= rj.hi; ++j) m = std::max(m, std::abs(v(i, j)));
    return m;
}

RigidSurfaceField rigid_reconstruct(const LambdaField& lam, double margin) {
    const Grid2D& gr = lam.grid;
    const int nx = gr.nx, ny = gr.ny;
    const double hx = gr.hx(), hy = gr.hy();
    RigidSurfaceField R;
    R.grid = gr;

    // h from the closed form h_z dz + h_zbar dzbar
    MatC A = compat_A(lam, grid_derivatives(gr, lam.values));
    R.h_log = path_integrate<MatR>(2 * A.real(), -2 * A.imag(), hx, hy);

    // g with Laplacian 4 e^h and zero boundary values
    MatR bd = MatR::Zero(nx, ny);
    const int mx = nx - 2, my = ny - 2;
    auto id = [&](int i, int j) { return (i - 1) * my + (j - 1); };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(mx * my);
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            int k = id(i, j);
            trip.emplace_back(k, k, -2 / (hx * hx) - 2 / (hy * hy));
            rhs(k) = 4 * std::exp(R.h_log(i, j));
            if (i > 1) trip.emplace_back(k, id(i - 1, j), 1 / (hx * hx));
            else rhs(k) -= bd(0, j) / (hx * hx);
            if (i < nx - 2) trip.emplace_back(k, id(i + 1, j), 1 / (hx * hx));
            else rhs(k) -= bd(nx - 1, j) / (hx * hx);
            if (j > 1) trip.emplace_back(k, id(i, j - 1), 1 / (hy * hy));
            else rhs(k) -= bd(i, 0) / (hy * hy);
            if (j < ny - 2) trip.emplace_back(k, id(i, j + 1), 1 / (hy * hy));
            else rhs(k) -= bd(i, ny - 1) / (hy * hy);
        }
    Eigen::SparseMatrix<double> Lap(mx * my, mx * my);
    Lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Lap);
    if (lu.info() != Eigen::Success) throw NumericalError("rigid: Poisson factorization failed");
    Eigen::VectorXd sol = lu.solve(rhs);
    R.g = bd;
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) R.g(i, j) = sol(id(i, j));

    // holomorphic field H'' = lam e^h - g_zz, integrated twice
    GridDerivatives dg = grid_derivatives(gr, R.g.cast<cd>());
    MatC G = lam.values.cwiseProduct(R.h_log.array().exp().matrix().cast<cd>()) - dg.dzz();
    MatR hol = grid_derivatives(gr, G).dzbar().cwiseAbs();
    R.holomorphy_residual = cropped_max(hol, margin);
    MatC K = path_integrate<MatC>(G, kI * G, hx, hy);
    R.H = path_integrate<MatC>(K, kI * K, hx, hy);
    R.f = R.g + 2 * R.H.real();

    // invariants of Im z2 = f(z1) from stencil jets
    GridDerivatives df = grid_derivatives(gr, R.f.cast<cd>());
    MatC fz = df.dz(), fzz = df.dzz(), fzzb = df.dzzbar();
    R.b.resize(nx, ny);
    MatR pde(nx, ny), berr(nx, ny);
    {
        Range ri = crop(nx, margin), rj = crop(ny, margin);
        R.min_levi = fzzb.real().block(ri.lo, rj.lo, ri.hi - ri.lo + 1, rj.hi - rj.lo + 1).minCoeff();
    }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            Jet2 jt;
            jt.r = 0;
            jt.grad = VecC(2);
            jt.grad << -fz(i, j), cd(0, -0.5);
            jt.hess_holo = MatC::Zero(2, 2);
            jt.hess_mixed = MatC::Zero(2, 2);
            jt.hess_holo(0, 0) = -fzz(i, j);
            jt.hess_mixed(0, 0) = -fzzb(i, j).real();
            R.b(i, j) = beltrami_b(jt);
            pde(i, j) = std::abs(fzz(i, j) - lam.values(i, j) * fzzb(i, j));
            berr(i, j) = std::abs(R.b(i, j) - lam.values(i, j));
        }
    R.pde_residual = cropped_max(pde, margin);
    R.b_error = cropped_max(berr, margin);
    R.compat_residual = cropped_max(rigid_residual(lam), margin);
    return R;
}

}  // namespace leray
