#include "leraykit/duality.hpp"

#include "leraykit/exterior.hpp"
#include "leraykit/invariants.hpp"

#include <cmath>
#include <functional>

namespace leray {

VecC dual_point(const Jet2& j, const VecC& z) {
    const int n = j.n();
    cd rn = j.grad(n - 1);
    if (std::abs(rn) < 1e-12 * std::max(1.0, j.grad.norm()))
        throw NumericalError("dual_point: r_{z_n} vanishes, the dual chart degenerates here");
    VecC eta(n);
    cd acc = 0;
    for (int k = 0; k < n - 1; ++k) {
        eta(k) = -j.grad(k) / rn;
        acc += z(k) * eta(k);
    }
    eta(n - 1) = acc - z(n - 1);
    return eta;
}

VecC dual_point(const Hypersurface& s, const VecC& z) { return dual_point(jet2(s, z), z); }

VecC dual_homogeneous(const Jet2& j, const VecC& z) {
    const int n = j.n();
    VecC zs(n + 1);
    zs(0) = -(j.grad.transpose() * z)(0, 0);
    zs.tail(n) = j.grad;
    return zs;
}

MatC dual_chart_matrix(int n) {
    MatC P = MatC::Zero(n + 1, n + 1);
    P(0, n) = 1;
    for (int j = 1; j < n; ++j) P(j, j) = -1;
    P(n, 0) = 1;
    return P;
}

MobiusMap dual_mobius(const MobiusMap& M) {
    MatC P = dual_chart_matrix(M.n());
    return MobiusMap(P.inverse() * M.M.inverse().transpose() * P);
}

namespace {

Jet2 model_jet(const VecR& a, const VecR& b) {
    const int n = static_cast<int>(a.size()) + 1;
    Jet2 m;
    m.r = 0;
    m.grad = VecC::Zero(n);
    m.grad(n - 1) = cd(0, 0.5);
    m.hess_holo = MatC::Zero(n, n);
    m.hess_mixed = MatC::Zero(n, n);
    for (int k = 0; k < n - 1; ++k) {
        m.hess_holo(k, k) = b(k);
        m.hess_mixed(k, k) = a(k);
    }
    return m;
}

}  // namespace

DualJet dual_jet(const Jet2& j, const VecC& z) {
    NormalFrame F = normalize_at(j, z);
    if (!F.strongly_convex) throw NumericalError("dual_jet: surface is not strongly C-linearly convex here");
    // in dilated normal coordinates the dual is again in normal form with the
    // same coefficients
    Jet2 model = model_jet(F.alpha_hat(), F.beta_hat());
    MobiusMap G = dual_mobius(F.from_model(true));
    MobiusMap Ginv = G.inverse();
    DualJet d;
    d.eta = G.apply(VecC::Zero(j.n()));
    d.jet = pullback_jet(model, Ginv.jacobian(d.eta), Ginv.hessians(d.eta));
    d.jet.r = 0;
    return d;
}

DualJet dual_jet(const Hypersurface& s, const VecC& z) { return dual_jet(jet2(s, z), z); }

VecC project_to_surface(const Hypersurface& s, VecC z, int iters) {
    for (int k = 0; k < iters; ++k) {
        Jet2 j = jet2(s, z);
        VecR g = j.real_grad();
        double step = j.r / g.squaredNorm();
        z -= from_real(step * g);
        if (std::abs(j.r) < 1e-15) break;
    }
    return z;
}

DualJet dual_jet_fit(const Hypersurface& s, const VecC& z, double radius) {
    const int n = s.dim();
    const int m = 2 * n - 1;
    Jet2 j0 = jet2(s, z);
    auto frame = oriented_tangent_frame(j0.real_grad().normalized());
    VecC eta0 = dual_point(j0, z);
    VecR y0 = to_real(eta0);

    // tensor cloud of 5 points per tangent direction
    std::vector<VecR> cloud;
    const int K = 5;
    long total = 1;
    for (int a = 0; a < m; ++a) total *= K;
    for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        VecR off = VecR::Zero(2 * n);
        for (int a = 0; a < m; ++a) {
            int k = static_cast<int>(rem % K) - K / 2;
            rem /= K;
            off += (radius * k / (K / 2)) * frame[a];
        }
        VecC p = project_to_surface(s, z + from_real(off));
        cloud.push_back(to_real(dual_point(s, p)) - y0);
    }
    // normal of the dual cloud from its smallest principal direction
    MatR C(2 * n, cloud.size());
    for (size_t k = 0; k < cloud.size(); ++k) C.col(k) = cloud[k];
    Eigen::JacobiSVD<MatR> svd(C, Eigen::ComputeFullU);
    VecR nu = svd.matrixU().col(2 * n - 1);
    auto tf = oriented_tangent_frame(nu);
    MatR T(2 * n, m);
    for (int a = 0; a < m; ++a) T.col(a) = tf[a];

    // monomials of degree 1..4 in m scaled variables
    std::vector<std::vector<int>> expo;
    std::vector<int> e(m, 0);
    std::function<void(int, int)> gen = [&](int pos, int left) {
        if (pos == m) {
            int deg = 0;
            for (int v : e) deg += v;
            if (deg >= 1) expo.push_back(e);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[pos] = k;
            gen(pos + 1, left - k);
        }
        e[pos] = 0;
    };
    gen(0, 4);
    MatR A(cloud.size(), expo.size());
    VecR h(cloud.size());
    for (size_t k = 0; k < cloud.size(); ++k) {
        VecR sv = T.transpose() * cloud[k] / radius;
        h(k) = nu.dot(cloud[k]);
        for (size_t c = 0; c < expo.size(); ++c) {
            double v = 1;
            for (int a = 0; a < m; ++a) v *= std::pow(sv(a), expo[c][a]);
            A(k, c) = v;
        }
    }
    VecR coef = A.colPivHouseholderQr().solve(h);
    VecR lin = VecR::Zero(m);
    MatR B = MatR::Zero(m, m);
    for (size_t c = 0; c < expo.size(); ++c) {
        int deg = 0, first = -1, second = -1;
        for (int a = 0; a < m; ++a) {
            deg += expo[c][a];
            if (expo[c][a] == 2) first = second = a;
            else if (expo[c][a] == 1) (first < 0 ? first : second) = a;
        }
        if (deg == 1) lin(first) = coef(c) / radius;
        if (deg == 2) {
            double v = coef(c) / (radius * radius);
            if (first == second) B(first, first) = 2 * v;
            else B(first, second) = B(second, first) = v;
        }
    }
    // rho(x) = nu.(x - y0) - P(T^T (x - y0))
    VecR g = nu - T * lin;
    MatR H = -T * B * T.transpose();
    DualJet d;
    d.eta = eta0;
    d.jet = jet_from_real(0.0, g, H);
    return d;
}

VecC roundtrip(const Hypersurface& s, const VecC& z) {
    DualJet d = dual_jet(s, z);
    return dual_point(d.jet, d.eta);
}

TransportResidual transport_check(const Hypersurface& s, const VecC& z) {
    Jet2 j = jet2(s, z);
    DualJet d = dual_jet(j, z);
    TransportResidual r;
    if (j.n() == 2) r.b = std::abs(std::abs(beltrami_b(d.jet)) - std::abs(beltrami_b(j)));
    r.phi = std::abs(phi(d.jet) - phi(j));
    return r;
}

VecC dual_differential(const Jet2& j, const VecC& z, const VecC& v) {
    const int n = j.n();
    VecC dr = j.hess_holo * v + j.hess_mixed * v.conjugate();
    cd rn = j.grad(n - 1), drn = dr(n - 1);
    VecC eta = dual_point(j, z);
    VecC de(n);
    cd acc = 0;
    for (int k = 0; k < n - 1; ++k) {
        de(k) = -(dr(k) * rn - j.grad(k) * drn) / (rn * rn);
        acc += v(k) * eta(k) + z(k) * de(k);
    }
    de(n - 1) = acc - v(n - 1);
    return de;
}

double dual_area_factor(const Jet2& j, const VecC& z) {
    auto frame = oriented_tangent_frame(j.real_grad().normalized());
    const int m = static_cast<int>(frame.size());
    MatR D(2 * j.n(), m);
    for (int a = 0; a < m; ++a) D.col(a) = to_real(dual_differential(j, z, from_real(frame[a])));
    return std::sqrt((D.transpose() * D).determinant());
}

double contact_residual(const Hypersurface& s, const VecC& z, double eps) {
    // central differences of the dual map along surface curves through z,
    // tested against the contact condition d eta_n = sum z_j d eta_j
    const int n = s.dim();
    if (n < 2) return 0;
    Jet2 j = jet2(s, z);
    MatC E = complex_tangent_basis(j.grad);
    double worst = 0;
    for (int c = 0; c < E.cols(); ++c)
        for (cd ph : {cd(1, 0), kI}) {
            VecC v = ph * E.col(c);
            VecC ep = dual_point(s, project_to_surface(s, z + eps * v));
            VecC em = dual_point(s, project_to_surface(s, z - eps * v));
            VecC de = (ep - em) / (2 * eps);
            cd lhs = de(n - 1);
            for (int k = 0; k < n - 1; ++k) lhs -= z(k) * de(k);
            worst = std::max(worst, std::abs(lhs) / std::max(1e-300, de.norm()));
        }
    return worst;
}

DualMesh dual_surface(const QuadratureMesh& m) {
    DualMesh d;
    d.area_factor.resize(m.size());
    for (int i = 0; i < m.size(); ++i) {
        DualJet dj = dual_jet(m.jets[i], m.nodes[i]);
        d.eta.push_back(dj.eta);
        d.jets.push_back(dj.jet);
        d.area_factor(i) = dual_area_factor(m.jets[i], m.nodes[i]);
    }
    d.weights = d.area_factor.cwiseProduct(m.weights);
    return d;
}

}  // namespace leray
