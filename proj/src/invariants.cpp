#include "leraykit/invariants.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace leray {

LeviQ levi_q(const Jet2& j) {
    const double g = j.grad.norm();
    if (g < 1e-14) throw NumericalError("levi_q: tangency degeneracy (vanishing gradient)");
    MatC E = complex_tangent_basis(j.grad);
    LeviQ f;
    f.levi = E.adjoint() * j.hess_mixed.conjugate() * E / (2 * g);
    f.levi = 0.5 * (f.levi + f.levi.adjoint()).eval();
    f.q = E.transpose() * j.hess_holo * E / (2 * g);
    f.q = 0.5 * (f.q + f.q.transpose()).eval();
    return f;
}

cd bordered_levi_det(const Jet2& j) {
    const int n = j.n();
    MatC B = MatC::Zero(n + 1, n + 1);
    for (int k = 0; k < n; ++k) {
        B(0, k + 1) = j.grad(k);
        B(k + 1, 0) = std::conj(j.grad(k));
        for (int a = 0; a < n; ++a) B(a + 1, k + 1) = j.hess_mixed(k, a);
    }
    return B.determinant();
}

cd beltrami_b(const Jet2& j) {
    if (j.n() != 2) throw std::invalid_argument("beltrami_b: only defined for n = 2");
    MatC N(3, 3);
    N << 0.0, j.grad(0), j.grad(1), j.grad(0), j.hess_holo(0, 0), j.hess_holo(0, 1), j.grad(1),
        j.hess_holo(1, 0), j.hess_holo(1, 1);
    cd den = bordered_levi_det(j);
    if (std::abs(den) < 1e-14 * std::pow(j.grad.norm(), 2) * std::max(1.0, j.hess_mixed.norm()))
        throw NumericalError("beltrami_b: Levi-degenerate point");
    return -N.determinant() / den;
}

double phi(const Jet2& j) {
    NormalFrame F = normalize_at(j, VecC::Zero(j.n()));
    double p = 1;
    for (Eigen::Index k = 0; k < F.alpha.size(); ++k) p *= 1 - std::pow(F.beta(k) / F.alpha(k), 2);
    return p;
}

namespace {

double phi_det_raw(const Jet2& j) {
    const int n = j.n();
    const int m = 2 * n + 2;
    MatC B = MatC::Zero(m, m);
    for (int k = 0; k < n; ++k) {
        B(0, 2 + k) = j.grad(k);
        B(1, 2 + n + k) = std::conj(j.grad(k));
    }
    for (int a = 0; a < n; ++a) {
        B(2 + a, 0) = j.grad(a);
        B(2 + n + a, 1) = std::conj(j.grad(a));
        for (int k = 0; k < n; ++k) {
            B(2 + a, 2 + k) = j.hess_holo(a, k);
            B(2 + a, 2 + n + k) = j.hess_mixed(a, k);
            B(2 + n + a, 2 + k) = std::conj(j.hess_mixed(a, k));
            B(2 + n + a, 2 + n + k) = std::conj(j.hess_holo(a, k));
        }
    }
    cd inner = bordered_levi_det(j);
    if (std::abs(inner) < 1e-300) throw NumericalError("phi_det: singular bordered Levi determinant");
    return std::abs(B.determinant()) / std::norm(inner);
}

}  // namespace

double phi_det_calibration(int n) {
    static std::mutex mu;
    static std::map<int, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    VecC p = VecC::Constant(n, cd(1.0 / std::sqrt(double(n)), 0.0));
    double c = 1.0 / phi_det_raw(jet2(*make_sphere(n), p));
    cache[n] = c;
    return c;
}

double phi_det(const Jet2& j) { return phi_det_calibration(j.n()) * phi_det_raw(j); }

double fefferman_weight(const Jet2& j) {
    const int n = j.n();
    double g = j.grad.norm();
    if (g < 1e-14) throw NumericalError("fefferman_weight: vanishing gradient");
    double d = std::abs(bordered_levi_det(j));
    if (d < 1e-300) throw NumericalError("fefferman_weight: Levi degeneracy");
    // 2 / |grad_R r| * |det|^{1/(n+1)}, with |grad_R r| = 2 |dr|
    return std::pow(d, 1.0 / (n + 1)) / g;
}

double sharp_weight(const Jet2& j) {
    const int n = j.n();
    return std::pow(phi(j), -double(n) / (2.0 * (n + 1))) * fefferman_weight(j);
}

Convexity classify(const Jet2& j) {
    Convexity c;
    if (j.n() == 1) {
        c.pseudoconvex = c.strongly_convexlike = true;
        return c;
    }
    LeviQ f = levi_q(j);
    Eigen::SelfAdjointEigenSolver<MatC> es(f.levi);
    double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    c.pseudoconvex = es.eigenvalues().minCoeff() >= -1e-12 * scale;
    if (es.eigenvalues().minCoeff() <= 1e-12 * scale) return c;
    NormalFrame F = normalize_at(j, VecC::Zero(j.n()));
    c.strongly_convexlike = F.strongly_convex;
    return c;
}

PointInvariants point_invariants(const Jet2& j) {
    PointInvariants p;
    p.convexity = classify(j);
    if (j.n() > 1) p.forms = levi_q(j);
    if (j.n() == 2) p.b = beltrami_b(j);
    p.phi = phi(j);
    p.phi_det = phi_det(j);
    p.fefferman_w = fefferman_weight(j);
    p.sharp_w = std::pow(p.phi, -double(j.n()) / (2.0 * (j.n() + 1))) * p.fefferman_w;
    return p;
}

LeviQ levi_q(const Hypersurface& s, const VecC& z) { return levi_q(jet2(s, z)); }
cd beltrami_b(const Hypersurface& s, const VecC& z) { return beltrami_b(jet2(s, z)); }
double phi(const Hypersurface& s, const VecC& z) { return phi(jet2(s, z)); }
double phi_det(const Hypersurface& s, const VecC& z) { return phi_det(jet2(s, z)); }
double fefferman_weight(const Hypersurface& s, const VecC& z) { return fefferman_weight(jet2(s, z)); }
Convexity classify(const Hypersurface& s, const VecC& z) { return classify(jet2(s, z)); }

}  // namespace leray
