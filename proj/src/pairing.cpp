#include "leraykit/pairing.hpp"

#include "leraykit/exterior.hpp"
#include "leraykit/invariants.hpp"

#include <cmath>

namespace leray {

cd transfer_factor(const Jet2& j, const VecC& z, int lift) {
    const int n = j.n();
    NormalFrame F = normalize_at(j, z);
    if (!F.strongly_convex) throw NumericalError("transfer: surface is not strongly C-linearly convex here");
    MobiusMap M = F.from_model(true, lift);
    MobiusMap G = dual_mobius(M);
    VecR ah = F.alpha_hat();
    double prod = 1;
    for (Eigen::Index k = 0; k < ah.size(); ++k) prod *= ah(k);
    double c = std::pow(2.0, double(n * (n - 1)) / (n + 1)) * std::pow(prod, double(n) / (n + 1));
    return std::pow(std::conj(M.M(0, 0)), n) * c * std::pow(G.M(0, 0), -n);
}

cd pairing_density(const Jet2& j) {
    const int n = j.n();
    double fact = 1;
    for (int k = 2; k < n; ++k) fact *= k;
    return std::pow(2.0, 1 - n) / fact * leray_density(j) / std::pow(j.grad(n - 1), n);
}

namespace {

VecC default_center(const QuadratureMesh& m) {
    VecC c = VecC::Zero(m.n);
    if (m.layout == MeshLayout::GraphWindow) {
        int mid = m.size() / 2;
        VecR g = m.jets[mid].real_grad();
        return m.nodes[mid] - from_real(0.5 * g.normalized());
    }
    double wsum = 0;
    for (int i = 0; i < m.size(); ++i) {
        c += m.weights(i) * m.nodes[i];
        wsum += m.weights(i);
    }
    return c / wsum;
}

cd weighted_dot(const VecC& f, const VecC& g, const VecR& w) {
    return (f.array() * g.conjugate().array() * w.array()).sum();
}

}  // namespace

PairingContext make_pairing_context(std::shared_ptr<const QuadratureMesh> m, int lift) {
    PairingContext c;
    c.mesh = m;
    c.lift = lift;
    c.dual = dual_surface(*m);
    const int N = m->size();
    const int n = m->n;
    c.dS = m->weights;
    c.dS_dual = c.dual.weights;
    c.fef.resize(N);
    c.phi.resize(N);
    c.sharp.resize(N);
    c.fef_dual.resize(N);
    c.phi_dual.resize(N);
    c.sharp_dual.resize(N);
    c.tau.resize(N);
    c.tau_affine.resize(N);
    c.tau_dual.resize(N);
    const double ex = -double(n) / (2.0 * (n + 1));
    for (int i = 0; i < N; ++i) {
        const Jet2& j = m->jets[i];
        const Jet2& jd = c.dual.jets[i];
        c.fef(i) = fefferman_weight(j);
        c.phi(i) = phi(j);
        c.sharp(i) = std::pow(c.phi(i), ex) * c.fef(i);
        c.fef_dual(i) = fefferman_weight(jd);
        c.phi_dual(i) = phi(jd);
        c.sharp_dual(i) = std::pow(c.phi_dual(i), ex) * c.fef_dual(i);
        c.tau(i) = transfer_factor(j, m->nodes[i], lift);
        c.tau_affine(i) = pairing_density(j) / c.fef(i);
        c.tau_dual(i) = transfer_factor(jd, c.dual.eta[i], lift);
    }
    return c;
}

cd inner_fefferman(const PairingContext& c, const VecC& f, const VecC& g) {
    return weighted_dot(f, g, c.fef.cwiseProduct(c.dS));
}
cd inner_sharp(const PairingContext& c, const VecC& f, const VecC& g) {
    return weighted_dot(f, g, c.weight_sharp());
}
double norm_sharp(const PairingContext& c, const VecC& f) { return std::sqrt(std::abs(inner_sharp(c, f, f))); }
cd inner_fefferman_dual(const PairingContext& c, const VecC& f, const VecC& g) {
    return weighted_dot(f, g, c.fef_dual.cwiseProduct(c.dS_dual));
}
cd inner_sharp_dual(const PairingContext& c, const VecC& f, const VecC& g) {
    return weighted_dot(f, g, c.weight_sharp_dual());
}
double norm_sharp_dual(const PairingContext& c, const VecC& g) {
    return std::sqrt(std::abs(inner_sharp_dual(c, g, g)));
}

VecC transfer(const PairingContext& c, const VecC& g_on_dual) { return c.tau.cwiseProduct(g_on_dual); }
VecC transfer_dual(const PairingContext& c, const VecC& f_on_s) { return c.tau_dual.cwiseProduct(f_on_s); }

cd pair(const PairingContext& c, const VecC& f, const VecC& g) {
    return (f.array() * c.tau.array() * g.array() * c.fef.array() * c.dS.array()).sum();
}

cd pair_dualside(const PairingContext& c, const VecC& g, const VecC& f) {
    return (g.array() * c.tau_dual.array() * f.array() * c.fef_dual.array() * c.dS_dual.array()).sum();
}

MatC krylov_basis(const VecC& start, const std::vector<VecC>& multipliers, int degree, const VecR& weights) {
    const Eigen::Index N = start.size();
    std::vector<VecC> kept;
    auto orth = [&](VecC v) -> bool {
        double before = std::sqrt(std::abs(weighted_dot(v, v, weights)));
        if (!(before > 0) || !std::isfinite(before)) return false;
        for (int pass = 0; pass < 2; ++pass)
            for (const VecC& q : kept) v -= weighted_dot(v, q, weights) * q;
        double after = std::sqrt(std::abs(weighted_dot(v, v, weights)));
        if (after <= 1e-8 * before) return false;
        kept.push_back(v / after);
        return true;
    };
    std::vector<VecC> level;
    if (orth(start)) level.push_back(kept.back());
    for (int d = 1; d <= degree && !level.empty(); ++d) {
        std::vector<VecC> next;
        for (const VecC& q : level)
            for (const VecC& mj : multipliers)
                if (orth(mj.cwiseProduct(q))) next.push_back(kept.back());
        level = std::move(next);
    }
    MatC B(N, static_cast<Eigen::Index>(kept.size()));
    for (size_t k = 0; k < kept.size(); ++k) B.col(static_cast<Eigen::Index>(k)) = kept[k];
    return B;
}

MatC hardy_basis(const PairingContext& c, int max_degree) {
    const QuadratureMesh& m = *c.mesh;
    std::vector<VecC> mult(m.n, VecC(m.size()));
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.n; ++j) mult[j](i) = m.nodes[i](j);
    return krylov_basis(VecC::Ones(m.size()), mult, max_degree, c.weight_sharp());
}

MatC dual_hardy_basis(const PairingContext& c, int max_degree, const VecC& center) {
    const QuadratureMesh& m = *c.mesh;
    const int n = m.n;
    VecC ctr = center.size() == n ? center : default_center(m);
    MatC P = dual_chart_matrix(n);
    std::vector<VecC> mult(n, VecC(m.size()));
    VecC start(m.size());
    for (int i = 0; i < m.size(); ++i) {
        VecC h(n + 1);
        h(0) = 1;
        h.tail(n) = c.dual.eta[i];
        VecC zs = P * h;
        cd ell = zs(0) + (ctr.transpose() * zs.tail(n))(0, 0);
        for (int j = 0; j < n; ++j) mult[j](i) = zs(j + 1) / ell;
        start(i) = std::pow(zs(n) / ell, n);
    }
    return krylov_basis(start, mult, max_degree, c.weight_sharp_dual());
}

MatC pairing_matrix(const PairingContext& c, const MatC& bs, const MatC& bd) {
    VecC w = c.tau.cwiseProduct(c.fef.cwiseProduct(c.dS).cast<cd>());
    return bs.transpose() * w.asDiagonal() * bd;
}

double sup_pairing(const PairingContext& c, const VecC& f, const MatC& bd) {
    MatC F(f.size(), 1);
    F.col(0) = f;
    return pairing_matrix(c, F, bd).norm();
}

double infsup(const PairingContext& c, const MatC& bs, const MatC& bd) {
    MatC A = pairing_matrix(c, bs, bd);
    if (A.rows() > A.cols()) return 0;
    Eigen::JacobiSVD<MatC> svd(A);
    return svd.singularValues()(A.rows() - 1);
}

TransferResiduals transfer_residuals(const PairingContext& c) {
    TransferResiduals r;
    const int n = c.n();
    const double e = double(n) / (n + 1);
    for (int i = 0; i < c.size(); ++i) {
        double lhs = std::pow(c.phi(i), e) * std::norm(c.tau(i)) * c.fef(i) * c.dS(i);
        double rhs = c.fef_dual(i) * c.dS_dual(i);
        r.isometry = std::max(r.isometry, std::abs(lhs - rhs) / rhs);
        cd dt = std::conj(c.tau_dual(i)) * c.tau(i) * std::pow(c.phi(i), e);
        r.double_transfer = std::max(r.double_transfer, std::abs(dt - 1.0));
        r.route_agreement = std::max(r.route_agreement, std::abs(c.tau(i) - c.tau_affine(i)) / std::abs(c.tau(i)));
    }
    return r;
}

}  // namespace leray
