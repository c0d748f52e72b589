#include "leraykit/transforms.hpp"

#include "leraykit/exterior.hpp"
#include "leraykit/invariants.hpp"

#include <cmath>
#include <map>

namespace leray {

namespace {

int wrap(int m, int n) { return ((m % n) + n) % n; }

MatC dft_matrix(int nth, double sign, double scale) {
    MatC E(nth, nth);
    for (int k = 0; k < nth; ++k)
        for (int j = 0; j < nth; ++j) E(k, j) = scale * std::exp(cd(0, sign * 2 * kPi * k * j / nth));
    return E;
}

std::vector<MatC> torus_forward(const VecC& f, int nt, int nth) {
    MatC E = dft_matrix(nth, -1, 1.0 / nth);
    std::vector<MatC> out(nt);
    for (int it = 0; it < nt; ++it) {
        MatC F = Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            f.data() + static_cast<Eigen::Index>(it) * nth * nth, nth, nth);
        out[it] = E * F * E.transpose();
    }
    return out;
}

VecC torus_inverse(const std::vector<MatC>& hat, int nt, int nth) {
    MatC E = dft_matrix(nth, 1, 1.0);
    VecC f(static_cast<Eigen::Index>(nt) * nth * nth);
    for (int it = 0; it < nt; ++it) {
        MatC F = E * hat[it] * E.transpose();
        for (int k1 = 0; k1 < nth; ++k1)
            for (int k2 = 0; k2 < nth; ++k2) f((it * nth + k1) * nth + k2) = F(k1, k2);
    }
    return f;
}

VecR row_weights(const VecR& w, int nt, int nth) {
    VecR r(nt);
    for (int it = 0; it < nt; ++it) r(it) = w(it * nth * nth);
    return r;
}

double spectral_norm(const MatC& A) {
    if (A.size() == 0) return 0;
    MatC G = A.rows() >= A.cols() ? MatC(A.adjoint() * A) : MatC(A * A.adjoint());
    Eigen::SelfAdjointEigenSolver<MatC> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

MatC scaled(const MatC& A, const VecR& w_out, const VecR& w_in) {
    return w_out.cwiseSqrt().asDiagonal() * A * w_in.cwiseSqrt().cwiseInverse().asDiagonal();
}

double log_multinomial(int m1, int m2, int n) {
    return std::lgamma(m1 + m2 + n) - std::lgamma(n) - std::lgamma(m1 + 1) - std::lgamma(m2 + 1);
}

struct TorusGeometry {
    int nt, nth;
    std::vector<cd> c1, c2, A, omega;  // per profile node
    VecR tw;
    MatR rho;
};

TorusGeometry torus_geometry(const QuadratureMesh& m) {
    TorusGeometry g;
    g.nt = m.nt;
    g.nth = m.nth;
    g.tw = m.tw;
    g.rho = m.rho;
    for (int it = 0; it < m.nt; ++it) {
        const Jet2& j = m.jets[m.torus_index(it, 0, 0)];
        cd c1 = j.grad(0), c2 = j.grad(1);
        g.c1.push_back(c1);
        g.c2.push_back(c2);
        g.A.push_back(c1 * m.rho(it, 0) + c2 * m.rho(it, 1));
        VecR xt(4), x1 = VecR::Zero(4), x2 = VecR::Zero(4);
        xt << m.drho(it, 0), 0, m.drho(it, 1), 0;
        x1(1) = m.rho(it, 0);
        x2(3) = m.rho(it, 1);
        MatR D(4, 4);
        D << j.real_grad(), xt, x1, x2;
        cd om = leray_form(j, {xt, x1, x2});
        if (D.determinant() < 0) om = -om;
        g.omega.push_back(om);
    }
    return g;
}

}  // namespace

VecC DiscreteOperator::apply(const VecC& f) const {
    if (f.size() != N) throw std::invalid_argument("operator: section has the wrong length");
    if (!is_blocked()) return dense * f;
    auto hat = torus_forward(f, nt, nth);
    std::vector<MatC> out(nt, MatC::Zero(nth, nth));
    VecC v(nt);
    for (const ModeBlock& b : blocks) {
        int i1 = wrap(b.m1, nth), i2 = wrap(b.m2, nth);
        for (int it = 0; it < nt; ++it) v(it) = hat[it](i1, i2);
        VecC r = b.B * v;
        for (int it = 0; it < nt; ++it) out[it](i1, i2) = r(it);
    }
    return torus_inverse(out, nt, nth);
}

MatC DiscreteOperator::to_dense() const {
    if (!is_blocked()) return dense;
    MatC A(N, N);
    for (int k = 0; k < N; ++k) A.col(k) = apply(VecC::Unit(N, k));
    return A;
}

DiscreteOperator DiscreteOperator::identity(const VecR& w) {
    DiscreteOperator op;
    op.N = static_cast<int>(w.size());
    op.dense = MatC::Identity(op.N, op.N);
    op.w_in = op.w_out = w;
    return op;
}

MatC cauchy_singular_part(const std::vector<cd>& z, const std::vector<cd>& dz, double h) {
    const int N = static_cast<int>(z.size());
    double area = 0;
    for (int k = 0; k < N; ++k) area += (std::conj(z[k]) * dz[k]).imag();
    if (area < 0) {
        // reverse the parametrization so the bounded side lies to the left
        std::vector<cd> zr(N), dzr(N);
        for (int k = 0; k < N; ++k) {
            zr[k] = z[(N - k) % N];
            dzr[k] = -dz[(N - k) % N];
        }
        MatC Cr = cauchy_singular_part(zr, dzr, h);
        MatC C(N, N);
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) C((N - i) % N, (N - k) % N) = Cr(i, k);
        return C;
    }
    if (N % 2) throw std::invalid_argument("cauchy: node count must be even");
    // (1/2 pi i) int (f(w) - f(z)) / (w - z) dw; the diagonal limit is the
    // parameter derivative of f, taken spectrally
    // Fourier differentiation with the Nyquist mode taken as +N/2, as a circulant
    std::vector<cd> diff(N);
    for (int j = 0; j < N; ++j) {
        cd acc = 0;
        for (int p = -N / 2 + 1; p <= N / 2; ++p) acc += cd(0, p) * std::exp(cd(0, 2 * kPi * p * j / N));
        diff[j] = acc / double(N);
    }
    MatC K = MatC::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        cd rowsum = 0;
        for (int k = 0; k < N; ++k) {
            if (k == i) continue;
            cd d = z[k] - z[i];
            if (std::abs(d) < 1e-14) throw NumericalError("cauchy: coincident nodes");
            K(i, k) = dz[k] / d;
            rowsum += K(i, k);
        }
        K(i, i) = -rowsum;
        for (int k = 0; k < N; ++k) K(i, k) += diff[wrap(i - k, N)];
    }
    return (h / (2 * kPi * kI)) * K;
}

DiscreteOperator cauchy_matrix(const PairingContext& c, int sign) {
    const QuadratureMesh& m = *c.mesh;
    if (m.layout != MeshLayout::Curve) throw std::invalid_argument("cauchy: needs a parametrized closed curve");
    std::vector<cd> z, dz;
    for (int k = 0; k < m.size(); ++k) {
        z.push_back(m.nodes[k](0));
        dz.push_back(m.dzds(k));
    }
    DiscreteOperator op;
    op.N = m.size();
    // interior and exterior boundary values of the Cauchy integral
    MatC S = cauchy_singular_part(z, dz, m.h);
    op.dense = sign >= 0 ? MatC(MatC::Identity(op.N, op.N) + S) : MatC(-S);
    op.w_in = op.w_out = c.weight_sharp();
    op.band = op.N / 4;
    return op;
}

DiscreteOperator leray_matrix(const PairingContext& c) {
    const QuadratureMesh& m = *c.mesh;
    if (m.layout == MeshLayout::Curve) return cauchy_matrix(c, +1);
    DiscreteOperator op;
    op.N = m.size();
    op.w_in = op.w_out = c.weight_sharp();
    const int n = m.n;
    if (m.layout == MeshLayout::Torus) {
        TorusGeometry g = torus_geometry(m);
        op.nt = g.nt;
        op.nth = g.nth;
        const cd pre = std::pow(kI, -n);
        for (int m1 = 0; m1 < g.nth / 2; ++m1)
            for (int m2 = 0; m2 < g.nth / 2; ++m2) {
                ModeBlock b{m1, m2, MatC(g.nt, g.nt)};
                double lc = log_multinomial(m1, m2, n);
                for (int t = 0; t < g.nt; ++t)
                    for (int s = 0; s < g.nt; ++s) {
                        cd x1 = g.c1[s] * g.rho(t, 0), x2 = g.c2[s] * g.rho(t, 1);
                        cd lg = lc + double(m1) * std::log(x1) + double(m2) * std::log(x2) -
                                double(m1 + m2 + n) * std::log(g.A[s]);
                        b.B(t, s) = pre * std::exp(lg) * g.omega[s] * g.tw(s);
                    }
                op.blocks.push_back(std::move(b));
            }
        return op;
    }
    // generic punctured Nystrom fallback for surfaces without rotational symmetry
    const int N = m.size();
    std::vector<cd> dens(N);
    for (int k = 0; k < N; ++k) dens[k] = leray_density(m.jets[k]) * m.weights(k);
    const cd pre = std::pow(2 * kPi * kI, -n);
    op.dense = 0.5 * MatC::Identity(N, N);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k) {
            if (k == i) continue;
            cd D = (m.jets[k].grad.transpose() * (m.nodes[k] - m.nodes[i]))(0, 0);
            if (std::abs(D) < 1e-14) throw NumericalError("leray: kernel denominator vanishes off the diagonal");
            op.dense(i, k) += pre * dens[k] / std::pow(D, n);
        }
    return op;
}

DiscreteOperator dual_leray_matrix(const PairingContext& c) {
    const QuadratureMesh& m = *c.mesh;
    DiscreteOperator op;
    op.N = m.size();
    op.w_in = op.w_out = c.weight_sharp_dual();
    if (m.layout == MeshLayout::Curve) {
        // the dual domain contains the point at infinity of the eta-line, so its
        // inner transform is the outer transform of the dual curve
        std::vector<cd> z, dz;
        for (int k = 0; k < m.size(); ++k) {
            z.push_back(c.dual.eta[k](0));
            dz.push_back(dual_differential(m.jets[k], m.nodes[k], VecC::Constant(1, m.dzds(k)))(0));
        }
        op.dense = -cauchy_singular_part(z, dz, m.h);
        op.band = op.N / 4;
        return op;
    }
    if (m.layout != MeshLayout::Torus)
        throw std::invalid_argument("dual leray: needs a curve or a Reinhardt torus mesh");
    const int n = m.n;
    TorusGeometry g = torus_geometry(m);
    op.nt = g.nt;
    op.nth = g.nth;
    const cd pre = std::pow(kI, -n);
    // input mode mu = -(m1, m2 + n) is mapped to itself
    for (int m1 = 0; m1 <= g.nth / 2; ++m1)
        for (int m2 = 0; m2 + n <= g.nth / 2; ++m2) {
            ModeBlock b{-m1, -(m2 + n), MatC(g.nt, g.nt)};
            double lc = log_multinomial(m1, m2, n);
            for (int t = 0; t < g.nt; ++t)
                for (int s = 0; s < g.nt; ++s) {
                    cd x1 = g.c1[t] * g.rho(s, 0), x2 = g.c2[t] * g.rho(s, 1);
                    cd lg = lc + double(m1) * std::log(x1) + double(m2) * std::log(x2) -
                            double(m1 + m2 + n) * std::log(g.A[t]) + double(n) * (std::log(g.c2[t]) - std::log(g.c2[s]));
                    b.B(t, s) = pre * std::exp(lg) * g.omega[s] * g.tw(s);
                }
            op.blocks.push_back(std::move(b));
        }
    return op;
}

double operator_norm(const DiscreteOperator& op) {
    if ((op.w_in.array() <= 0).any() || (op.w_out.array() <= 0).any())
        throw NumericalError("operator norm: non-positive quadrature weight");
    if (!op.is_blocked() && op.band > 0 && 2 * op.band + 1 < op.N) {
        const int N = op.N, K = op.band;
        VecR si = op.w_in.cwiseSqrt();
        MatC F(N, 2 * K + 1);
        for (int i = 0; i < N; ++i)
            for (int k = -K; k <= K; ++k) F(i, k + K) = si(i) * std::exp(cd(0, 2 * kPi * double(i) * k / N));
        Eigen::HouseholderQR<MatC> qr(F);
        MatC Q = qr.householderQ() * MatC::Identity(N, 2 * K + 1);
        return spectral_norm(scaled(op.dense, op.w_out, op.w_in) * Q);
    }
    if (!op.is_blocked()) return spectral_norm(scaled(op.dense, op.w_out, op.w_in));
    VecR wi = row_weights(op.w_in, op.nt, op.nth), wo = row_weights(op.w_out, op.nt, op.nth);
    double best = 0;
    for (const ModeBlock& b : op.blocks) best = std::max(best, spectral_norm(scaled(b.B, wo, wi)));
    return best;
}

double projection_defect(const DiscreteOperator& op) {
    if (!op.is_blocked()) return spectral_norm(scaled(op.dense * op.dense - op.dense, op.w_out, op.w_in));
    VecR wi = row_weights(op.w_in, op.nt, op.nth), wo = row_weights(op.w_out, op.nt, op.nth);
    double best = 0;
    for (const ModeBlock& b : op.blocks) best = std::max(best, spectral_norm(scaled(b.B * b.B - b.B, wo, wi)));
    return best;
}

cd curve_bilinear(const PairingContext& c, const VecC& f, const VecC& g) {
    const QuadratureMesh& m = *c.mesh;
    if (m.layout != MeshLayout::Curve) throw std::invalid_argument("bilinear form: needs a curve mesh");
    return (f.array() * g.array() * m.dzds.array()).sum() * m.h;
}

double plemelj_residual(const PairingContext& c, const VecC& f, const VecC& g) {
    DiscreteOperator Cp = cauchy_matrix(c, +1), Cm = cauchy_matrix(c, -1);
    VecC pf = Cp.apply(f), mg = Cm.apply(g);
    cd a = curve_bilinear(c, pf, g), b = curve_bilinear(c, f, mg), d = curve_bilinear(c, pf, mg);
    return std::max({std::abs(a - b), std::abs(a - d), std::abs(b - d)});
}

cd leray_classical(const PairingContext& c, const VecC& F, const VecC& z) {
    const QuadratureMesh& m = *c.mesh;
    const int n = m.n;
    cd acc = 0;
    for (int k = 0; k < m.size(); ++k) {
        cd D = (m.jets[k].grad.transpose() * (m.nodes[k] - z))(0, 0);
        acc += F(k) * leray_density(m.jets[k]) * m.weights(k) / std::pow(D, n);
    }
    return std::pow(2 * kPi * kI, -n) * acc;
}

cd leray_via_pairing(const PairingContext& c, const VecC& F, const VecC& z) {
    const QuadratureMesh& m = *c.mesh;
    const int n = m.n;
    double fact = 1;
    for (int k = 2; k < n; ++k) fact *= k;
    const cd cn = fact / 2 * std::pow(kI / kPi, n);
    // Phi_z as a dual section in the eta-chart trivialization
    VecC Phi(m.size());
    for (int k = 0; k < m.size(); ++k) {
        const Jet2& j = m.jets[k];
        cd D = (j.grad.transpose() * (z - m.nodes[k]))(0, 0);
        Phi(k) = std::pow(j.grad(n - 1), n) / std::pow(D, n);
    }
    return cn * pair(c, F, Phi);
}

AdjointResidual adjoint_residual(const PairingContext& c, const DiscreteOperator& L, const DiscreteOperator& Ld,
                                 const VecC& f, const VecC& g) {
    AdjointResidual r;
    VecC Lf = L.apply(f), Lg = Ld.apply(g);
    r.lf_g = pair(c, Lf, g);
    r.f_lg = pair(c, f, Lg);
    r.lf_lg = pair(c, Lf, Lg);
    r.residual = std::max({std::abs(r.lf_g - r.f_lg), std::abs(r.lf_g - r.lf_lg), std::abs(r.f_lg - r.lf_lg)});
    return r;
}

int default_dual_degree(const PairingContext& c, int degree) {
    if (c.n() == 1) return std::min(10 * degree, c.size() / 4);
    return degree;
}

EfficiencyResult efficiency_identity(const PairingContext& c, int degree, int dual_degree) {
    if (dual_degree < 0) dual_degree = default_dual_degree(c, degree);
    EfficiencyResult e;
    MatC bs = hardy_basis(c, degree);
    MatC bd = dual_hardy_basis(c, dual_degree);
    if (bs.cols() == 0 || bd.cols() == 0) throw NumericalError("efficiency: empty Hardy basis");
    e.basis_size = static_cast<int>(bs.cols());
    e.dual_basis_size = static_cast<int>(bd.cols());
    e.infsup = infsup(c, bs, bd);
    e.norm = operator_norm(leray_matrix(c));
    e.inverse_norm = 1 / e.norm;
    e.residual = std::abs(e.infsup - e.inverse_norm);
    return e;
}

}  // namespace leray
