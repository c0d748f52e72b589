#include "leraykit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace leray {

VecR Jet2::real_grad() const {
    VecR g(2 * grad.size());
    for (Eigen::Index j = 0; j < grad.size(); ++j) {
        g(2 * j) = 2.0 * grad(j).real();
        g(2 * j + 1) = -2.0 * grad(j).imag();
    }
    return g;
}

namespace {

template <class T>
std::vector<Cx<T>> lift_point(const VecR& u) {
    std::vector<Cx<T>> z(u.size() / 2);
    for (size_t j = 0; j < z.size(); ++j) z[j] = {T(u(2 * j)), T(u(2 * j + 1))};
    return z;
}

// complex-step value with perturbation (ih) e_a + d e_b in real coordinates
cd perturbed(const Hypersurface& s, const VecR& u, int a, double h, int b, double d) {
    auto z = lift_point<cd>(u);
    auto bump = [&](int idx, cd v) {
        if (idx % 2 == 0) z[idx / 2].re += v;
        else z[idx / 2].im += v;
    };
    bump(a, cd(0, h));
    if (b >= 0) bump(b, cd(d, 0));
    return s.value(z);
}

}  // namespace

Jet2 jet_from_real(double value, const VecR& g, const MatR& H) {
    int n = static_cast<int>(g.size() / 2);
    Jet2 j;
    j.r = value;
    j.grad.resize(n);
    j.hess_holo.resize(n, n);
    j.hess_mixed.resize(n, n);
    for (int a = 0; a < n; ++a) {
        j.grad(a) = 0.5 * cd(g(2 * a), -g(2 * a + 1));
        for (int b = 0; b < n; ++b) {
            double xx = H(2 * a, 2 * b), yy = H(2 * a + 1, 2 * b + 1);
            double xy = H(2 * a, 2 * b + 1), yx = H(2 * a + 1, 2 * b);
            j.hess_holo(a, b) = 0.25 * cd(xx - yy, -(xy + yx));
            j.hess_mixed(a, b) = 0.25 * cd(xx + yy, xy - yx);
        }
    }
    return j;
}

Jet2 numeric_jet(const Hypersurface& s, const VecC& z, double h_fd) {
    if (!s.in_chart(z)) throw NumericalError("jet2: point outside the chart");
    VecR u = to_real(z);
    const int m = static_cast<int>(u.size());
    const double hc = 1e-20;
    const double d = h_fd * std::max(1.0, u.cwiseAbs().maxCoeff());
    double value = s.value(lift_point<double>(u));
    VecR g(m);
    MatR H(m, m);
    for (int a = 0; a < m; ++a) {
        g(a) = perturbed(s, u, a, hc, -1, 0).imag() / hc;
        for (int b = 0; b < m; ++b) {
            double up = perturbed(s, u, a, hc, b, d).imag() / hc;
            double dn = perturbed(s, u, a, hc, b, -d).imag() / hc;
            H(a, b) = (up - dn) / (2 * d);
        }
    }
    H = 0.5 * (H + H.transpose()).eval();
    if (!g.allFinite() || !H.allFinite()) throw NumericalError("jet2: non-finite derivative");
    return jet_from_real(value, g, H);
}

Jet2 jet2(const Hypersurface& s, const VecC& z, JetMode mode) {
    if (!s.in_chart(z)) throw NumericalError("jet2: point outside the chart");
    if (mode != JetMode::Numeric) {
        if (auto j = s.analytic_jet(z)) return *j;
        if (mode == JetMode::Analytic) throw NumericalError("jet2: no analytic jets for " + s.family());
    }
    return numeric_jet(s, z);
}

// ---------------------------------------------------------------- families

namespace {

class Sphere final : public Hypersurface {
public:
    Sphere(int n, double R) : n_(n), R_(R) {}
    int dim() const override { return n_; }
    std::string family() const override { return "sphere"; }
    double value(const std::vector<Cx<double>>& z) const override { return eval<double>(z); }
    cd value(const std::vector<Cx<cd>>& z) const override { return eval<cd>(z); }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        Jet2 j;
        j.r = z.squaredNorm() - R_ * R_;
        j.grad = z.conjugate();
        j.hess_holo = MatC::Zero(n_, n_);
        j.hess_mixed = MatC::Identity(n_, n_);
        return j;
    }
    bool curve_point(double s, cd& z, cd& dz) const override {
        if (n_ != 1) return false;
        z = R_ * std::exp(kI * s);
        dz = kI * z;
        return true;
    }
    bool reinhardt_profile(double t, double* rho, double* drho) const override {
        if (n_ != 2) return false;
        rho[0] = R_ * std::cos(t);
        rho[1] = R_ * std::sin(t);
        drho[0] = -R_ * std::sin(t);
        drho[1] = R_ * std::cos(t);
        return true;
    }

private:
    template <class T>
    T eval(const std::vector<Cx<T>>& z) const {
        T acc = T(-R_ * R_);
        for (auto& c : z) acc += abs2(c);
        return acc;
    }
    int n_;
    double R_;
};

class Circle final : public Hypersurface {
public:
    Circle(double R, cd c) : R_(R), c_(c) {}
    int dim() const override { return 1; }
    std::string family() const override { return "circle"; }
    double value(const std::vector<Cx<double>>& z) const override { return eval<double>(z); }
    cd value(const std::vector<Cx<cd>>& z) const override { return eval<cd>(z); }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        Jet2 j;
        j.r = std::norm(z(0) - c_) - R_ * R_;
        j.grad = VecC::Constant(1, std::conj(z(0) - c_));
        j.hess_holo = MatC::Zero(1, 1);
        j.hess_mixed = MatC::Identity(1, 1);
        return j;
    }
    bool curve_point(double s, cd& z, cd& dz) const override {
        z = c_ + R_ * std::exp(kI * s);
        dz = kI * R_ * std::exp(kI * s);
        return true;
    }

private:
    template <class T>
    T eval(const std::vector<Cx<T>>& z) const {
        return abs2(z[0] - from_cd<T>(c_)) - T(R_ * R_);
    }
    double R_;
    cd c_;
};

class Ellipse final : public Hypersurface {
public:
    Ellipse(double a, double b) : a_(a), b_(b) {}
    int dim() const override { return 1; }
    std::string family() const override { return "ellipse"; }
    double value(const std::vector<Cx<double>>& z) const override { return eval<double>(z); }
    cd value(const std::vector<Cx<cd>>& z) const override { return eval<cd>(z); }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        double x = z(0).real(), y = z(0).imag();
        double ia = 1 / (a_ * a_), ib = 1 / (b_ * b_);
        Jet2 j;
        j.r = x * x * ia + y * y * ib - 1;
        j.grad = VecC::Constant(1, cd(x * ia, -y * ib));
        j.hess_holo = MatC::Constant(1, 1, 0.5 * (ia - ib));
        j.hess_mixed = MatC::Constant(1, 1, 0.5 * (ia + ib));
        return j;
    }
    bool curve_point(double s, cd& z, cd& dz) const override {
        z = cd(a_ * std::cos(s), b_ * std::sin(s));
        dz = cd(-a_ * std::sin(s), b_ * std::cos(s));
        return true;
    }

private:
    template <class T>
    T eval(const std::vector<Cx<T>>& z) const {
        return z[0].re * z[0].re / (a_ * a_) + z[0].im * z[0].im / (b_ * b_) - T(1);
    }
    double a_, b_;
};

// f(z) = |z|^p and its z-derivatives
struct RadialPower {
    double p;
    void jet(cd z, cd& f_z, cd& f_zz, double& f_zzbar, double& f) const {
        double s = std::norm(z);
        double q = p / 2;
        f = std::pow(s, q);
        f_z = q * std::pow(s, q - 1) * std::conj(z);
        f_zz = q * (q - 1) * std::pow(s, q - 2) * std::conj(z) * std::conj(z);
        f_zzbar = q * q * std::pow(s, q - 1);
    }
};

class LpSphere final : public Hypersurface {
public:
    explicit LpSphere(double p) : p_(p) {}
    int dim() const override { return 2; }
    std::string family() const override { return "lp_sphere"; }
    double value(const std::vector<Cx<double>>& z) const override { return eval<double>(z); }
    cd value(const std::vector<Cx<cd>>& z) const override { return eval<cd>(z); }
    bool in_chart(const VecC& z) const override {
        return z.allFinite() && std::abs(z(0)) > 1e-12 && std::abs(z(1)) > 1e-12;
    }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        RadialPower rp{p_};
        Jet2 j;
        j.grad.resize(2);
        j.hess_holo = MatC::Zero(2, 2);
        j.hess_mixed = MatC::Zero(2, 2);
        j.r = -1;
        for (int k = 0; k < 2; ++k) {
            cd fz, fzz;
            double fzb, f;
            rp.jet(z(k), fz, fzz, fzb, f);
            j.r += f;
            j.grad(k) = fz;
            j.hess_holo(k, k) = fzz;
            j.hess_mixed(k, k) = fzb;
        }
        return j;
    }
    bool reinhardt_profile(double t, double* rho, double* drho) const override {
        double e = 2 / p_;
        double c = std::cos(t), s = std::sin(t);
        rho[0] = std::pow(c, e);
        rho[1] = std::pow(s, e);
        drho[0] = -e * std::pow(c, e - 1) * s;
        drho[1] = e * std::pow(s, e - 1) * c;
        return true;
    }

private:
    template <class T>
    T eval(const std::vector<Cx<T>>& z) const {
        return std::pow(abs2(z[0]), T(p_ / 2)) + std::pow(abs2(z[1]), T(p_ / 2)) - T(1);
    }
    double p_;
};

// graphs r = F(z', u) - Im z_n
class GraphBase : public Hypersurface {
public:
    bool is_graph() const override { return true; }
    std::optional<ChartWindow> default_window() const override {
        ChartWindow w;
        int m = 2 * dim() - 1;
        w.lo = VecR::Constant(m, -1.0);
        w.hi = VecR::Constant(m, 1.0);
        return w;
    }
};

class PowerGraph final : public GraphBase {
public:
    explicit PowerGraph(double g) : g_(g) {}
    int dim() const override { return 2; }
    std::string family() const override { return "power_graph"; }
    double value(const std::vector<Cx<double>>& z) const override { return eval<double>(z); }
    cd value(const std::vector<Cx<cd>>& z) const override { return eval<cd>(z); }
    bool in_chart(const VecC& z) const override { return z.allFinite() && std::abs(z(0)) > 1e-12; }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        RadialPower rp{g_};
        cd fz, fzz;
        double fzb, f;
        rp.jet(z(0), fz, fzz, fzb, f);
        Jet2 j;
        j.r = f - z(1).imag();
        j.grad = VecC(2);
        j.grad << fz, cd(0, 0.5);
        j.hess_holo = MatC::Zero(2, 2);
        j.hess_mixed = MatC::Zero(2, 2);
        j.hess_holo(0, 0) = fzz;
        j.hess_mixed(0, 0) = fzb;
        return j;
    }
    std::optional<ChartWindow> default_window() const override {
        ChartWindow w;
        w.lo = VecR(3);
        w.hi = VecR(3);
        w.lo << 0.5, -0.5, -1.0;
        w.hi << 1.5, 0.5, 1.0;
        return w;
    }

private:
    template <class T>
    T eval(const std::vector<Cx<T>>& z) const {
        return std::pow(abs2(z[0]), T(g_ / 2)) - z[1].im;
    }
    double g_;
};

class Quadric final : public GraphBase {
public:
    Quadric(MatC A, MatC B) : A_(std::move(A)), B_(std::move(B)) {}
    int dim() const override { return static_cast<int>(A_.rows()) + 1; }
    std::string family() const override { return "quadric"; }
    double value(const std::vector<Cx<double>>& z) const override { return eval<double>(z); }
    cd value(const std::vector<Cx<cd>>& z) const override { return eval<cd>(z); }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        int n = dim(), m = n - 1;
        VecC zp = z.head(m);
        Jet2 j;
        j.r = (zp.transpose() * A_ * zp.conjugate())(0, 0).real() + (zp.transpose() * B_ * zp)(0, 0).real() -
              z(m).imag();
        j.grad = VecC::Zero(n);
        j.grad.head(m) = A_ * zp.conjugate() + B_ * zp;
        j.grad(m) = cd(0, 0.5);
        j.hess_holo = MatC::Zero(n, n);
        j.hess_mixed = MatC::Zero(n, n);
        j.hess_holo.topLeftCorner(m, m) = B_;
        j.hess_mixed.topLeftCorner(m, m) = A_;
        return j;
    }

private:
    template <class T>
    T eval(const std::vector<Cx<T>>& z) const {
        int m = dim() - 1;
        Cx<T> herm{T(0), T(0)}, sym{T(0), T(0)};
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                herm = herm + from_cd<T>(A_(a, b)) * z[a] * conj(z[b]);
                sym = sym + from_cd<T>(B_(a, b)) * z[a] * z[b];
            }
        return herm.re + sym.re - z[m].im;
    }
    MatC A_, B_;
};

class Tube final : public GraphBase {
public:
    explicit Tube(double c) : c_(c) {}
    int dim() const override { return 2; }
    std::string family() const override { return "tube"; }
    double value(const std::vector<Cx<double>>& z) const override { return c_ * z[0].re * z[0].re - z[1].im; }
    cd value(const std::vector<Cx<cd>>& z) const override { return c_ * z[0].re * z[0].re - z[1].im; }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        Jet2 j;
        double x = z(0).real();
        j.r = c_ * x * x - z(1).imag();
        j.grad = VecC(2);
        j.grad << c_ * x, cd(0, 0.5);
        j.hess_holo = MatC::Zero(2, 2);
        j.hess_mixed = MatC::Zero(2, 2);
        j.hess_holo(0, 0) = 0.5 * c_;
        j.hess_mixed(0, 0) = 0.5 * c_;
        return j;
    }

private:
    double c_;
};

class CustomGraph final : public GraphBase {
public:
    CustomGraph(const std::string& text, int n) : e_(Expression::parse(text)), n_(n) {
        if (n < 1) throw ParseError("custom_graph: dimension must be >= 1");
        if (e_.max_variable() > n - 1) throw ParseError("custom_graph: F may only use z1..z(n-1) and u");
    }
    int dim() const override { return n_; }
    std::string family() const override { return "custom_graph"; }
    double value(const std::vector<Cx<double>>& z) const override {
        return e_.eval(z, z[n_ - 1].re).re - z[n_ - 1].im;
    }
    cd value(const std::vector<Cx<cd>>& z) const override { return e_.eval(z, z[n_ - 1].re).re - z[n_ - 1].im; }

private:
    Expression e_;
    int n_;
};

template <class T>
std::vector<Cx<T>> apply_mobius(const MatC& M, const std::vector<Cx<T>>& z) {
    const int n = static_cast<int>(z.size());
    std::vector<Cx<T>> num(n + 1);
    for (int a = 0; a <= n; ++a) {
        Cx<T> acc = from_cd<T>(M(a, 0));
        for (int j = 0; j < n; ++j) acc = acc + from_cd<T>(M(a, j + 1)) * z[j];
        num[a] = acc;
    }
    std::vector<Cx<T>> out(n);
    for (int j = 0; j < n; ++j) out[j] = num[j + 1] / num[0];
    return out;
}

class MobiusImage final : public Hypersurface {
public:
    MobiusImage(SurfacePtr base, MobiusMap M) : base_(std::move(base)), M_(std::move(M)), Minv_(M_.inverse()) {}
    int dim() const override { return base_->dim(); }
    std::string family() const override { return "mobius_image(" + base_->family() + ")"; }
    double value(const std::vector<Cx<double>>& z) const override { return base_->value(apply_mobius(Minv_.M, z)); }
    cd value(const std::vector<Cx<cd>>& z) const override { return base_->value(apply_mobius(Minv_.M, z)); }
    bool in_chart(const VecC& z) const override {
        if (!z.allFinite() || std::abs(Minv_.denominator(z)) < 1e-12) return false;
        return base_->in_chart(Minv_.apply(z));
    }
    std::optional<Jet2> analytic_jet(const VecC& z) const override {
        VecC w = Minv_.apply(z);
        auto j = base_->analytic_jet(w);
        if (!j) return std::nullopt;
        return pullback_jet(*j, Minv_.jacobian(z), Minv_.hessians(z));
    }
    bool curve_point(double s, cd& z, cd& dz) const override {
        cd w, dw;
        if (dim() != 1 || !base_->curve_point(s, w, dw)) return false;
        VecC wv = VecC::Constant(1, w);
        z = M_.apply(wv)(0);
        dz = M_.jacobian(wv)(0, 0) * dw;
        return true;
    }

private:
    SurfacePtr base_;
    MobiusMap M_, Minv_;
};

}  // namespace

SurfacePtr make_sphere(int n, double radius) { return std::make_shared<Sphere>(n, radius); }
SurfacePtr make_circle(double radius, cd center) { return std::make_shared<Circle>(radius, center); }
SurfacePtr make_ellipse(double a, double b) { return std::make_shared<Ellipse>(a, b); }
SurfacePtr make_lp_sphere(double p) { return std::make_shared<LpSphere>(p); }
SurfacePtr make_power_graph(double gamma) { return std::make_shared<PowerGraph>(gamma); }
SurfacePtr make_quadric(const MatC& alpha, const MatC& beta) {
    if (alpha.rows() != alpha.cols() || beta.rows() != alpha.rows() || beta.cols() != alpha.rows())
        throw std::invalid_argument("quadric: alpha and beta must be square of equal size");
    if ((alpha - alpha.adjoint()).norm() > 1e-12) throw std::invalid_argument("quadric: alpha must be hermitian");
    if ((beta - beta.transpose()).norm() > 1e-12) throw std::invalid_argument("quadric: beta must be symmetric");
    return std::make_shared<Quadric>(alpha, beta);
}
SurfacePtr make_sigma3(double alpha, cd beta) {
    return make_quadric(MatC::Constant(1, 1, alpha), MatC::Constant(1, 1, beta));
}
SurfacePtr make_tube(double c) { return std::make_shared<Tube>(c); }
SurfacePtr make_custom_graph(const std::string& expr, int n) { return std::make_shared<CustomGraph>(expr, n); }
SurfacePtr make_mobius_image(SurfacePtr base, const MobiusMap& M) {
    return std::make_shared<MobiusImage>(std::move(base), M);
}

// ------------------------------------------------------------------ Mobius

MobiusMap MobiusMap::identity(int n) { return MobiusMap(MatC::Identity(n + 1, n + 1)); }

MobiusMap MobiusMap::translation(const VecC& a) {
    MatC M = MatC::Identity(a.size() + 1, a.size() + 1);
    M.block(1, 0, a.size(), 1) = a;
    return MobiusMap(M);
}

MobiusMap MobiusMap::affine(const VecC& p, const MatC& T, int lift) {
    const int n = static_cast<int>(p.size());
    MatC M = MatC::Zero(n + 1, n + 1);
    M(0, 0) = 1;
    M.block(1, 0, n, 1) = p;
    M.block(1, 1, n, n) = T;
    cd det = T.determinant();
    if (std::abs(det) < 1e-300) throw NumericalError("mobius: singular affine block");
    cd s = std::exp(-std::log(det) / double(n + 1)) * std::exp(2.0 * kPi * kI * double(lift) / double(n + 1));
    return MobiusMap(s * M);
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(M.inverse()); }

cd MobiusMap::denominator(const VecC& z) const {
    return M(0, 0) + (M.block(0, 1, 1, z.size()) * z)(0, 0);
}

VecC MobiusMap::apply(const VecC& z) const {
    cd d = denominator(z);
    if (std::abs(d) < 1e-14 * M.norm()) throw NumericalError("mobius: point maps to the hyperplane at infinity");
    VecC num = M.block(1, 0, z.size(), 1) + M.block(1, 1, z.size(), z.size()) * z;
    return num / d;
}

MatC MobiusMap::jacobian(const VecC& z) const {
    const int n = static_cast<int>(z.size());
    cd d = denominator(z);
    VecC w = apply(z);
    MatC J(n, n);
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j) J(a, j) = (M(a + 1, j + 1) - w(a) * M(0, j + 1)) / d;
    return J;
}

std::vector<MatC> MobiusMap::hessians(const VecC& z) const {
    const int n = static_cast<int>(z.size());
    cd d = denominator(z);
    MatC J = jacobian(z);
    std::vector<MatC> H(n, MatC(n, n));
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) H[a](j, k) = -(J(a, k) * M(0, j + 1) + J(a, j) * M(0, k + 1)) / d;
    return H;
}

double MobiusMap::det_residual() const { return std::abs(M.determinant() - 1.0); }

VecC mobius_pullback_section(const MobiusMap& M, const std::vector<VecC>& nodes, const VecC& f_at_images, int j,
                             int k) {
    VecC out(f_at_images.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        cd d = M.denominator(nodes[i]);
        if (std::abs(d) < 1e-300) throw NumericalError("pullback: denominator vanishes at a node");
        out(i) = std::pow(d, j) * std::pow(std::conj(d), k) * f_at_images(i);
    }
    return out;
}

Jet2 pullback_jet(const Jet2& j, const MatC& DG, const std::vector<MatC>& D2G) {
    Jet2 o;
    o.r = j.r;
    o.grad = DG.transpose() * j.grad;
    o.hess_holo = DG.transpose() * j.hess_holo * DG;
    for (size_t a = 0; a < D2G.size(); ++a) o.hess_holo += j.grad(a) * D2G[a];
    o.hess_mixed = DG.transpose() * j.hess_mixed * DG.conjugate();
    return o;
}

// ------------------------------------------------------------ normal frames

MatC complex_tangent_basis(const VecC& grad) {
    const int n = static_cast<int>(grad.size());
    Eigen::HouseholderQR<MatC> qr(MatC(grad.conjugate()));
    MatC Q = qr.householderQ() * MatC::Identity(n, n);
    return Q.rightCols(n - 1);
}

void takagi(const MatC& A, MatC& V, VecR& sigma) {
    const int m = static_cast<int>(A.rows());
    V.resize(m, m);
    sigma.resize(m);
    if (m == 0) return;
    MatR big(2 * m, 2 * m);
    big << A.real(), A.imag(), A.imag(), -A.real();
    Eigen::SelfAdjointEigenSolver<MatR> es(big);
    const VecR& ev = es.eigenvalues();  // ascending
    const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    // candidates: positive eigenvalues (descending) first, then the null block
    std::vector<int> order;
    for (int i = 2 * m - 1; i >= 0; --i)
        if (ev(i) > tol) order.push_back(i);
    for (int i = 2 * m - 1; i >= 0; --i)
        if (std::abs(ev(i)) <= tol) order.push_back(i);
    int got = 0;
    for (int idx : order) {
        if (got == m) break;
        VecC v(m);
        for (int a = 0; a < m; ++a) v(a) = cd(es.eigenvectors()(a, idx), es.eigenvectors()(a + m, idx));
        for (int b = 0; b < got; ++b) v -= V.col(b).dot(v) * V.col(b);
        for (int b = 0; b < got; ++b) v -= V.col(b).dot(v) * V.col(b);
        double nv = v.norm();
        if (nv < 1e-6) continue;
        V.col(got) = v / nv;
        sigma(got) = std::max(ev(idx), 0.0);
        ++got;
    }
    if (got < m) throw NumericalError("takagi: could not assemble a full basis");
}

NormalFrame normalize_at(const Jet2& jet, const VecC& p) {
    const int n = jet.n();
    const double g = jet.grad.norm();
    if (g < 1e-14) throw NumericalError("normalize_at: vanishing gradient");
    NormalFrame F;
    F.point = p;
    F.grad_norm = g;
    F.T = MatC::Zero(n, n);
    F.T.col(n - 1) = kI * jet.grad.conjugate() / g;
    const int m = n - 1;
    F.alpha.resize(m);
    F.beta.resize(m);
    F.strongly_convex = true;
    if (m == 0) return F;

    MatC E = complex_tangent_basis(jet.grad);
    MatC levi = E.adjoint() * jet.hess_mixed.conjugate() * E / (2 * g);
    levi = 0.5 * (levi + levi.adjoint()).eval();
    MatC q = E.transpose() * jet.hess_holo * E / (2 * g);
    Eigen::SelfAdjointEigenSolver<MatC> es(levi);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin <= 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
        throw NumericalError("normalize_at: Levi form not positive definite");
    MatC P = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
             es.eigenvectors().adjoint();
    MatC A = P.conjugate() * q * P;
    A = 0.5 * (A + A.transpose()).eval();
    MatC V;
    VecR sig;
    takagi(A, V, sig);
    MatC C = P * V.conjugate();
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    VecR a(m), b(m);
    for (int j = 0; j < m; ++j) {
        double nrm2 = C.col(j).squaredNorm();
        a(j) = 1 / nrm2;
        b(j) = sig(j) / nrm2;
    }
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) {
        if (std::abs(sig(x) - sig(y)) > 1e-12) return sig(x) > sig(y);
        return b(x) > b(y);
    });
    for (int j = 0; j < m; ++j) {
        int s = idx[j];
        F.alpha(j) = a(s);
        F.beta(j) = b(s);
        F.T.col(j) = E * C.col(s) / C.col(s).norm();
        if (!(b(s) < a(s))) F.strongly_convex = false;
    }
    return F;
}

NormalFrame normalize_at(const Hypersurface& s, const VecC& p) { return normalize_at(jet2(s, p), p); }

VecR NormalFrame::dilation() const {
    if (!strongly_convex) throw NumericalError("normal frame: not strongly C-linearly convex, no dilation");
    VecR d(alpha.size());
    for (Eigen::Index j = 0; j < alpha.size(); ++j)
        d(j) = 1 / std::sqrt(2 * std::sqrt(alpha(j) * alpha(j) - beta(j) * beta(j)));
    return d;
}

VecR NormalFrame::alpha_hat() const { return alpha.cwiseProduct(dilation().cwiseAbs2()); }
VecR NormalFrame::beta_hat() const { return beta.cwiseProduct(dilation().cwiseAbs2()); }

MatC NormalFrame::T_hat() const {
    MatC Th = T;
    VecR d = dilation();
    for (Eigen::Index j = 0; j < d.size(); ++j) Th.col(j) *= d(j);
    return Th;
}

MobiusMap NormalFrame::from_model(bool dilate, int lift) const {
    return MobiusMap::affine(point, dilate ? T_hat() : T, lift);
}

// ------------------------------------------------------------------ meshes

void gauss_legendre(int n, double a, double b, VecR& x, VecR& w) {
    MatR J = MatR::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double beta = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = J(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<MatR> es(J);
    x.resize(n);
    w.resize(n);
    for (int k = 0; k < n; ++k) {
        x(k) = 0.5 * (b - a) * es.eigenvalues()(k) + 0.5 * (b + a);
        double v0 = es.eigenvectors()(0, k);
        w(k) = (b - a) * v0 * v0;
    }
}

QuadratureMesh mesh(SurfacePtr s, int resolution, JetMode mode, std::optional<ChartWindow> window) {
    if (resolution < 2) throw std::invalid_argument("mesh: resolution must be >= 2");
    QuadratureMesh Q;
    Q.n = s->dim();
    Q.resolution = resolution;
    Q.surface = s;
    cd z0, dz0;
    double rho[2], drho[2];
    if (Q.n == 1 && s->curve_point(0.0, z0, dz0)) {
        Q.layout = MeshLayout::Curve;
        const int N = resolution;
        Q.h = 2 * kPi / N;
        Q.dzds.resize(N);
        Q.weights.resize(N);
        for (int k = 0; k < N; ++k) {
            cd z, dz;
            s->curve_point(Q.h * k, z, dz);
            if (std::abs(dz) < 1e-14) throw NumericalError("mesh: degenerate parametrization");
            Q.nodes.push_back(VecC::Constant(1, z));
            Q.dzds(k) = dz;
            Q.weights(k) = std::abs(dz) * Q.h;
        }
    } else if (Q.n == 2 && s->reinhardt_profile(0.5, rho, drho)) {
        Q.layout = MeshLayout::Torus;
        Q.nth = resolution;
        Q.nt = std::max(4, resolution / 2);
        gauss_legendre(Q.nt, 0.0, kPi / 2, Q.t, Q.tw);
        Q.rho.resize(Q.nt, 2);
        Q.drho.resize(Q.nt, 2);
        const double dth = 2 * kPi / Q.nth;
        Q.weights.resize(Q.nt * Q.nth * Q.nth);
        for (int it = 0; it < Q.nt; ++it) {
            s->reinhardt_profile(Q.t(it), rho, drho);
            Q.rho.row(it) << rho[0], rho[1];
            Q.drho.row(it) << drho[0], drho[1];
            double jac = std::hypot(drho[0], drho[1]) * rho[0] * rho[1];
            if (!(jac > 0)) throw NumericalError("mesh: degenerate parametrization");
            for (int k1 = 0; k1 < Q.nth; ++k1)
                for (int k2 = 0; k2 < Q.nth; ++k2) {
                    VecC z(2);
                    z << rho[0] * std::exp(kI * (dth * k1)), rho[1] * std::exp(kI * (dth * k2));
                    Q.nodes.push_back(z);
                    Q.weights(Q.torus_index(it, k1, k2)) = Q.tw(it) * jac * dth * dth;
                }
        }
    } else if (s->is_graph()) {
        Q.layout = MeshLayout::GraphWindow;
        ChartWindow W;
        if (window) W = *window;
        else if (auto dw = s->default_window()) W = *dw;
        else throw std::invalid_argument("mesh: graph surface needs a chart window");
        const int m = 2 * Q.n - 1;
        if (W.lo.size() != m || W.hi.size() != m) throw std::invalid_argument("mesh: chart window has wrong size");
        std::vector<VecR> xs(m), ws(m);
        for (int a = 0; a < m; ++a) gauss_legendre(resolution, W.lo(a), W.hi(a), xs[a], ws[a]);
        long total = 1;
        for (int a = 0; a < m; ++a) total *= resolution;
        std::vector<double> wts;
        for (long idx = 0; idx < total; ++idx) {
            long rem = idx;
            VecR u(m);
            double w = 1;
            for (int a = m - 1; a >= 0; --a) {
                int k = static_cast<int>(rem % resolution);
                rem /= resolution;
                u(a) = xs[a](k);
                w *= ws[a](k);
            }
            VecC z(Q.n);
            for (int j = 0; j < Q.n - 1; ++j) z(j) = cd(u(2 * j), u(2 * j + 1));
            z(Q.n - 1) = cd(u(m - 1), 0.0);
            std::vector<Cx<double>> zc(Q.n);
            for (int j = 0; j < Q.n; ++j) zc[j] = {z(j).real(), z(j).imag()};
            z(Q.n - 1) = cd(u(m - 1), s->value(zc));
            Q.nodes.push_back(z);
            wts.push_back(w);
        }
        Q.weights = Eigen::Map<VecR>(wts.data(), static_cast<Eigen::Index>(wts.size()));
    } else {
        throw std::invalid_argument("mesh: no parametrization available for " + s->family());
    }
    Q.jets.reserve(Q.nodes.size());
    for (size_t i = 0; i < Q.nodes.size(); ++i) {
        Jet2 j = jet2(*s, Q.nodes[i], mode);
        VecR g = j.real_grad();
        if (Q.layout == MeshLayout::GraphWindow) Q.weights(i) *= g.norm();
        Q.normals.push_back(g / g.norm());
        Q.jets.push_back(std::move(j));
    }
    return Q;
}

}  // namespace leray
