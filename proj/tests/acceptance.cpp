#include "leraykit/duality.hpp"
#include "leraykit/invariants.hpp"
#include "leraykit/pairing.hpp"
#include "leraykit/rigid.hpp"
#include "leraykit/transforms.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace leray;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what, double value, double bound) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s%s=%.3e(%s%.2g) ", ok ? "" : "!", what.c_str(), value, ok ? "ok " : "> ",
                      bound);
        detail << buf;
        pass = pass && ok;
    }
    void below(const std::string& what, double value, double bound) {
        require(std::isfinite(value) && value < bound, what, value, bound);
    }
    void note(const std::string& s) { detail << s << ' '; }
};

std::shared_ptr<const QuadratureMesh> make_mesh(SurfacePtr s, int res, JetMode mode = JetMode::Auto) {
    return std::make_shared<QuadratureMesh>(mesh(s, res, mode));
}

PairingContext context(SurfacePtr s, int res) { return make_pairing_context(make_mesh(s, res)); }

MobiusMap random_unimodular(std::mt19937_64& rng, int n, double eps) {
    std::normal_distribution<double> nd;
    MatC A = MatC::Identity(n + 1, n + 1);
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) A(a, b) += eps * cd(nd(rng), nd(rng));
    A /= std::pow(A.determinant(), 1.0 / (n + 1));
    return MobiusMap(A);
}

VecC sample(const PairingContext& c, const std::function<cd(const VecC&)>& f) {
    VecC v(c.size());
    for (int i = 0; i < c.size(); ++i) v(i) = f(c.mesh->nodes[i]);
    return v;
}

// random polynomial in z and conj z of degree <= 2
std::function<cd(const VecC&)> random_section(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    int vars = 2 * n;
    std::vector<cd> coef((vars + 1) * (vars + 1));
    for (auto& x : coef) x = cd(nd(rng), nd(rng));
    return [coef, n, vars](const VecC& z) {
        std::vector<cd> v{cd(1)};
        for (int k = 0; k < n; ++k) {
            v.push_back(z(k));
            v.push_back(std::conj(z(k)));
        }
        cd acc = 0;
        for (int a = 0; a <= vars; ++a)
            for (int b = a; b <= vars; ++b) acc += coef[a * (vars + 1) + b] * v[a] * v[b];
        return acc;
    };
}

double max_abs_b_error(const QuadratureMesh& m, double expected) {
    double e = 0;
    for (const auto& j : m.jets) e = std::max(e, std::abs(std::abs(beltrami_b(j)) - expected));
    return e;
}

// ------------------------------------------------------------------ criteria

Outcome closed_form_invariants() {
    Outcome o;
    struct Case {
        std::string name;
        SurfacePtr s;
        double expected;
        int res;
    };
    std::vector<Case> cases;
    for (double p : {1.5, 3.0, 4.0}) cases.push_back({"lp" + std::to_string(p).substr(0, 3), make_lp_sphere(p), std::abs(2 - p) / p, 8});
    for (double g : {1.5, 3.0}) cases.push_back({"pow" + std::to_string(g).substr(0, 3), make_power_graph(g), std::abs(g - 2) / g, 5});
    cases.push_back({"quad(1,0.4)", make_sigma3(1.0, 0.4), 0.4, 5});
    cases.push_back({"quad(2,0.6i)", make_sigma3(2.0, cd(0, 0.6)), 0.3, 5});
    cases.push_back({"tube", make_tube(1.5), 1.0, 5});
    for (const auto& c : cases) {
        o.below(c.name + ":analytic", max_abs_b_error(*make_mesh(c.s, c.res, JetMode::Analytic), c.expected), 1e-6);
        o.below(c.name + ":numeric", max_abs_b_error(*make_mesh(c.s, c.res, JetMode::Numeric), c.expected), 1e-4);
    }
    return o;
}

Outcome phi_consistency() {
    Outcome o;
    std::mt19937_64 rng(21);
    MatC alpha(2, 2), beta(2, 2);
    alpha << 1.0, cd(0.2, 0.1), cd(0.2, -0.1), 1.5;
    beta << 0.3, cd(0, 0.1), cd(0, 0.1), cd(0.2, 0.2);
    std::vector<std::pair<std::string, SurfacePtr>> fams = {
        {"sphere", make_sphere(2)},
        {"lp3", make_lp_sphere(3.0)},
        {"lp1.5", make_lp_sphere(1.5)},
        {"pow3", make_power_graph(3.0)},
        {"quad", make_sigma3(1.0, cd(0.3, 0.2))},
        {"custom", make_custom_graph("abs2(z1) + 0.2*abs2(z1)^2 + re(0.3*z1^2)", 2)},
        {"quad3", make_quadric(alpha, beta)},
    };
    std::vector<std::pair<std::string, std::vector<Jet2>>> sets;
    for (const auto& [name, s] : fams) sets.push_back({name, make_mesh(s, s->dim() == 3 ? 3 : 6)->jets});
    {
        // Mobius images carry no parametrization: map the nodes of the base
        MobiusMap M = random_unimodular(rng, 2, 0.1);
        auto base = make_lp_sphere(3.0);
        auto img = make_mobius_image(base, M);
        std::vector<Jet2> js;
        auto bm = make_mesh(base, 6);
        for (const auto& z : bm->nodes) js.push_back(jet2(*img, M.apply(z)));
        sets.push_back({"mobius(lp3)", js});
    }
    for (const auto& [name, jets] : sets) {
        const int n = jets.front().n();
        double id = 0, det = 0;
        for (const auto& j : jets) {
            PointInvariants pi = point_invariants(j);
            if (n == 2) id = std::max(id, std::abs(pi.phi - (1 - std::norm(pi.b))));
            det = std::max(det, std::abs(pi.phi_det - pi.phi));
        }
        if (n == 2) o.below(name + ":1-|b|^2", id, 1e-10);
        o.below(name + ":det", det, 1e-6);
    }
    return o;
}

Outcome duality() {
    Outcome o;
    std::vector<std::pair<std::string, SurfacePtr>> fams = {
        {"lp3", make_lp_sphere(3.0)}, {"lp1.5", make_lp_sphere(1.5)}, {"sphere", make_sphere(2)},
        {"ellipse", make_ellipse(2.0, 1.0)}, {"quad", make_sigma3(1.0, cd(0.3, 0.2))}};
    for (const auto& [name, s] : fams) {
        auto m = make_mesh(s, s->dim() == 1 ? 32 : 6);
        double rt = 0, tr = 0;
        for (const auto& z : m->nodes) {
            rt = std::max(rt, (roundtrip(*s, z) - z).cwiseAbs().maxCoeff());
            TransportResidual t = transport_check(*s, z);
            tr = std::max({tr, t.b, t.phi});
        }
        o.below(name + ":roundtrip", rt, 1e-7);
        o.below(name + ":transport", tr, 1e-6);
    }
    for (double p : {3.0, 1.5}) {
        auto m = make_mesh(make_lp_sphere(p), 6);
        double e = 0, eprimal = 0;
        for (int i = 0; i < m->size(); ++i) {
            eprimal = std::max(eprimal, std::abs(std::abs(beltrami_b(m->jets[i])) - 1.0 / 3));
            e = std::max(e, std::abs(std::abs(beltrami_b(dual_jet(m->jets[i], m->nodes[i]).jet)) - 1.0 / 3));
        }
        o.below("lp" + std::to_string(p).substr(0, 3) + ":|b|", eprimal, 1e-6);
        o.below("lp" + std::to_string(p).substr(0, 3) + ":|b*|", e, 1e-6);
    }
    return o;
}

Outcome curve_operators() {
    Outcome o;
    std::mt19937_64 rng(4);
    PairingContext circ = context(make_circle(1.0), 128);
    DiscreteOperator Cc = cauchy_matrix(circ, +1);
    o.below("circle:|norm-1|", std::abs(operator_norm(Cc) - 1), 1e-6);
    double n256 = operator_norm(cauchy_matrix(context(make_ellipse(2.0, 1.0), 256), +1));
    PairingContext ell = context(make_ellipse(2.0, 1.0), 512);
    DiscreteOperator Ce = cauchy_matrix(ell, +1), Cm = cauchy_matrix(ell, -1);
    double n512 = operator_norm(Ce);
    o.note("ellipse:norm=" + std::to_string(n512));
    o.below("ellipse:stability", std::abs(n512 - n256), 1e-4);
    o.require(n512 > 1, "ellipse:norm-1", n512 - 1, 0);
    o.below("circle:defect", projection_defect(Cc), 1e-6);
    o.below("ellipse:defect", projection_defect(Ce), 1e-6);
    double pl = 0;
    for (int t = 0; t < 4; ++t) {
        for (const PairingContext* c : {&circ, &ell}) {
            VecC f = sample(*c, random_section(rng, 1)), g = sample(*c, random_section(rng, 1));
            pl = std::max(pl, plemelj_residual(*c, f, g) / (norm_sharp(*c, f) * norm_sharp(*c, g)));
        }
    }
    o.below("plemelj", pl, 1e-6);
    const int N = ell.size();
    o.below("direct-sum", (Ce.dense + Cm.dense - MatC::Identity(N, N)).cwiseAbs().maxCoeff(), 1e-8);
    return o;
}

double curve_infsup(const PairingContext& c, int degree) {
    return infsup(c, hardy_basis(c, degree), dual_hardy_basis(c, default_dual_degree(c, degree)));
}

Outcome norm_efficiency() {
    Outcome o;
    PairingContext ell = context(make_ellipse(2.0, 1.0), 512);
    double is = curve_infsup(ell, 12), nrm = operator_norm(cauchy_matrix(ell, +1));
    o.note("ellipse:infsup=" + std::to_string(is) + " 1/norm=" + std::to_string(1 / nrm));
    o.below("ellipse:|infsup-1/norm|", std::abs(is - 1 / nrm), 2e-3);
    PairingContext circ = context(make_circle(1.0), 512);
    double ic = curve_infsup(circ, 12), nc = operator_norm(cauchy_matrix(circ, +1));
    o.below("circle:|infsup-1/norm|", std::abs(ic - 1 / nc), 1e-4);
    double prev = 0;
    bool mono = true;
    std::string seq;
    for (double a : {2.0, 1.5, 1.25, 1.1}) {
        double v = curve_infsup(context(make_ellipse(a, 1.0), 512), 12);
        seq += std::to_string(v).substr(0, 7) + (a == 1.1 ? "" : ",");
        mono = mono && v > prev && v < 1;
        prev = v;
    }
    o.note("family:" + seq);
    o.require(mono && ic > prev, "family:monotone", mono ? 1 : 0, 1);
    return o;
}

Outcome sphere_leray() {
    Outcome o;
    std::mt19937_64 rng(8);
    PairingContext c = context(make_sphere(2), 48);
    DiscreteOperator L = leray_matrix(c), Ld = dual_leray_matrix(c);
    double rep = 0;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b) {
            VecC f = sample(c, [a, b](const VecC& z) { return std::pow(z(0), a) * std::pow(z(1), b); });
            rep = std::max(rep, (L.apply(f) - f).cwiseAbs().maxCoeff());
        }
    o.below("monomials", rep, 5e-3);
    o.below("|norm-1|", std::abs(operator_norm(L) - 1), 1e-2);
    double adj = 0, agree = 0;
    for (int t = 0; t < 4; ++t) {
        VecC f = sample(c, random_section(rng, 2));
        VecC g(c.size());
        auto gs = random_section(rng, 2);
        for (int i = 0; i < c.size(); ++i) g(i) = gs(c.dual.eta[i]);
        adj = std::max(adj, adjoint_residual(c, L, Ld, f, g).residual / (norm_sharp(c, f) * norm_sharp_dual(c, g)));
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (int k = 0; k < 4; ++k) {
            VecC z(2);
            z << cd(u(rng), u(rng)), cd(u(rng), u(rng));
            cd a = leray_classical(c, f, z), b = leray_via_pairing(c, f, z);
            agree = std::max(agree, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
    }
    o.below("adjoint", adj, 1e-2);
    o.below("kernel-forms", agree, 1e-3);
    return o;
}

Outcome transfer_pairing() {
    Outcome o;
    std::mt19937_64 rng(12);
    for (auto [name, s] : {std::pair{std::string("sphere"), make_sphere(2)}, {std::string("lp3"), make_lp_sphere(3.0)}}) {
        PairingContext c = context(s, 16);
        TransferResiduals r = transfer_residuals(c);
        o.below(name + ":isometry", r.isometry, 1e-5);
        o.below(name + ":double", r.double_transfer, 1e-5);
        double cs = 0, sym = 0;
        std::normal_distribution<double> nd;
        for (int t = 0; t < 6; ++t) {
            VecC f = sample(c, random_section(rng, 2));
            auto gs = random_section(rng, 2);
            VecC g(c.size());
            for (int i = 0; i < c.size(); ++i) g(i) = gs(c.dual.eta[i]);
            if (t % 2) {
                // arbitrary nodal data as well as smooth sections
                for (int i = 0; i < c.size(); ++i) g(i) = cd(nd(rng), nd(rng));
            }
            cd a = pair(c, f, g), b = pair_dualside(c, g, f);
            sym = std::max(sym, std::abs(a - b) / std::max(1.0, std::abs(a)));
            cs = std::max(cs, std::abs(a) / (norm_sharp(c, f) * norm_sharp_dual(c, g)) - 1);
        }
        // the extremal partner attains the bound
        VecC f = sample(c, random_section(rng, 2)), g(c.size());
        for (int i = 0; i < c.size(); ++i)
            g(i) = std::conj(f(i) * c.tau(i) * c.fef(i) * c.dS(i)) / (c.sharp_dual(i) * c.dS_dual(i));
        double ext = std::abs(pair(c, f, g)) / (norm_sharp(c, f) * norm_sharp_dual(c, g));
        cs = std::max(cs, ext - 1);
        o.below(name + ":cauchy-schwarz-excess", std::max(cs, 0.0), 1e-8);
        o.below(name + ":|extremal-1|", std::abs(ext - 1), 1e-6);
        o.below(name + ":symmetry", sym, 1e-6);
    }
    return o;
}

Grid2D rigid_window(double h) { return Grid2D::with_spacing(0.5, 1.5, -0.5, 0.5, h); }

Outcome rigid() {
    Outcome o;
    RigidSurfaceField k = rigid_reconstruct(make_lambda(rigid_window(1.0 / 256), [](cd) { return cd(0.3, 0); }));
    o.below("const:b", k.b_error, 1e-4);
    // Beltrami field of Im z2 = |z1|^3 read off the surface itself
    auto surf = make_power_graph(3.0);
    auto lam = [&](cd z) {
        VecC p(2);
        p << z, cd(0, std::pow(std::abs(z), 3));
        return beltrami_b(*surf, p);
    };
    double r32 = cropped_max(rigid_residual(make_lambda(rigid_window(1.0 / 32), lam)), 0.2);
    double r128 = cropped_max(rigid_residual(make_lambda(rigid_window(1.0 / 128), lam)), 0.2);
    double order = std::log(r32 / r128) / std::log(4.0);
    o.require(order >= 1.8, "pow3:order", order, 1.8);
    RigidSurfaceField a = rigid_reconstruct(make_lambda(rigid_window(1.0 / 64), [](cd) { return cd(0.3, 0); }));
    double pde = std::log(a.pde_residual / k.pde_residual) / std::log(4.0);
    o.require(pde >= 1.8, "pde:order", pde, 1.8);
    return o;
}

Outcome mobius_invariance() {
    Outcome o;
    std::mt19937_64 rng(99);
    auto base = make_lp_sphere(3.0);
    auto bm = make_mesh(base, 4);
    double eb = 0, ep = 0;
    for (int t = 0; t < 5; ++t) {
        MobiusMap M = random_unimodular(rng, 2, 0.1);
        auto img = make_mobius_image(base, M);
        for (int i = 0; i < bm->size(); i += 3) {
            VecC w = M.apply(bm->nodes[i]);
            Jet2 j = jet2(*img, w);
            eb = std::max(eb, std::abs(std::abs(beltrami_b(j)) - std::abs(beltrami_b(bm->jets[i]))));
            ep = std::max(ep, std::abs(phi(j) - phi(bm->jets[i])));
        }
    }
    o.below("|b|", eb, 1e-6);
    o.below("phi", ep, 1e-6);
    double en = 0;
    for (int t = 0; t < 5; ++t) {
        MobiusMap M = random_unimodular(rng, 1, 0.1);
        PairingContext c = context(make_mobius_image(make_circle(1.0), M), 256);
        en = std::max(en, std::abs(operator_norm(cauchy_matrix(c, +1)) - 1));
    }
    o.below("circle-image:|norm-1|", en, 1e-6);
    return o;
}

}  // namespace

int main() {
    using Fn = Outcome (*)();
    std::vector<std::pair<std::string, Fn>> criteria = {
        {"closed-form invariants", closed_form_invariants},
        {"phi consistency", phi_consistency},
        {"duality", duality},
        {"curve operator suite", curve_operators},
        {"norm-efficiency identity", norm_efficiency},
        {"Leray transform of the sphere", sphere_leray},
        {"transfer and pairing", transfer_pairing},
        {"rigid module", rigid},
        {"Mobius invariance", mobius_invariance},
    };
    int failures = 0;
    for (size_t k = 0; k < criteria.size(); ++k) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %zu %s: %s [%.1fs] %s\n", k + 1, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                    secs, o.detail.str().c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
