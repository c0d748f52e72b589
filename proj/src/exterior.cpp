#include "leraykit/exterior.hpp"

#include <bit>

namespace leray {

namespace {

// forms over R^{2n}: coefficient per sorted index set (bitmask)
using Form = std::vector<cd>;

int sign_of_merge(unsigned a, unsigned b) {
    // parity of pairs (i in a, j in b) with i > j
    int swaps = 0;
    for (unsigned bb = b; bb; bb &= bb - 1) {
        unsigned j = static_cast<unsigned>(std::countr_zero(bb));
        swaps += std::popcount(a >> (j + 1));
    }
    return (swaps & 1) ? -1 : 1;
}

Form wedge(const Form& x, const Form& y) {
    Form out(x.size(), cd(0));
    for (unsigned a = 0; a < x.size(); ++a) {
        if (x[a] == cd(0)) continue;
        for (unsigned b = 0; b < y.size(); ++b) {
            if (y[b] == cd(0) || (a & b)) continue;
            out[a | b] += double(sign_of_merge(a, b)) * x[a] * y[b];
        }
    }
    return out;
}

Form one_form(int dim, int coord, cd c) {
    Form f(size_t(1) << dim, cd(0));
    f[size_t(1) << coord] = c;
    return f;
}

Form add(const Form& x, const Form& y) {
    Form o(x);
    for (size_t k = 0; k < o.size(); ++k) o[k] += y[k];
    return o;
}

Form dz(int dim, int j, bool bar) {
    return add(one_form(dim, 2 * j, 1.0), one_form(dim, 2 * j + 1, bar ? -kI : kI));
}

}  // namespace

std::vector<VecR> oriented_tangent_frame(const VecR& normal) {
    const int m = static_cast<int>(normal.size());
    MatR A(m, 1);
    A.col(0) = normal.normalized();
    Eigen::HouseholderQR<MatR> qr(A);
    MatR Q = qr.householderQ() * MatR::Identity(m, m);
    if (Q.col(0).dot(A.col(0)) < 0) Q.col(0) = -Q.col(0);
    MatR F(m, m);
    F.col(0) = A.col(0);
    F.rightCols(m - 1) = Q.rightCols(m - 1);
    if (F.determinant() < 0) F.col(m - 1) = -F.col(m - 1);
    std::vector<VecR> t;
    for (int k = 1; k < m; ++k) t.push_back(F.col(k));
    return t;
}

cd leray_form(const Jet2& j, const std::vector<VecR>& vectors) {
    const int n = j.n();
    const int dim = 2 * n;
    Form dr(size_t(1) << dim, cd(0));
    for (int a = 0; a < n; ++a) {
        Form t = dz(dim, a, false);
        for (auto& c : t) c *= j.grad(a);
        dr = add(dr, t);
    }
    Form theta(size_t(1) << dim, cd(0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Form t = wedge(dz(dim, b, true), dz(dim, a, false));
            for (auto& c : t) c *= j.hess_mixed(a, b);
            theta = add(theta, t);
        }
    Form w = dr;
    for (int k = 1; k < n; ++k) w = wedge(w, theta);
    const int p = dim - 1;
    if (static_cast<int>(vectors.size()) != p) throw std::invalid_argument("leray_form: need 2n-1 vectors");
    cd total = 0;
    for (unsigned mask = 0; mask < w.size(); ++mask) {
        if (std::popcount(mask) != p || w[mask] == cd(0)) continue;
        MatR M(p, p);
        int row = 0;
        for (int c = 0; c < dim; ++c) {
            if (!(mask & (1u << c))) continue;
            for (int q = 0; q < p; ++q) M(row, q) = vectors[q](c);
            ++row;
        }
        total += w[mask] * M.determinant();
    }
    return total;
}

cd leray_density(const Jet2& j) {
    VecR g = j.real_grad();
    return leray_form(j, oriented_tangent_frame(g / g.norm()));
}

}  // namespace leray
