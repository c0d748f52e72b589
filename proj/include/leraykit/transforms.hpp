#pragma once

#include "leraykit/pairing.hpp"

namespace leray {

// One Fourier block of a rotation-equivariant operator on a torus mesh: input
// mode (m1, m2) is mapped to the same output mode through an nt x nt matrix.
struct ModeBlock {
    int m1 = 0, m2 = 0;
    MatC B;
};

// Discretized operator acting on node samples, either as a dense matrix or,
// on torus meshes of Reinhardt surfaces, as a list of mode blocks (modes not
// listed are annihilated).
struct DiscreteOperator {
    int N = 0;
    MatC dense;
    int nt = 0, nth = 0;
    std::vector<ModeBlock> blocks;
    VecR w_in, w_out;  // sharp quadrature weights of domain and codomain
    // curve operators: operator_norm restricts inputs to parameter Fourier modes |k| <= band
    // (0 means no restriction); modes near the Nyquist frequency alias under non-uniform speed
    int band = 0;
    bool is_blocked() const { return dense.size() == 0; }
    VecC apply(const VecC& f) const;
    MatC to_dense() const;
    static DiscreteOperator identity(const VecR& w);
};

// n = 1: the matrix S of (1/2 pi i) int (f(w) - f(z)) / (w - z) dw on a closed
// curve sampled on a uniform periodic parameter grid, with the curve oriented
// around its bounded side; C+ = I + S and C- = -S
MatC cauchy_singular_part(const std::vector<cd>& z, const std::vector<cd>& dz, double h);
DiscreteOperator cauchy_matrix(const PairingContext& c, int sign);

// int f g dz along the curve, and the Plemelj discrepancy among
// <C+ f, g>, <f, C- g>, <C+ f, C- g> in that form
cd curve_bilinear(const PairingContext& c, const VecC& f, const VecC& g);
double plemelj_residual(const PairingContext& c, const VecC& f, const VecC& g);

// Leray transform of S (n = 1 reduces to C+), and of the dual surface with
// sections represented at the corresponding nodes of S
DiscreteOperator leray_matrix(const PairingContext& c);
DiscreteOperator dual_leray_matrix(const PairingContext& c);

// largest singular value of W_out^{1/2} A W_in^{-1/2}, on the resolved band when one is set
double operator_norm(const DiscreteOperator& op);
// sharp operator norm of A^2 - A
double projection_defect(const DiscreteOperator& op);

// Leray transform at a point z off S (inside the domain): the classical
// kernel and the same kernel written through the transfer pairing
cd leray_classical(const PairingContext& c, const VecC& F, const VecC& z);
cd leray_via_pairing(const PairingContext& c, const VecC& F, const VecC& z);

struct AdjointResidual {
    cd lf_g, f_lg, lf_lg;
    double residual = 0;  // max pairwise discrepancy
};
AdjointResidual adjoint_residual(const PairingContext& c, const DiscreteOperator& L, const DiscreteOperator& Ldual,
                                 const VecC& f, const VecC& g);

struct EfficiencyResult {
    double infsup = 0;
    double inverse_norm = 0;
    double norm = 0;
    double residual = 0;
    int basis_size = 0, dual_basis_size = 0;
};
// dual_degree < 0 selects the default dual degree for the dimension
EfficiencyResult efficiency_identity(const PairingContext& c, int degree, int dual_degree = -1);
int default_dual_degree(const PairingContext& c, int degree);

}  // namespace leray
