#pragma once

#include "leraykit/duality.hpp"

namespace leray {

// Per-node data shared by inner products, transfer and pairing. Sections on
// S are sampled at mesh nodes in the affine trivialization; sections on S*
// are sampled at the dual points eta(z_i) in the eta-chart trivialization.
struct PairingContext {
    std::shared_ptr<const QuadratureMesh> mesh;
    DualMesh dual;
    int lift = 0;
    VecR dS, fef, phi, sharp;              // S side, densities against dS
    VecR dS_dual, fef_dual, phi_dual, sharp_dual;  // S* side, dS_dual = dS* per node
    VecC tau;         // transfer S* -> S through normal frames
    VecC tau_affine;  // the same factor from the affine Leray-form density
    VecC tau_dual;    // transfer S -> S*
    int size() const { return static_cast<int>(dS.size()); }
    int n() const { return mesh->n; }
    VecR weight_sharp() const { return sharp.cwiseProduct(dS); }
    VecR weight_sharp_dual() const { return sharp_dual.cwiseProduct(dS_dual); }
};

PairingContext make_pairing_context(std::shared_ptr<const QuadratureMesh> m, int lift = 0);

// transfer factor at one point: (T g)(z) = factor * g(eta(z))
cd transfer_factor(const Jet2& j, const VecC& z, int lift = 0);
// affine pairing density against dS: 2^{1-n}/(n-1)! * omega / r_{z_n}^n
cd pairing_density(const Jet2& j);

cd inner_fefferman(const PairingContext& c, const VecC& f, const VecC& g);
cd inner_sharp(const PairingContext& c, const VecC& f, const VecC& g);
double norm_sharp(const PairingContext& c, const VecC& f);
cd inner_fefferman_dual(const PairingContext& c, const VecC& f, const VecC& g);
cd inner_sharp_dual(const PairingContext& c, const VecC& f, const VecC& g);
double norm_sharp_dual(const PairingContext& c, const VecC& g);

VecC transfer(const PairingContext& c, const VecC& g_on_dual);
VecC transfer_dual(const PairingContext& c, const VecC& f_on_s);

cd pair(const PairingContext& c, const VecC& f, const VecC& g);
cd pair_dualside(const PairingContext& c, const VecC& g, const VecC& f);

// orthonormal (in the given diagonal metric) span of start * (products of
// multipliers) up to the given degree; Gram-Schmidt twice, truncating
// directions whose residual falls below 1e-8 of their original norm
MatC krylov_basis(const VecC& start, const std::vector<VecC>& multipliers, int degree, const VecR& weights);

MatC hardy_basis(const PairingContext& c, int max_degree);
// dual Hardy sections P(zeta*) / l(zeta*)^{n+d}, l(zeta*) = zeta*_0 + sum center_j zeta*_j
MatC dual_hardy_basis(const PairingContext& c, int max_degree, const VecC& center = VecC());

MatC pairing_matrix(const PairingContext& c, const MatC& basis_s, const MatC& basis_dual);
double sup_pairing(const PairingContext& c, const VecC& f, const MatC& basis_dual);
double infsup(const PairingContext& c, const MatC& basis_s, const MatC& basis_dual);

struct TransferResiduals {
    double isometry = 0;  // max relative pointwise defect of the isometry densities
    double double_transfer = 0;
    double route_agreement = 0;  // normal-frame vs affine factor
};
TransferResiduals transfer_residuals(const PairingContext& c);

}  // namespace leray
