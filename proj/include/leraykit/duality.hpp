#pragma once

#include "leraykit/geometry.hpp"

namespace leray {

// affine dual coordinates of the complex tangent hyperplane at z
VecC dual_point(const Jet2& j, const VecC& z);
VecC dual_point(const Hypersurface& s, const VecC& z);

// homogeneous dual representative (-sum r_j z_j, r_1, ..., r_n)
VecC dual_homogeneous(const Jet2& j, const VecC& z);

// the chart permutation: zeta* = P (1, eta)
MatC dual_chart_matrix(int n);

// Mobius map on the dual eta-chart induced by M acting on the z-chart
MobiusMap dual_mobius(const MobiusMap& M);

struct DualJet {
    VecC eta;
    Jet2 jet;  // 2-jet of a defining function of S* in the eta-chart
};

// primary route: dualize the normal-form model at z and carry it back through
// the dual of the normalizing Mobius map
DualJet dual_jet(const Jet2& j, const VecC& z);
DualJet dual_jet(const Hypersurface& s, const VecC& z);

// secondary route: least-squares quartic fit to the dual image of nearby
// surface points; radius is the tangential sampling radius on S
DualJet dual_jet_fit(const Hypersurface& s, const VecC& z, double radius = 0.02);

VecC roundtrip(const Hypersurface& s, const VecC& z);

struct TransportResidual {
    double b = 0;    // | |b*| - |b| |  (n = 2)
    double phi = 0;  // | phi* - phi |
};
TransportResidual transport_check(const Hypersurface& s, const VecC& z);

// differential of the dual map applied to a tangent vector v (as complex n-vector)
VecC dual_differential(const Jet2& j, const VecC& z, const VecC& v);

// dS*/dS along S
double dual_area_factor(const Jet2& j, const VecC& z);

// residual of the dual contact condition d eta_n = sum z_j d eta_j on H_zS
double contact_residual(const Hypersurface& s, const VecC& z, double eps = 1e-5);

struct DualMesh {
    std::vector<VecC> eta;
    std::vector<Jet2> jets;
    VecR area_factor;  // dS*/dS per node
    VecR weights;      // area_factor * dS
};

DualMesh dual_surface(const QuadratureMesh& m);

// project a nearby point onto S along the gradient (Newton)
VecC project_to_surface(const Hypersurface& s, VecC z, int iters = 30);

}  // namespace leray
