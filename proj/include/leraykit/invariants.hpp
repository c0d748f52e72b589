#pragma once

#include "leraykit/geometry.hpp"

namespace leray {

struct LeviQ {
    MatC levi;  // hermitian, form X^* levi X on H_zS
    MatC q;     // symmetric, form X^T q X on H_zS
};

struct Convexity {
    bool strongly_convexlike = false;
    bool pseudoconvex = false;
};

struct PointInvariants {
    LeviQ forms;
    cd b{0, 0};  // n = 2 only
    double phi = 0;
    double phi_det = 0;
    double fefferman_w = 0;
    double sharp_w = 0;
    Convexity convexity;
};

LeviQ levi_q(const Jet2& j);
cd beltrami_b(const Jet2& j);
double phi(const Jet2& j);
double phi_det(const Jet2& j);
double fefferman_weight(const Jet2& j);
double sharp_weight(const Jet2& j);
Convexity classify(const Jet2& j);
PointInvariants point_invariants(const Jet2& j);

// the constant c_n fixing phi_det on the unit sphere to 1
double phi_det_calibration(int n);

LeviQ levi_q(const Hypersurface& s, const VecC& z);
cd beltrami_b(const Hypersurface& s, const VecC& z);
double phi(const Hypersurface& s, const VecC& z);
double phi_det(const Hypersurface& s, const VecC& z);
double fefferman_weight(const Hypersurface& s, const VecC& z);
Convexity classify(const Hypersurface& s, const VecC& z);

// bordered determinant det [[0, r_k], [conj r_j, r_{k jbar}]]
cd bordered_levi_det(const Jet2& j);

}  // namespace leray
