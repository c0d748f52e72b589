#pragma once

#include "leraykit/geometry.hpp"

namespace leray {

// Orthonormal real tangent frame t_1..t_{2n-1} with det[N, t_1, ...] = +1.
std::vector<VecR> oriented_tangent_frame(const VecR& normal);

// The Leray form dr ^ (dbar d r)^{n-1} evaluated on 2n-1 real vectors.
cd leray_form(const Jet2& j, const std::vector<VecR>& vectors);

// Same form as a density against euclidean surface measure (oriented frame).
cd leray_density(const Jet2& j);

}  // namespace leray
