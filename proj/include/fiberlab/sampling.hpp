#pragma once

// Seeded random inputs shared by the tests, the acceptance suite and the CLI.
// All generators draw from a caller-owned std::mt19937_64, so a seed fixes
// every output.

#include <random>

#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/moduli.hpp"

namespace fiberlab::sampling {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0);
double normal(Rng& rng);

/// Smooth periodic displacement with a few low modes; the oscillation (half range)
/// is at most `amplitude` and the derivative stays above -0.9.
circle::CircleDiffeo random_diffeo(Rng& rng, std::size_t n, double amplitude);

Quat random_unit_quat(Rng& rng);
geometry::BasePoint random_base_point(Rng& rng, const geometry::FibrationModel& model);
geometry::TotalPoint random_point(Rng& rng, const geometry::FibrationModel& model);
/// Gaussian tangent vector at p.
geometry::TotalVector random_tangent(Rng& rng, const geometry::FibrationModel& model,
                                     const geometry::TotalPoint& p);
/// Gaussian base tangent vector at x.
geometry::BaseVector random_base_tangent(Rng& rng, const geometry::FibrationModel& model,
                                         const geometry::BasePoint& x);

/// Smooth tangent field from a handful of random low-frequency modes (tori) or a
/// random ambient linear-plus-quadratic map projected to the tangent spaces (spheres).
/// Scaled so that the sup norm equals `amplitude`.
fields::FieldGrid random_field(Rng& rng, const geometry::FibrationModel& model, int nb, int nf,
                               double amplitude);
/// Fair part of a random field, rescaled to sup norm `amplitude`.
fields::FieldGrid random_fair_field(Rng& rng, const geometry::FibrationModel& model, int nb,
                                    int nf, double amplitude);

/// A closed sampled curve whose projection stays within `radius` (normal-coordinate
/// length: unit-sphere angle or torus coordinates) of a random base point.
moduli::FiberShape random_shape(Rng& rng, const geometry::FibrationModel& model, int m,
                                double radius);

/// Random isometry. With `automorphism` it preserves the fibration; otherwise sphere
/// models also draw a general right factor and eps = +-1.
geometry::ModelIsometry random_isometry(Rng& rng, const geometry::FibrationModel& model,
                                        bool automorphism);

}  // namespace fiberlab::sampling
