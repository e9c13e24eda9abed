#pragma once

#include <utility>
#include <vector>

#include "mhdlab/spectral.hpp"

namespace mhdlab {

/// Sobolev norms on the box, normalized so that order 0 is the L2 norm.
///
/// homogeneous:   (|box| sum_k |k|^{2s} |c_k|^2)^{1/2}
/// inhomogeneous: (|box| sum_k (1 + |k|^2)^s |c_k|^2)^{1/2}
///
/// Vector fields use the root-sum-square of their components. A negative
/// homogeneous order needs a vanishing zero mode.
double sobolev_norm(const ScalarField& f, double s, bool homogeneous);
double sobolev_norm(const VectorField& v, double s, bool homogeneous);

/// Squared homogeneous norms of integer orders 0..max_order in one pass.
std::vector<double> homogeneous_norms_squared(const ScalarField& f, int max_order);
std::vector<double> homogeneous_norms_squared(const VectorField& v, int max_order);

/// Fraction of the squared H^s norm carried by modes with |k| above two thirds
/// of the dealias radius.
double top_third_fraction(const VectorField& v, double s);
/// Top-third and total H^s mass (squared), for combining several fields.
std::pair<double, double> top_third_mass(const VectorField& v, double s);

/// sum_j C(n, j) a_j where a_j are squared homogeneous norms of order j + shift;
/// this is the squared inhomogeneous norm of integer order n (shift 0) or of the
/// gradient (shift 1).
double binomial_combination(const std::vector<double>& hom_sq, int n, int shift = 0);

}  // namespace mhdlab
