#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rggrecon/core.hpp"

namespace rgg {

/// Coordinates of one point. Flat domains store m values in [0, side];
/// the sphere stores a unit 3-vector.
using Point = std::vector<double>;

/// Area of B(v,r) minus B(w,r) for centers x apart, 0 <= x <= 2r.
double lune_area(double x, double r);
/// d/dx of lune_area, sqrt(4r^2 - x^2).
double lune_area_deriv(double x, double r);
/// Inverse of lune_area on [0, pi r^2] by bisection.
double lune_area_inverse(double area, double r);

/// Volume of an m-ball of radius r.
double ball_volume(double r, int m);
/// Volume of the intersection of two m-balls of radius r whose centers are x apart.
double lens_volume(double x, double r, int m);
/// m-dimensional lune volume V_m r^m - lens_volume(x, r, m); equals lune_area for m = 2.
double lune_volume(double x, double r, int m);
/// Inverse of lune_volume on [0, V_m r^m] by bisection.
double lune_volume_inverse(double volume, double r, int m);

/// Area of the intersection of two disks of radii r1, r2 whose centers are d apart.
double lens_area(double d, double r1, double r2);

/// Order-of-magnitude proxy delta^((m+1)/2) * rmin^((m-1)/2) for the volume
/// of a lens of width delta. Not an exact area.
double lens_width_scaling(double delta, double rmin, int m);

/// Euclidean distance for flat domains, R times the angle for the sphere.
double geodesic_distance(std::span<const double> u, std::span<const double> v,
                         const DomainSpec& domain);

/// Ceiling with a relative guard, so values a hair above an integer are not
/// pushed to the next one by rounding noise.
double guarded_ceil(double x);

/// An element of the domain's symmetry group.
///
/// Flat domains use signed permutations: coordinate i of the image is
/// p[perm[i]], reflected to side - p[perm[i]] when flip[i] is set. On the
/// square the 8 elements are also addressed by a Dihedral8 index: 0..3 are
/// rotations by k quarter turns, 4..7 are those rotations after the
/// reflection y -> side - y.
struct SymmetryElement {
  enum class Kind { Dihedral8, HypercubeSym, Orthogonal3 };
  Kind kind = Kind::Dihedral8;
  int index = 0;
  std::vector<int> perm;
  std::vector<bool> flip;
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();

  static SymmetryElement identity(const DomainSpec& domain);
  static SymmetryElement dihedral(int index);
  static SymmetryElement signed_permutation(std::vector<int> perm, std::vector<bool> flip);
  static SymmetryElement orthogonal(const Eigen::Matrix3d& m);

  int dim() const;
  bool is_identity() const;
};

bool compatible(const SymmetryElement& sigma, const DomainSpec& domain);
Point apply_symmetry(const SymmetryElement& sigma, std::span<const double> p,
                     const DomainSpec& domain);
/// compose(a, b) acts as "first b, then a".
SymmetryElement compose(const SymmetryElement& a, const SymmetryElement& b);
SymmetryElement inverse(const SymmetryElement& sigma);

/// All elements of the finite symmetry group of a flat domain
/// (8 for the square, 2^m m! for the hypercube), identity first.
std::vector<SymmetryElement> enumerate_symmetries(const DomainSpec& domain);

nlohmann::json to_json(const SymmetryElement& s);
SymmetryElement symmetry_from_json(const nlohmann::json& j);

}  // namespace rgg
