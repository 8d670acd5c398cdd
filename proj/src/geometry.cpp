#include "rggrecon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rgg {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

void check_lune_arg(double x, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "lune radius must be positive");
  if (!(x >= 0.0 && x <= 2.0 * r))
    throw Error(ErrorKind::Domain, "lune separation must lie in [0, 2r]");
}

}  // namespace

double lune_area(double x, double r) {
  check_lune_arg(x, r);
  if (x == 0.0) return 0.0;
  if (x == 2.0 * r) return kPi * r * r;
  return kPi * r * r - 2.0 * r * r * std::acos(clamp_unit(x / (2.0 * r))) +
         0.5 * x * std::sqrt(std::max(0.0, 4.0 * r * r - x * x));
}

double lune_area_deriv(double x, double r) {
  check_lune_arg(x, r);
  return std::sqrt(std::max(0.0, 4.0 * r * r - x * x));
}

double lune_area_inverse(double area, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "lune radius must be positive");
  const double full = kPi * r * r;
  // Allow a few ulps of slack so that callers passing pi r^2 computed another way are accepted.
  if (!(area >= 0.0 && area <= full * (1.0 + 1e-12)))
    throw Error(ErrorKind::Domain, "lune area must lie in [0, pi r^2]");
  if (area == 0.0) return 0.0;
  if (area >= full) return 2.0 * r;
  double lo = 0.0, hi = 2.0 * r;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lune_area(mid, r) < area) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ball_volume(double r, int m) {
  if (m < 1) throw Error(ErrorKind::Domain, "dimension must be positive");
  return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0) * std::pow(r, m);
}

double lens_volume(double x, double r, int m) {
  check_lune_arg(x, r);
  if (m == 2) return lens_area(x, r, r);
  const double a = 0.5 * x;
  if (m == 3) {
    const double h = r - a;
    return 2.0 * kPi * h * h * (3.0 * r - h) / 3.0;
  }
  // Each half is a cap: V_{m-1} r^m times the integral of sin^m over [0, acos(a/r)].
  const double theta = std::acos(clamp_unit(a / r));
  constexpr int kSteps = 512;
  const double step = theta / kSteps;
  double sum = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double w = (i == 0 || i == kSteps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::pow(std::sin(i * step), m);
  }
  return 2.0 * ball_volume(1.0, m - 1) * std::pow(r, m) * sum * step / 3.0;
}

double lune_volume(double x, double r, int m) {
  if (m == 2) return lune_area(x, r);
  check_lune_arg(x, r);
  return std::max(0.0, ball_volume(r, m) - lens_volume(x, r, m));
}

double lune_volume_inverse(double volume, double r, int m) {
  if (m == 2) return lune_area_inverse(volume, r);
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "lune radius must be positive");
  const double full = ball_volume(r, m);
  if (!(volume >= 0.0 && volume <= full * (1.0 + 1e-12)))
    throw Error(ErrorKind::Domain, "lune volume must lie in [0, V_m r^m]");
  if (volume == 0.0) return 0.0;
  if (volume >= full) return 2.0 * r;
  double lo = 0.0, hi = 2.0 * r;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lune_volume(mid, r, m) < volume) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double lens_area(double d, double r1, double r2) {
  if (!(r1 > 0.0 && r2 > 0.0)) throw Error(ErrorKind::Domain, "lens radii must be positive");
  d = std::max(0.0, d);
  if (d >= r1 + r2) return 0.0;
  const double rmin = std::min(r1, r2);
  if (d <= std::abs(r1 - r2)) return kPi * rmin * rmin;
  if (r1 == r2) {
    const double r = r1;
    return 2.0 * r * r * std::acos(clamp_unit(d / (2.0 * r))) -
           0.5 * d * std::sqrt(std::max(0.0, 4.0 * r * r - d * d));
  }
  const double a1 = std::acos(clamp_unit((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)));
  const double a2 = std::acos(clamp_unit((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)));
  const double k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
  return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * std::sqrt(std::max(0.0, k));
}

double lens_width_scaling(double delta, double rmin, int m) {
  if (m < 1) throw Error(ErrorKind::Domain, "dimension must be positive");
  if (!(rmin > 0.0)) throw Error(ErrorKind::Domain, "rmin must be positive");
  if (!(delta > 0.0 && delta <= 2.0 * rmin))
    throw Error(ErrorKind::Domain, "lens width must lie in (0, 2 rmin]");
  return std::pow(delta, 0.5 * (m + 1)) * std::pow(rmin, 0.5 * (m - 1));
}

double geodesic_distance(std::span<const double> u, std::span<const double> v,
                         const DomainSpec& domain) {
  const auto dim = static_cast<std::size_t>(domain.ambient_dim());
  if (u.size() != dim || v.size() != dim)
    throw Error(ErrorKind::Parameter, "point dimension does not match the domain");
  if (domain.flat()) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double t = u[i] - v[i];
      s += t * t;
    }
    return std::sqrt(s);
  }
  // atan2 form keeps full precision for nearly equal and nearly antipodal vectors;
  // it agrees with arccos of the clamped dot product.
  const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  const double cx = u[1] * v[2] - u[2] * v[1];
  const double cy = u[2] * v[0] - u[0] * v[2];
  const double cz = u[0] * v[1] - u[1] * v[0];
  const double cr = std::sqrt(cx * cx + cy * cy + cz * cz);
  return domain.sphere_radius() * std::atan2(cr, dot);
}

double guarded_ceil(double x) { return std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))); }

// ---------------------------------------------------------------------------
// Symmetry groups

namespace {

SymmetryElement quarter_turn() { return SymmetryElement::signed_permutation({1, 0}, {true, false}); }
SymmetryElement flip_y() { return SymmetryElement::signed_permutation({0, 1}, {false, true}); }

SymmetryElement compose_signed(const SymmetryElement& a, const SymmetryElement& b) {
  const auto m = a.perm.size();
  std::vector<int> perm(m);
  std::vector<bool> flip(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(a.perm[i]);
    perm[i] = b.perm[j];
    flip[i] = a.flip[i] != b.flip[j];
  }
  return SymmetryElement::signed_permutation(std::move(perm), std::move(flip));
}

SymmetryElement dihedral_as_signed(int index) {
  SymmetryElement s = SymmetryElement::signed_permutation({0, 1}, {false, false});
  if (index >= 4) s = flip_y();
  for (int k = 0; k < index % 4; ++k) s = compose_signed(quarter_turn(), s);
  return s;
}

SymmetryElement as_signed(const SymmetryElement& s) {
  return s.kind == SymmetryElement::Kind::Dihedral8 ? dihedral_as_signed(s.index) : s;
}

int dihedral_index_of(const SymmetryElement& signed_elem) {
  for (int k = 0; k < 8; ++k) {
    const auto d = dihedral_as_signed(k);
    if (d.perm == signed_elem.perm && d.flip == signed_elem.flip) return k;
  }
  throw Error(ErrorKind::Parameter, "signed permutation is not a square symmetry");
}

}  // namespace

SymmetryElement SymmetryElement::identity(const DomainSpec& domain) {
  switch (domain.kind) {
    case DomainKind::Square2D: return dihedral(0);
    case DomainKind::Sphere2: return orthogonal(Eigen::Matrix3d::Identity());
    case DomainKind::Hypercube: {
      std::vector<int> perm(static_cast<std::size_t>(domain.m));
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<bool> flip(perm.size(), false);
      return signed_permutation(std::move(perm), std::move(flip));
    }
  }
  throw Error(ErrorKind::Parameter, "unknown domain");
}

SymmetryElement SymmetryElement::dihedral(int index) {
  if (index < 0 || index > 7) throw Error(ErrorKind::Parameter, "dihedral index must be in 0..7");
  SymmetryElement s;
  s.kind = Kind::Dihedral8;
  s.index = index;
  return s;
}

SymmetryElement SymmetryElement::signed_permutation(std::vector<int> perm, std::vector<bool> flip) {
  if (perm.size() != flip.size()) throw Error(ErrorKind::Parameter, "perm/flip size mismatch");
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i)) throw Error(ErrorKind::Parameter, "not a permutation");
  SymmetryElement s;
  s.kind = Kind::HypercubeSym;
  s.perm = std::move(perm);
  s.flip = std::move(flip);
  return s;
}

SymmetryElement SymmetryElement::orthogonal(const Eigen::Matrix3d& m) {
  if (!(m.transpose() * m).isApprox(Eigen::Matrix3d::Identity(), 1e-9))
    throw Error(ErrorKind::Parameter, "matrix is not orthogonal");
  SymmetryElement s;
  s.kind = Kind::Orthogonal3;
  s.matrix = m;
  return s;
}

int SymmetryElement::dim() const {
  switch (kind) {
    case Kind::Dihedral8: return 2;
    case Kind::Orthogonal3: return 3;
    case Kind::HypercubeSym: return static_cast<int>(perm.size());
  }
  return 0;
}

bool SymmetryElement::is_identity() const {
  switch (kind) {
    case Kind::Dihedral8: return index == 0;
    case Kind::Orthogonal3: return matrix.isApprox(Eigen::Matrix3d::Identity(), 1e-12);
    case Kind::HypercubeSym:
      for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] != static_cast<int>(i) || flip[i]) return false;
      return true;
  }
  return false;
}

bool compatible(const SymmetryElement& sigma, const DomainSpec& domain) {
  switch (sigma.kind) {
    case SymmetryElement::Kind::Dihedral8: return domain.kind == DomainKind::Square2D;
    case SymmetryElement::Kind::Orthogonal3: return domain.kind == DomainKind::Sphere2;
    case SymmetryElement::Kind::HypercubeSym: return domain.flat() && sigma.dim() == domain.m;
  }
  return false;
}

Point apply_symmetry(const SymmetryElement& sigma, std::span<const double> p,
                     const DomainSpec& domain) {
  if (!compatible(sigma, domain))
    throw Error(ErrorKind::Parameter, "symmetry element does not act on this domain");
  if (p.size() != static_cast<std::size_t>(domain.ambient_dim()))
    throw Error(ErrorKind::Parameter, "point dimension does not match the domain");
  if (sigma.kind == SymmetryElement::Kind::Orthogonal3) {
    const Eigen::Vector3d q = sigma.matrix * Eigen::Vector3d(p[0], p[1], p[2]);
    return {q[0], q[1], q[2]};
  }
  const auto s = as_signed(sigma);
  const double side = domain.side();
  Point out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p[static_cast<std::size_t>(s.perm[i])];
    out[i] = s.flip[i] ? side - v : v;
  }
  return out;
}

SymmetryElement compose(const SymmetryElement& a, const SymmetryElement& b) {
  using K = SymmetryElement::Kind;
  if ((a.kind == K::Orthogonal3) != (b.kind == K::Orthogonal3) || a.dim() != b.dim())
    throw Error(ErrorKind::Parameter, "cannot compose symmetries of different groups");
  if (a.kind == K::Orthogonal3) return SymmetryElement::orthogonal(a.matrix * b.matrix);
  const auto c = compose_signed(as_signed(a), as_signed(b));
  if (a.kind == K::Dihedral8 && b.kind == K::Dihedral8)
    return SymmetryElement::dihedral(dihedral_index_of(c));
  return c;
}

SymmetryElement inverse(const SymmetryElement& sigma) {
  using K = SymmetryElement::Kind;
  if (sigma.kind == K::Orthogonal3) return SymmetryElement::orthogonal(sigma.matrix.transpose());
  const auto s = as_signed(sigma);
  // Image coordinate i reads source axis perm[i]; the inverse reads image axis i into source axis perm[i].
  std::vector<int> perm(s.perm.size());
  std::vector<bool> flip(s.perm.size());
  for (std::size_t i = 0; i < s.perm.size(); ++i) {
    const auto j = static_cast<std::size_t>(s.perm[i]);
    perm[j] = static_cast<int>(i);
    flip[j] = s.flip[i];
  }
  auto inv = SymmetryElement::signed_permutation(std::move(perm), std::move(flip));
  if (sigma.kind == K::Dihedral8) return SymmetryElement::dihedral(dihedral_index_of(inv));
  return inv;
}

std::vector<SymmetryElement> enumerate_symmetries(const DomainSpec& domain) {
  std::vector<SymmetryElement> out;
  if (domain.kind == DomainKind::Square2D) {
    for (int k = 0; k < 8; ++k) out.push_back(SymmetryElement::dihedral(k));
    return out;
  }
  if (domain.kind != DomainKind::Hypercube)
    throw Error(ErrorKind::Parameter, "the sphere's symmetry group is continuous");
  const auto m = static_cast<std::size_t>(domain.m);
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      std::vector<bool> flip(m);
      for (std::size_t i = 0; i < m; ++i) flip[i] = (mask >> i) & 1u;
      out.push_back(SymmetryElement::signed_permutation(perm, flip));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

nlohmann::json to_json(const SymmetryElement& s) {
  using K = SymmetryElement::Kind;
  switch (s.kind) {
    case K::Dihedral8: return {{"kind", "dihedral8"}, {"index", s.index}};
    case K::HypercubeSym: return {{"kind", "signed_permutation"}, {"perm", s.perm}, {"flip", s.flip}};
    case K::Orthogonal3: {
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < 3; ++i)
        rows.push_back({s.matrix(i, 0), s.matrix(i, 1), s.matrix(i, 2)});
      return {{"kind", "orthogonal3"}, {"matrix", rows}};
    }
  }
  return {};
}

SymmetryElement symmetry_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "dihedral8") return SymmetryElement::dihedral(j.at("index").get<int>());
    if (kind == "signed_permutation")
      return SymmetryElement::signed_permutation(j.at("perm").get<std::vector<int>>(),
                                                 j.at("flip").get<std::vector<bool>>());
    if (kind == "orthogonal3") {
      Eigen::Matrix3d m;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) m(i, k) = j.at("matrix").at(i).at(k).get<double>();
      return SymmetryElement::orthogonal(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("bad symmetry element: ") + e.what());
  }
  throw Error(ErrorKind::Format, "unknown symmetry kind");
}

}  // namespace rgg
