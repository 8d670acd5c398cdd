#include "rggrecon/reconstruct.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rggrecon/parallel.hpp"

namespace rgg {

std::string_view to_string(Frame f) { return f == Frame::Working ? "working" : "domain_aligned"; }

DistanceProvider hybrid_provider(const GraphInstance& g, const DeepOracle& deep, const ConstantsLedger& ledger) {
  return [&g, &deep, ledger](VertexId v) {
    auto field = hybrid_field(g, deep, v, KappaParams::for_graph(g, ledger.kappaC3), ledger);
    field.value[v] = 0.0;
    return std::move(field.value);
  };
}

// ---------------------------------------------------------------------------
// Landmark geometry

std::array<Point, 3> embed_landmark_triangle(double dxy, double dxz, double dyz) {
  const bool strict = dxy < dxz + dyz && dxz < dxy + dyz && dyz < dxy + dxz;
  if (!strict || !(dxy > 0.0 && dxz > 0.0 && dyz > 0.0))
    throw Error(ErrorKind::TriangleInequalityViolated, "landmark distances violate the strict triangle inequality");
  const double zx = (dxy * dxy + dxz * dxz - dyz * dyz) / (2.0 * dxy);
  const double zy = std::sqrt(std::max(0.0, dxz * dxz - zx * zx));
  return {Point{0.0, 0.0}, Point{dxy, 0.0}, Point{zx, zy}};
}

PointSet embed_simplex(const std::vector<std::vector<double>>& dist) {
  const std::size_t count = dist.size();
  if (count < 2) throw Error(ErrorKind::Parameter, "need at least two points");
  const std::size_t k = count - 1;
  PointSet out(static_cast<int>(k), count);
  auto gram = [&](std::size_t i, std::size_t j) {
    return 0.5 * (dist[0][i] * dist[0][i] + dist[0][j] * dist[0][j] - dist[i][j] * dist[i][j]);
  };
  for (std::size_t i = 1; i < count; ++i) {
    auto p = out[i];
    // Coordinates 0..i-2 from dot products with earlier points; point j has its
    // last nonzero coordinate at index j-1.
    for (std::size_t c = 0; c + 1 < i; ++c) {
      const std::size_t j = c + 1;
      double s = gram(i, j);
      for (std::size_t l = 0; l < c; ++l) s -= p[l] * out[j][l];
      p[c] = s / out[j][c];
    }
    double rest = dist[0][i] * dist[0][i];
    for (std::size_t l = 0; l + 1 < i; ++l) rest -= p[l] * p[l];
    const double scale = std::max(1.0, dist[0][i] * dist[0][i]);
    if (!(rest > 1e-12 * scale)) throw Error(ErrorKind::SingularGeometry, "landmark simplex is degenerate");
    p[i - 1] = std::sqrt(rest);
  }
  return out;
}

Point trilaterate_simplex(std::span<const double> est, const PointSet& landmarks) {
  const std::size_t count = landmarks.size();
  const auto k = static_cast<Eigen::Index>(landmarks.dim);
  if (est.size() != count) throw Error(ErrorKind::LengthMismatch, "one estimate per landmark is required");
  if (count < static_cast<std::size_t>(k) + 1) throw Error(ErrorKind::SingularGeometry, "too few landmarks");
  // |u - L_i|^2 - |u - L_j|^2 = e_i^2 - e_j^2 is linear in u.
  const std::size_t rows = count * (count - 1) / 2;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows), k);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j, ++row) {
      double rhs = est[i] * est[i] - est[j] * est[j];
      for (Eigen::Index c = 0; c < k; ++c) {
        const double li = landmarks[i][static_cast<std::size_t>(c)], lj = landmarks[j][static_cast<std::size_t>(c)];
        A(row, c) = 2.0 * (lj - li);
        rhs += lj * lj - li * li;
      }
      b(row) = rhs;
    }
  const Eigen::MatrixXd N = A.transpose() * A;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(N, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo <= 1e-12 * hi) throw Error(ErrorKind::SingularGeometry, "landmarks are affinely dependent");
  const Eigen::VectorXd u = N.ldlt().solve(A.transpose() * b);
  return Point(u.data(), u.data() + u.size());
}

Point trilaterate(std::span<const double> est, const PointSet& landmarks) {
  if (landmarks.dim != 2 || landmarks.size() != 3)
    throw Error(ErrorKind::Parameter, "planar trilateration uses three landmarks in the plane");
  return trilaterate_simplex(est, landmarks);
}

Point reconstruct_sphere(std::span<const double> est, double R) {
  if (est.size() != 3) throw Error(ErrorKind::LengthMismatch, "sphere reconstruction uses three landmarks");
  Point u{std::cos(est[0] / R), std::cos(est[1] / R), std::cos(est[2] / R)};
  const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  if (!(norm >= 1e-6)) throw Error(ErrorKind::DegenerateProjection, "projection onto the landmark basis vanishes");
  for (double& c : u) c /= norm;
  return u;
}

double simplex_regularity(const std::vector<std::vector<double>>& dist) {
  const std::size_t count = dist.size();
  const std::size_t k = count - 1;
  double mean = 0.0;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) mean += dist[i][j];
  mean /= static_cast<double>(count * k / 2);
  PointSet pts;
  try {
    pts = embed_simplex(dist);
  } catch (const Error&) {
    return 0.0;
  }
  // Volume ratio: product of the triangular coordinates against a^k sqrt((k+1)/2^k).
  double ratio = 1.0;
  for (std::size_t i = 1; i < count; ++i) ratio *= pts[i][i - 1] / mean;
  return ratio / std::sqrt(static_cast<double>(k + 1) / std::pow(2.0, static_cast<double>(k)));
}

// ---------------------------------------------------------------------------
// Landmark selection

DeepOracle default_deep_oracle(const GraphInstance& g, const ConstantsLedger& ledger) {
  if (!g.domain().flat()) return DeepOracle::all(g.n());
  return DeepOracle::lazy(g, ledger.deepFactor);
}

namespace {

constexpr std::size_t kCenterCandidates = 32;
constexpr std::size_t kTriangleAttempts = 4;
constexpr double kMinSimplexRegularity = 0.05;
constexpr std::size_t kDepthSamples = 512;

/// Vertices ordered by an eccentricity proxy: the largest hop distance to the
/// ends of a few double sweeps. Unreachable vertices are dropped.
std::vector<VertexId> central_vertices(const GraphInstance& g, std::size_t limit) {
  const std::size_t n = g.n();
  VertexId start = 0;
  for (VertexId v = 1; v < n; ++v)
    if (g.degree(v) > g.degree(start)) start = v;
  auto farthest = [&](const BfsDistances& d) {
    VertexId best = d.source;
    for (VertexId v = 0; v < n; ++v)
      if (d.dist[v] != kUnreachable && d.dist[v] > d.dist[best]) best = v;
    return best;
  };
  // Hop distances are coarse, so ties in the maximum are broken by the sum.
  std::vector<std::uint32_t> proxy(n, 0), total(n, 0);
  VertexId s = farthest(bfs(g, start));
  for (int sweep = 0; sweep < 3; ++sweep) {
    const auto d = bfs(g, s);
    for (VertexId v = 0; v < n; ++v) {
      proxy[v] = d.dist[v] == kUnreachable ? kUnreachable : std::max(proxy[v], d.dist[v]);
      total[v] += d.dist[v] == kUnreachable ? 0 : d.dist[v];
    }
    s = farthest(d);
  }
  std::vector<VertexId> order;
  for (VertexId v = 0; v < n; ++v)
    if (proxy[v] != kUnreachable) order.push_back(v);
  const std::size_t keep = std::min(limit, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](VertexId a, VertexId b) {
                      if (proxy[a] != proxy[b]) return proxy[a] < proxy[b];
                      return total[a] != total[b] ? total[a] < total[b] : a < b;
                    });
  order.resize(keep);
  return order;
}

/// True when every vertex closer than `radius` hops to the source is deep.
/// Low-degree vertices are tried first since they are the likely failures.
bool ball_is_deep(const GraphInstance& g, const DeepOracle& deep, const BfsDistances& d, double radius) {
  std::vector<VertexId> ball;
  for (VertexId v = 0; v < g.n(); ++v)
    if (d.dist[v] != kUnreachable && static_cast<double>(d.dist[v]) < radius) ball.push_back(v);
  std::sort(ball.begin(), ball.end(), [&](VertexId a, VertexId b) {
    return g.degree(a) != g.degree(b) ? g.degree(a) < g.degree(b) : a < b;
  });
  for (VertexId v : ball)
    if (!deep.is_deep(v)) return false;
  return true;
}

std::vector<std::vector<double>> pairwise_from_fields(const std::vector<VertexId>& ids,
                                                      const std::vector<std::vector<double>>& fields) {
  const std::size_t k = ids.size();
  std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) d[i][j] = d[j][i] = std::min(fields[i][ids[j]], fields[j][ids[i]]);
  return d;
}

bool triangle_ok(const std::vector<std::vector<double>>& d, double min_side) {
  double s[3] = {d[0][1], d[0][2], d[1][2]};
  std::sort(s, s + 3);
  if (!std::isfinite(s[2]) || s[0] < min_side) return false;
  return s[0] * s[0] + s[1] * s[1] > s[2] * s[2] && s[0] + s[1] > s[2];
}

bool simplex_ok(const std::vector<std::vector<double>>& d, double min_side) {
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (!std::isfinite(d[i][j]) || d[i][j] < min_side) return false;
  return simplex_regularity(d) >= kMinSimplexRegularity;
}

LandmarkSet embed(const std::vector<VertexId>& ids, const std::vector<std::vector<double>>& d) {
  LandmarkSet set;
  set.ids = ids;
  set.pairwise = d;
  if (ids.size() == 3) {
    const auto tri = embed_landmark_triangle(d[0][1], d[0][2], d[1][2]);
    set.embedded = PointSet(2, 0);
    for (const auto& p : tri) set.embedded.push_back(p);
  } else {
    set.embedded = embed_simplex(d);
  }
  return set;
}

LandmarkSet select_sphere(const GraphInstance& g, const DistanceProvider& provider,
                          std::vector<std::vector<double>>& fields) {
  const double target = 0.5 * std::numbers::pi * g.domain().sphere_radius();
  const double tolerance = 0.1 * target * 1.2;  // the window after its single relaxation
  const std::size_t n = g.n();
  std::vector<VertexId> ids{0};
  fields = {provider(0)};
  for (int k = 1; k < 3; ++k) {
    VertexId best = 0;
    double best_dev = kInfinity;
    for (VertexId v = 0; v < n; ++v) {
      if (std::find(ids.begin(), ids.end(), v) != ids.end()) continue;
      double dev = 0.0;
      for (const auto& f : fields) dev = std::max(dev, std::abs(f[v] - target));
      if (dev < best_dev) {
        best_dev = dev;
        best = v;
      }
    }
    if (!(best_dev <= tolerance))
      throw Error(ErrorKind::LandmarkSearchFailed, "no vertex near a quarter great circle from the landmarks");
    ids.push_back(best);
    fields.push_back(provider(best));
  }
  LandmarkSet set;
  set.ids = ids;
  set.pairwise = pairwise_from_fields(ids, fields);
  set.embedded = PointSet(3, 3);
  for (std::size_t i = 0; i < 3; ++i) set.embedded[i][i] = 1.0;
  return set;
}

}  // namespace

LandmarkSet select_landmarks(const GraphInstance& g, const DeepOracle& deep, const ConstantsLedger& ledger,
                             const DistanceProvider& provider, std::vector<std::vector<double>>& fields) {
  const DomainSpec& domain = g.domain();
  if (!domain.flat()) return select_sphere(g, provider, fields);

  const std::size_t want = static_cast<std::size_t>(domain.m) + 1;
  const double side = domain.side(), hops_per_side = side / g.r();
  const double min_side = ledger.minTriangleSideFrac * side;
  const auto centers = central_vertices(g, kCenterCandidates);

  // Stage 0 is the plain search and stage 1 relaxes it by 20%. Stage 2 keeps the
  // relaxed window but drops the all-deep ball around x, which cannot hold when
  // side / r is small; every landmark is still required to be deep itself.
  for (int attempt = 0; attempt < 3; ++attempt) {
    const double widen = attempt == 0 ? 1.0 : 1.2, narrow = attempt == 0 ? 1.0 : 0.8;
    const double lo = ledger.landmarkWindowLo * hops_per_side * narrow;
    const double hi = ledger.landmarkWindowHi * hops_per_side * widen;
    const double ball = ledger.landmarkBallFrac * hops_per_side * narrow;
    if (std::ceil(lo) > std::floor(hi)) continue;
    auto in_window = [&](std::uint32_t h) { return h != kUnreachable && h >= lo && h <= hi; };

    std::size_t triangles_tried = 0;
    for (VertexId x : centers) {
      if (!deep.is_deep(x)) continue;
      std::vector<BfsDistances> dists{bfs(g, x)};
      if (attempt < 2 && !ball_is_deep(g, deep, dists[0], ball)) continue;
      if (triangles_tried++ == kTriangleAttempts) break;

      std::vector<VertexId> ids{x};
      fields = {provider(x)};
      bool complete = true;
      while (ids.size() < want) {
        // Next landmark: inside every hop window, deep, and as far as possible
        // (by estimate) from the nearest landmark chosen so far.
        VertexId best = 0;
        double best_score = -1.0;
        for (VertexId v = 0; v < g.n(); ++v) {
          bool ok = true;
          double score = kInfinity;
          for (std::size_t i = 0; i < ids.size() && ok; ++i) {
            ok = in_window(dists[i].dist[v]);
            score = std::min(score, fields[i][v]);
          }
          if (!ok || !std::isfinite(score) || score <= best_score) continue;
          if (!deep.is_deep(v)) continue;
          best = v;
          best_score = score;
        }
        if (best_score < 0.0) {
          complete = false;
          break;
        }
        ids.push_back(best);
        dists.push_back(bfs(g, best));
        fields.push_back(provider(best));
      }
      if (!complete) continue;
      const auto d = pairwise_from_fields(ids, fields);
      const bool ok = want == 3 ? triangle_ok(d, min_side) : simplex_ok(d, min_side);
      if (!ok) continue;
      try {
        LandmarkSet set = embed(ids, d);
        set.searchStage = attempt;
        return set;
      } catch (const Error&) {
        continue;
      }
    }
  }
  throw Error(ErrorKind::LandmarkSearchFailed,
              "no landmark set satisfies the hop window, depth and shape conditions");
}

// ---------------------------------------------------------------------------
// Trilateration and alignment

Reconstruction trilaterate_all(const GraphInstance& g, const LandmarkSet& landmarks,
                               const std::vector<std::vector<double>>& fields) {
  const DomainSpec& domain = g.domain();
  const std::size_t n = g.n(), k = landmarks.ids.size();
  Reconstruction out;
  out.domain = domain;
  out.landmarks = landmarks;
  out.positions = PointSet(domain.ambient_dim(), n);
  std::vector<std::uint8_t> failed(n, 0);
  const bool sphere = !domain.flat();
  const double R = sphere ? domain.sphere_radius() : 0.0;
  parallel_for(n, [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<double> est(k);
    for (std::size_t u = begin; u < end; ++u) {
      bool finite = true;
      for (std::size_t i = 0; i < k; ++i) {
        est[i] = fields[i][u];
        finite = finite && std::isfinite(est[i]);
      }
      if (!finite) {
        failed[u] = 1;
        continue;
      }
      try {
        const Point p = sphere ? reconstruct_sphere(est, R) : trilaterate_simplex(est, landmarks.embedded);
        std::copy(p.begin(), p.end(), out.positions[u].begin());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateProjection) throw;
        failed[u] = 1;
      }
    }
  }, 512);
  for (VertexId u = 0; u < n; ++u) {
    if (!failed[u]) continue;
    out.unplaced.push_back(u);
    auto p = out.positions[u];
    if (sphere) {
      std::fill(p.begin(), p.end(), 0.0);
      p[0] = 1.0;
    } else {
      // Centroid of the landmarks; alignment later moves it with everything else.
      for (std::size_t c = 0; c < p.size(); ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += landmarks.embedded[i][c];
        p[c] = s / static_cast<double>(k);
      }
    }
  }
  out.clamp.assign(n, 0.0);
  return out;
}

std::vector<VertexId> corner_candidates(const GraphInstance& g, const ConstantsLedger& ledger, std::size_t count) {
  // Distinct corners are at least ceil(side / r) hops apart, so candidates closer
  // than half of that (and never closer than two hops) sit at the same corner.
  const double hops_per_side = g.domain().side() / g.r();
  const double sep = std::max({2.0, 0.5 * std::ceil(hops_per_side), ledger.cornerSeparationFrac * hops_per_side});
  const auto depth = static_cast<std::uint32_t>(std::max(0.0, std::ceil(sep)));
  std::vector<VertexId> order(g.n());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return g.degree(a) < g.degree(b); });

  // Candidates must share the component of the highest-degree vertex.
  VertexId hub = 0;
  for (VertexId v = 1; v < g.n(); ++v)
    if (g.degree(v) > g.degree(hub)) hub = v;
  const auto reach = bfs(g, hub);

  std::vector<VertexId> picked;
  std::vector<BfsDistances> near;
  for (VertexId v : order) {
    if (picked.size() == count) break;
    if (!reach.reachable(v)) continue;
    bool far = true;
    for (const auto& d : near)
      if (d.dist[v] != kUnreachable && static_cast<double>(d.dist[v]) < sep) {
        far = false;
        break;
      }
    if (!far) continue;
    picked.push_back(v);
    near.push_back(bfs(g, v, depth));
  }
  if (picked.size() < count)
    throw Error(ErrorKind::CornerSearchFailed, "found " + std::to_string(picked.size()) + " of " +
                                                   std::to_string(count) + " separated corner candidates");
  return picked;
}

RigidFit fit_orthogonal(const PointSet& a, const PointSet& b, bool translate) {
  if (a.size() != b.size() || a.dim != b.dim) throw Error(ErrorKind::LengthMismatch, "point sets differ in shape");
  const auto d = static_cast<Eigen::Index>(a.dim);
  const std::size_t n = a.size();
  Eigen::VectorXd ca = Eigen::VectorXd::Zero(d), cb = Eigen::VectorXd::Zero(d);
  if (translate && n > 0) {
    for (std::size_t i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < d; ++c) {
        ca(c) += a[i][static_cast<std::size_t>(c)];
        cb(c) += b[i][static_cast<std::size_t>(c)];
      }
    ca /= static_cast<double>(n);
    cb /= static_cast<double>(n);
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd pa(d), pb(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      pa(c) = a[i][static_cast<std::size_t>(c)] - ca(c);
      pb(c) = b[i][static_cast<std::size_t>(c)] - cb(c);
    }
    H += pb * pa.transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RigidFit fit;
  fit.Q = svd.matrixU() * svd.matrixV().transpose();
  fit.t = cb - fit.Q * ca;
  return fit;
}

namespace {

void apply_fit(PointSet& pts, const RigidFit& fit) {
  const auto d = static_cast<Eigen::Index>(pts.dim);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto p = pts[i];
    Eigen::VectorXd v(d);
    for (Eigen::Index c = 0; c < d; ++c) v(c) = p[static_cast<std::size_t>(c)];
    const Eigen::VectorXd w = fit.Q * v + fit.t;
    for (Eigen::Index c = 0; c < d; ++c) p[static_cast<std::size_t>(c)] = w(c);
  }
}

}  // namespace

Reconstruction align_to_domain(Reconstruction recon, const GraphInstance& g, const ConstantsLedger& ledger) {
  const DomainSpec& domain = recon.domain;
  if (!domain.flat()) {
    recon.frame = Frame::DomainAligned;
    return recon;
  }
  const int m = domain.m;
  if (m >= 5) return recon;
  const std::size_t corners = std::size_t{1} << m;
  const auto cand = corner_candidates(g, ledger, corners);
  const double side = domain.side();
  const auto dim = static_cast<std::size_t>(m);

  auto corner = [&](std::size_t label) {
    Point p(dim);
    for (std::size_t c = 0; c < dim; ++c) p[c] = (label >> c) & 1u ? side : 0.0;
    return p;
  };
  PointSet from(m, 0), to(m, 0);
  for (VertexId v : cand) from.push_back(recon.positions[v]);

  if (m <= 3) {
    // Every assignment of candidates to corners up to the symmetries of the
    // cube: candidate 0 sits at the origin and the axis corners take candidates
    // in increasing order. Keep the best rigid fit.
    std::vector<std::size_t> perm(corners);
    std::iota(perm.begin(), perm.end(), 0);
    double best = kInfinity;
    std::vector<std::size_t> best_perm = perm;
    PointSet trial(m, corners);
    auto canonical = [&] {
      std::size_t last = 0;
      for (std::size_t i = 0; i < corners; ++i)
        if (std::has_single_bit(perm[i])) {
          if (perm[i] < last) return false;
          last = perm[i];
        }
      return true;
    };
    do {
      if (!canonical()) continue;
      for (std::size_t i = 0; i < corners; ++i) {
        const auto c = corner(perm[i]);
        std::copy(c.begin(), c.end(), trial[i].begin());
      }
      const auto fit = fit_orthogonal(from, trial, true);
      double residual = 0.0;
      for (std::size_t i = 0; i < corners; ++i) {
        Eigen::VectorXd v(m);
        for (std::size_t c = 0; c < dim; ++c) v(static_cast<Eigen::Index>(c)) = from[i][c];
        const Eigen::VectorXd w = fit.Q * v + fit.t;
        for (std::size_t c = 0; c < dim; ++c) residual += std::pow(w(static_cast<Eigen::Index>(c)) - trial[i][c], 2);
      }
      if (residual < best) best = residual, best_perm = perm;
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    for (std::size_t i = 0; i < corners; ++i) to.push_back(corner(best_perm[i]));
  } else {
    // Four dimensions: the first candidate is the origin, its m nearest
    // candidates span the axes, and the rest are rounded coordinates in that
    // (oblique) basis.
    const auto a = recon.positions.point(cand[0]);
    std::vector<std::size_t> rest(corners - 1);
    std::iota(rest.begin(), rest.end(), 1);
    auto dist_a = [&](std::size_t i) { return geodesic_distance(recon.positions[cand[i]], a, domain); };
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t i, std::size_t j) { return dist_a(i) < dist_a(j); });
    Eigen::MatrixXd E(m, m);
    for (int c = 0; c < m; ++c)
      for (std::size_t r = 0; r < dim; ++r)
        E(static_cast<Eigen::Index>(r), c) = recon.positions[cand[rest[static_cast<std::size_t>(c)]]][r] - a[r];
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
    if (!lu.isInvertible()) throw Error(ErrorKind::CornerSearchFailed, "corner candidates are degenerate");
    std::vector<std::uint8_t> used(corners, 0);
    for (std::size_t i = 0; i < corners; ++i) {
      Eigen::VectorXd rel(m);
      for (std::size_t r = 0; r < dim; ++r) rel(static_cast<Eigen::Index>(r)) = recon.positions[cand[i]][r] - a[r];
      const Eigen::VectorXd beta = lu.solve(rel);
      std::size_t label = 0;
      for (std::size_t c = 0; c < dim; ++c)
        label |= static_cast<std::size_t>(beta(static_cast<Eigen::Index>(c)) > 0.5) << c;
      if (used[label]++) throw Error(ErrorKind::CornerSearchFailed, "corner candidates do not form a cube");
      to.push_back(corner(label));
    }
  }
  apply_fit(recon.positions, fit_orthogonal(from, to, true));

  recon.clamp.assign(recon.positions.size(), 0.0);
  for (std::size_t v = 0; v < recon.positions.size(); ++v) {
    auto p = recon.positions[v];
    double moved = 0.0;
    for (double& c : p) {
      const double clamped = std::clamp(c, 0.0, side);
      moved += (clamped - c) * (clamped - c);
      c = clamped;
    }
    recon.clamp[v] = std::sqrt(moved);
  }
  recon.corners = cand;
  recon.frame = Frame::DomainAligned;
  return recon;
}

Reconstruction reconstruct(const GraphInstance& g, const DeepOracle& deep, const ConstantsLedger& ledger,
                           const DistanceProvider& provider, PipelineOptions options) {
  ledger.validate();
  g.domain().validate();
  if (g.n() < static_cast<std::size_t>(g.domain().m) + 2)
    throw Error(ErrorKind::LandmarkSearchFailed, "graph is too small to hold a landmark set");
  std::vector<std::vector<double>> fields;
  const auto landmarks = select_landmarks(g, deep, ledger, provider, fields);
  auto recon = trilaterate_all(g, landmarks, fields);
  if (options.align) recon = align_to_domain(std::move(recon), g, ledger);
  return recon;
}

DeepOracle median_depth_oracle(const GraphInstance& g) {
  // The median over an evenly spaced sample; full counts for every vertex
  // cost n * deg * n / 64 word operations on dense graphs.
  const std::size_t n = g.n();
  const std::size_t samples = std::min<std::size_t>(n, kDepthSamples);
  std::vector<std::uint32_t> counts(samples);
  parallel_for(samples, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) counts[i] = two_hop_count(g, static_cast<VertexId>(i * n / samples));
  }, 4);
  const auto mid = counts.begin() + static_cast<std::ptrdiff_t>(samples / 2);
  std::nth_element(counts.begin(), mid, counts.end());
  return DeepOracle::lazy_count(g, *mid);
}

Reconstruction reconstruct(const GraphInstance& g, const ConstantsLedger& ledger, PipelineOptions options) {
  const auto deep = default_deep_oracle(g, ledger);
  try {
    return reconstruct(g, deep, ledger, hybrid_provider(g, deep, ledger), options);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::LandmarkSearchFailed || !options.depthFallback || !g.domain().flat()) throw;
  }
  const auto relative = median_depth_oracle(g);
  auto recon = reconstruct(g, relative, ledger, hybrid_provider(g, relative, ledger), options);
  recon.relativeDepth = true;
  return recon;
}

// ---------------------------------------------------------------------------
// Scoring

Percentiles percentiles(std::vector<double> values) {
  Percentiles p;
  if (values.empty()) return p;
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  p.p50 = at(0.5);
  p.p90 = at(0.9);
  p.p99 = at(0.99);
  p.max = values.back();
  return p;
}

DistortionReport distortion(const PointSet& recon, Frame frame, const GroundTruth& truth) {
  const DomainSpec& domain = truth.domain;
  if (recon.size() != truth.size()) throw Error(ErrorKind::LengthMismatch, "reconstruction and ground truth differ in length");
  if (recon.dim != domain.ambient_dim()) throw Error(ErrorKind::LengthMismatch, "reconstruction has the wrong dimension");
  const std::size_t n = recon.size();
  DistortionReport rep;
  rep.perVertexError.assign(n, 0.0);

  const bool exact = domain.flat() && frame == Frame::DomainAligned && domain.m <= 4;
  if (exact) {
    const auto group = enumerate_symmetries(domain);
    std::vector<double> worst(group.size(), 0.0);
    parallel_for(group.size(), [&](std::size_t begin, std::size_t end, unsigned) {
      for (std::size_t s = begin; s < end; ++s) {
        double w = 0.0;
        for (std::size_t v = 0; v < n; ++v)
          w = std::max(w, geodesic_distance(apply_symmetry(group[s], recon[v], domain), truth.positions[v], domain));
        worst[s] = w;
      }
    }, 1);
    const auto best = static_cast<std::size_t>(std::min_element(worst.begin(), worst.end()) - worst.begin());
    rep.argminSymmetry = group[best];
    for (std::size_t v = 0; v < n; ++v)
      rep.perVertexError[v] = geodesic_distance(apply_symmetry(group[best], recon[v], domain), truth.positions[v], domain);
  } else {
    const bool sphere = !domain.flat();
    const auto fit = fit_orthogonal(recon, truth.positions, !sphere);
    PointSet moved = recon;
    apply_fit(moved, fit);
    if (sphere) {
      rep.argminSymmetry = SymmetryElement::orthogonal(Eigen::Matrix3d(fit.Q));
    } else {
      rep.argminSymmetry = SymmetryElement::identity(domain);
    }
    for (std::size_t v = 0; v < n; ++v) rep.perVertexError[v] = geodesic_distance(moved[v], truth.positions[v], domain);
    rep.surrogate = true;
  }
  rep.percentiles = percentiles(rep.perVertexError);
  rep.dStar = rep.percentiles.max;
  return rep;
}

DistortionReport distortion(const Reconstruction& recon, const GroundTruth& truth) {
  if (!(recon.domain == truth.domain)) throw Error(ErrorKind::Parameter, "reconstruction and ground truth use different domains");
  return distortion(recon.positions, recon.frame, truth);
}

double pairwise_distance_from_reconstruction(const Reconstruction& recon, VertexId u, VertexId v) {
  return geodesic_distance(recon.positions[u], recon.positions[v], recon.domain);
}

}  // namespace rgg
