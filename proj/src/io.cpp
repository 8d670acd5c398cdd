#include "rggrecon/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rgg {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename onto " + path.string() + ": " + ec.message());
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(1) + "\n"); }

namespace {

void check_version(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("format_version") || j["format_version"] != kFormatVersion)
    throw Error(ErrorKind::Format, what + ": missing or unsupported format_version");
}

nlohmann::json model_json(const GraphInstance& g) {
  nlohmann::json j = {{"format_version", kFormatVersion},
                      {"n", g.n()},
                      {"r", g.r()},
                      {"domain", to_json(g.domain())},
                      {"domain_n", g.domain().n},
                      {"model", g.params().process == PointProcess::Poisson ? "poisson" : "uniform"}};
  if (g.params().alpha) j["alpha"] = *g.params().alpha;
  return j;
}

/// SAX consumer for graph files: builds a small DOM for everything except the
/// edge list, which goes straight into a vector of pairs.
class GraphSax : public nlohmann::json_sax<nlohmann::json> {
 public:
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<VertexId, VertexId>> edges;

  bool null() override { return value(nullptr); }
  bool boolean(bool b) override { return value(b); }
  bool number_integer(number_integer_t x) override { return value(x); }
  bool number_unsigned(number_unsigned_t x) override {
    if (in_edges_ && depth_ == 3) return edge_value(x);
    return value(x);
  }
  bool number_float(number_float_t x, const string_t&) override { return value(x); }
  bool string(string_t& s) override { return value(s); }
  bool binary(binary_t&) override { return fail("binary values are not allowed"); }

  bool start_object(std::size_t) override {
    if (in_edges_) return fail("edges must be arrays of two vertex ids");
    ++depth_;
    if (depth_ == 1) {
      stack_.push_back(&meta);
      return true;
    }
    return open(nlohmann::json::object());
  }
  bool end_object() override {
    --depth_;
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    ++depth_;
    if (depth_ == 2 && key_ == "edges") {
      in_edges_ = true;
      return true;
    }
    if (in_edges_) {
      if (depth_ != 3) return fail("edges must be arrays of two vertex ids");
      slot_ = 0;
      return true;
    }
    return open(nlohmann::json::array());
  }
  bool end_array() override {
    --depth_;
    if (in_edges_) {
      if (depth_ == 2) {
        if (slot_ != 2) return fail("edges must be arrays of two vertex ids");
        edges.emplace_back(pair_[0], pair_[1]);
      } else {
        in_edges_ = false;
        saw_edges_ = true;
      }
      return true;
    }
    stack_.pop_back();
    return true;
  }
  bool key(string_t& k) override {
    if (depth_ == 1) key_ = k;
    pending_ = k;
    return true;
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) override {
    return fail("parse error at byte " + std::to_string(pos) + ": " + e.what());
  }

  bool saw_edges() const { return saw_edges_; }
  const std::string& error() const { return error_; }

 private:
  template <class V>
  bool value(V&& v) {
    if (in_edges_) return fail("edge endpoints must be non-negative integers");
    if (stack_.empty()) return fail("top level must be an object");
    auto& top = *stack_.back();
    if (top.is_object()) top[pending_] = std::forward<V>(v);
    else top.push_back(std::forward<V>(v));
    return true;
  }
  bool open(nlohmann::json fresh) {
    auto& top = *stack_.back();
    nlohmann::json* slot;
    if (top.is_object()) {
      top[pending_] = std::move(fresh);
      slot = &top[pending_];
    } else {
      top.push_back(std::move(fresh));
      slot = &top.back();
    }
    stack_.push_back(slot);
    return true;
  }
  bool edge_value(number_unsigned_t x) {
    if (slot_ >= 2) return fail("edges must be arrays of two vertex ids");
    if (x > std::numeric_limits<VertexId>::max()) return fail("vertex id too large");
    pair_[slot_++] = static_cast<VertexId>(x);
    return true;
  }
  bool fail(std::string msg) {
    if (error_.empty()) error_ = std::move(msg);
    return false;
  }

  std::vector<nlohmann::json*> stack_;
  std::string key_, pending_, error_;
  int depth_ = 0;
  bool in_edges_ = false, saw_edges_ = false;
  int slot_ = 0;
  VertexId pair_[2] = {0, 0};
};

}  // namespace

void write_graph(const fs::path& path, const GraphInstance& g) {
  std::string meta = model_json(g).dump();
  meta.pop_back();  // reopen the object to append the edge list
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << meta << ",\"edges\":[";
    bool first = true;
    std::string buf;
    buf.reserve(1 << 20);
    for (VertexId v = 0; v < g.n(); ++v) {
      g.for_each_neighbor(v, [&](VertexId w) {
        if (w <= v) return;
        if (!first) buf += ',';
        first = false;
        buf += '[';
        buf += std::to_string(v);
        buf += ',';
        buf += std::to_string(w);
        buf += ']';
      });
      if (buf.size() > (1 << 20) - 64) {
        out << buf;
        buf.clear();
      }
    }
    out << buf << "]}\n";
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename onto " + path.string());
}

GraphInstance read_graph(const fs::path& path, AdjacencyLayout layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  GraphSax sax;
  const bool ok = nlohmann::json::sax_parse(in, &sax);
  if (!ok) throw Error(ErrorKind::Format, path.string() + ": " + (sax.error().empty() ? "malformed graph" : sax.error()));
  const auto& j = sax.meta;
  check_version(j, path.string());
  if (!sax.saw_edges()) throw Error(ErrorKind::Format, path.string() + ": missing edges");
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto nominal = j.contains("domain_n") ? j["domain_n"].get<std::int64_t>() : static_cast<std::int64_t>(n);
    const DomainSpec domain = domain_from_json(j.at("domain"), nominal);
    ModelParams params;
    params.r = j.at("r").get<double>();
    if (j.contains("alpha")) params.alpha = j["alpha"].get<double>();
    if (j.contains("model") && j["model"] == "poisson") params.process = PointProcess::Poisson;
    params.validate(domain);
    return GraphInstance::from_edges(domain, params, n, sax.edges, layout);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

void write_positions(const fs::path& path, const GroundTruth& truth) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < truth.size(); ++i) pts.push_back(truth.positions.point(i));
  write_text(path, nlohmann::json{{"format_version", kFormatVersion}, {"positions", std::move(pts)}}.dump() + "\n");
}

namespace {

PointSet points_from_json(const nlohmann::json& arr, int dim, const std::string& what) {
  if (!arr.is_array()) throw Error(ErrorKind::Format, what + " must be an array");
  PointSet out(dim, 0);
  out.coords.reserve(arr.size() * static_cast<std::size_t>(dim));
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != static_cast<std::size_t>(dim))
      throw Error(ErrorKind::Format, what + ": every point needs " + std::to_string(dim) + " coordinates");
    for (const auto& c : p) {
      if (!c.is_number()) throw Error(ErrorKind::Format, what + ": coordinates must be numbers");
      out.coords.push_back(c.get<double>());
    }
  }
  return out;
}

nlohmann::json points_to_json(const PointSet& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) arr.push_back(pts.point(i));
  return arr;
}

}  // namespace

GroundTruth read_positions(const fs::path& path, const DomainSpec& domain) {
  const auto j = read_json(path);
  check_version(j, path.string());
  if (!j.contains("positions")) throw Error(ErrorKind::Format, path.string() + ": missing positions");
  GroundTruth truth{domain, points_from_json(j["positions"], domain.ambient_dim(), path.string())};
  truth.validate();
  return truth;
}

nlohmann::json to_json(const Reconstruction& recon) {
  return {{"format_version", kFormatVersion},
          {"frame", to_string(recon.frame)},
          {"domain", to_json(recon.domain)},
          {"domain_n", recon.domain.n},
          {"landmarks", recon.landmarks.ids},
          {"landmark_positions", points_to_json(recon.landmarks.embedded)},
          {"landmark_pairwise", recon.landmarks.pairwise},
          {"landmark_stage", recon.landmarks.searchStage},
          {"corners", recon.corners},
          {"unplaced", recon.unplaced},
          {"relative_depth", recon.relativeDepth},
          {"clamp", recon.clamp},
          {"positions", points_to_json(recon.positions)}};
}

Reconstruction reconstruction_from_json(const nlohmann::json& j) {
  check_version(j, "reconstruction");
  try {
    Reconstruction r;
    r.domain = domain_from_json(j.at("domain"), j.at("domain_n").get<std::int64_t>());
    const auto frame = j.at("frame").get<std::string>();
    if (frame == "working") r.frame = Frame::Working;
    else if (frame == "domain_aligned") r.frame = Frame::DomainAligned;
    else throw Error(ErrorKind::Format, "unknown frame '" + frame + "'");
    r.positions = points_from_json(j.at("positions"), r.domain.ambient_dim(), "positions");
    r.landmarks.ids = j.at("landmarks").get<std::vector<VertexId>>();
    const auto& lp = j.at("landmark_positions");
    const int ldim = lp.empty() ? r.domain.ambient_dim() : static_cast<int>(lp.at(0).size());
    r.landmarks.embedded = points_from_json(lp, ldim, "landmark_positions");
    if (j.contains("landmark_pairwise"))
      r.landmarks.pairwise = j["landmark_pairwise"].get<std::vector<std::vector<double>>>();
    if (j.contains("landmark_stage")) r.landmarks.searchStage = j["landmark_stage"].get<int>();
    if (j.contains("corners")) r.corners = j["corners"].get<std::vector<VertexId>>();
    if (j.contains("relative_depth")) r.relativeDepth = j["relative_depth"].get<bool>();
    if (j.contains("unplaced")) r.unplaced = j["unplaced"].get<std::vector<VertexId>>();
    if (j.contains("clamp")) r.clamp = j["clamp"].get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("reconstruction: ") + e.what());
  }
}

void write_reconstruction(const fs::path& path, const Reconstruction& recon, double r, const ConstantsLedger& ledger,
                          const nlohmann::json& timings_ms) {
  auto j = to_json(recon);
  j["n"] = recon.positions.size();
  j["r"] = r;
  j["constants"] = to_json(ledger);
  j["timings_ms"] = timings_ms;
  write_text(path, j.dump() + "\n");
}

Reconstruction read_reconstruction(const fs::path& path) { return reconstruction_from_json(read_json(path)); }

nlohmann::json report_json(const DistortionReport& report, const ConstantsLedger& ledger,
                            const nlohmann::json& timings_ms) {
  return {{"format_version", kFormatVersion},
          {"d_star", report.dStar},
          {"argmin_symmetry", to_json(report.argminSymmetry)},
          {"percentiles",
           {{"p50", report.percentiles.p50},
            {"p90", report.percentiles.p90},
            {"p99", report.percentiles.p99},
            {"max", report.percentiles.max}}},
          {"surrogate", report.surrogate},
          {"constants", to_json(ledger)},
          {"timings_ms", timings_ms}};
}

void write_estimates_csv(const fs::path& path, const std::vector<EstimateRow>& rows) {
  std::string text = "pair_u,pair_v,kind,value,envelope,true_distance\n";
  for (const auto& r : rows) {
    text += std::to_string(r.u) + ',' + std::to_string(r.v) + ',' + std::string(to_string(r.kind)) + ',' +
            format_double(r.value) + ',' + format_double(r.envelope) + ',' +
            (r.true_distance ? format_double(*r.true_distance) : std::string()) + '\n';
  }
  write_text(path, text);
}

namespace {

DistanceEstimate::Kind kind_from_string(const std::string& s, std::size_t line) {
  using K = DistanceEstimate::Kind;
  for (K k : {K::ShortLune, K::ShortLens, K::LongGraph, K::Hybrid})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::Format, "row " + std::to_string(line) + ", column kind: unknown estimate kind '" + s + "'");
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // from_chars rejects "inf"; accept the spellings format_double produces.
    if (s == "inf") return kInfinity;
    throw Error(ErrorKind::Format, "row " + std::to_string(line) + ", column " + column + ": bad number '" + s + "'");
  }
  return x;
}

}  // namespace

std::vector<EstimateRow> read_estimates_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  if (line != "pair_u,pair_v,kind,value,envelope,true_distance")
    throw Error(ErrorKind::Format, path.string() + ": unexpected header");
  std::vector<EstimateRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw Error(ErrorKind::Format, "row " + std::to_string(lineno) + ": expected 6 columns");
    EstimateRow r;
    r.u = static_cast<VertexId>(parse_double(f[0], lineno, "pair_u"));
    r.v = static_cast<VertexId>(parse_double(f[1], lineno, "pair_v"));
    r.kind = kind_from_string(f[2], lineno);
    r.value = parse_double(f[3], lineno, "value");
    r.envelope = parse_double(f[4], lineno, "envelope");
    if (!f[5].empty()) r.true_distance = parse_double(f[5], lineno, "true_distance");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rgg
