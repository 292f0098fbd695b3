#include "gh0/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace gh0::io {

namespace {

template <class T>
T get(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw DataError(std::string("document is missing \"") + key + "\"");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw DataError(std::string("document is missing \"") + key + "\"");
  return doc.at(key);
}

json points_to_json(const PointSet& pts) {
  json out = json::array();
  for (Index k = 0; k < pts.cols(); ++k) {
    json p = json::array();
    for (Index r = 0; r < pts.rows(); ++r) p.push_back(pts(r, k));
    out.push_back(std::move(p));
  }
  return out;
}

json point_to_json(const Point& p) {
  json out = json::array();
  for (Index r = 0; r < p.size(); ++r) out.push_back(p(r));
  return out;
}

Point point_from_json(const json& doc, Index dim) {
  if (!doc.is_array() || static_cast<Index>(doc.size()) != dim) throw DataError("point has the wrong dimension");
  Point p(dim);
  for (Index r = 0; r < dim; ++r) {
    if (!doc[static_cast<std::size_t>(r)].is_number()) throw DataError("point coordinate is not a number");
    p(r) = doc[static_cast<std::size_t>(r)].get<double>();
  }
  return p;
}

PointSet points_from_json(const json& doc, Index dim) {
  if (!doc.is_array()) throw DataError("point list is not an array");
  PointSet pts(dim, static_cast<Index>(doc.size()));
  for (std::size_t k = 0; k < doc.size(); ++k) pts.col(static_cast<Index>(k)) = point_from_json(doc[k], dim);
  return pts;
}

std::vector<Index> indices_from_json(const json& doc, const char* key) {
  const auto v = get<std::vector<Index>>(doc, key);
  return v;
}

json config_to_json(const ApproximationConfig& cfg) {
  return {{"delta", cfg.delta},
          {"sample_size", cfg.sample_size},
          {"seed", cfg.seed},
          {"max_orbit_search", cfg.max_orbit_search},
          {"beta_safety", cfg.beta_safety},
          {"alpha_fraction", cfg.alpha_fraction}};
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  if (s.empty() || s.size() > 18) throw DataError("malformed " + what + " '" + s + "'");
  std::size_t start = s[0] == '-' ? 1 : 0;
  if (start == s.size()) throw DataError("malformed " + what + " '" + s + "'");
  for (std::size_t k = start; k < s.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) throw DataError("malformed " + what + " '" + s + "'");
  return std::stoll(s);
}

SystemOracle parse_rotation(const std::string& arg) {
  if (arg.empty() || arg == "golden") return circle_rotation(golden_angle());
  if (const auto slash = arg.find('/'); slash != std::string::npos) {
    const std::int64_t p = parse_int(arg.substr(0, slash), "rotation numerator");
    const std::int64_t q = parse_int(arg.substr(slash + 1), "rotation denominator");
    if (q <= 0) throw DataError("rotation denominator must be positive");
    return circle_rotation_rational(p, q);
  }
  // A terminating decimal is the exact rational digits / 10^k.
  const auto dot = arg.find('.');
  const std::string whole = arg.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : arg.substr(dot + 1);
  const std::string digits = whole + frac;
  if (digits.empty() || digits.size() > 18 || (dot != std::string::npos && frac.empty())) {
    throw DataError("malformed rotation angle '" + arg + "'");
  }
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c))) throw DataError("malformed rotation angle '" + arg + "'");
  std::int64_t den = 1;
  for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
  return circle_rotation_rational(std::stoll(digits), den);
}

}  // namespace

json to_json(const MetricSpaceD& space) {
  json doc;
  const Index n = space.size();
  doc["n"] = n;
  json dist = json::array();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) dist.push_back(space(i, j));
  doc["dist"] = std::move(dist);
  if (!space.labels().empty()) doc["labels"] = space.labels();
  return doc;
}

json to_json(const FiniteDynSystemD& system) {
  json doc = to_json(system.space());
  doc["perm"] = std::vector<Index>(system.perm().begin(), system.perm().end());
  return doc;
}

MetricSpaceD metric_space_from_json(const json& doc) {
  const auto n = get<Index>(doc, "n");
  if (n < 1) throw DataError("\"n\" must be positive");
  const auto dist = get<std::vector<double>>(doc, "dist");
  if (static_cast<Index>(dist.size()) != n * n) throw DataError("\"dist\" must hold n*n entries");
  MetricSpaceD::Matrix d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = dist[static_cast<std::size_t>(i * n + j)];
  std::vector<std::string> labels;
  if (doc.contains("labels")) labels = get<std::vector<std::string>>(doc, "labels");
  try {
    return MetricSpaceD(std::move(d), std::move(labels));
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
}

FiniteDynSystemD finite_system_from_json(const json& doc) {
  MetricSpaceD space = metric_space_from_json(doc);
  auto perm = doc.contains("perm") ? get<std::vector<Index>>(doc, "perm") : [&] {
    std::vector<Index> id(static_cast<std::size_t>(space.size()));
    std::iota(id.begin(), id.end(), Index(0));
    return id;
  }();
  try {
    return FiniteDynSystemD(std::move(space), std::move(perm));
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
}

json to_json(const PointMap& map) { return {{"assign", map.assign}}; }

PointMap point_map_from_json(const json& doc) { return PointMap{get<std::vector<Index>>(doc, "assign")}; }

json to_json(const GHResult& r) {
  json doc{{"lower", r.lower}, {"upper", r.upper}, {"method", to_string(r.method)}};
  if (r.witness_i) doc["witness_i"] = to_json(*r.witness_i);
  if (r.witness_j) doc["witness_j"] = to_json(*r.witness_j);
  return doc;
}

json to_json(const FiniteMeasure& mu) { return {{"atoms", mu.atoms}, {"weights", mu.weights}}; }

json to_json(const AmbientMeasure& mu) {
  json atoms = json::array();
  for (const Point& p : mu.atoms) atoms.push_back(point_to_json(p));
  return {{"atoms", std::move(atoms)}, {"weights", mu.weights}};
}

FiniteMeasure finite_measure_from_json(const json& doc) {
  FiniteMeasure mu;
  mu.atoms = get<std::vector<Index>>(doc, "atoms");
  mu.weights = get<std::vector<double>>(doc, "weights");
  try {
    mu.validate();
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  return mu;
}

json to_json(const SeparationReport& r) {
  json rows = json::array();
  for (const SeparationRow& row : r.rows) {
    rows.push_back({{"n", row.n}, {"count", row.count}, {"exactness", to_string(row.exactness)}});
  }
  json doc{{"system", r.label},
           {"delta", r.delta},
           {"points", r.points},
           {"window", {r.window.first, r.window.second}},
           {"slope", r.slope},
           {"rows", std::move(rows)}};
  if (r.saturation_n) doc["saturation_n"] = *r.saturation_n;
  if (r.tail_slope) doc["tail_slope"] = *r.tail_slope;
  return doc;
}

void write_tsv(std::ostream& out, const std::vector<SeparationReport>& reports, bool header) {
  if (header) out << "system\tdelta\tn\tcount\texactness\n";
  for (const SeparationReport& r : reports) {
    const std::string delta = json(r.delta).dump();
    for (const SeparationRow& row : r.rows)
      out << r.label << '\t' << delta << '\t' << row.n << '\t' << row.count << '\t' << to_string(row.exactness) << '\n';
  }
}

SystemOracle parse_descriptor(const std::string& descriptor) {
  if (descriptor == "rotation") return parse_rotation("");
  if (descriptor.rfind("rotation:", 0) == 0) return parse_rotation(descriptor.substr(9));
  if (descriptor == "cat") return torus_cat_map(false);
  if (descriptor == "cat-fixed-seed") return torus_cat_map(true);
  if (descriptor.rfind("grid_cat:", 0) == 0) {
    const std::int64_t n = parse_int(descriptor.substr(9), "grid size");
    if (n < 1) throw DataError("grid size must be positive");
    return grid_cat_oracle(static_cast<Index>(n));
  }
  if (std::filesystem::is_regular_file(descriptor)) {
    return finite_oracle(std::make_shared<const FiniteDynSystemD>(finite_system_from_json(read_json_file(descriptor))));
  }
  throw DataError("unknown system descriptor '" + descriptor + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("cannot parse '" + path + "': " + e.what());
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << dump(doc);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json to_json(const ApproximationCertificate& cert) {
  json checks = json::array();
  for (const Check& c : cert.checks) {
    checks.push_back({{"name", c.name},
                      {"inequality", c.inequality},
                      {"relation", c.relation},
                      {"threshold", c.threshold},
                      {"achieved", c.achieved},
                      {"passed", c.passed}});
  }
  return {{"delta", cert.delta},       {"beta", cert.beta},     {"alpha", cert.alpha},
          {"sample_size", cert.sample_size}, {"y_size", cert.y_size}, {"gh0_bound", cert.gh0_bound},
          {"passed", cert.passed()},   {"checks", std::move(checks)}};
}

json certificate_document(const json& system, const ApproximationConfig& cfg, const ApproximationResult& r,
                          Index dense_limit) {
  json doc;
  doc["format"] = "gh0-certificate";
  doc["version"] = 1;
  doc["system"] = system;
  doc["config"] = config_to_json(cfg);
  doc["delta"] = cfg.delta;
  doc["beta"] = r.beta;
  doc["alpha"] = r.alpha;
  doc["dim"] = r.sample.rows();
  doc["sample"] = points_to_json(r.sample);
  doc["net"] = r.net;

  json blocks = json::array();
  for (const OrbitBlock& b : r.blocks) {
    blocks.push_back({{"net_index", b.net_index},
                      {"anchor", point_to_json(b.anchor)},
                      {"length", b.length},
                      {"offset", b.offset},
                      {"hit_time", b.hit_time},
                      {"source", to_string(b.source)},
                      {"anchor_dist", b.anchor_dist},
                      {"return_gap", b.return_gap},
                      {"closing_gap", b.closing_gap}});
  }
  doc["blocks"] = std::move(blocks);

  const YSpace& y = r.finite_system.space();
  json ydoc{{"n", y.size()}, {"alpha", r.alpha}};
  if (y.size() <= dense_limit) {
    json dist = json::array();
    for (Index u = 0; u < y.size(); ++u)
      for (Index v = 0; v < y.size(); ++v) dist.push_back(y(u, v));
    ydoc["dist"] = std::move(dist);
  } else {
    ydoc["pullback"] = "q";
  }
  doc["y"] = std::move(ydoc);
  doc["perm"] = std::vector<Index>(r.finite_system.perm().begin(), r.finite_system.perm().end());
  doc["q"] = points_to_json(r.q);
  doc["j"] = r.j.assign;
  doc["certificate"] = to_json(r.certificate);
  return doc;
}

ApproximationCertificate verify_certificate(const json& doc) {
  if (!doc.is_object() || get<std::string>(doc, "format") != "gh0-certificate") {
    throw DataError("not a certificate document");
  }
  const json& sys = field(doc, "system");
  SystemOracle oracle = sys.is_string() ? parse_descriptor(sys.get<std::string>())
                                        : finite_oracle(std::make_shared<const FiniteDynSystemD>(finite_system_from_json(sys)));
  const auto dim = get<Index>(doc, "dim");
  if (dim != oracle.dim) throw DataError("certificate dimension does not match its system");

  const auto delta = get<double>(doc, "delta");
  const auto beta = get<double>(doc, "beta");
  const auto alpha = get<double>(doc, "alpha");
  const PointSet sample = points_from_json(field(doc, "sample"), dim);
  const PointSet q = points_from_json(field(doc, "q"), dim);
  const std::vector<Index> net = indices_from_json(doc, "net");
  const std::vector<Index> perm = indices_from_json(doc, "perm");
  const std::vector<Index> j = indices_from_json(doc, "j");
  if (sample.cols() < 1 || q.cols() < 1) throw DataError("certificate has an empty sample or Y");
  if (!(alpha > 0)) throw DataError("certificate alpha must be positive");

  std::vector<BlockRecord> blocks;
  const json& bdoc = field(doc, "blocks");
  if (!bdoc.is_array()) throw DataError("\"blocks\" is not an array");
  for (const json& b : bdoc) {
    blocks.push_back({get<Index>(b, "net_index"), point_from_json(field(b, "anchor"), dim),
                      get<Index>(b, "length")});
  }

  const json& ydoc = field(doc, "y");
  const auto n = get<Index>(ydoc, "n");
  if (n != q.cols()) throw DataError("Y size does not match q");
  for (Index u : j)
    if (u < 0 || u >= n) throw DataError("j leaves Y");
  if (static_cast<Index>(j.size()) != sample.cols()) throw DataError("j is not defined on the whole sample");
  if (static_cast<Index>(perm.size()) != n) throw DataError("perm does not act on Y");
  for (Index u : perm)
    if (u < 0 || u >= n) throw DataError("perm leaves Y");

  if (ydoc.contains("dist")) {
    const auto dist = get<std::vector<double>>(ydoc, "dist");
    if (static_cast<Index>(dist.size()) != n * n) throw DataError("\"dist\" must hold n*n entries");
    MetricSpaceD::Matrix d(n, n);
    for (Index u = 0; u < n; ++u)
      for (Index v = 0; v < n; ++v) d(u, v) = dist[static_cast<std::size_t>(u * n + v)];
    const MetricSpaceD y(std::move(d));
    return certify(oracle, CertificateInputs<MetricSpaceD>{sample, net, blocks, y, perm, q, j, delta, beta, alpha});
  }
  if (get<std::string>(ydoc, "pullback") != "q") throw DataError("unknown Y representation");
  const YSpace y(PointCloudD(q, oracle.metric), get<double>(ydoc, "alpha"));
  return certify(oracle, CertificateInputs<YSpace>{sample, net, blocks, y, perm, q, j, delta, beta, alpha});
}

}  // namespace gh0::io
