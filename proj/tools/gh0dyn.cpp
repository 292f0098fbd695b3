// gh0dyn: command-line driver for the finite approximation toolkit.
//
// Exit codes: 0 success, 2 no recurrence / coverage gap, 3 certification
// failure, 64 usage error, 65 malformed data.

#include "gh0/approximator.hpp"
#include "gh0/entropy.hpp"
#include "gh0/gh_solver.hpp"
#include "gh0/io.hpp"
#include "gh0/measures.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

using namespace gh0;
using io::json;

constexpr int kExitRecurrence = 2;
constexpr int kExitCertification = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// The certificate records the descriptor, or the document of a file system
// so that it can be verified on its own.
json system_entry(const std::string& descriptor) {
  if (std::filesystem::is_regular_file(descriptor)) return io::read_json_file(descriptor);
  return descriptor;
}

SystemOracle oracle_of(const json& system) {
  if (system.is_string()) return io::parse_descriptor(system.get<std::string>());
  return finite_oracle(std::make_shared<const FiniteDynSystemD>(io::finite_system_from_json(system)));
}

// ---------------------------------------------------------------------------

struct ApproximateArgs {
  std::string system;
  double delta = 0;
  ApproximationConfig cfg;
  Index dense_limit = io::kDenseLimit;
  std::string out;
};

int run_approximate(ApproximateArgs a) {
  a.cfg.delta = a.delta;
  const json system = system_entry(a.system);
  const SystemOracle oracle = oracle_of(system);
  const ApproximationResult r = build_approximation(oracle, a.cfg);
  emit(a.out, io::dump(io::certificate_document(system, a.cfg, r, a.dense_limit)));
  std::cerr << oracle.name << ": |Y| = " << r.finite_system.size() << ", blocks = " << r.blocks.size()
            << ", gh0_bound = " << json(r.certificate.gh0_bound).dump() << '\n';
  require_certified(r.certificate);
  return 0;
}

// ---------------------------------------------------------------------------

struct EntropyArgs {
  std::string system;
  std::string certificate;
  std::vector<double> deltas;
  Index n_max = 10;
  std::vector<Index> window;
  Index budget = kDefaultExactBudget;
  Index sample_size = 2000;
  std::uint64_t seed = 1;
  std::string format = "tsv";
  std::string out;
};

// Finite sources give periodic tables; analytic ones are sampled.
struct Source {
  std::string label;
  std::optional<FiniteDynSystemD> finite;
  std::optional<OrbitTable> table;
};

Source source_of(const json& system, Index n_max, Index sample_size, std::uint64_t seed) {
  Source s;
  const SystemOracle oracle = oracle_of(system);
  s.label = oracle.name;
  if (const auto* g = std::get_if<GridCatSpec>(&oracle.spec)) {
    s.finite = grid_cat_system(g->n);
  } else if (const auto* f = std::get_if<FiniteSpec>(&oracle.spec)) {
    s.finite = *f->system;
  }
  if (s.finite) {
    s.table = finite_orbit_table(*s.finite);
  } else {
    s.table = ambient_orbit_table(oracle, oracle.sampler(sample_size, seed), n_max);
  }
  return s;
}

int run_entropy(const EntropyArgs& a) {
  if (a.deltas.empty()) throw CLI::ValidationError("--deltas", "at least one delta is required");
  if (a.n_max < 1) throw CLI::ValidationError("--n-max", "must be positive");
  std::pair<Index, Index> window{1, a.n_max};
  if (!a.window.empty()) {
    if (a.window.size() != 2 || a.window[0] < 1 || a.window[0] >= a.window[1] || a.window[1] > a.n_max) {
      throw CLI::ValidationError("--window", "expects lo,hi with 1 <= lo < hi <= n-max");
    }
    window = {a.window[0], a.window[1]};
  }

  std::vector<SeparationReport> reports;
  if (!a.system.empty()) {
    const Source src = source_of(system_entry(a.system), a.n_max, a.sample_size, a.seed);
    for (double d : a.deltas) {
      SeparationReport r = separation_report(*src.table, d, a.n_max, window, a.budget);
      r.label = src.label;
      reports.push_back(std::move(r));
    }
  } else {
    const json doc = io::read_json_file(a.certificate);
    if (!doc.is_object() || !doc.contains("system") || !doc.contains("config")) {
      throw DataError("not a certificate document");
    }
    const auto& config = doc.at("config");
    const Source src = source_of(doc.at("system"), a.n_max, config.at("sample_size").get<Index>(),
                                 config.at("seed").get<std::uint64_t>());

    // Rebuild the approximant from its serialized pieces.
    const SystemOracle oracle = oracle_of(doc.at("system"));
    const Index dim = doc.at("dim").get<Index>();
    const auto& qdoc = doc.at("q");
    PointSet q(dim, static_cast<Index>(qdoc.size()));
    for (std::size_t u = 0; u < qdoc.size(); ++u)
      for (Index r = 0; r < dim; ++r) q(r, static_cast<Index>(u)) = qdoc[u].at(static_cast<std::size_t>(r)).get<double>();
    const auto perm = doc.at("perm").get<std::vector<Index>>();
    const auto& ydoc = doc.at("y");
    std::optional<OrbitTable> y_table;
    if (ydoc.contains("dist")) {
      json sys = ydoc;
      sys["perm"] = perm;
      y_table = finite_orbit_table(io::finite_system_from_json(sys));
    } else {
      const FiniteDynSystem<YSpace> y(YSpace(PointCloudD(q, oracle.metric), ydoc.at("alpha").get<double>()), perm);
      y_table = finite_orbit_table(y);
    }
    for (double d : a.deltas) {
      SeparationReport r = separation_report(*src.table, d, a.n_max, window, a.budget);
      r.label = src.label;
      reports.push_back(std::move(r));
      SeparationReport fr = finite_table_entropy(*y_table, d, a.n_max, window, a.budget);
      fr.label = "approximant";
      reports.push_back(std::move(fr));
    }
  }

  std::ostringstream text;
  if (a.format == "json") {
    json all = json::array();
    for (const auto& r : reports) all.push_back(io::to_json(r));
    text << io::dump(all);
  } else {
    io::write_tsv(text, reports);
  }
  emit(a.out, text.str());
  for (const auto& r : reports) {
    std::cerr << r.label << " delta=" << json(r.delta).dump() << " slope[" << r.window.first << "," << r.window.second
              << "]=" << json(r.slope).dump();
    if (r.tail_slope) std::cerr << " tail_slope=" << json(*r.tail_slope).dump();
    std::cerr << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct Gh0Args {
  std::string x, y;
  double budget = kDefaultGHBudget;
  std::string out;
};

int run_gh0(const Gh0Args& a) {
  const FiniteDynSystemD f = io::finite_system_from_json(io::read_json_file(a.x));
  const FiniteDynSystemD g = io::finite_system_from_json(io::read_json_file(a.y));
  const GHResult r = map_pair_count(f.size(), g.size()) <= a.budget ? gh0_exact_small(f, g, a.budget) : gh0_bounds(f, g);
  emit(a.out, io::dump(io::to_json(r)));
  return 0;
}

// ---------------------------------------------------------------------------

struct MeasureArgs {
  std::string system;
  double eps = 1e-9;
  std::vector<double> from, center;
  double radius = 0;
  Index cap = 100000;
  std::string out;
};

int run_measure(const MeasureArgs& a) {
  const json system = system_entry(a.system);
  const SystemOracle oracle = oracle_of(system);
  json report{{"system", oracle.name}};

  std::optional<FiniteDynSystemD> finite;
  if (const auto* g = std::get_if<GridCatSpec>(&oracle.spec)) finite = grid_cat_system(g->n);
  if (const auto* f = std::get_if<FiniteSpec>(&oracle.spec)) finite = *f->system;
  if (finite) {
    // One orbit measure per cycle, mixed with weights 2^-n.
    std::vector<FiniteMeasure> parts;
    std::vector<bool> seen(static_cast<std::size_t>(finite->size()), false);
    for (Index p = 0; p < finite->size(); ++p) {
      if (seen[static_cast<std::size_t>(p)]) continue;
      parts.push_back(periodic_orbit_measure(*finite, p));
      for (Index u : parts.back().atoms) seen[static_cast<std::size_t>(u)] = true;
    }
    const FiniteMeasure mu = mixture_measure<Index>(parts);
    std::vector<Index> all(static_cast<std::size_t>(finite->size()));
    std::iota(all.begin(), all.end(), Index(0));
    const SupportCover cover = support_covers(mu, finite->space(), all, a.eps);
    report["parts"] = parts.size();
    report["measure"] = io::to_json(mu);
    report["invariance_defect"] = invariance_defect(mu, [&](Index u) { return (*finite)(u); });
    report["support_covers"] = cover.covers;
    report["worst_gap"] = cover.worst_gap;
  }
  if (!a.from.empty() || !a.center.empty()) {
    if (static_cast<int>(a.from.size()) != oracle.dim || static_cast<int>(a.center.size()) != oracle.dim) {
      throw CLI::ValidationError("--from/--center", "points must match the system dimension");
    }
    if (!(a.radius > 0)) throw CLI::ValidationError("--radius", "must be positive");
    const Point x = Eigen::Map<const Point>(a.from.data(), oracle.dim);
    const Point c = Eigen::Map<const Point>(a.center.data(), oracle.dim);
    const auto hit = birkhoff_hitting(oracle, x, c, a.radius, a.cap);
    report["hitting_time"] = hit ? json(*hit) : json(nullptr);
  }
  emit(a.out, io::dump(report));
  return 0;
}

// ---------------------------------------------------------------------------

int run_verify(const std::string& path) {
  const ApproximationCertificate cert = io::verify_certificate(io::read_json_file(path));
  for (const Check& c : cert.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << json(c.achieved).dump() << ' ' << c.relation << ' '
              << json(c.threshold).dump() << '\n';
  }
  require_certified(cert);
  return 0;
}

int run_demo_list() {
  std::cout << "rotation            circle rotation by the golden angle\n"
               "rotation:p/q        rational rotation, exact on the 1/q lattice\n"
               "rotation:0.4        decimal angle read as an exact rational\n"
               "cat                 cat map (2 1; 1 1) on the torus\n"
               "cat-fixed-seed      cat map with anchors seeded at the fixed point, no fallback\n"
               "grid_cat:N          cat map on the N x N lattice\n"
               "<file.json>         finite system {\"n\", \"dist\", \"perm\"}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite approximations of homeomorphisms in the C0 Gromov-Hausdorff distance"};
  app.require_subcommand(1);

  ApproximateArgs ap;
  auto* approx = app.add_subcommand("approximate", "build and certify a finite approximant");
  approx->add_option("--system", ap.system, "system descriptor")->required();
  approx->add_option("--delta", ap.delta, "target scale")->required()->check(CLI::PositiveNumber);
  approx->add_option("--sample-size", ap.cfg.sample_size, "sample size")->capture_default_str();
  approx->add_option("--seed", ap.cfg.seed, "sample seed")->capture_default_str();
  approx->add_option("--max-orbit-search", ap.cfg.max_orbit_search, "iteration cap of orbit searches")->capture_default_str();
  approx->add_option("--beta-safety", ap.cfg.beta_safety, "safety factor on beta")->capture_default_str();
  approx->add_option("--alpha-fraction", ap.cfg.alpha_fraction, "alpha as a fraction of its ceiling")->capture_default_str();
  approx->add_option("--dense-limit", ap.dense_limit, "largest Y stored as a dense matrix")->capture_default_str();
  approx->add_option("--out", ap.out, "certificate file (default stdout)");

  EntropyArgs en;
  auto* entropy = app.add_subcommand("entropy", "separated-set counts and entropy slopes");
  auto* en_sys = entropy->add_option("--system", en.system, "system descriptor");
  auto* en_cert = entropy->add_option("--certificate", en.certificate, "certificate file: source and approximant");
  en_sys->excludes(en_cert);
  entropy->add_option("--deltas", en.deltas, "separation scales")->required()->delimiter(',')->check(CLI::PositiveNumber);
  entropy->add_option("--n-max", en.n_max, "largest n")->capture_default_str();
  entropy->add_option("--window", en.window, "slope window lo,hi")->delimiter(',');
  entropy->add_option("--budget", en.budget, "largest component solved exactly")->capture_default_str()->check(CLI::Range(0, 64));
  entropy->add_option("--sample-size", en.sample_size, "sample size of analytic systems")->capture_default_str();
  entropy->add_option("--seed", en.seed, "sample seed")->capture_default_str();
  entropy->add_option("--format", en.format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();
  entropy->add_option("--out", en.out, "output file (default stdout)");

  Gh0Args gh;
  auto* gh0 = app.add_subcommand("gh0", "C0 Gromov-Hausdorff distance of two finite systems");
  gh0->add_option("x", gh.x, "first system file")->required();
  gh0->add_option("y", gh.y, "second system file")->required();
  gh0->add_option("--budget", gh.budget, "largest number of map pairs searched exactly")->capture_default_str();
  gh0->add_option("--out", gh.out, "output file (default stdout)");

  MeasureArgs me;
  auto* measure = app.add_subcommand("measure", "periodic-orbit mixture and hitting times");
  measure->add_option("--system", me.system, "system descriptor")->required();
  measure->add_option("--eps", me.eps, "support cover radius")->capture_default_str();
  measure->add_option("--from", me.from, "hitting search start point")->delimiter(',');
  measure->add_option("--center", me.center, "hitting target center")->delimiter(',');
  measure->add_option("--radius", me.radius, "hitting target radius");
  measure->add_option("--cap", me.cap, "hitting search cap")->capture_default_str();
  measure->add_option("--out", me.out, "output file (default stdout)");

  std::string cert_path;
  auto* verify = app.add_subcommand("verify", "re-check every inequality of a certificate");
  verify->add_option("certificate", cert_path, "certificate file")->required();

  auto* demo = app.add_subcommand("demo-list", "list built-in system descriptors");

  try {
    app.parse(argc, argv);
    if (entropy->parsed() && en.system.empty() && en.certificate.empty()) {
      throw CLI::RequiredError("--system or --certificate");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (approx->parsed()) return run_approximate(ap);
    if (entropy->parsed()) return run_entropy(en);
    if (gh0->parsed()) return run_gh0(gh);
    if (measure->parsed()) return run_measure(me);
    if (verify->parsed()) return run_verify(cert_path);
    if (demo->parsed()) return run_demo_list();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NoRecurrence& e) {
    std::cerr << "no recurrence: " << e.what() << '\n';
    return kExitRecurrence;
  } catch (const CoverageGap& e) {
    std::cerr << "coverage gap: " << e.what() << '\n';
    return kExitRecurrence;
  } catch (const CertificationFailure& e) {
    std::cerr << "certification failed at " << e.check_name << ": " << e.what() << '\n';
    return kExitCertification;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
