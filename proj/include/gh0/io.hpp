#pragma once

#include "gh0/approximator.hpp"
#include "gh0/dynamics.hpp"
#include "gh0/entropy.hpp"
#include "gh0/gh_solver.hpp"
#include "gh0/measures.hpp"
#include "gh0/metric_core.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace gh0::io {

using json = nlohmann::json;

// Finite spaces and systems: {"n", "dist" (row-major), "labels"?, "perm"?}
json to_json(const MetricSpaceD& space);
json to_json(const FiniteDynSystemD& system);
MetricSpaceD metric_space_from_json(const json& doc);
FiniteDynSystemD finite_system_from_json(const json& doc);

json to_json(const PointMap& map);
PointMap point_map_from_json(const json& doc);

json to_json(const GHResult& r);

json to_json(const FiniteMeasure& mu);
json to_json(const AmbientMeasure& mu);
FiniteMeasure finite_measure_from_json(const json& doc);

json to_json(const SeparationReport& r);
/// Tab-separated rows: system, delta, n, count, exactness.
void write_tsv(std::ostream& out, const std::vector<SeparationReport>& reports, bool header = true);

/// Parse a system descriptor: rotation[:golden|:p/q|:decimal], cat,
/// cat-fixed-seed, grid_cat:N, or the path of a finite system document.
SystemOracle parse_descriptor(const std::string& descriptor);

/// Read a whole file and parse it; failures raise DataError.
json read_json_file(const std::string& path);
/// Dump with 2-space indent and a trailing newline.
void write_json_file(const std::string& path, const json& doc);
std::string dump(const json& doc);

/// Y is stored densely up to this many points and as a pullback above.
inline constexpr Index kDenseLimit = 1024;

/// Everything needed to re-verify an approximation offline. `system`
/// is the descriptor string, or the finite system document itself.
json certificate_document(const json& system, const ApproximationConfig& cfg, const ApproximationResult& r,
                          Index dense_limit = kDenseLimit);

/// Recompute every check of a certificate document from its serialized
/// pieces. Throws DataError on malformed documents.
ApproximationCertificate verify_certificate(const json& doc);

json to_json(const ApproximationCertificate& cert);

}  // namespace gh0::io
