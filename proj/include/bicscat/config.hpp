#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bicscat/bicprobe.hpp"
#include "bicscat/derivs.hpp"
#include "bicscat/jsonio.hpp"

namespace bicscat {

// Point request shared by the smatrix and derivs subcommands.
struct PointRequest {
  double beta = 0.0;
  std::vector<double> delta;  // defaults to the family's zero parameter vector
  double k = 0.0;
};

struct DerivsRequest {
  PointRequest point;
  int mu_case = 2;
  double m_phase = 0.5 * pi;  // reference unitary M = e^{i m_phase} I
};

struct ProbeRequest {
  ProbeCase which = ProbeCase::III;
  ProbeConfig cfg;
};

// Parsed run configuration.  Each subcommand consumes its own section; the
// structure and grid sections are shared.  Unknown keys anywhere in the
// document are rejected up front (config-invalid) so that typos cannot
// silently fall back to defaults.
struct RunConfig {
  StructureSpec structure;
  Grid grid;
  std::optional<PointRequest> smatrix;
  std::optional<ProbeRequest> probe;
  std::optional<DerivsRequest> derivs;
  int localize_depth = 6;
  bool has_localize = false;
};

RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

// Canonical echo of the parsed configuration: fixed key order, defaults made
// explicit.  Serializing the echo with dump_deterministic() is byte-stable.
json config_to_json(const RunConfig& c);

}  // namespace bicscat
