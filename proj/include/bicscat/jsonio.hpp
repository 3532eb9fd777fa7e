#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "bicscat/bicprobe.hpp"
#include "bicscat/derivs.hpp"
#include "bicscat/smatrix.hpp"

namespace bicscat {

using json = nlohmann::ordered_json;

// Deterministic serialization: insertion-ordered keys, floats printed with 17
// significant digits, 2-space indentation.  Identical inputs produce
// byte-identical text on every platform.
std::string dump_deterministic(const json& j);

// Complex values serialize as [re, im]; matrices row-major as arrays of rows.
json to_json(cd z);
json to_json(const Eigen::VectorXcd& v);
json to_json(const Eigen::MatrixXcd& m);

json smatrix_to_json(const ScatteringMatrix& sm);
json probe_to_json(const ProbeResult& pr, const ProbeConfig& cfg);
json report_to_json(const DerivativeReport& rep, double beta, const std::vector<double>& delta,
                    double k);
json localize_to_json(const LocalizeResult& lr);

// Ring samples as CSV (fixed header, 17 significant digits).
std::string probe_to_csv(const ProbeResult& pr);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace bicscat
