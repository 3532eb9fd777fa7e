#include "bicscat/jsonio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bicscat {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  std::string s(buf);
  // Normalize the textual forms "inf"/"nan" (not valid JSON) defensively.
  if (s.find("inf") != std::string::npos || s.find("nan") != std::string::npos)
    fail(ErrorCode::io_error, "non-finite value in JSON output");
  return s;
}

void escape_string(const std::string& s, std::string& out) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void dump_rec(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<size_t>(2 * (depth + 1)), ' ');
  const std::string pad_close(static_cast<size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        escape_string(it.key(), out);
        out += ": ";
        dump_rec(it.value(), out, depth + 1);
      }
      out += "\n" + pad_close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_rec(v, out, depth + 1);
      }
      out += "\n" + pad_close + "]";
      return;
    }
    case json::value_t::string: escape_string(j.get<std::string>(), out); return;
    case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      return;
    case json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      return;
    case json::value_t::number_float: out += fmt_double(j.get<double>()); return;
    case json::value_t::null: out += "null"; return;
    default: fail(ErrorCode::io_error, "unsupported JSON value type");
  }
}

}  // namespace

std::string dump_deterministic(const json& j) {
  std::string out;
  dump_rec(j, out, 0);
  out += "\n";
  return out;
}

json to_json(cd z) { return json::array({z.real(), z.imag()}); }

json to_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
  return a;
}

json to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json smatrix_to_json(const ScatteringMatrix& sm) {
  json j;
  j["beta"] = sm.beta;
  j["k"] = sm.k;
  j["delta"] = sm.delta;
  j["n0"] = sm.channels.n0();
  j["prop_orders"] = sm.channels.prop;
  json alphas = json::array();
  for (int m : sm.channels.prop) alphas.push_back(to_json(sm.channels.alpha_of(m)));
  j["alpha"] = std::move(alphas);
  j["s"] = to_json(sm.s);
  // Eigenphases in ascending order make runs comparable at a glance.
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sm.s, false);
  std::vector<double> phases;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    phases.push_back(std::arg(es.eigenvalues()[i]));
  std::sort(phases.begin(), phases.end());
  j["eigenphases"] = phases;
  j["unitarity_defect"] = sm.unitarity_defect;
  j["sym_t_defect"] = sm.sym_t_defect;
  j["sym_p_defect"] = sm.sym_p_defect;
  j["symmetric_x1"] = sm.symmetric_x1;
  j["symmetric_x2"] = sm.symmetric_x2;
  return j;
}

json probe_to_json(const ProbeResult& pr, const ProbeConfig& cfg) {
  json j;
  j["case"] = pr.which == ProbeCase::II ? "II" : pr.which == ProbeCase::III ? "III" : "IV";
  j["index"] = pr.index;
  j["residual"] = pr.residual;
  j["theta"] = cfg.theta;
  j["C"] = cfg.C;
  j["r"] = cfg.r;
  j["center"] = json::array({cfg.beta_c, cfg.delta_c});
  json samples = json::array();
  for (size_t n = 0; n < pr.samples.size(); ++n) {
    const ProbeSample& s = pr.samples[n];
    json js;
    js["n"] = n;
    js["beta"] = s.beta;
    js["delta"] = s.delta;
    js["k"] = s.k;
    js["a"] = to_json(s.a);
    js["a_hat"] = to_json(s.a_hat);
    samples.push_back(std::move(js));
  }
  j["samples"] = std::move(samples);
  j["omega"] = pr.omega;
  return j;
}

json report_to_json(const DerivativeReport& rep, double beta, const std::vector<double>& delta,
                    double k) {
  json j;
  j["point"] = {{"beta", beta}, {"delta", delta}, {"k", k}};
  j["dk_dbeta"] = rep.freq.dk_dbeta;
  j["dk_ddelta"] = rep.freq.dk_ddelta;
  j["imag_residual"] = rep.freq.imag_residual;
  j["da_dbeta"] = to_json(rep.da_dbeta);
  j["da_ddelta"] = to_json(rep.da_ddelta);
  j["xi"] = to_json(rep.xi);
  j["mu_case"] = rep.mu_case;
  j["mu_det"] = to_json(rep.mu_det);
  j["mu_scale"] = rep.mu_scale;
  j["index_prediction"] = rep.index_prediction;
  j["C"] = rep.C;
  j["sigma_min"] = rep.sigma_min;
  j["sigma_next"] = rep.sigma_next;
  j["b_norm"] = rep.b_norm;
  return j;
}

json localize_to_json(const LocalizeResult& lr) {
  json j;
  j["beta"] = lr.beta;
  j["delta"] = lr.delta;
  j["k"] = lr.k;
  j["index"] = lr.index;
  j["r_final"] = lr.r_final;
  return j;
}

std::string probe_to_csv(const ProbeResult& pr) {
  std::string out = "n,beta,delta,k,re_a0,im_a0,re_a1,im_a1,re_a_hat,im_a_hat\n";
  char buf[256];
  for (size_t n = 0; n < pr.samples.size(); ++n) {
    const ProbeSample& s = pr.samples[n];
    const cd a0 = s.a.size() > 0 ? s.a[0] : cd(0.0);
    const cd a1 = s.a.size() > 1 ? s.a[1] : cd(0.0);
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", n, s.beta,
                  s.delta, s.k, a0.real(), a0.imag(), a1.real(), a1.imag(), s.a_hat.real(),
                  s.a_hat.imag());
    out += buf;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io_error, "cannot open for writing: " + path);
  f << content;
  if (!f) fail(ErrorCode::io_error, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io_error, "cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace bicscat
