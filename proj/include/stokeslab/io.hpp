#pragma once

// VTK legacy output, CSV estimate reports and JSON summaries. Files are
// written atomically (temporary file + rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stokeslab/verify.hpp"

namespace stokeslab {

using Json = nlohmann::ordered_json;

/// Nodal field sampled at mesh vertices.
struct PointField {
  std::string name;
  int components = 1;
  std::vector<double> values;  // vertex-major
};

/// Vertex values of a (P1 or P2) coefficient vector. P2 fields are sampled
/// at vertices only; their nodal values there are exact.
inline PointField sample_field(const std::string& name, const FeSpace& space, const CoeffVec& v) {
  PointField f{name, space.components(), {}};
  const int nv = space.mesh().num_vertices();
  f.values.reserve(static_cast<size_t>(nv) * f.components);
  for (int i = 0; i < nv; ++i)
    for (int c = 0; c < f.components; ++c) f.values.push_back(v[space.dof(i, c)]);
  return f;
}

inline std::vector<PointField> sample_solution(const FieldSolution& s) {
  return {sample_field("velocity", *s.spaces.velocity, s.velocity),
          sample_field("pressure", *s.spaces.pressure, s.pressure)};
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

inline void write_vtk(std::ostream& os, const Mesh& m, const std::vector<PointField>& fields,
                      const std::string& title = "stokeslab") {
  const int nv = m.num_vertices(), nc = m.num_cells();
  os << "# vtk DataFile Version 2.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nv << " double\n";
  for (int i = 0; i < nv; ++i)
    os << detail::format_double(m.vertex(i).x()) << ' ' << detail::format_double(m.vertex(i).y()) << " 0\n";
  os << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (int c = 0; c < nc; ++c) {
    const auto& t = m.cell(c);
    os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  os << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c) os << "5\n";
  if (fields.empty()) return;
  os << "POINT_DATA " << nv << '\n';
  for (const auto& f : fields) {
    if (f.values.size() != static_cast<size_t>(nv) * f.components)
      throw ConfigError("field '" + f.name + "' does not match the vertex count");
    if (f.components == 1) {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int i = 0; i < nv; ++i) os << detail::format_double(f.values[i]) << '\n';
    } else if (f.components == 2) {
      os << "VECTORS " << f.name << " double\n";
      for (int i = 0; i < nv; ++i)
        os << detail::format_double(f.values[2 * i]) << ' ' << detail::format_double(f.values[2 * i + 1]) << " 0\n";
    } else {
      throw ConfigError("field '" + f.name + "' has unsupported component count");
    }
  }
}

inline constexpr const char* kEstimateCsvHeader = "level,h,eps,lhs_u,lhs_p,rhs_flux,rhs_trace,ratio";

inline void write_estimate_csv(std::ostream& os, const EstimateReport& r) {
  os << kEstimateCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << row.n;
    for (double v : {row.h, row.eps, row.lhs_u, row.lhs_p, row.rhs_flux, row.rhs_trace, row.ratio})
      os << ',' << detail::format_double(v);
    os << '\n';
  }
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceTable& t) {
  os << "level,h,u_h1,p_l2,p_h1,rate_u_h1,rate_p_l2,rate_p_h1\n";
  for (const auto& r : t.rows) {
    os << r.n;
    for (double v : {r.h, r.u_h1, r.p_l2, r.p_h1, r.rate_u_h1, r.rate_p_l2, r.rate_p_h1})
      os << ',' << (std::isnan(v) ? std::string() : detail::format_double(v));
    os << '\n';
  }
}

/// NaN and infinity become null.
inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const SolveDiagnostics& d) {
  return {{"relative_residual", json_number(d.relative_residual)},
          {"unknowns", d.pivots},
          {"min_pivot_ratio", json_number(d.min_pivot_ratio)}};
}

inline Json to_json(const OriginFit& f) {
  return {{"slope", json_number(f.slope)}, {"relative_residual", json_number(f.relative_residual)}};
}

inline Json to_json(const EstimateSummary& s) {
  return {{"zero_mismatch_lhs", json_number(s.zero_mismatch_lhs)},
          {"zero_mismatch_rhs", json_number(s.zero_mismatch_rhs)},
          {"lhs_fit", to_json(s.lhs_fit)},
          {"lhs_u_fit", to_json(s.lhs_u_fit)},
          {"ratio_spread", json_number(s.ratio_spread)},
          {"ratio_max", json_number(s.ratio_max)},
          {"lhs_p_max", json_number(s.lhs_p_max)}};
}

inline Json to_json(const DiscreteConstants& c) {
  return {{"beta_infsup", json_number(c.beta_infsup)},         {"c_korn", json_number(c.c_korn)},
          {"c_poincare_gamma1", json_number(c.c_poincare_gamma1)}, {"c_poincare_gamma2", json_number(c.c_poincare_gamma2)},
          {"c_curl", json_number(c.c_curl)},                   {"c_curl_div", json_number(c.c_curl_div)}};
}

inline Json to_json(const ConvergenceTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"n", r.n},
                    {"h", json_number(r.h)},
                    {"u_h1", json_number(r.u_h1)},
                    {"p_l2", json_number(r.p_l2)},
                    {"p_h1", json_number(r.p_h1)},
                    {"rate_u_h1", json_number(r.rate_u_h1)},
                    {"rate_p_l2", json_number(r.rate_p_l2)},
                    {"rate_p_h1", json_number(r.rate_p_h1)}});
  return {{"case", t.case_name}, {"problem", to_string(t.problem)}, {"rows", rows}};
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

/// Writes `content` to `path` through a sibling temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw ConfigError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

template <class Writer>
void write_atomic_with(const std::filesystem::path& path, Writer&& writer) {
  std::ostringstream os;
  writer(os);
  write_file_atomic(path, os.str());
}

}  // namespace stokeslab
