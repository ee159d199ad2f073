#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gcusp/classification.hpp"
#include "gcusp/metrics.hpp"
#include "gcusp/volume.hpp"

// Text formats: JSON for structured results, CSV for series and tables, OBJ
// for n = 3 meshes. All number formatting is locale independent.

namespace gcusp::io {

using json = nlohmann::json;

// 17 significant digits, trailing zeros dropped; parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    fail(ErrorCode::ParseError, "not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

inline Vec parse_vec(std::string_view s) {
  const auto parts = split(s, ',');
  Vec v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(parts[i]);
  return v;
}

struct PsiInput {
  WeylVector psi;
  bool exact = false;
  std::string warning;  // empty when every entry is an integer or p/q
};

// Comma-separated entries, each an integer, a rational p/q, or a decimal.
// Decimals make the whole vector inexact; ties then use the global tolerance.
inline PsiInput parse_psi(std::string_view s) {
  std::vector<Rational> q;
  std::vector<double> d;
  bool exact = true;
  for (auto tok : split(s, ',')) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    const auto slash = tok.find('/');
    auto integer = [&](std::string_view t, long long& out) {
      if (!t.empty() && t.front() == '+') t.remove_prefix(1);
      const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
      return !t.empty() && r.ec == std::errc() && r.ptr == t.data() + t.size();
    };
    long long p = 0, den = 1;
    if (slash != std::string_view::npos) {
      if (!integer(tok.substr(0, slash), p) || !integer(tok.substr(slash + 1), den))
        fail(ErrorCode::ParseError, "bad rational '" + std::string(tok) + "'");
      q.push_back(make_rational(p, den));
      d.push_back(q.back().value());
    } else if (integer(tok, p)) {
      q.push_back(make_rational(p, 1));
      d.push_back(double(p));
    } else {
      exact = false;
      d.push_back(parse_double(tok));
    }
  }
  if (exact) return {WeylVector(std::move(q)), true, ""};
  return {WeylVector(std::move(d)), false,
          "decimal psi entries: zero and tie tests use tolerance " + format_double(settings().weyl_zero)};
}

inline std::string to_string(const Rational& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

inline json error_json(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", gcusp::to_string(code)}, {"message", message}}}};
}

inline json error_json(const Error& e) { return error_json(e.code(), e.what()); }

// ---------------------------------------------------------------------------
// Vectors and matrices. Matrices are row-major nested arrays.

inline json to_json_value(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json_value(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Vec vec_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorCode::ParseError, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorCode::ParseError, "expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Mat mat_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorCode::ParseError, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vec r = vec_from_json(j[i]);
    if (r.size() != cols) fail(ErrorCode::ParseError, "ragged matrix");
    m.row(i) = r.transpose();
  }
  return m;
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

// ---------------------------------------------------------------------------
// Library types. Each to_json has a matching *_from_json.

inline json to_json_value(const WeylVector& psi) {
  json j{{"coefficients", psi.coeffs()}};
  if (psi.exact()) {
    std::vector<std::string> r;
    for (const auto& x : *psi.rationals()) r.push_back(to_string(x));
    j["exact"] = r;
  }
  return j;
}

inline WeylVector psi_from_json(const json& j) {
  if (j.is_array()) return WeylVector(vec_from_json(j));
  if (j.contains("exact")) {
    std::string joined;
    for (const auto& s : j.at("exact")) joined += (joined.empty() ? "" : ",") + s.get<std::string>();
    return parse_psi(joined).psi;
  }
  return WeylVector(vec_from_json(field(j, "coefficients")));
}

inline json to_json_value(const TranslationParams& p) { return {{"X", to_json_value(p.X)}, {"Y", to_json_value(p.Y)}}; }

inline TranslationParams params_from_json(const json& j) {
  return {vec_from_json(field(j, "X")), vec_from_json(field(j, "Y"))};
}

inline json to_json_value(const OrthDescriptor& o) {
  return {{"perm", o.perm}, {"block", to_json_value(o.block)}, {"shape", gcusp::to_string(o.shape)}};
}

inline OrthDescriptor orth_from_json(const json& j) {
  OrthDescriptor o;
  o.perm = field(j, "perm").get<std::vector<int>>();
  // an empty block serializes as [] and parses back as 0 x 0
  o.block = j.contains("block") ? mat_from_json(j.at("block")) : Mat(0, 0);
  const std::string sh = j.value("shape", "t<n-1");
  o.shape = sh == "t=n" ? OrthShape::Full : sh == "t=n-1" ? OrthShape::Corank1 : OrthShape::LowRank;
  return o;
}

// Fills in an identity orthogonal part of the right shape when absent.
inline OrthDescriptor orth_or_identity(const WeylVector& psi, const json& j) {
  if (!j.contains("orth")) return orth_identity(psi);
  OrthDescriptor o = orth_from_json(j.at("orth"));
  o.shape = orth_identity(psi).shape;
  if (o.block.size() == 0) o.block = Mat::Identity(make_domain(psi).u, make_domain(psi).u);
  return o;
}

inline json to_json_value(const Factorization& f) {
  return {{"s", f.s}, {"params", to_json_value(f.params)}, {"orth", to_json_value(f.orth)}};
}

inline Factorization factorization_from_json(const json& j) {
  return {field(j, "s").get<double>(), params_from_json(field(j, "params")),
          orth_from_json(field(j, "orth"))};
}

inline json to_json_value(const GroupElement& g) {
  json j{{"matrix", to_json_value(g.matrix)}};
  if (g.factors) j["factors"] = to_json_value(*g.factors);
  return j;
}

inline GroupElement element_from_json(const json& j) {
  GroupElement g{mat_from_json(field(j, "matrix")), std::nullopt};
  if (j.contains("factors")) g.factors = factorization_from_json(j.at("factors"));
  return g;
}

inline json to_json_value(const Decomposition& d) {
  return {{"s", d.s}, {"params", to_json_value(d.params)}, {"orth", to_json_value(d.orth)}, {"residual", d.residual}};
}

inline Decomposition decomposition_from_json(const json& j) {
  return {field(j, "s").get<double>(), params_from_json(field(j, "params")),
          orth_from_json(field(j, "orth")), field(j, "residual").get<double>()};
}

inline json to_json_value(const ElementClass& c) {
  return {{"kind", gcusp::to_string(c.kind)}, {"standard", c.standard}};
}

inline ElementClass element_class_from_json(const json& j) {
  const std::string k = field(j, "kind").get<std::string>();
  ElementClass c;
  if (k == "Elliptic") c.kind = ElementKind::Elliptic;
  else if (k == "Parabolic") c.kind = ElementKind::Parabolic;
  else if (k == "Hyperbolic") c.kind = ElementKind::Hyperbolic;
  else fail(ErrorCode::ParseError, "unknown element kind '" + k + "'");
  c.standard = j.value("standard", false);
  return c;
}

// A lattice file: {"psi": ..., "generators": [{"X": [...], "Y": [...], "orth": {...}}]}.
// Omitted orth parts are the identity.
inline json to_json_value(const MarkedLattice& L) {
  json gens = json::array();
  for (const auto& g : L.generators) {
    json e = to_json_value(g.params);
    if (!g.orth.is_identity()) e["orth"] = to_json_value(g.orth);
    gens.push_back(std::move(e));
  }
  return {{"psi", to_json_value(L.psi)}, {"generators", gens}};
}

inline MarkedLattice lattice_from_json(const json& j) {
  MarkedLattice L{psi_from_json(field(j, "psi")), {}};
  for (const auto& g : field(j, "generators"))
    L.generators.push_back({params_from_json(g), orth_or_identity(L.psi, g)});
  return L;
}

inline json to_json_value(const AnisotropyCoset& c) { return {{"representative", to_json_value(c.representative)}}; }

inline AnisotropyCoset coset_from_json(const json& j) {
  return {mat_from_json(j.is_array() ? j : field(j, "representative"))};
}

inline json to_json_value(const LatticeInvariants& v) {
  json j{{"gram", to_json_value(v.gram)}, {"canonical", to_json_value(v.canonical)}};
  if (v.coset) j["coset"] = to_json_value(*v.coset);
  return j;
}

inline LatticeInvariants invariants_from_json(const json& j) {
  LatticeInvariants v{mat_from_json(field(j, "gram")), std::nullopt,
                      mat_from_json(field(j, "canonical"))};
  if (j.contains("coset")) v.coset = coset_from_json(j.at("coset"));
  return v;
}

inline json to_json_value(const Dim2Params& y) { return {{"y1", y.y1}, {"y2", y.y2}}; }

inline Dim2Params dim2_params_from_json(const json& j) {
  return {field(j, "y1").get<double>(), field(j, "y2").get<double>()};
}

inline json to_json_value(const Dim2NormalForm& f) {
  return {{"family", gcusp::to_string(f.family)}, {"logs", to_json_value(f.logs)}, {"psi_ratio", f.psi_ratio},
          {"inverted", f.inverted}, {"a", f.a}};
}

inline Dim2NormalForm dim2_normal_form_from_json(const json& j) {
  Dim2NormalForm f;
  const std::string fam = field(j, "family").get<std::string>();
  if (fam == "Diagonal") f.family = Dim2Family::Diagonal;
  else if (fam == "Mixed") f.family = Dim2Family::Mixed;
  else if (fam == "Unipotent") f.family = Dim2Family::Unipotent;
  else fail(ErrorCode::ParseError, "unknown family '" + fam + "'");
  f.logs = vec_from_json(j.value("logs", json::array()));
  f.psi_ratio = j.value("psi_ratio", 0.0);
  f.inverted = j.value("inverted", false);
  f.a = j.value("a", 0.0);
  return f;
}

inline json to_json_value(const VolumeEstimate& v) {
  return {{"value", v.value}, {"stderr", v.stderr_}, {"samples", v.samples}, {"depth_max", v.depth_max}};
}

inline VolumeEstimate volume_from_json(const json& j) {
  return {field(j, "value").get<double>(), field(j, "stderr").get<double>(),
          field(j, "samples").get<long long>(), field(j, "depth_max").get<double>()};
}

inline json to_json_value(const DecaySeries& d) {
  return {{"t", d.t}, {"cross_section", d.cross_section}, {"kappa", d.kappa}};
}

inline DecaySeries decay_from_json(const json& j) {
  return {field(j, "t").get<std::vector<double>>(),
          field(j, "cross_section").get<std::vector<double>>(),
          field(j, "kappa").get<std::vector<double>>()};
}

inline json to_json_value(const FinitenessVerdict& v) {
  json j{{"verdict", v.finite ? "Finite" : "Infinite"}, {"finite", v.finite}, {"u", v.u}};
  if (v.numeric)
    j["numeric"] = {{"exponent", v.numeric->exponent},
                    {"constant", v.numeric->constant},
                    {"kappa_min", v.numeric->kappa_min},
                    {"consistent", v.numeric->consistent}};
  return j;
}

inline FinitenessVerdict verdict_from_json(const json& j) {
  FinitenessVerdict v;
  v.finite = field(j, "finite").get<bool>();
  v.u = field(j, "u").get<int>();
  if (j.contains("numeric")) {
    const json& n = j.at("numeric");
    v.numeric = TailFit{n.at("exponent").get<double>(), n.at("constant").get<double>(),
                        n.at("kappa_min").get<double>(), n.at("consistent").get<bool>()};
  }
  return v;
}

inline json to_json_value(const ShrinkProfile& p) {
  return {{"t", p.t}, {"f", p.f}, {"d", p.d}, {"slope", p.slope}, {"parabolic", p.parabolic}};
}

inline ShrinkProfile shrink_from_json(const json& j) {
  return {field(j, "t").get<std::vector<double>>(), field(j, "f").get<std::vector<double>>(),
          field(j, "d").get<std::vector<double>>(), field(j, "slope").get<double>(),
          field(j, "parabolic").get<bool>()};
}

inline json to_json_value(const Displacement& d) {
  return {{"beta_displacement", d.beta_displacement},
          {"hilbert_estimate", d.hilbert_estimate},
          {"deepest_level", d.deepest_level}};
}

inline Displacement displacement_from_json(const json& j) {
  return {field(j, "beta_displacement").get<double>(),
          field(j, "hilbert_estimate").get<double>(),
          field(j, "deepest_level").get<double>()};
}

namespace detail {

inline void write_json(std::string& out, const json& j, int indent) {
  const std::string pad(2 * (indent + 1), ' '), close(2 * indent, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) { out += "{}"; return; }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        out += first ? "" : ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        write_json(out, v, indent + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) { out += "[]"; return; }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += (i ? ",\n" : "") + pad;
        write_json(out, j[i], indent + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

// JSON text with every float at 17 significant digits; non-finite values become null.
inline std::string dump(const json& j) {
  std::string out;
  detail::write_json(out, j, 0);
  return out + "\n";
}

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV. Header row, comma separator, LF line endings.

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Meshes. Horospheres are parametrized by chart translations (X, Y) on the
// grid -extent + 2 extent i / resolution, i in [0, resolution). Doubling the
// resolution keeps every old parameter (i -> 2i) and multiplies the vertex
// count by four.

inline double grid_param(int i, int resolution, double extent) {
  return -extent + 2.0 * extent * double(i) / double(resolution);
}

inline Vec horosphere_vertex(const WeylVector& psi, const DomainShape& s, const Vec& uv, double level) {
  return horosphere_point(psi, uv.head(s.r), uv.tail(s.u), level);
}

inline void check_mesh_args(int resolution, double extent) {
  if (resolution < 2) fail(ErrorCode::InvalidArgument, "resolution must be >= 2");
  if (!(extent > 0.0)) fail(ErrorCode::InvalidArgument, "extent must be positive");
}

// Wavefront OBJ, one group per level, vertices in affine coordinates (x, z, y).
inline void export_mesh(std::ostream& os, const WeylVector& psi, const std::vector<double>& levels,
                        int resolution, double extent = 1.0) {
  if (psi.n() != 3) fail(ErrorCode::UnsupportedDimension, "meshes need n = 3");
  check_mesh_args(resolution, extent);
  const DomainShape s = make_domain(psi);
  const int m = resolution;
  os << "# horosphere levels of the psi-domain, " << levels.size() << " groups\n";
  long long base = 1;
  for (double level : levels) {
    os << "g level_" << format_double(level) << '\n';
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        Vec uv(2);
        uv << grid_param(i, m, extent), grid_param(j, m, extent);
        const Vec p = horosphere_vertex(psi, s, uv, level);
        os << "v " << format_double(p(0)) << ' ' << format_double(p(1)) << ' ' << format_double(p(2)) << '\n';
      }
    for (int i = 0; i + 1 < m; ++i)
      for (int j = 0; j + 1 < m; ++j) {
        const long long a = base + i * m + j, b = a + 1, c = a + m, d = c + 1;
        os << "f " << a << ' ' << b << ' ' << d << '\n' << "f " << a << ' ' << d << ' ' << c << '\n';
      }
    base += static_cast<long long>(m) * m;
  }
}

// CSV polylines for n = 2: columns level, index, then the two affine coordinates.
inline void export_polylines(std::ostream& os, const WeylVector& psi, const std::vector<double>& levels,
                             int resolution, double extent = 1.0) {
  if (psi.n() != 2) fail(ErrorCode::UnsupportedDimension, "polylines need n = 2");
  check_mesh_args(resolution, extent);
  const DomainShape s = make_domain(psi);
  std::vector<std::vector<double>> rows;
  for (double level : levels)
    for (int i = 0; i < resolution; ++i) {
      const Vec uv = Vec::Constant(1, grid_param(i, resolution, extent));
      const Vec p = horosphere_vertex(psi, s, uv, level);
      rows.push_back({level, double(i), p(0), p(1)});
    }
  write_csv(os, {"level", "index", "a0", "a1"}, rows);
}

}  // namespace gcusp::io
