// Command-line driver. Results go to --out or stdout; any failure prints a JSON
// error object on stderr and exits with status 1 (2 for usage errors).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gcusp/io.hpp"

using namespace gcusp;
using io::json;

namespace {

struct Common {
  std::string psi;
  int n = 0;
  std::uint64_t seed = 1;
  int resolution = 0;
  std::string out;
  std::string format;
};

WeylVector require_psi(const Common& c) {
  if (c.psi.empty()) fail(ErrorCode::InvalidArgument, "--psi is required");
  io::PsiInput in = io::parse_psi(c.psi);
  if (c.n && c.n != in.psi.n())
    fail(ErrorCode::DimensionMismatch, "--n " + std::to_string(c.n) + " but psi has " + std::to_string(in.psi.n()) + " entries");
  if (!in.warning.empty()) std::cerr << "warning: " << in.warning << '\n';
  return in.psi;
}

// Literal JSON text, or @path to read it from a file.
json load_json(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') {
    std::ifstream f(arg.substr(1));
    if (!f) fail(ErrorCode::InvalidArgument, "cannot open " + arg.substr(1));
    std::stringstream ss;
    ss << f.rdbuf();
    return io::parse_json(ss.str());
  }
  return io::parse_json(arg);
}

std::vector<Vec> parse_points(const std::vector<std::string>& raw, int n) {
  std::vector<Vec> pts;
  for (const auto& s : raw) {
    pts.push_back(io::parse_vec(s));
    require_dim(pts.back().size(), n, "point");
  }
  if (pts.empty()) fail(ErrorCode::InvalidArgument, "at least one --point is required");
  return pts;
}

std::vector<double> parse_list(const std::string& s) {
  const Vec v = io::parse_vec(s);
  return {v.data(), v.data() + v.size()};
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) fail(ErrorCode::InvalidArgument, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void json_out(const json& j) { stream() << io::dump(j); }

 private:
  std::ofstream file_;
};

std::string format_or(const Common& c, const std::string& fallback, std::initializer_list<const char*> allowed) {
  const std::string f = c.format.empty() ? fallback : c.format;
  for (const char* a : allowed)
    if (f == a) return f;
  fail(ErrorCode::InvalidArgument, "format '" + f + "' is not available here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized cusps: psi-domains, cusp groups, metrics, classification and volume"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--psi", c.psi, "Weyl vector, comma separated; entries may be p/q");
  app.add_option("--n", c.n, "dimension (checked against --psi)");
  app.add_option("--seed", c.seed, "seed for stochastic commands");
  app.add_option("--resolution", c.resolution, "grid size for meshes and unit-ball quadrature");
  app.add_option("--out", c.out, "output file (default stdout)");
  app.add_option("--format", c.format, "json, csv or obj")->check(CLI::IsMember({"json", "csv", "obj"}));

  std::function<void()> job;

  // domain mesh
  auto* domain = app.add_subcommand("domain", "psi-domain geometry")->require_subcommand(1);
  std::string levels = "0,-1,-2";
  double extent = 1.0;
  auto* mesh = domain->add_subcommand("mesh", "horosphere meshes: OBJ for n = 3, CSV polylines for n = 2");
  mesh->add_option("--levels", levels, "horofunction levels, comma separated");
  mesh->add_option("--extent", extent, "half-width of the translation parameter grid");
  mesh->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      const int res = c.resolution ? c.resolution : 32;
      Output o(c.out);
      if (psi.n() == 3) {
        format_or(c, "obj", {"obj"});
        io::export_mesh(o.stream(), psi, parse_list(levels), res, extent);
      } else {
        format_or(c, "csv", {"csv"});
        io::export_polylines(o.stream(), psi, parse_list(levels), res, extent);
      }
    };
  });

  // eval h|grad|beta
  auto* eval = app.add_subcommand("eval", "pointwise tables")->require_subcommand(1);
  std::vector<std::string> points;
  for (const char* what : {"h", "grad", "beta"}) {
    auto* sub = eval->add_subcommand(what, std::string("evaluate ") + what + " at points");
    sub->add_option("--point", points, "affine point, comma separated (repeatable)")->required();
    sub->callback([&, w = std::string(what)] {
      job = [&, w] {
        const WeylVector psi = require_psi(c);
        const auto pts = parse_points(points, psi.n());
        const std::string fmt = format_or(c, "csv", {"csv", "json"});
        std::vector<std::string> header;
        for (int i = 0; i < psi.n(); ++i) header.push_back("p" + std::to_string(i));
        std::vector<std::vector<double>> rows;
        json arr = json::array();
        for (const Vec& p : pts) {
          std::vector<double> row(p.data(), p.data() + p.size());
          json e{{"point", io::to_json_value(p)}};
          if (w == "h") {
            const double h = horo(psi, p);
            row.push_back(h);
            e["h"] = h;
          } else if (w == "grad") {
            const Vec g = *horofunction(psi, p, 1).gradient;
            row.insert(row.end(), g.data(), g.data() + g.size());
            e["gradient"] = io::to_json_value(g);
          } else {
            const Mat b = beta_form(psi, p).beta_gram;
            for (int i = 0; i < b.rows(); ++i)
              for (int j = 0; j < b.cols(); ++j) row.push_back(b(i, j));
            e["beta"] = io::to_json_value(b);
          }
          rows.push_back(std::move(row));
          arr.push_back(std::move(e));
        }
        if (w == "h") header.push_back("h");
        if (w == "grad")
          for (int i = 0; i < psi.n(); ++i) header.push_back("dh" + std::to_string(i));
        if (w == "beta")
          for (int i = 0; i < psi.n(); ++i)
            for (int j = 0; j < psi.n(); ++j) header.push_back("b" + std::to_string(i) + std::to_string(j));
        Output o(c.out);
        if (fmt == "csv") io::write_csv(o.stream(), header, rows);
        else o.json_out(arr);
      };
    });
  }

  // dist
  std::string p_arg, q_arg;
  auto* dist = app.add_subcommand("dist", "Hilbert distance between two interior points");
  dist->add_option("--p", p_arg)->required();
  dist->add_option("--q", q_arg)->required();
  dist->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      const Vec p = parse_points({p_arg}, psi.n())[0], q = parse_points({q_arg}, psi.n())[0];
      Output(c.out).json_out({{"p", io::to_json_value(p)}, {"q", io::to_json_value(q)},
                              {"distance", hilbert_distance(psi, p, q)}});
    };
  });

  // group element|classify|decompose
  auto* group = app.add_subcommand("group", "cusp Lie group elements")->require_subcommand(1);
  std::string X_arg, Y_arg, perm_arg, matrix_arg;
  double s_arg = 0.0;
  auto* element = group->add_subcommand("element", "Phi_s m*(X, Y) o as a matrix");
  element->add_option("--X", X_arg, "hyperbolic translation parameters");
  element->add_option("--Y", Y_arg, "parabolic translation parameters");
  element->add_option("--s", s_arg, "radial flow time");
  element->add_option("--perm", perm_arg, "permutation of the nonzero psi entries");
  element->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      const DomainShape s = make_domain(psi);
      Factorization f{s_arg, {X_arg.empty() ? Vec::Zero(s.r) : io::parse_vec(X_arg),
                              Y_arg.empty() ? Vec::Zero(s.u) : io::parse_vec(Y_arg)},
                      orth_identity(psi)};
      if (!perm_arg.empty()) {
        f.orth.perm.clear();
        for (double x : parse_list(perm_arg)) f.orth.perm.push_back(int(x));
      }
      Output(c.out).json_out(io::to_json_value(make_element(psi, f)));
    };
  });
  auto* classify_el = group->add_subcommand("classify", "elliptic, parabolic or hyperbolic");
  classify_el->add_option("--matrix", matrix_arg, "JSON matrix or @file")->required();
  classify_el->callback([&] {
    job = [&] {
      Output(c.out).json_out(io::to_json_value(classify_element(ProjMap(io::mat_from_json(load_json(matrix_arg))))));
    };
  });
  auto* decompose = group->add_subcommand("decompose", "semidirect factorization of an element");
  decompose->add_option("--matrix", matrix_arg, "JSON matrix or @file")->required();
  decompose->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      Output(c.out).json_out(io::to_json_value(semidirect_decompose(psi, io::mat_from_json(load_json(matrix_arg)))));
    };
  });

  // teich dim2
  auto* teich = app.add_subcommand("teich", "Teichmueller coordinates")->require_subcommand(1);
  std::vector<double> y_arg;
  auto* dim2 = teich->add_subcommand("dim2", "(y1, y2) to the representative matrix, or back with --matrix");
  auto* y_opt = dim2->add_option("--y", y_arg, "y1 y2 with y2 >= y1 >= 0")->expected(2);
  auto* m_opt = dim2->add_option("--matrix", matrix_arg, "JSON matrix or @file");
  y_opt->excludes(m_opt);
  dim2->callback([&] {
    job = [&] {
      Output o(c.out);
      if (!matrix_arg.empty()) {
        const Mat A = io::mat_from_json(load_json(matrix_arg));
        o.json_out({{"params", io::to_json_value(dim2_teich_inverse(A))},
                    {"normal_form", io::to_json_value(dim2_normal_form(A))}});
        return;
      }
      if (y_arg.size() != 2) fail(ErrorCode::InvalidArgument, "--y needs two values");
      const Mat A = dim2_teich({y_arg[0], y_arg[1]});
      Vec logs = A.diagonal().array().log();
      o.json_out({{"matrix", io::to_json_value(A)}, {"eigenvalue_logs", io::to_json_value(logs)},
                  {"normal_form", io::to_json_value(dim2_normal_form(A))}});
    };
  });

  // classify lattice|conjugate|theta
  auto* classify = app.add_subcommand("classify", "lattice classification")->require_subcommand(1);
  std::string lattice_arg, other_arg, coset_arg;
  auto* lat = classify->add_subcommand("lattice", "Gram, canonical basis and anisotropy coset");
  lat->add_option("--lattice", lattice_arg, "lattice JSON or @file")->required();
  lat->callback([&] {
    job = [&] { Output(c.out).json_out(io::to_json_value(lattice_invariants(io::lattice_from_json(load_json(lattice_arg))))); };
  });
  auto* conj = classify->add_subcommand("conjugate", "are two lattices conjugate in G(psi)");
  conj->add_option("--lattice", lattice_arg, "lattice JSON or @file")->required();
  conj->add_option("--other", other_arg, "lattice JSON or @file")->required();
  conj->callback([&] {
    job = [&] {
      const MarkedLattice a = io::lattice_from_json(load_json(lattice_arg));
      const MarkedLattice b = io::lattice_from_json(load_json(other_arg));
      Output(c.out).json_out({{"conjugate", are_conjugate(a, b)}, {"marked_conjugate", marked_conjugate(a, b)}});
    };
  });
  auto* theta = classify->add_subcommand("theta", "lattice in G(psi) from a psi = 0 lattice and a coset");
  theta->add_option("--lattice", lattice_arg, "lattice JSON or @file")->required();
  theta->add_option("--coset", coset_arg, "coset representative JSON matrix or @file")->required();
  theta->callback([&] {
    job = [&] {
      const MarkedLattice L = io::lattice_from_json(load_json(lattice_arg));
      Output(c.out).json_out(io::to_json_value(theta_map(L, io::coset_from_json(load_json(coset_arg)))));
    };
  });

  // volume density|section|cusp|verdict
  auto* volume = app.add_subcommand("volume", "Busemann volume")->require_subcommand(1);
  std::string t_arg = "1,10,100,1000";
  double depth = 4.0;
  bool numeric = false;
  auto* density = volume->add_subcommand("density", "Busemann density at points");
  density->add_option("--point", points, "affine point (repeatable)")->required();
  density->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      json arr = json::array();
      for (const Vec& p : parse_points(points, psi.n()))
        arr.push_back({{"point", io::to_json_value(p)}, {"density", busemann_density(psi, p, c.resolution)}});
      Output(c.out).json_out(arr);
    };
  });
  auto* section = volume->add_subcommand("section", "horosphere cross sections over a unit patch");
  section->add_option("--t", t_arg, "flow parameters, comma separated");
  section->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      const int k = psi.n() - 1;
      const DecaySeries ds = decay_series(psi, Mat::Identity(k, k), parse_list(t_arg), c.resolution);
      Output o(c.out);
      if (format_or(c, "csv", {"csv", "json"}) == "json") return o.json_out(io::to_json_value(ds));
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < ds.t.size(); ++i)
        rows.push_back({ds.t[i], horosphere_separation(psi, ds.t[i]), ds.cross_section[i], ds.kappa[i]});
      io::write_csv(o.stream(), {"t", "separation", "cross_section", "kappa"}, rows);
    };
  });
  auto* cusp = volume->add_subcommand("cusp", "volume of the cusp region down to a depth");
  cusp->add_option("--lattice", lattice_arg, "lattice JSON or @file")->required();
  cusp->add_option("--depth", depth, "Hilbert depth below the unit horosphere");
  cusp->callback([&] {
    job = [&] {
      VolumeOptions opt;
      opt.seed = c.seed;
      opt.resolution = c.resolution;
      Output(c.out).json_out(io::to_json_value(cusp_volume(io::lattice_from_json(load_json(lattice_arg)), depth, opt)));
    };
  });
  auto* verdict = volume->add_subcommand("verdict", "finite or infinite cusp volume");
  verdict->add_flag("--numeric", numeric, "corroborate with a cross-section tail fit");
  verdict->callback([&] {
    job = [&] { Output(c.out).json_out(io::to_json_value(finiteness_verdict(require_psi(c), numeric, c.resolution))); };
  });

  // profile shrink
  auto* profile = app.add_subcommand("profile", "flow profiles")->require_subcommand(1);
  std::string grid_arg = "100,1000,10000,100000,1000000";
  auto* shrink = profile->add_subcommand("shrink", "distance between flowed boundary points");
  shrink->add_option("--p", p_arg, "boundary point")->required();
  shrink->add_option("--q", q_arg, "boundary point")->required();
  shrink->add_option("--t", grid_arg, "flow times, comma separated");
  shrink->callback([&] {
    job = [&] {
      const WeylVector psi = require_psi(c);
      const Vec p = parse_points({p_arg}, psi.n())[0], q = parse_points({q_arg}, psi.n())[0];
      const ShrinkProfile sp = shrink_profile(psi, p, q, parse_list(grid_arg));
      Output o(c.out);
      if (format_or(c, "json", {"csv", "json"}) == "json") return o.json_out(io::to_json_value(sp));
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < sp.t.size(); ++i) rows.push_back({sp.t[i], sp.f[i], sp.d[i]});
      io::write_csv(o.stream(), {"t", "f", "d"}, rows);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << io::dump(io::error_json(ErrorCode::ParseError, e.what()));
    return 2;
  }

  try {
    if (job) job();
    return 0;
  } catch (const Error& e) {
    std::cerr << io::dump(io::error_json(e));
  } catch (const io::json::exception& e) {
    std::cerr << io::dump(io::error_json(ErrorCode::ParseError, e.what()));
  } catch (const std::exception& e) {
    std::cerr << io::dump(io::error_json(ErrorCode::InvalidArgument, e.what()));
  }
  return 1;
}
