// Command-line front end over the C interface.
// Exit codes: 0 success, 1 I/O or schema, 2 validation failure, 3 numerical non-convergence.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "willmore/willmore_c.h"

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

int io_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return WM_ERR_IO;
}

// Validation failures print a machine-readable error list on stdout.
int report(int rc) {
  if (rc == WM_ERR_VALIDATION) {
    nlohmann::json j = {{"status", "invalid"}, {"errors", {wm_last_error()}}};
    std::cout << j.dump() << "\n";
  }
  std::cerr << "error: " << wm_last_error() << "\n";
  return rc;
}

std::string take(char* s) {
  std::string r = s ? s : "";
  wm_free_string(s);
  return r;
}

struct SurfaceHandle {
  wm_surface* s = nullptr;
  ~SurfaceHandle() { wm_surface_free(s); }
};

int load_surface(const std::string& path, SurfaceHandle& h) {
  std::string text;
  if (!read_file(path, text)) return io_error("cannot read " + path);
  int rc = wm_surface_load(text.c_str(), &h.s);
  return rc == WM_OK ? WM_OK : report(rc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal spheres with planar ends and their Willmore inversions"};
  app.set_version_flag("--version", wm_version());
  app.require_subcommand(1);

  std::string config, out;
  auto* solve = app.add_subcommand("solve", "Solve a config into a surface file");
  solve->add_option("--config", config, "Run config (JSON)")->required();
  solve->add_option("--out", out, "Surface file to write")->required();

  std::string surface, field, jacobi;
  bool f_index = false, f_energy = false, f_verify = false;
  int jdeg = 40;
  auto* analyze = app.add_subcommand("analyze", "Index, energies, second variation and verification");
  analyze->add_option("surface", surface, "Surface file")->required();
  analyze->add_flag("--index", f_index, "Normal span and Willmore index");
  analyze->add_flag("--energy", f_energy, "Total curvature, Willmore energy, c_X^2");
  analyze->add_option("--second-variation", field, "Variation field file (JSON)");
  analyze->add_option("--jacobi", jacobi, "Log weights alpha, comma separated");
  analyze->add_option("--jacobi-degree", jdeg, "Spherical harmonic degree of the log-Jacobi solve");
  analyze->add_flag("--verify", f_verify, "Run all residual checks");
  analyze->add_option("--out", out, "Report file to write")->required();

  bool inverted = false;
  int grid = 64;
  auto* exp = app.add_subcommand("export", "Triangle mesh of X or its inversion (OBJ)");
  exp->add_option("surface", surface, "Surface file")->required();
  exp->add_flag("--inverted", inverted, "Export the inverted surface");
  exp->add_option("--grid", grid, "Latitude count, at least 16")->check(CLI::Range(16, 4096));
  exp->add_option("--out", out, "Mesh file to write")->required();

  int m = 4;
  std::vector<double> tgrid;
  auto* scan = app.add_subcommand("scan", "Pfaffian of M over a grid of the fourth end (CSV)");
  scan->add_option("--m", m, "Number of ends (even)");
  scan->add_option("--t-grid", tgrid, "re0,re1,im0,im1,n")->required()->delimiter(',')->expected(5);
  scan->add_option("--out", out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : WM_ERR_IO;
  }

  if (*solve) {
    std::string text;
    if (!read_file(config, text)) return io_error("cannot read " + config);
    SurfaceHandle h;
    int rc = wm_solve_config(text.c_str(), &h.s);
    if (rc != WM_OK) return report(rc);
    char* js = nullptr;
    if ((rc = wm_surface_to_json(h.s, &js)) != WM_OK) return report(rc);
    if (!write_file(out, take(js))) return io_error("cannot write " + out);
    return 0;
  }

  if (*analyze) {
    SurfaceHandle h;
    if (int rc = load_surface(surface, h); rc != WM_OK) return rc;
    nlohmann::json opt = {{"index", f_index}, {"energy", f_energy}, {"verify", f_verify}, {"jacobi_degree", jdeg}};
    if (!field.empty()) {
      std::string text;
      if (!read_file(field, text)) return io_error("cannot read " + field);
      try {
        opt["field"] = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        return io_error(std::string("malformed field file: ") + e.what());
      }
    }
    if (!jacobi.empty()) {
      std::vector<double> a;
      std::stringstream ss(jacobi);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          a.push_back(std::stod(tok));
        } catch (const std::exception&) {
          return io_error("--jacobi expects comma-separated numbers");
        }
      }
      opt["jacobi"] = a;
    }
    char *rep = nullptr, *sum = nullptr;
    int passed = 1;
    int rc = wm_analyze(h.s, opt.dump().c_str(), &rep, &sum, &passed);
    if (rc != WM_OK) return report(rc);
    std::string r = take(rep);
    std::cout << take(sum);
    if (!write_file(out, r)) return io_error("cannot write " + out);
    return passed ? 0 : WM_ERR_VALIDATION;
  }

  if (*exp) {
    SurfaceHandle h;
    if (int rc = load_surface(surface, h); rc != WM_OK) return rc;
    char* obj = nullptr;
    int rc = wm_export_obj(h.s, inverted ? 1 : 0, grid, &obj);
    if (rc != WM_OK) return report(rc);
    if (!write_file(out, take(obj))) return io_error("cannot write " + out);
    return 0;
  }

  if (*scan) {
    double nn = tgrid[4];
    if (nn < 1 || nn != static_cast<int>(nn)) return io_error("--t-grid n must be a positive integer");
    char* csv = nullptr;
    int rc = wm_scan_csv(m, tgrid[0], tgrid[1], tgrid[2], tgrid[3], static_cast<int>(nn), &csv);
    if (rc != WM_OK) return report(rc);
    std::string s = take(csv);
    if (out.empty()) {
      std::cout << s;
    } else if (!write_file(out, s)) {
      return io_error("cannot write " + out);
    }
    return 0;
  }
  return 0;
}
