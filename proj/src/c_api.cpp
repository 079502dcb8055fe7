#include "willmore/willmore_c.h"

#include <cstdlib>
#include <cstring>

#include "json.hpp"
#include "willmore/io.hpp"

struct wm_surface {
  willmore::SurfaceRecord rec;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return WM_OK;
  } catch (const willmore::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("schema: ") + e.what();
    return WM_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WM_ERR_NONCONVERGENCE;
  }
}

int null_arg() {
  g_last_error = "null argument";
  return WM_ERR_IO;
}

}  // namespace

extern "C" {

const char* wm_version(void) { return willmore::kToolVersion; }
const char* wm_last_error(void) { return g_last_error.c_str(); }
void wm_free_string(char* s) { std::free(s); }

int wm_solve_config(const char* config_json, wm_surface** out) {
  if (!config_json || !out) return null_arg();
  return guarded([&] { *out = new wm_surface{willmore::solve_surface(willmore::parse_config(config_json))}; });
}

int wm_surface_load(const char* surface_json, wm_surface** out) {
  if (!surface_json || !out) return null_arg();
  return guarded([&] { *out = new wm_surface{willmore::surface_from_json(surface_json)}; });
}

int wm_surface_to_json(const wm_surface* s, char** out) {
  if (!s || !out) return null_arg();
  return guarded([&] { *out = dup(willmore::surface_to_json(s->rec)); });
}

int wm_surface_end_count(const wm_surface* s, int* m) {
  if (!s || !m) return null_arg();
  *m = s->rec.ends.m();
  return WM_OK;
}

void wm_surface_free(wm_surface* s) { delete s; }

int wm_analyze(const wm_surface* s, const char* options_json, char** report_json, char** summary,
               int* all_passed) {
  if (!s || !report_json) return null_arg();
  return guarded([&] {
    willmore::AnalyzeOptions opt;
    if (options_json && *options_json) {
      auto j = nlohmann::json::parse(options_json);
      opt.index = j.value("index", false);
      opt.energy = j.value("energy", false);
      opt.verify = j.value("verify", false);
      if (j.contains("field")) opt.field = willmore::parse_field(j["field"].dump());
      if (j.contains("jacobi")) {
        auto a = j["jacobi"].get<std::vector<double>>();
        opt.jacobi_alpha = Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
      }
      if (j.contains("jacobi_degree")) opt.log_jacobi.degree = j["jacobi_degree"].get<int>();
    }
    willmore::AnalysisOutput o = willmore::analyze_surface(s->rec, opt);
    *report_json = dup(o.report_json);
    if (summary) *summary = dup(o.summary);
    if (all_passed) *all_passed = o.all_passed ? 1 : 0;
  });
}

int wm_export_obj(const wm_surface* s, int inverted, int grid, char** obj) {
  if (!s || !obj) return null_arg();
  return guarded([&] {
    willmore::MinimalImmersion im = willmore::build_immersion(s->rec);
    *obj = dup(willmore::mesh_to_obj(willmore::export_mesh(im, inverted != 0, grid)));
  });
}

int wm_scan_csv(int m, double re0, double re1, double im0, double im1, int n, char** csv) {
  if (!csv) return null_arg();
  return guarded([&] { *csv = dup(willmore::pfaffian_scan_csv(m, re0, re1, im0, im1, n)); });
}

}  // extern "C"
