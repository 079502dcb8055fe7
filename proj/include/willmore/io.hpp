#pragma once
#include <array>
#include <optional>
#include <string>

#include "willmore/varindex.hpp"

namespace willmore {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

struct Tolerances {
  double rank = 1e-8;        // relative SVD threshold for d and kernels
  double quadrature = 1e-6;  // relative tolerance for integral checks
  double solver = 1e-4;      // log-Jacobi residual
  double assembly = 1e-9;    // planar-end and residue conditions
};

// JSON config. Ends list "inf" first, then finite positions as [re, im].
// coefficients.mode: "explicit" (a, b vectors), "kernel" (coordinates in the kernel basis) or
// "search-symmetric" (the quarter-turn symmetric member of the 4-end family).
struct RunConfig {
  EndConfiguration ends;
  bool normalize = false;
  std::string mode = "search-symmetric";
  VecC a, b;  // explicit vectors or kernel coordinates
  Vec3 base = Vec3::Zero();
  Tolerances tol;
};
RunConfig parse_config(const std::string& json_text);

struct SymmetryData {
  Eigen::Matrix3d S = Eigen::Matrix3d::Identity();
  ChartMap map;
  std::vector<int> cycle;
  SymmetryResidual residual;
};

// Solved surface: ends, coefficient vectors and assembly diagnostics.
struct SurfaceRecord {
  EndConfiguration ends;
  VecC ahat, bhat;
  Vec3 base = Vec3::Zero();
  std::string method;
  Tolerances tol;
  int kernel_dimension = 0;
  std::optional<cd> pfaffian;  // even m
  double kernel_residual = 0.0, max_planar_condition = 0.0, max_residue = 0.0, coprime_measure = 0.0,
         min_end_value = 0.0;
  std::optional<SymmetryData> symmetry;
};

// Throws Validation errors ("duplicate ends", "trivial kernel", assembly failures).
SurfaceRecord solve_surface(const RunConfig& cfg);
// Quarter-turn symmetric member of the 4-end family on cfg (Pfaffian root required).
SurfaceRecord symmetric_surface(const EndConfiguration& cfg, const Tolerances& tol = {});
// Explicit coefficient vectors.
SurfaceRecord surface_from_vectors(const EndConfiguration& cfg, const VecC& a, const VecC& b,
                                   const Vec3& base = Vec3::Zero(), const Tolerances& tol = {});

std::string surface_to_json(const SurfaceRecord& s);
// Re-validates by reassembly.
SurfaceRecord surface_from_json(const std::string& json_text);
MinimalImmersion build_immersion(const SurfaceRecord& s);

VariationField parse_field(const std::string& json_text);
std::string field_to_json(const VariationField& f);

struct AnalyzeOptions {
  bool index = false, energy = false, verify = false;
  std::optional<VariationField> field;
  std::optional<Eigen::VectorXd> jacobi_alpha;
  LogJacobiOptions log_jacobi;
  QuadratureScheme quad;
};
struct AnalysisOutput {
  std::string report_json;
  std::string summary;  // human-readable table
  bool all_passed = true;  // verify checks
};
AnalysisOutput analyze_surface(const SurfaceRecord& s, const AnalyzeOptions& opt);

// Triangle mesh on the parameter sphere with vertices pulled toward the ends.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;  // zero-based
};
// inverted: Psi with ends at the origin. Otherwise X with small disks around the ends removed.
Mesh export_mesh(const MinimalImmersion& im, bool inverted, int grid);
std::string mesh_to_obj(const Mesh& m);
Mesh mesh_from_obj(const std::string& text);

// |Pf| and kernel dimension of M for ends {inf, 0, 1, t, 2, 3, ...} (m - 4 extra ends) over a grid of t.
std::string pfaffian_scan_csv(int m, double re0, double re1, double im0, double im1, int n,
                              double rank_tol = 1e-8);

// FNV-1a of a string, as hex.
std::string content_hash(const std::string& s);

}  // namespace willmore
