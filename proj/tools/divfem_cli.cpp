// Command-line driver: mesh generation/inspection and the Stokes, eigenvalue,
// inf-sup and biharmonic studies. Output is CSV with '#' metadata lines.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "divfem/errors.hpp"
#include "divfem/studies.hpp"

namespace {

using namespace divfem;

struct MeshSource {
  std::string gen = "appendix_hexagon";
  std::string in_path;
  int refine = 0;
  int n = 1;
  double perturb = 0.0;
  std::uint64_t seed = 1;
};

void add_mesh_options(CLI::App* cmd, MeshSource& src) {
  cmd->add_option("--gen", src.gen,
                  "generator: appendix_hexagon | crisscross | eig_square | eig_hexagon");
  cmd->add_option("--in", src.in_path, "read mesh from file instead of generating");
  cmd->add_option("--refine", src.refine, "uniform refinements applied to the base mesh");
  cmd->add_option("--n", src.n, "crisscross block count");
  cmd->add_option("--perturb", src.perturb, "perturbation magnitude (fraction of local edge)");
  cmd->add_option("--seed", src.seed, "perturbation seed");
}

Triangulation make_mesh(const MeshSource& src) {
  Triangulation tri;
  if (!src.in_path.empty()) {
    tri = read_mesh_file(src.in_path);
  } else if (src.gen == "appendix_hexagon") {
    tri = make_appendix_hexagon();
  } else if (src.gen == "crisscross") {
    tri = make_square_crisscross(src.n);
  } else if (src.gen == "eig_square") {
    tri = make_eig_square_grid();
  } else if (src.gen == "eig_hexagon") {
    tri = make_eig_hexagon_grid();
  } else {
    throw CLI::ValidationError("--gen", "unknown generator '" + src.gen + "'");
  }
  tri = refine_times(std::move(tri), src.refine);
  if (src.perturb > 0.0) tri = make_perturbed(tri, src.perturb, src.seed);
  return tri;
}

class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw MeshError("cannot open output file " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

void print_mesh_meta(std::ostream& os, const Triangulation& tri) {
  MeshCounts mc = counts_and_layers(tri);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# mesh: X=%d Xi=%d Xb=%d E=%d Ei=%d Eb=%d T=%d Ti=%d euler=%d\n",
                mc.n_vertices, mc.n_interior_vertices, mc.n_boundary_vertices, mc.n_edges,
                mc.n_interior_edges, mc.n_boundary_edges, mc.n_cells, mc.n_interior_cells,
                mc.euler);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "# layers=%d assumption1=%s interior_cell_identity(Ti=2Xi-2)=%s\n",
                mc.number_of_layers, mc.assumption1 ? "yes" : "no",
                mc.interior_cell_identity ? "yes" : "no");
  os << buf;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int run(int argc, char** argv) {
  CLI::App app{"strictly conservative Stokes finite elements: mesh, solve, eigen, "
               "inf-sup and biharmonic drivers"};
  app.require_subcommand(1);

  MeshSource src;
  std::string out_path;
  std::string pair_s = "el-p0";
  double epsilon = 1.0;
  int levels = 4;
  int k = 6;

  auto* c_mesh = app.add_subcommand("mesh", "generate or load a mesh, report counts");
  add_mesh_options(c_mesh, src);
  c_mesh->add_option("--out", out_path, "write mesh file");

  auto* c_solve = app.add_subcommand(
      "stokes-solve", "solve the manufactured Stokes problem on one (unit-square) mesh");
  add_mesh_options(c_solve, src);
  c_solve->add_option("--pair", pair_s, "el-p0 | sbdfm-p1");
  c_solve->add_option("--epsilon", epsilon, "viscosity parameter");
  c_solve->add_option("--out", out_path, "write velocity DOF coefficients");

  auto* c_conv = app.add_subcommand(
      "stokes-conv", "convergence study for the manufactured Stokes problem (unit square)");
  add_mesh_options(c_conv, src);
  c_conv->add_option("--pair", pair_s, "el-p0 | sbdfm-p1");
  c_conv->add_option("--epsilon", epsilon, "viscosity parameter");
  c_conv->add_option("--levels", levels, "number of refinement levels");
  c_conv->add_option("--out", out_path, "CSV output path");

  auto* c_eig = app.add_subcommand("stokes-eig", "Stokes eigenvalue study");
  add_mesh_options(c_eig, src);
  c_eig->add_option("--pair", pair_s, "el-p0 | sbdfm-p1");
  c_eig->add_option("--epsilon", epsilon, "viscosity parameter");
  c_eig->add_option("--levels", levels, "number of refinement levels");
  c_eig->add_option("--k", k, "number of eigenvalues");
  c_eig->add_option("--out", out_path, "CSV output path");

  auto* c_inf = app.add_subcommand("infsup", "inf-sup constant estimation study");
  add_mesh_options(c_inf, src);
  std::string inf_pair = "p1-p0";
  c_inf->add_option("--pair", inf_pair, "p1-p0 | el-p0 | sbdfm-p1");
  c_inf->add_option("--levels", levels, "number of refinement levels");
  c_inf->add_option("--out", out_path, "CSV output path");

  auto* c_bih = app.add_subcommand("biharmonic",
                                   "biharmonic convergence study (unit square)");
  add_mesh_options(c_bih, src);
  c_bih->add_option("--levels", levels, "number of refinement levels");
  c_bih->add_option("--out", out_path, "CSV output path");

  // stokes-conv / biharmonic default to the unit square
  bool gen_given = false;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--gen" || a == "--in" || a.rfind("--gen=", 0) == 0 || a.rfind("--in=", 0) == 0)
      gen_given = true;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if ((c_conv->parsed() || c_bih->parsed() || c_solve->parsed()) && !gen_given)
    src.gen = "crisscross";

  if (c_mesh->parsed()) {
    Triangulation tri = make_mesh(src);
    print_mesh_meta(std::cout, tri);
    if (!out_path.empty()) write_mesh_file(out_path, tri);
    return 0;
  }

  Triangulation tri = make_mesh(src);

  if (c_solve->parsed()) {
    auto pair = pair_from_name(pair_s);
    if (!pair || *pair == Pair::P1P0)
      throw CLI::ValidationError("--pair", "expected el-p0 or sbdfm-p1");
    StokesSolveResult r = stokes_manufactured_solve(tri, *pair, epsilon);
    print_mesh_meta(std::cout, tri);
    std::cout << "# pair=" << pair_s << " epsilon=" << fmt(epsilon) << "\n";
    std::cout << "vel_h1_error," << fmt(r.vel_h1) << "\n";
    std::cout << "pressure_l2_error," << fmt(r.p_l2) << "\n";
    std::cout << "div_l2," << fmt(r.div_l2) << "\n";
    std::cout << "residual_momentum," << fmt(r.residual_momentum) << "\n";
    std::cout << "residual_divergence," << fmt(r.residual_divergence) << "\n";
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      for (int i = 0; i < r.velocity_sbdfm.size(); ++i)
        f << fmt(r.velocity_sbdfm(i)) << "\n";
    }
    return 0;
  }

  if (c_conv->parsed()) {
    auto pair = pair_from_name(pair_s);
    if (!pair || *pair == Pair::P1P0)
      throw CLI::ValidationError("--pair", "expected el-p0 or sbdfm-p1");
    auto rows = stokes_convergence_study(tri, levels, *pair, epsilon);
    Output out(out_path);
    print_mesh_meta(out.os(), tri);
    out.os() << "# pair=" << pair_s << " epsilon=" << fmt(epsilon) << " levels=" << levels
             << "\n";
    out.os() << "level,h,vel_h1_error,vel_rate,pressure_l2_error,pressure_rate,div_l2\n";
    for (const auto& r : rows)
      out.os() << r.level << "," << fmt(r.h) << "," << fmt(r.vel_h1) << "," << fmt(r.vel_rate)
               << "," << fmt(r.p_l2) << "," << fmt(r.p_rate) << "," << fmt(r.div_l2) << "\n";
    return 0;
  }

  if (c_eig->parsed()) {
    auto pair = pair_from_name(pair_s);
    if (!pair || *pair == Pair::P1P0)
      throw CLI::ValidationError("--pair", "expected el-p0 or sbdfm-p1");
    auto rows = stokes_eig_study(tri, levels, *pair, k, epsilon);
    Output out(out_path);
    print_mesh_meta(out.os(), tri);
    out.os() << "# pair=" << pair_s << " epsilon=" << fmt(epsilon) << " levels=" << levels
             << " k=" << k << "\n";
    out.os() << "level,h";
    for (int i = 1; i <= k; ++i) out.os() << ",lambda" << i;
    out.os() << "\n";
    for (const auto& r : rows) {
      out.os() << r.level << "," << fmt(r.h);
      for (double l : r.lambda) out.os() << "," << fmt(l);
      out.os() << "\n";
    }
    return 0;
  }

  if (c_inf->parsed()) {
    auto pair = pair_from_name(inf_pair);
    if (!pair) throw CLI::ValidationError("--pair", "expected p1-p0, el-p0 or sbdfm-p1");
    auto rows = infsup_study(tri, levels, *pair);
    Output out(out_path);
    print_mesh_meta(out.os(), tri);
    out.os() << "# pair=" << inf_pair << " levels=" << levels << "\n";
    out.os() << "level,h,lambda_min_plus,rate,lambda_max,beta,beta_max\n";
    for (const auto& r : rows)
      out.os() << r.level << "," << fmt(r.h) << "," << fmt(r.report.lambda_min_plus) << ","
               << fmt(r.rate) << "," << fmt(r.report.lambda_max) << "," << fmt(r.report.beta)
               << "," << fmt(r.report.beta_max) << "\n";
    return 0;
  }

  if (c_bih->parsed()) {
    auto rows = biharmonic_study(tri, levels);
    Output out(out_path);
    print_mesh_meta(out.os(), tri);
    out.os() << "# levels=" << levels << "\n";
    out.os() << "level,h,h2_error,rate\n";
    for (const auto& r : rows)
      out.os() << r.level << "," << fmt(r.h) << "," << fmt(r.err_h2) << "," << fmt(r.rate)
               << "\n";
    return 0;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error&) {
    return 1;
  } catch (const divfem::MeshError& e) {
    std::cerr << "mesh/space error: " << e.what() << "\n";
    return 2;
  } catch (const divfem::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
