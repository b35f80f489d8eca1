#include "fiberlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fiberlab/acceptance.hpp"
#include "fiberlab/cech.hpp"
#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/csf.hpp"
#include "fiberlab/error.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/io.hpp"
#include "fiberlab/moduli.hpp"
#include "fiberlab/sampling.hpp"

namespace fiberlab::cli {

namespace g = fiberlab::geometry;
using io::json;

namespace {

const std::vector<std::string> kCommands = {"heatflow", "euler", "classify", "transport",
                                            "split-field", "straighten", "slope", "karcher",
                                            "csf", "selftest"};

void emit_error(std::ostream& err, std::string_view code, const std::string& message) {
  json j = {{"error", {{"code", code}, {"message", message}}}};
  err << j.dump() << '\n';
}

// CSV goes to the named file, or to `out` when the path is empty or "-".
void write_csv_to(const std::string& path, std::ostream& out, const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows) {
  if (path.empty() || path == "-") {
    io::write_csv(out, header, rows);
    return;
  }
  std::ostringstream os;
  io::write_csv(os, header, rows);
  io::write_text_file(path, os.str());
}

void write_json_to(const std::string& path, const json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

moduli::FiberMeasure parse_measure(const std::string& s) {
  if (s == "arclength") return moduli::FiberMeasure::Arclength;
  if (s == "intrinsic") return moduli::FiberMeasure::Intrinsic;
  throw Error(ErrorCode::BadConfig, "measure must be 'arclength' or 'intrinsic', got '" + s + "'");
}

Eigen::Vector2i parse_slope(const std::string& s) {
  std::vector<long> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stol(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadConfig, "slope must look like '1,2', got '" + s + "'");
    }
  }
  if (v.size() != 2) throw Error(ErrorCode::BadConfig, "slope needs two integers, got '" + s + "'");
  if (std::gcd(v[0], v[1]) != 1) {
    throw Error(ErrorCode::NonPrimitive, "slope " + s + " is not primitive");
  }
  return Eigen::Vector2i(static_cast<int>(v[0]), static_cast<int>(v[1]));
}

// ---------------------------------------------------------------------------

struct HeatflowArgs {
  int grid = 256;
  std::uint64_t seed = 7;
  int t_samples = 11;
  double amplitude = 0.3;
  std::string in, out;
};

int cmd_heatflow(const HeatflowArgs& a, std::ostream& out) {
  if (a.t_samples < 2) throw Error(ErrorCode::BadConfig, "--t-samples must be at least 2");
  sampling::Rng rng(a.seed);
  const circle::CircleDiffeo f = a.in.empty()
                                     ? sampling::random_diffeo(rng, static_cast<std::size_t>(a.grid), a.amplitude)
                                     : io::diffeo_from_json(io::read_json_file(a.in));
  const double mean = f.disp().mean();
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < a.t_samples; ++k) {
    const double t = static_cast<double>(k) / (a.t_samples - 1);
    const auto H = circle::retract(f, t);
    double sup = 0.0;
    for (std::size_t i = 0; i < H.grid_size(); ++i) {
      sup = std::max(sup, circle::circle_distance(H.disp()[i], mean));
    }
    rows.push_back({t, sup, H.disp().min_derivative()});
  }
  write_csv_to(a.out, out, {"t", "sup_disp", "min_derivative"}, rows);
  return 0;
}

int cmd_euler(const std::string& path, std::ostream& out) {
  const auto tau = io::cocycle_from_json(io::read_json_file(path));
  json j = {{"base", std::string(cech::to_string(tau.cover->base()))},
            {"cocycle_residual", cech::cocycle_check(tau)}};
  if (tau.cover->base() != cech::Base::S2) {
    throw Error(ErrorCode::UnsupportedBase, "the Euler class is computed on the two-cap S2 cover");
  }
  j["euler_class"] = cech::euler_class(tau);
  out << j.dump() << '\n';
  return 0;
}

int cmd_classify(const std::string& base, long euler, std::ostream& out) {
  const auto rec = cech::classify(cech::parse_base(base), euler);
  out << "base " << cech::to_string(rec.base) << '\n'
      << "euler " << rec.euler << '\n'
      << "total " << rec.total_space << (rec.total_alias.empty() ? "" : " = " + rec.total_alias) << '\n'
      << "core " << rec.core << '\n';
  return 0;
}

int cmd_transport(const std::string& model_id, const std::string& from, const std::string& to,
                  std::ostream& out) {
  const auto model = g::FibrationModel::parse(model_id);
  const auto q = io::point_from_json(io::read_json_file(from), model);
  const auto x = io::base_point_from_json(io::read_json_file(to), model);
  const auto r = g::horizontal_transport_ex(model, q, x);
  json j = {{"model", model.id()},
            {"point", io::to_json(r.point, model)},
            {"steps", r.steps},
            {"projection_error", r.projection_error}};
  out << j.dump() << '\n';
  return 0;
}

struct SplitArgs {
  std::string in, model = "flat-t2", fair_out, projectable_out;
  int nb = 64, nf = 64;
  std::uint64_t seed = 7;
  double amplitude = 1.0;
  bool report = false;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
  fields::FieldGrid X = [&] {
    if (!a.in.empty()) return io::field_from_json(io::read_json_file(a.in));
    sampling::Rng rng(a.seed);
    return sampling::random_field(rng, g::FibrationModel::parse(a.model), a.nb, a.nf, a.amplitude);
  }();
  const auto V = fields::vertical_part(X);
  const auto P = fields::horizontal_average(X);
  const auto F = fields::fair_part(X);
  const auto B = P - V;
  if (!a.fair_out.empty()) write_json_to(a.fair_out, io::to_json(F));
  if (!a.projectable_out.empty()) write_json_to(a.projectable_out, io::to_json(P));
  if (a.report || (a.fair_out.empty() && a.projectable_out.empty())) {
    const double nF = fields::l2_norm(F), nP = fields::l2_norm(P);
    const auto pr = fields::is_projectable(X, 1e-8);
    json j = {{"model", X.model().id()},
              {"nb", X.nb()},
              {"nf", X.nf()},
              {"l2_norm", {{"field", fields::l2_norm(X)}, {"vertical", fields::l2_norm(V)},
                           {"basic", fields::l2_norm(B)}, {"fair", nF}, {"projectable", nP}}},
              {"normalized_cross_fair_projectable",
               nF > 0 && nP > 0 ? fields::l2_inner(F, P) / (nF * nP) : 0.0},
              {"projectable_spread", pr.spread},
              {"is_projectable", pr.projectable}};
    out << j.dump(2) << '\n';
  }
  return 0;
}

struct StraightenArgs {
  std::string model, in, report, out, measure = "arclength";
  int passes = 1, nb = 64, m = 64;
  double eps = 0.02;
  std::uint64_t seed = 7;
  bool fair = false;
};

int cmd_straighten(const StraightenArgs& a, std::ostream& out) {
  if (a.passes < 1) throw Error(ErrorCode::BadConfig, "--passes must be at least 1");
  moduli::Fibering F;
  if (!a.in.empty()) {
    if (a.model.empty()) {
      F = io::fibering_from_json(io::read_json_file(a.in));
    } else {
      const auto fallback = g::FibrationModel::parse(a.model);
      F = io::fibering_from_json(io::read_json_file(a.in), &fallback);
    }
  } else {
    const auto model = g::FibrationModel::parse(a.model.empty() ? "hopf" : a.model);
    sampling::Rng rng(a.seed);
    const auto X = a.fair ? sampling::random_fair_field(rng, model, a.nb, a.m, 1.0)
                          : sampling::random_field(rng, model, a.nb, a.m, 1.0);
    F = moduli::perturb(moduli::model_fibering(model, a.nb, a.m), X, a.eps);
  }

  moduli::Fibering result;
  moduli::StraightenReport last;
  std::vector<std::vector<double>> rows;
  bool converged = true;
  if (a.passes == 1) {
    moduli::StraightenOptions opts;
    opts.measure = parse_measure(a.measure);
    auto [S, rep] = moduli::straighten(F, opts);
    rows.push_back({1.0, moduli::sample_distance(F, S)});
    result = std::move(S);
    last = std::move(rep);
  } else {
    auto [S, rep] = moduli::refine(F, a.passes);
    for (std::size_t k = 0; k < rep.residuals.size(); ++k) {
      rows.push_back({static_cast<double>(k + 1), rep.residuals[k]});
    }
    converged = rep.converged;
    result = std::move(S);
    last = std::move(rep.last);
  }
  if (!a.report.empty()) write_csv_to(a.report, out, {"pass", "residual"}, rows);
  if (!a.out.empty()) write_json_to(a.out, io::to_json(result));
  {
    json j = {{"model", result.model.id()},
              {"nb", result.nb()},
              {"passes_run", rows.size()},
              {"final_residual", rows.back()[1]},
              {"converged", converged},
              {"max_normal_residual", last.max_residual},
              {"min_center_separation", last.min_center_separation},
              {"collision_threshold", last.collision_threshold}};
    out << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_slope(const std::string& path, const std::string& model, bool oriented, std::ostream& out) {
  const json j = io::read_json_file(path);
  g::FibrationModel fallback = g::FibrationModel::flat_t2();
  if (!model.empty()) fallback = g::FibrationModel::parse(model);
  if (j.is_object() && j.contains("fibers")) {
    const auto F = io::fibering_from_json(j, &fallback);
    for (const auto& S : F.fibers) out << moduli::slope(S, oriented).str() << '\n';
    return 0;
  }
  out << moduli::slope(io::shape_from_json(j, &fallback), oriented).str() << '\n';
  return 0;
}

int cmd_karcher(const std::string& path, const std::string& model, const std::string& measure,
                int brute, std::ostream& out) {
  const json j = io::read_json_file(path);
  moduli::FiberShape S;
  if (model.empty()) {
    S = io::shape_from_json(j);
  } else {
    const auto fallback = g::FibrationModel::parse(model);
    S = io::shape_from_json(j, &fallback);
  }
  json r;
  r["model"] = S.model.id();
  if (parse_measure(measure) == moduli::FiberMeasure::Arclength) {
    r["center"] = io::to_json(moduli::karcher_center(S), S.model);
  } else {
    moduli::Fibering F{S.model, {g::project(S.model, S.samples.front())}, {S}};
    moduli::StraightenOptions o;
    o.measure = moduli::FiberMeasure::Intrinsic;
    const auto rep = moduli::straighten(F, o).second;
    r["center"] = io::to_json(rep.fibers.front().center, S.model);
  }
  if (brute > 0) {
    const auto b = moduli::brute_center(S, brute);
    const auto c = io::base_point_from_json(r["center"], S.model);
    const Eigen::Vector2d d = moduli::normal_coordinates(S.model, b, c) - b.coords;
    r["brute"] = {{"center", io::to_json(b.center, S.model)},
                  {"cell", b.cell},
                  {"offset_cells", b.cell > 0 ? d.cwiseAbs().maxCoeff() / b.cell : 0.0}};
  }
  out << r.dump() << '\n';
  return 0;
}

struct CsfArgs {
  std::string slope = "1,2", out, in, final_out;
  double amp = 0.1, cfl = 0.2, kappa_tol = 1e-3, t_max = 2.0;
  int points = 512, fibers = 1, resample_period = 1000, trace_stride = 100;
  std::uint64_t seed = 7;
};

int cmd_csf(const CsfArgs& a, std::ostream& out) {
  csf::FlowParams P;
  P.cfl = a.cfl;
  P.kappa_tol = a.kappa_tol;
  P.t_max = a.t_max;
  P.resample_period = a.resample_period;
  P.trace_stride = a.trace_stride;
  if (a.fibers < 1) throw Error(ErrorCode::BadConfig, "--fibers must be at least 1");
  if (a.points < 8) throw Error(ErrorCode::BadConfig, "--points must be at least 8");
  if (a.resample_period < 1 || a.trace_stride < 1) {
    throw Error(ErrorCode::BadConfig, "--resample-period and --trace-stride must be positive");
  }

  std::vector<csf::CurveState> curves;
  if (!a.in.empty()) {
    const auto flat = g::FibrationModel::flat_t2();
    for (const auto& S : io::fibering_from_json(io::read_json_file(a.in), &flat).fibers) {
      curves.push_back(csf::CurveState::from_shape(S));
    }
  } else {
    const Eigen::Vector2i slope = parse_slope(a.slope);
    sampling::Rng rng(a.seed);
    auto phases = csf::coherent_phases(slope, a.fibers, sampling::uniform(rng, 0.0, 6.283185307179586));
    if (a.fibers > 1) {
      for (auto& ph : phases) ph += sampling::uniform(rng, -0.1, 0.1);
    }
    curves = csf::perturbed_linear_curves(slope, a.points, a.amp, phases);
  }

  const auto R = csf::flow_curves(curves, P);
  std::vector<std::vector<double>> rows;
  for (const auto& r : R.trace) rows.push_back({r.t, r.length, r.max_kappa, r.min_pair_dist});
  write_csv_to(a.out, out, {"t", "length", "max_kappa", "min_pair_dist"}, rows);
  const auto F = csf::to_fibering(R.curves);
  if (!a.final_out.empty()) write_json_to(a.final_out, io::to_json(F));
  if (!a.out.empty() && a.out != "-") {
    const auto core = moduli::core_membership(F, 5e-3);
    json j = {{"t", R.t},
              {"steps", R.steps},
              {"resamples", R.resamples},
              {"max_kappa", R.max_kappa},
              {"min_pair_dist", R.min_pair_dist},
              {"core", core.describe()},
              {"core_residual", core.residual}};
    out << j.dump() << '\n';
  }
  return 0;
}

int cmd_selftest(std::uint64_t seed, const std::vector<int>& only, std::ostream& out) {
  acceptance::Options o;
  o.seed = seed;
  const auto ids = only.empty() ? acceptance::criterion_ids() : only;
  int passed = 0;
  for (int id : ids) {
    const auto r = acceptance::run_criterion(id, o);
    passed += r.passed;
    out << acceptance::format_line(r) << '\n' << std::flush;
  }
  out << passed << "/" << ids.size() << " criteria passed\n";
  return passed == static_cast<int>(ids.size()) ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  // Unknown subcommands get their own code; CLI11 would report them as stray arguments.
  if (argc >= 2) {
    const std::string first = argv[1];
    if (!first.empty() && first[0] != '-' &&
        std::find(kCommands.begin(), kCommands.end(), first) == kCommands.end()) {
      emit_error(err, code_name(ErrorCode::UnknownSubcommand), "unknown subcommand '" + first + "'");
      return 2;
    }
  }

  CLI::App app{"fiberlab: circle fibrations, their symmetries and their moduli"};
  app.name("fiberlab");
  app.require_subcommand(1);

  HeatflowArgs heat;
  auto* c_heat = app.add_subcommand("heatflow", "Heat-flow retraction of a circle diffeomorphism");
  c_heat->add_option("--grid", heat.grid, "Grid size (power of two >= 16)");
  c_heat->add_option("--seed", heat.seed, "Seed for the random diffeomorphism");
  c_heat->add_option("--t-samples", heat.t_samples, "Number of times in [0, 1]");
  c_heat->add_option("--amplitude", heat.amplitude, "Displacement oscillation bound");
  c_heat->add_option("--in", heat.in, "CircleDiffeo JSON instead of a random one");
  c_heat->add_option("--out", heat.out, "CSV output (default stdout)");

  std::string cocycle_path;
  auto* c_euler = app.add_subcommand("euler", "Euler class of a cocycle on the S2 cover");
  c_euler->add_option("--cocycle", cocycle_path, "Cocycle JSON")->required();

  std::string base;
  long euler = 0;
  auto* c_classify = app.add_subcommand("classify", "Classify oriented circle fiberings");
  c_classify->add_option("--base", base, "S1, S2 or T2")->required();
  c_classify->add_option("--euler", euler, "Euler number")->required();

  std::string tr_model, tr_from, tr_to;
  auto* c_transport = app.add_subcommand("transport", "Horizontal transport to another fiber");
  c_transport->add_option("--model", tr_model, "Model id")->required();
  c_transport->add_option("--from", tr_from, "Start point JSON")->required();
  c_transport->add_option("--to", tr_to, "Target base point JSON")->required();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split-field", "Vertical / basic / fair decomposition");
  c_split->add_option("--in", split.in, "FieldGrid JSON (default: random field)");
  c_split->add_flag("--report", split.report, "Print norms and orthogonality");
  c_split->add_option("--model", split.model, "Model for the random field");
  c_split->add_option("--nb", split.nb, "Base nodes for the random field");
  c_split->add_option("--nf", split.nf, "Fiber nodes for the random field");
  c_split->add_option("--seed", split.seed, "Seed for the random field");
  c_split->add_option("--amplitude", split.amplitude, "Sup norm of the random field");
  c_split->add_option("--fair-out", split.fair_out, "Write the fair part");
  c_split->add_option("--projectable-out", split.projectable_out, "Write the projectable part");

  StraightenArgs st;
  auto* c_st = app.add_subcommand("straighten", "Straighten a perturbed fibering");
  c_st->add_option("--model", st.model, "Model id");
  c_st->add_option("--in", st.in, "Fibering JSON (default: random perturbation)");
  c_st->add_option("--passes", st.passes, "1 = straighten, more = iterative refinement");
  c_st->add_option("--report", st.report, "Per-pass residual CSV");
  c_st->add_option("--out", st.out, "Write the straightened fibering");
  c_st->add_option("--measure", st.measure, "arclength or intrinsic (single pass)");
  c_st->add_option("--nb", st.nb, "Fibers of the random perturbation");
  c_st->add_option("--m", st.m, "Samples per fiber of the random perturbation");
  c_st->add_option("--eps", st.eps, "Perturbation size");
  c_st->add_option("--seed", st.seed, "Seed of the random perturbation");
  c_st->add_flag("--fair", st.fair, "Perturb along a fair field");

  std::string sl_in, sl_model;
  bool sl_oriented = false;
  auto* c_slope = app.add_subcommand("slope", "Winding vector of torus fibers");
  c_slope->add_option("--in", sl_in, "Fiber or fibering JSON")->required();
  c_slope->add_option("--model", sl_model, "Model when the file has none (default flat-t2)");
  c_slope->add_flag("--oriented", sl_oriented, "Keep the traversal orientation");

  std::string k_in, k_model, k_measure = "arclength";
  int k_brute = 0;
  auto* c_karcher = app.add_subcommand("karcher", "Center of mass of a fiber shape");
  c_karcher->add_option("--in", k_in, "Fiber JSON")->required();
  c_karcher->add_option("--model", k_model, "Model when the file has none");
  c_karcher->add_option("--measure", k_measure, "arclength or intrinsic");
  c_karcher->add_option("--brute", k_brute, "Also run a brute-force grid of this resolution");

  CsfArgs cs;
  auto* c_csf = app.add_subcommand("csf", "Curve-shortening flow on the flat torus");
  c_csf->add_option("--slope", cs.slope, "Winding of the perturbed line, e.g. 1,2");
  c_csf->add_option("--amp", cs.amp, "Normal perturbation amplitude");
  c_csf->add_option("--points", cs.points, "Samples per curve");
  c_csf->add_option("--fibers", cs.fibers, "Number of parallel curves");
  c_csf->add_option("--cfl", cs.cfl, "dt = cfl * min spacing^2");
  c_csf->add_option("--kappa-tol", cs.kappa_tol, "Stop once max |kappa| is below");
  c_csf->add_option("--t-max", cs.t_max, "Flow time budget");
  c_csf->add_option("--resample-period", cs.resample_period, "Steps between resamples");
  c_csf->add_option("--trace-stride", cs.trace_stride, "Steps between trace rows");
  c_csf->add_option("--seed", cs.seed, "Seed for phases");
  c_csf->add_option("--in", cs.in, "Flat-t2 fibering JSON instead of perturbed lines");
  c_csf->add_option("--out", cs.out, "Trace CSV (default stdout)");
  c_csf->add_option("--final", cs.final_out, "Write the terminal fibering");

  std::uint64_t st_seed = 7;
  std::vector<int> only;
  auto* c_self = app.add_subcommand("selftest", "Run the acceptance suite");
  c_self->add_option("--seed", st_seed, "Suite seed");
  c_self->add_option("--only", only, "Criterion ids to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, code_name(ErrorCode::BadConfig), e.what());
    return 2;
  }

  try {
    if (*c_heat) return cmd_heatflow(heat, out);
    if (*c_euler) return cmd_euler(cocycle_path, out);
    if (*c_classify) return cmd_classify(base, euler, out);
    if (*c_transport) return cmd_transport(tr_model, tr_from, tr_to, out);
    if (*c_split) return cmd_split(split, out);
    if (*c_st) return cmd_straighten(st, out);
    if (*c_slope) return cmd_slope(sl_in, sl_model, sl_oriented, out);
    if (*c_karcher) return cmd_karcher(k_in, k_model, k_measure, k_brute, out);
    if (*c_csf) return cmd_csf(cs, out);
    if (*c_self) return cmd_selftest(st_seed, only, out);
  } catch (const Error& e) {
    emit_error(err, code_name(e.code()), e.what());
    return 2;
  } catch (const io::json::exception& e) {
    emit_error(err, code_name(ErrorCode::InvalidInput), e.what());
    return 2;
  }
  emit_error(err, code_name(ErrorCode::UnknownSubcommand), "no subcommand given");
  return 2;
}

}  // namespace fiberlab::cli
