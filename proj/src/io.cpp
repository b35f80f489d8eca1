#include "fiberlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fiberlab/error.hpp"

namespace fiberlab::io {

namespace g = fiberlab::geometry;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidInput, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

long integer(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("\"") + key + "\" must be an integer");
  return v.get<long>();
}

std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) bad(what + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

g::FibrationModel model_of(const json& j, const g::FibrationModel* fallback) {
  if (j.is_object() && j.contains("model")) {
    if (!j["model"].is_string()) bad("\"model\" must be a string id");
    return g::FibrationModel::parse(j["model"].get<std::string>());
  }
  if (fallback) return *fallback;
  bad("missing key \"model\"");
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadConfig, "cannot write " + path);
  out << text;
}

// ---------------------------------------------------------------------------

json to_json(const circle::CircleDiffeo& f) {
  const auto v = f.disp().values();
  return {{"n", f.grid_size()}, {"disp", std::vector<double>(v.begin(), v.end())}};
}

circle::CircleDiffeo diffeo_from_json(const json& j) {
  const long n = integer(j, "n");
  auto disp = numbers(field(j, "disp"), "\"disp\"");
  if (static_cast<long>(disp.size()) != n) bad("\"disp\" length differs from \"n\"");
  return circle::CircleDiffeo(circle::PeriodicSamples(std::move(disp)));
}

// ---------------------------------------------------------------------------

json to_json(const cech::Cocycle1& tau) {
  json ovs = json::array();
  const auto& list = tau.cover->overlaps();
  for (std::size_t k = 0; k < list.size(); ++k) {
    ovs.push_back({{"i", list[k].i}, {"j", list[k].j}, {"samples", tau.values[k]}});
  }
  return {{"base", std::string(cech::to_string(tau.cover->base()))},
          {"m", tau.cover->resolution()},
          {"overlaps", ovs}};
}

cech::Cocycle1 cocycle_from_json(const json& j) {
  const json& b = field(j, "base");
  if (!b.is_string()) bad("\"base\" must be a string");
  const cech::Base base = cech::parse_base(b.get<std::string>());
  const json& ovs = field(j, "overlaps");
  if (!ovs.is_array() || ovs.empty()) bad("\"overlaps\" must be a non-empty array");

  struct Entry {
    long i, j;
    std::vector<double> samples;
  };
  std::vector<Entry> entries;
  for (const auto& o : ovs) {
    entries.push_back({integer(o, "i"), integer(o, "j"), numbers(field(o, "samples"), "\"samples\"")});
  }

  auto matches = [&](const cech::ModelCover& c) {
    if (c.overlaps().size() != entries.size()) return false;
    for (const auto& e : entries) {
      const int k = c.overlap_index(static_cast<int>(e.i), static_cast<int>(e.j));
      if (k < 0 || c.overlaps()[k].points.size() != e.samples.size()) return false;
    }
    return true;
  };

  cech::CoverPtr cover;
  if (j.contains("m")) {
    cover = cech::ModelCover::make(base, static_cast<int>(integer(j, "m")));
  } else if (base == cech::Base::T2) {
    for (int m = 4; m <= 512 && !cover; ++m) {
      auto c = cech::ModelCover::make(base, m);
      if (matches(*c)) cover = c;
    }
    if (!cover) bad("cannot infer the T2 cover resolution; add \"m\"");
  } else {
    cover = cech::ModelCover::make(base, static_cast<int>(entries.front().samples.size()));
  }
  if (!matches(*cover)) bad("overlap layout does not match the " + std::string(cech::to_string(base)) + " cover");

  cech::Cocycle1 tau = cech::Cocycle1::zero(cover);
  for (auto& e : entries) {
    tau.values[cover->overlap_index(static_cast<int>(e.i), static_cast<int>(e.j))] =
        std::move(e.samples);
  }
  return tau;
}

// ---------------------------------------------------------------------------

json to_json(const g::TotalPoint& p, const g::FibrationModel& model) {
  return std::vector<double>(p.c.data(), p.c.data() + model.total_coords());
}

json to_json(const g::BasePoint& x, const g::FibrationModel& model) {
  return std::vector<double>(x.c.data(), x.c.data() + model.base_coords());
}

g::TotalPoint point_from_json(const json& j, const g::FibrationModel& model) {
  return g::make_point(model, as_vector(numbers(j, "point")));
}

g::BasePoint base_point_from_json(const json& j, const g::FibrationModel& model) {
  return g::make_base_point(model, as_vector(numbers(j, "base point")));
}

// ---------------------------------------------------------------------------

json to_json(const fields::FieldGrid& X) {
  json vecs = json::array();
  const int d = X.model().total_coords();
  for (int i = 0; i < X.nb(); ++i) {
    for (int k = 0; k < X.nf(); ++k) {
      const auto& v = X.at(i, k);
      vecs.push_back(std::vector<double>(v.data(), v.data() + d));
    }
  }
  return {{"model", X.model().id()}, {"nb", X.nb()}, {"nf", X.nf()}, {"vectors", vecs}};
}

fields::FieldGrid field_from_json(const json& j) {
  const g::FibrationModel model = model_of(j, nullptr);
  const long nb = integer(j, "nb"), nf = integer(j, "nf");
  if (nb < 1 || nf < 2) bad("field grid needs nb >= 1 and nf >= 2");
  const json& vecs = field(j, "vectors");
  if (!vecs.is_array() || static_cast<long>(vecs.size()) != nb * nf) {
    bad("\"vectors\" must hold nb * nf entries");
  }
  fields::FieldGrid X(model, static_cast<int>(nb), static_cast<int>(nf));
  const int d = model.total_coords();
  for (long i = 0; i < nb; ++i) {
    for (long k = 0; k < nf; ++k) {
      const auto v = numbers(vecs[i * nf + k], "field vector");
      if (static_cast<int>(v.size()) != d) bad("field vectors need " + std::to_string(d) + " entries");
      g::TotalVector w = g::TotalVector::Zero();
      for (int c = 0; c < d; ++c) w[c] = v[c];
      X.set(static_cast<int>(i), static_cast<int>(k), w);
    }
  }
  return X;
}

// ---------------------------------------------------------------------------

json to_json(const moduli::FiberShape& S) {
  json pts = json::array();
  for (const auto& p : S.samples) pts.push_back(to_json(p, S.model));
  return {{"model", S.model.id()}, {"samples", pts}};
}

json to_json(const moduli::Fibering& F) {
  json fibers = json::array();
  for (const auto& S : F.fibers) {
    json pts = json::array();
    for (const auto& p : S.samples) pts.push_back(to_json(p, F.model));
    fibers.push_back(pts);
  }
  return {{"model", F.model.id()}, {"nb", F.nb()}, {"fibers", fibers}};
}

moduli::Fibering fibering_from_json(const json& j, const g::FibrationModel* fallback) {
  moduli::Fibering F;
  F.model = model_of(j, fallback);
  const json& fibers = field(j, "fibers");
  if (!fibers.is_array() || fibers.empty()) bad("\"fibers\" must be a non-empty array");
  if (j.contains("nb") && integer(j, "nb") != static_cast<long>(fibers.size())) {
    bad("\"nb\" differs from the number of fibers");
  }
  for (const auto& fj : fibers) {
    if (!fj.is_array() || fj.size() < 3) bad("each fiber needs at least 3 samples");
    moduli::FiberShape S{F.model, {}};
    for (const auto& pj : fj) S.samples.push_back(point_from_json(pj, F.model));
    F.base.push_back(g::project(F.model, S.samples.front()));
    F.fibers.push_back(std::move(S));
  }
  return F;
}

moduli::FiberShape shape_from_json(const json& j, const g::FibrationModel* fallback) {
  if (j.is_object() && j.contains("fibers")) {
    moduli::Fibering F = fibering_from_json(j, fallback);
    if (F.nb() != 1) bad("expected a single fiber, got " + std::to_string(F.nb()));
    return F.fibers.front();
  }
  moduli::FiberShape S{model_of(j, fallback), {}};
  const json& pts = field(j, "samples");
  if (!pts.is_array() || pts.size() < 3) bad("\"samples\" needs at least 3 points");
  for (const auto& pj : pts) S.samples.push_back(point_from_json(pj, S.model));
  return S;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_double(r[c]);
    os << '\n';
  }
}

}  // namespace fiberlab::io
