/* Copyright 2026 The mmplan Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mmplan/documents.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mmplan {
namespace {

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

const json& child(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field '") + key + "'");
  return *it;
}

struct GridShape {
  const char* name;
  std::vector<const char*> axes;
  bool throughput;
};

const std::vector<GridShape>& grid_shapes() {
  static const std::vector<GridShape> shapes = {
      {"e_thr", {"enc_batch", "e_tp"}, true},
      {"l_attn_thr", {"llm_seq_len", "l_tp"}, true},
      {"l_lin_thr", {"llm_seq_len", "l_tp"}, true},
      {"e_model_state", {"layers", "e_tp"}, false},
      {"l_model_state", {"layers", "l_tp"}, false},
      {"e_act_state", {"layers", "e_tp", "enc_batch"}, false},
      {"l_act_state", {"layers", "l_tp", "llm_seq_len"}, false},
  };
  return shapes;
}

InterpGrid& grid_ref(PerfProfile& p, std::string_view name) {
  if (name == "e_thr") return p.e_thr;
  if (name == "l_attn_thr") return p.l_attn_thr;
  if (name == "l_lin_thr") return p.l_lin_thr;
  if (name == "e_model_state") return p.e_model_state;
  if (name == "l_model_state") return p.l_model_state;
  if (name == "e_act_state") return p.e_act_state;
  if (name == "l_act_state") return p.l_act_state;
  throw InputError("unknown grid '" + std::string(name) + "'");
}

const InterpGrid& grid_ref(const PerfProfile& p, std::string_view name) {
  return grid_ref(const_cast<PerfProfile&>(p), name);
}

InterpGrid per_gpu_to_group(const InterpGrid& grid) {
  const std::vector<double> tps = grid.axes().at(1).coords;
  return grid.transformed([&](double v, const std::vector<std::size_t>& idx) {
    return v * tps[idx[1]];
  });
}

json item_to_json(const DataItem& d) {
  return {{"id", d.id}, {"enc_batch", d.enc_batch}, {"llm_seq_len", d.llm_seq_len}};
}

DataItem item_from_json(const json& j) {
  DataItem d{field<std::string>(j, "id"), field<std::int64_t>(j, "enc_batch"),
             field<std::int64_t>(j, "llm_seq_len")};
  if (d.enc_batch < 0 || d.llm_seq_len < 1) {
    throw InputError("item '" + d.id + "' violates shape invariants");
  }
  return d;
}

json bucketing_to_json(const Bucketing& b) {
  if (b.kind == Bucketing::Kind::kPow2) return {{"kind", "pow2"}};
  return {{"kind", "fixed"}, {"width", b.width}};
}

Bucketing bucketing_from_json(const json& j) {
  const auto kind = field<std::string>(j, "kind");
  if (kind == "pow2") return Bucketing::pow2();
  if (kind == "fixed") return Bucketing::fixed(field<std::int64_t>(j, "width"));
  throw InputError("unknown bucketing '" + kind + "'");
}

json hist_to_json(const std::map<std::int64_t, std::int64_t>& h) {
  json out = json::array();
  for (const auto& [bucket, count] : h) out.push_back({bucket, count});
  return out;
}

std::map<std::int64_t, std::int64_t> hist_from_json(const json& j) {
  std::map<std::int64_t, std::int64_t> h;
  for (const json& e : j) h[e.at(0).get<std::int64_t>()] = e.at(1).get<std::int64_t>();
  return h;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw InputError("measurement table line " + std::to_string(line) +
                     ": '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

json to_json(const ClusterSpec& c) {
  return {{"n_gpus", c.n_gpus},
          {"gpus_per_node", c.gpus_per_node},
          {"mem_per_gpu", c.mem_per_gpu}};
}

ClusterSpec cluster_from_json(const json& j) {
  ClusterSpec c{field<int>(j, "n_gpus"), field<int>(j, "gpus_per_node"),
                field<double>(j, "mem_per_gpu")};
  c.check();
  return c;
}

json to_json(const ModelSpec& s) {
  return {{"e_layers", s.e_layers}, {"l_layers", s.l_layers},
          {"e_hidden", s.e_hidden}, {"l_hidden", s.l_hidden},
          {"e_seq_len", s.e_seq_len}};
}

ModelSpec model_from_json(const json& j) {
  ModelSpec s{field<int>(j, "e_layers"), field<int>(j, "l_layers"),
              field<int>(j, "e_hidden"), field<int>(j, "l_hidden"),
              field<int>(j, "e_seq_len")};
  s.check();
  return s;
}

json to_json(const ParallelPlan& p) {
  return {{"e_tp", p.enc.tp}, {"e_pp", p.enc.pp}, {"e_dp", p.enc.dp},
          {"l_tp", p.llm.tp}, {"l_pp", p.llm.pp}, {"l_dp", p.llm.dp},
          {"n_mb", p.n_mb}};
}

ParallelPlan plan_from_json(const json& j) {
  return {{field<int>(j, "e_tp"), field<int>(j, "e_pp"), field<int>(j, "e_dp")},
          {field<int>(j, "l_tp"), field<int>(j, "l_pp"), field<int>(j, "l_dp")},
          field<int>(j, "n_mb")};
}

json to_json(const PlanEvaluation& ev) {
  return {{"plan", to_json(ev.plan)},
          {"est_e_dur", ev.est_e_dur},
          {"est_l_dur", ev.est_l_dur},
          {"est_makespan", ev.est_makespan},
          {"objective", ev.objective},
          {"e_mem", ev.e_mem},
          {"l_mem", ev.l_mem},
          {"feasible", ev.feasible}};
}

PlanEvaluation evaluation_from_json(const json& j) {
  PlanEvaluation ev;
  ev.plan = plan_from_json(child(j, "plan"));
  ev.est_e_dur = field<double>(j, "est_e_dur");
  ev.est_l_dur = field<double>(j, "est_l_dur");
  ev.est_makespan = field<double>(j, "est_makespan");
  ev.objective = field<double>(j, "objective");
  ev.e_mem = field<double>(j, "e_mem");
  ev.l_mem = field<double>(j, "l_mem");
  ev.feasible = field<bool>(j, "feasible");
  return ev;
}

json to_json(const InterpGrid& grid) {
  json axes = json::array();
  for (const GridAxis& a : grid.axes()) {
    axes.push_back({{"name", a.name},
                    {"coords", a.coords},
                    {"out_of_range",
                     a.out_of_range == OutOfRange::kLinear ? "linear" : "clamp"}});
  }
  return {{"axes", axes}, {"values", grid.values()}};
}

InterpGrid grid_from_json(const json& j) {
  std::vector<GridAxis> axes;
  for (const json& a : child(j, "axes")) {
    GridAxis axis;
    axis.name = field<std::string>(a, "name");
    axis.coords = field<std::vector<double>>(a, "coords");
    const std::string oor = a.value("out_of_range", "clamp");
    if (oor == "linear") {
      axis.out_of_range = OutOfRange::kLinear;
    } else if (oor != "clamp") {
      throw InputError("unknown out_of_range '" + oor + "'");
    }
    axes.push_back(std::move(axis));
  }
  return InterpGrid(std::move(axes), field<std::vector<double>>(j, "values"));
}

json profile_to_json(const ProfileDocument& doc) {
  json grids = json::object();
  for (const GridShape& g : grid_shapes()) {
    grids[g.name] = to_json(grid_ref(doc.profile, g.name));
  }
  return {{"kind", "perf_profile"},
          {"version", kDocumentVersion},
          {"throughput_basis", "per_group"},
          {"throughput_unit", "flop/s"},
          {"memory_unit", "bytes"},
          {"gpus_per_node", doc.gpus_per_node},
          {"model", to_json(doc.spec)},
          {"grids", grids}};
}

ProfileDocument profile_from_json(const json& j) {
  ProfileDocument doc;
  doc.gpus_per_node = field<int>(j, "gpus_per_node");
  doc.spec = model_from_json(child(j, "model"));
  const std::string basis = j.value("throughput_basis", "per_group");
  if (basis != "per_group" && basis != "per_gpu") {
    throw InputError("unknown throughput_basis '" + basis + "'");
  }
  const json& grids = child(j, "grids");
  for (const GridShape& g : grid_shapes()) {
    InterpGrid grid = grid_from_json(child(grids, g.name));
    if (g.throughput && basis == "per_gpu") grid = per_gpu_to_group(grid);
    grid_ref(doc.profile, g.name) = std::move(grid);
  }
  doc.profile.check(doc.gpus_per_node);
  return doc;
}

PerfProfile fit_profile_table(std::istream& table, ThroughputBasis basis) {
  struct Rows {
    std::vector<std::set<double>> coords;
    std::map<std::vector<double>, double> values;
  };
  std::map<std::string, Rows> by_grid;
  std::string text;
  std::size_t line = 0;
  bool first_row = true;
  while (std::getline(table, text)) {
    ++line;
    text = trim(text);
    if (text.empty() || text[0] == '#') continue;
    const bool header_allowed = first_row;
    first_row = false;
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const auto shape = std::find_if(
        grid_shapes().begin(), grid_shapes().end(),
        [&](const GridShape& g) { return cells[0] == g.name; });
    if (shape == grid_shapes().end()) {
      if (header_allowed && cells[0] == "grid") continue;  // header row
      throw InputError("measurement table line " + std::to_string(line) +
                       ": unknown grid '" + cells[0] + "'");
    }
    const std::size_t rank = shape->axes.size();
    if (cells.size() != rank + 2) {
      throw InputError("measurement table line " + std::to_string(line) +
                       ": expected " + std::to_string(rank + 2) + " columns");
    }
    Rows& rows = by_grid[cells[0]];
    rows.coords.resize(rank);
    std::vector<double> key(rank);
    for (std::size_t a = 0; a < rank; ++a) {
      key[a] = parse_number(cells[a + 1], line);
      rows.coords[a].insert(key[a]);
    }
    if (!rows.values.emplace(key, parse_number(cells.back(), line)).second) {
      throw InputError("measurement table line " + std::to_string(line) +
                       ": duplicate grid point");
    }
  }

  PerfProfile profile;
  for (const GridShape& g : grid_shapes()) {
    auto it = by_grid.find(g.name);
    if (it == by_grid.end()) {
      throw InputError(std::string("measurement table has no rows for ") + g.name);
    }
    const Rows& rows = it->second;
    std::vector<GridAxis> axes;
    for (std::size_t a = 0; a < g.axes.size(); ++a) {
      const bool layers = std::string_view(g.axes[a]) == "layers";
      axes.push_back({g.axes[a],
                      {rows.coords[a].begin(), rows.coords[a].end()},
                      layers ? OutOfRange::kLinear : OutOfRange::kClamp});
    }
    std::vector<double> values;
    std::vector<std::size_t> idx(axes.size(), 0);
    std::vector<double> point(axes.size());
    std::size_t total = 1;
    for (const GridAxis& a : axes) total *= a.coords.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t a = axes.size(); a-- > 0;) {
        point[a] = axes[a].coords[rem % axes[a].coords.size()];
        rem /= axes[a].coords.size();
      }
      auto v = rows.values.find(point);
      if (v == rows.values.end()) {
        std::ostringstream os;
        os << "measurement table: grid " << g.name << " is missing point (";
        for (std::size_t a = 0; a < point.size(); ++a) {
          os << (a ? ", " : "") << g.axes[a] << "=" << point[a];
        }
        os << ")";
        throw InputError(os.str());
      }
      values.push_back(v->second);
    }
    InterpGrid grid(std::move(axes), std::move(values));
    if (g.throughput && basis == ThroughputBasis::kPerGpu) {
      grid = per_gpu_to_group(grid);
    }
    grid_ref(profile, g.name) = std::move(grid);
  }
  profile.check();
  return profile;
}

json to_json(const ShapeDistribution& d) {
  json sample = json::array();
  for (const DataItem& item : d.sample) sample.push_back(item_to_json(item));
  return {{"kind", "shape_distribution"},
          {"version", kDocumentVersion},
          {"sample_size", d.sample.size()},
          {"mean_enc_batch", d.mean_enc_batch},
          {"mean_llm_seq", d.mean_llm_seq},
          {"enc_bucketing", bucketing_to_json(d.enc_bucketing)},
          {"seq_bucketing", bucketing_to_json(d.seq_bucketing)},
          {"enc_batch_hist", hist_to_json(d.enc_batch_hist)},
          {"llm_seq_hist", hist_to_json(d.llm_seq_hist)},
          {"sample", sample}};
}

ShapeDistribution distribution_from_json(const json& j) {
  ShapeDistribution d;
  for (const json& item : child(j, "sample")) d.sample.push_back(item_from_json(item));
  if (d.sample.empty()) throw InputError("distribution document has an empty sample");
  d.enc_bucketing = bucketing_from_json(child(j, "enc_bucketing"));
  d.seq_bucketing = bucketing_from_json(child(j, "seq_bucketing"));
  d.enc_batch_hist = hist_from_json(child(j, "enc_batch_hist"));
  d.llm_seq_hist = hist_from_json(child(j, "llm_seq_hist"));
  d.mean_enc_batch = field<double>(j, "mean_enc_batch");
  d.mean_llm_seq = field<double>(j, "mean_llm_seq");
  return d;
}

json to_json(const SimTrace& t) {
  json events = json::array();
  for (const SimEvent& e : t.events) {
    events.push_back({{"stage", e.stage},
                      {"microbatch", e.microbatch},
                      {"kind", e.kind == PassKind::kForward ? "forward" : "backward"},
                      {"start", e.start},
                      {"end", e.end}});
  }
  return {{"makespan", t.makespan},
          {"stage_busy", t.stage_busy},
          {"stage_idle", t.stage_idle},
          {"idle_fraction", t.idle_fraction},
          {"events", events}};
}

std::vector<std::vector<DataItem>> slice_batches(std::span<const DataItem> items,
                                                 int gbs) {
  if (gbs < 1) throw InputError("global batch size must be >= 1");
  std::vector<std::vector<DataItem>> out;
  for (std::size_t pos = 0; pos < items.size(); pos += static_cast<std::size_t>(gbs)) {
    const std::size_t end = std::min(items.size(), pos + static_cast<std::size_t>(gbs));
    out.emplace_back(items.begin() + pos, items.begin() + end);
  }
  return out;
}

json schedule_to_json(const ScheduleDocument& doc) {
  json out_batches = json::array();
  for (const ScheduledBatch& s : doc.batches) {
    json buckets = json::array();
    for (const auto& bucket : s.assignment.buckets) {
      json ids = json::array();
      for (std::size_t i : bucket) ids.push_back(s.items.at(i).id);
      buckets.push_back(ids);
    }
    json item_ids = json::array();
    for (const DataItem& d : s.items) item_ids.push_back(d.id);
    out_batches.push_back({{"index", s.index},
                           {"items", item_ids},
                           {"c_max", s.assignment.c_max},
                           {"solver", to_string(s.assignment.solver)},
                           {"optimality", to_string(s.assignment.optimality)},
                           {"buckets", buckets}});
  }
  return {{"kind", "schedule"},
          {"version", kDocumentVersion},
          {"plan", to_json(doc.plan)},
          {"gbs", doc.gbs},
          {"batches", out_batches}};
}

ScheduleDocument schedule_from_json(const json& j,
                                    std::span<const DataItem> manifest) {
  std::map<std::string, const DataItem*> by_id;
  for (const DataItem& d : manifest) {
    if (!by_id.emplace(d.id, &d).second) {
      throw InputError("manifest has duplicate id '" + d.id + "'");
    }
  }
  ScheduleDocument doc;
  doc.plan = plan_from_json(child(j, "plan"));
  doc.gbs = field<int>(j, "gbs");
  for (const json& b : child(j, "batches")) {
    ScheduledBatch s;
    s.index = field<std::size_t>(b, "index");
    std::map<std::string, std::size_t> position;
    for (const json& id : child(b, "items")) {
      const auto name = id.get<std::string>();
      auto it = by_id.find(name);
      if (it == by_id.end()) {
        throw InputError("schedule references unknown item '" + name + "'");
      }
      if (!position.emplace(name, s.items.size()).second) {
        throw InputError("schedule lists item '" + name + "' twice");
      }
      s.items.push_back(*it->second);
    }
    std::vector<bool> placed(s.items.size(), false);
    for (const json& bucket : child(b, "buckets")) {
      std::vector<std::size_t> idx;
      for (const json& id : bucket) {
        const auto name = id.get<std::string>();
        auto it = position.find(name);
        if (it == position.end()) {
          throw InputError("bucket holds item '" + name + "' outside its batch");
        }
        if (placed[it->second]) {
          throw InputError("schedule assigns item '" + name + "' twice");
        }
        placed[it->second] = true;
        idx.push_back(it->second);
      }
      std::sort(idx.begin(), idx.end());
      s.assignment.buckets.push_back(std::move(idx));
    }
    if (std::find(placed.begin(), placed.end(), false) != placed.end()) {
      throw InputError("schedule batch " + std::to_string(s.index) +
                       " leaves items unassigned");
    }
    s.assignment.c_max = field<double>(b, "c_max");
    s.assignment.solver =
        field<std::string>(b, "solver") == "exact" ? SolverKind::kExact : SolverKind::kLpt;
    s.assignment.optimality = field<std::string>(b, "optimality") == "proven"
                                  ? Optimality::kProven
                                  : Optimality::kHeuristic;
    doc.batches.push_back(std::move(s));
  }
  return doc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

}  // namespace mmplan
