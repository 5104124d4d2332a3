#include "hydrosddp/loader.hpp"

#include "hydrosddp/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace hydrosddp {

namespace {

constexpr int kHours = 168;

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw InputError("config: data." + what + " is required");
}

// Reads a wide hourly table keyed by [year,]week,hour into [year][week] blocks
// of kHours rows x columns.
std::vector<std::vector<Eigen::MatrixXd>> read_hourly(const CsvTable& t, const std::vector<std::string>& columns,
                                                      int* weeks_out) {
  const bool has_year = t.has_column("year");
  std::vector<int> cols;
  for (const std::string& c : columns) cols.push_back(t.require_column(c));

  std::map<int, std::map<int, std::map<int, int>>> index;  // year -> week -> hour -> row
  for (int r = 0; r < t.num_rows(); ++r) {
    const int y = has_year ? t.integer(r, "year") : 0;
    const int w = t.integer(r, "week");
    const int h = t.integer(r, "hour");
    if (w < 1) t.fail(r, "week must be at least 1");
    if (h < 1 || h > kHours) t.fail(r, "hour must lie in 1..168");
    if (!index[y][w].emplace(h, r).second) t.fail(r, "duplicate hour " + std::to_string(h) + " in week " + std::to_string(w));
  }
  if (index.empty()) throw InputError(t.source(), 1, "no data rows");

  int weeks = -1;
  std::vector<std::vector<Eigen::MatrixXd>> out;
  for (const auto& [year, by_week] : index) {
    const int W = by_week.rbegin()->first;
    if (static_cast<int>(by_week.size()) != W) {
      throw InputError(t.source(), 1, "weeks must run from 1 without gaps (year " + std::to_string(year) + ")");
    }
    if (weeks >= 0 && W != weeks) throw InputError(t.source(), 1, "every year must cover the same weeks");
    weeks = W;
    std::vector<Eigen::MatrixXd> year_data;
    for (const auto& [week, hours] : by_week) {
      if (static_cast<int>(hours.size()) != kHours) {
        throw InputError(t.source(), t.line(hours.begin()->second),
                         "week " + std::to_string(week) + " has " + std::to_string(hours.size()) + " hours, expected 168");
      }
      Eigen::MatrixXd m(kHours, static_cast<Eigen::Index>(cols.size()));
      for (const auto& [hour, row] : hours) {
        for (std::size_t c = 0; c < cols.size(); ++c) m(hour - 1, c) = t.number(row, cols[c]);
      }
      year_data.push_back(std::move(m));
    }
    out.push_back(std::move(year_data));
  }
  *weeks_out = weeks;
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> LoadedSystem::total_demand() const {
  const int years = traces ? traces->years : 1;
  std::vector<Eigen::VectorXd> out;
  for (const Eigen::MatrixXd& d : hourly_demand) {
    const Eigen::VectorXd total = d.rowwise().sum();
    out.push_back(total.replicate(years, 1));
  }
  return out;
}

LoadedSystem load_system(const RunConfig& config) {
  LoadedSystem L;
  SystemData& s = L.system;
  s.nodes = config.nodes;
  s.annual_discount = config.annual_discount;
  s.tranches = config.tranches;
  s.pump_pairs = config.pump_pairs;
  s.storage_penalty = config.storage_penalty;
  L.investment = config.investment;

  if (!config.files.reservoirs.empty()) {
    const CsvTable t = CsvTable::read(config.files.reservoirs);
    for (int r = 0; r < t.num_rows(); ++r) {
      Reservoir res;
      res.name = t.text(r, "reservoir");
      res.capacity = t.number(r, "capacity_m3");
      res.initial = t.number(r, "initial_m3");
      res.minimum = t.number_or(r, "minimum_m3", 0.0);
      if (res.capacity < 0.0) t.fail(r, "reservoir capacity must be non-negative");
      s.reservoirs.push_back(res);
    }
  }
  if (!config.files.hydro.empty()) {
    const CsvTable t = CsvTable::read(config.files.hydro);
    for (int r = 0; r < t.num_rows(); ++r) {
      HydroPlant h;
      h.name = t.text(r, "generator");
      h.node = t.text(r, "region");
      h.specific_power = t.number(r, "specific_power");
      if (h.specific_power == 0.0) t.fail(r, "specific power must be non-zero");
      const double mw = t.number(r, "capacity_mw");
      if (mw < 0.0) t.fail(r, "capacity must be non-negative");
      h.flow_capacity = t.number_or(r, "flow_capacity", mw / std::abs(h.specific_power));
      h.spill_capacity = t.number_or(r, "spill_capacity", 0.0);
      if (t.has_column("from_reservoir")) h.from = t.text(r, "from_reservoir");
      if (t.has_column("to_reservoir")) h.to = t.text(r, "to_reservoir");
      h.min_flow = t.number_or(r, "min_flow", 0.0);
      s.hydro.push_back(h);
    }
  }
  if (!config.files.peakers.empty()) {
    const CsvTable t = CsvTable::read(config.files.peakers);
    for (int r = 0; r < t.num_rows(); ++r) {
      s.peakers.push_back({t.text(r, "peaker"), t.text(r, "region"), t.number(r, "capacity_mw"), t.number(r, "cost_per_mwh")});
    }
  }
  if (!config.files.lines.empty()) {
    const CsvTable t = CsvTable::read(config.files.lines);
    for (int r = 0; r < t.num_rows(); ++r) {
      s.lines.push_back({t.text(r, "line"), t.text(r, "from"), t.text(r, "to"), t.number(r, "capacity_mw")});
    }
  }
  s.fixed_generation = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.nodes.size()));
  if (!config.files.fixed_generation.empty()) {
    const CsvTable t = CsvTable::read(config.files.fixed_generation);
    for (int r = 0; r < t.num_rows(); ++r) {
      const int i = s.node_index(t.text(r, "region"));
      if (i < 0) t.fail(r, "unknown region '" + t.text(r, "region") + "'");
      s.fixed_generation(i) += t.number(r, "generation_mw");
    }
  }

  require_file(config.files.demand, "demand");
  int W = 0;
  {
    const CsvTable t = CsvTable::read(config.files.demand);
    if (t.has_column("year")) throw InputError(t.source(), 1, "demand is per week and hour; drop the year column");
    auto data = read_hourly(t, s.nodes, &W);
    L.hourly_demand = std::move(data.front());
    for (int w = 0; w < W; ++w) {
      if ((L.hourly_demand[w].array() < 0.0).any()) throw InputError(t.source(), 1, "week " + std::to_string(w + 1) + ": negative demand");
    }
  }

  if (!config.files.wind.empty()) {
    require_file(config.files.shares, "shares");
    const CsvTable sh = CsvTable::read(config.files.shares);
    WindTraces tr;
    std::vector<double> shares;
    for (int r = 0; r < sh.num_rows(); ++r) {
      tr.regions.push_back(sh.text(r, "region"));
      shares.push_back(sh.number(r, "share"));
      L.wind_nodes.push_back(sh.text(r, "node"));
      if (s.node_index(L.wind_nodes.back()) < 0) sh.fail(r, "unknown node '" + L.wind_nodes.back() + "'");
    }
    tr.shares = Eigen::Map<const Eigen::VectorXd>(shares.data(), static_cast<Eigen::Index>(shares.size()));
    if (std::abs(tr.shares.sum() - 1.0) > 1e-9) {
      throw InputError(sh.source(), 1, "wind shares sum to " + format_number(tr.shares.sum()) + ", not 1");
    }
    const CsvTable t = CsvTable::read(config.files.wind);
    int WW = 0;
    auto data = read_hourly(t, tr.regions, &WW);
    if (WW != W) throw InputError(t.source(), 1, "wind traces cover " + std::to_string(WW) + " weeks, demand " + std::to_string(W));
    tr.years = static_cast<int>(data.size());
    for (int w = 0; w < W; ++w) {
      Eigen::MatrixXd f(kHours * tr.years, static_cast<Eigen::Index>(tr.regions.size()));
      for (int y = 0; y < tr.years; ++y) f.middleRows(y * kHours, kHours) = data[y][w];
      tr.factors.push_back(std::move(f));
    }
    try {
      tr.validate();
    } catch (const WindError& e) {
      throw InputError(t.source(), 1, e.what());
    }
    L.traces = std::move(tr);
  }

  // Load blocks from the duration curve at the nominal wind capacity.
  {
    int total = 0;
    for (int h : config.block_hours) total += h;
    if (total != kHours) throw InputError("config: blocks.hours sum to " + std::to_string(total) + ", not 168");
  }
  const std::vector<Eigen::VectorXd> totals = L.total_demand();
  const int years = L.traces ? L.traces->years : 1;
  const std::vector<int> counts = observation_counts(config.block_hours, years);
  for (int w = 0; w < W; ++w) {
    const Eigen::VectorXd series = L.traces
                                       ? system_net_demand(totals[w], L.traces->factors[w], L.traces->shares, config.wind.nominal)
                                       : totals[w];
    const BlockAssignment a = build_blocks(series, counts);
    WeekBlocks wk;
    for (int h : config.block_hours) wk.hours.push_back(h);
    wk.demand = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.nodes.size()), static_cast<Eigen::Index>(counts.size()));
    for (Eigen::Index o = 0; o < series.size(); ++o) {
      wk.demand.col(a.block_of[o]) += L.hourly_demand[w].row(o % kHours).transpose();
    }
    for (std::size_t b = 0; b < counts.size(); ++b) wk.demand.col(b) /= counts[b];
    s.weeks.push_back(std::move(wk));
  }

  if (!config.files.inflows.empty()) {
    const CsvTable t = CsvTable::read(config.files.inflows);
    std::vector<int> cols;
    for (const Reservoir& r : s.reservoirs) cols.push_back(t.require_column(r.name));
    std::map<int, std::map<int, int>> index;
    for (int r = 0; r < t.num_rows(); ++r) {
      const int w = t.integer(r, "week");
      if (w < 1 || w > W) t.fail(r, "week " + std::to_string(w) + " outside 1.." + std::to_string(W));
      if (!index[t.integer(r, "year")].emplace(w, r).second) t.fail(r, "duplicate week");
    }
    for (const auto& [year, weeks] : index) {
      if (static_cast<int>(weeks.size()) != W) {
        throw InputError(t.source(), 1, "inflow year " + std::to_string(year) + " does not cover all " + std::to_string(W) + " weeks");
      }
      std::vector<Eigen::VectorXd> seq;
      for (const auto& [week, row] : weeks) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) v(c) = t.number(row, cols[c]);
        seq.push_back(std::move(v));
      }
      s.inflows.push_back(std::move(seq));
    }
  }

  // Wind slopes per wind candidate, shares renormalized within its regions.
  for (const InvestmentCandidate& c : L.investment.candidates) {
    if (c.kind != InvestmentKind::Wind) continue;
    if (!L.traces) throw InputError("config: wind candidate '" + c.name + "' needs wind traces");
    const WindTraces& full = *L.traces;
    std::vector<int> members;
    for (std::size_t r = 0; r < full.regions.size(); ++r) {
      if (c.regions.empty() || std::find(c.regions.begin(), c.regions.end(), full.regions[r]) != c.regions.end()) {
        members.push_back(static_cast<int>(r));
      }
    }
    if (members.size() != (c.regions.empty() ? full.regions.size() : c.regions.size())) {
      throw InputError("config: wind candidate '" + c.name + "' names an unknown region");
    }
    WindTraces sub;
    sub.years = full.years;
    Eigen::VectorXd shares(static_cast<Eigen::Index>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k) {
      sub.regions.push_back(full.regions[members[k]]);
      shares(k) = full.shares(members[k]);
    }
    if (!(shares.sum() > 0.0)) throw InputError("config: wind candidate '" + c.name + "' covers regions with zero share");
    sub.shares = shares / shares.sum();
    for (const Eigen::MatrixXd& f : full.factors) {
      Eigen::MatrixXd g(f.rows(), static_cast<Eigen::Index>(members.size()));
      for (std::size_t k = 0; k < members.size(); ++k) g.col(k) = f.col(members[k]);
      sub.factors.push_back(std::move(g));
    }
    const WindSlopeTable table = fit_slopes(totals, sub, config.wind);
    for (std::size_t k = 0; k < members.size(); ++k) {
      WindLink link;
      link.candidate = c.name;
      link.region = sub.regions[k];
      link.node = L.wind_nodes[members[k]];
      for (int w = 0; w < W; ++w) link.mu.push_back(table.mu[w].row(static_cast<Eigen::Index>(k)).transpose());
      s.wind.push_back(std::move(link));
    }
  }

  s.validate();
  return L;
}

WindSlopeTable national_wind_slopes(const LoadedSystem& loaded, const RunConfig& config) {
  if (!loaded.traces) throw InputError("config: data.wind is required for wind linearization");
  return fit_slopes(loaded.total_demand(), *loaded.traces, config.wind);
}

RunConfig write_system(const LoadedSystem& loaded, const RunConfig& config, const std::filesystem::path& dir) {
  const SystemData& s = loaded.system;
  RunConfig out = config;
  auto put = [&](const std::string& name, const CsvWriter& w) {
    write_atomic(dir / name, w.str());
    return dir / name;
  };

  CsvWriter res({"reservoir", "capacity_m3", "initial_m3", "minimum_m3"});
  for (const Reservoir& r : s.reservoirs) res.row({r.name, exact(r.capacity), exact(r.initial), exact(r.minimum)});
  out.files.reservoirs = put("reservoirs.csv", res);

  CsvWriter hyd({"generator", "region", "capacity_mw", "specific_power", "flow_capacity", "spill_capacity",
                 "from_reservoir", "to_reservoir", "min_flow"});
  for (const HydroPlant& h : s.hydro) {
    hyd.row({h.name, h.node, exact(h.flow_capacity * std::abs(h.specific_power)), exact(h.specific_power),
             exact(h.flow_capacity), exact(h.spill_capacity), h.from, h.to, exact(h.min_flow)});
  }
  out.files.hydro = put("hydro.csv", hyd);

  CsvWriter pk({"peaker", "region", "capacity_mw", "cost_per_mwh"});
  for (const Peaker& p : s.peakers) pk.row({p.name, p.node, exact(p.capacity), exact(p.cost)});
  out.files.peakers = put("peakers.csv", pk);

  CsvWriter ln({"line", "from", "to", "capacity_mw"});
  for (const Line& l : s.lines) ln.row({l.name, l.from, l.to, exact(l.capacity)});
  out.files.lines = put("lines.csv", ln);

  CsvWriter fx({"region", "generation_mw"});
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    if (s.fixed_generation(i) != 0.0) fx.row({s.nodes[i], exact(s.fixed_generation(i))});
  }
  out.files.fixed_generation = put("fixed_generation.csv", fx);

  std::vector<std::string> head{"week", "hour"};
  head.insert(head.end(), s.nodes.begin(), s.nodes.end());
  CsvWriter dem(head);
  for (std::size_t w = 0; w < loaded.hourly_demand.size(); ++w) {
    for (int h = 0; h < kHours; ++h) {
      std::vector<std::string> row{std::to_string(w + 1), std::to_string(h + 1)};
      for (Eigen::Index i = 0; i < loaded.hourly_demand[w].cols(); ++i) row.push_back(exact(loaded.hourly_demand[w](h, i)));
      dem.row(row);
    }
  }
  out.files.demand = put("demand.csv", dem);

  std::vector<std::string> ih{"year", "week"};
  for (const Reservoir& r : s.reservoirs) ih.push_back(r.name);
  CsvWriter inf(ih);
  for (std::size_t y = 0; y < s.inflows.size(); ++y) {
    for (std::size_t w = 0; w < s.inflows[y].size(); ++w) {
      std::vector<std::string> row{std::to_string(y + 1), std::to_string(w + 1)};
      for (Eigen::Index j = 0; j < s.inflows[y][w].size(); ++j) row.push_back(exact(s.inflows[y][w](j)));
      inf.row(row);
    }
  }
  out.files.inflows = put("inflows.csv", inf);

  if (loaded.traces) {
    const WindTraces& tr = *loaded.traces;
    CsvWriter sh({"region", "share", "node"});
    for (std::size_t r = 0; r < tr.regions.size(); ++r) sh.row({tr.regions[r], exact(tr.shares(r)), loaded.wind_nodes[r]});
    out.files.shares = put("shares.csv", sh);
    std::vector<std::string> wh{"year", "week", "hour"};
    wh.insert(wh.end(), tr.regions.begin(), tr.regions.end());
    CsvWriter wd(wh);
    for (int y = 0; y < tr.years; ++y) {
      for (std::size_t w = 0; w < tr.factors.size(); ++w) {
        for (int h = 0; h < kHours; ++h) {
          std::vector<std::string> row{std::to_string(y + 1), std::to_string(w + 1), std::to_string(h + 1)};
          for (Eigen::Index r = 0; r < tr.factors[w].cols(); ++r) row.push_back(exact(tr.factors[w](y * kHours + h, r)));
          wd.row(row);
        }
      }
    }
    out.files.wind = put("wind.csv", wd);
  }
  return out;
}

}  // namespace hydrosddp
