// SPDX-License-Identifier: Apache-2.0
#include "gridsure/grid/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gridsure::grid {

namespace {

using nlohmann::json;

Profile profile_from_json(const json& j, const json& named, int T,
                          const std::string& who) {
  if (j.is_number()) {
    return Profile::Constant(T, j.get<Real>());
  }
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (!named.contains(name))
      throw ParseError(who + ": unknown profile '" + name + "'");
    return profile_from_json(named.at(name), named, T, who);
  }
  if (j.is_array()) {
    Profile p(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number())
        throw ParseError(who + ": profile entry " + std::to_string(i) +
                         " is not a number");
      p[static_cast<Eigen::Index>(i)] = j[i].get<Real>();
    }
    return p;
  }
  throw ParseError(who + ": expected number, profile name, or array");
}

void load_prices_csv(const std::string& path, int T, Profile& buy, Profile& sell) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open prices CSV '" + path + "'");
  buy.resize(T);
  sell.resize(T);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("prices CSV '" + path + "' is empty");
  // header: hour,buy,sell
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int hour;
    Real b, s;
    if (!std::getline(ls, cell, ',')) break;
    try {
      hour = std::stoi(cell);
      if (!std::getline(ls, cell, ',')) throw ParseError("");
      b = std::stod(cell);
      if (!std::getline(ls, cell, ',')) throw ParseError("");
      s = std::stod(cell);
    } catch (const std::exception&) {
      throw ParseError("prices CSV '" + path + "': malformed row '" + line + "'");
    }
    if (hour < 0 || hour >= T)
      throw ParseError("prices CSV '" + path + "': hour " + std::to_string(hour) +
                       " outside [0, " + std::to_string(T) + ")");
    buy[hour] = b;
    sell[hour] = s;
    ++rows;
  }
  if (rows != T)
    throw ParseError("prices CSV '" + path + "': " + std::to_string(rows) +
                     " rows, expected " + std::to_string(T));
}

}  // namespace

NetworkModel parse_network(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("network config: ") + e.what());
  }
  try {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
      throw ParseError("network config: schema_version 1 required");

    NetworkModel m;
    if (j.contains("base")) {
      m.base.mva = j.at("base").value("mva", 1.0);
      m.base.kv = j.at("base").value("kv", 1.0);
    }

    const json named = j.value("profiles", json::object());
    const json& pol = j.at("policy");
    TariffAndPolicy& p = m.policy;
    p.time_steps = pol.value("time_steps", 24);
    const int T = p.time_steps;
    p.time_step_hours = pol.value("time_step_hours", 1.0);
    if (pol.contains("prices_csv")) {
      const std::string rel = pol.at("prices_csv").get<std::string>();
      const auto path = std::filesystem::path(base_dir) / rel;
      load_prices_csv(path.string(), T, p.buy_price, p.sell_price);
    } else {
      p.buy_price = profile_from_json(pol.at("buy_price"), named, T, "policy.buy_price");
      p.sell_price = profile_from_json(pol.at("sell_price"), named, T, "policy.sell_price");
    }
    p.market_loss_factor = pol.value("market_loss_factor", 1.0);
    const std::string conv = pol.value("loss_convention", "literal");
    if (conv == "literal")
      p.loss_convention = LossConvention::Literal;
    else if (conv == "physical")
      p.loss_convention = LossConvention::Physical;
    else
      throw ParseError("policy.loss_convention: expected 'literal' or 'physical'");
    p.curtail_fraction_max = pol.value("curtail_fraction_max", 0.0);
    p.curtail_penalty = pol.value("curtail_penalty", 0.0);
    p.one_time_incentive = pol.value("one_time_incentive", 0.0);
    p.delta_bus = pol.value("delta_bus", 0.0);
    p.delta_system = pol.value("delta_system", 0.0);
    p.v_min = pol.value("v_min", 0.94);
    p.v_max = pol.value("v_max", 1.06);
    p.v_root = pol.value("v_root", 1.0);
    p.terminal_soc_at_least_initial = pol.value("terminal_soc_at_least_initial", true);
    p.curtail_breakpoints = pol.value("curtail_breakpoints", 16);

    if (!j.contains("buses") || !j.at("buses").is_array() || j.at("buses").empty())
      throw ParseError("network config: 'buses' array required");
    bool any_market_key = false;
    for (const json& bj : j.at("buses")) {
      Bus b;
      b.id = bj.at("id").get<int>();
      b.name = bj.value("name", std::string{});
      const std::string who = "bus " + std::to_string(b.id);
      b.load_p = bj.contains("load_p")
                     ? profile_from_json(bj.at("load_p"), named, T, who + ".load_p")
                     : Profile::Zero(T);
      b.load_q = bj.contains("load_q")
                     ? profile_from_json(bj.at("load_q"), named, T, who + ".load_q")
                     : Profile::Zero(T);
      b.is_root = bj.value("root", false);
      if (bj.contains("market")) {
        any_market_key = true;
        b.is_market_node = bj.at("market").get<bool>();
      }
      if (bj.contains("pv")) {
        PvUnit pv;
        pv.capacity =
            profile_from_json(bj.at("pv").at("capacity"), named, T, who + ".pv.capacity");
        pv.generation = profile_from_json(bj.at("pv").at("generation"), named, T,
                                          who + ".pv.generation");
        b.pv = std::move(pv);
      }
      if (bj.contains("bess")) {
        const json& sj = bj.at("bess");
        BessUnit s;
        s.capacity = sj.at("capacity_mwh").get<Real>();
        s.rate_limit = sj.at("rate_limit_mw").get<Real>();
        s.efficiency = sj.value("efficiency", 1.0);
        s.initial_energy = sj.value("initial_energy_mwh", 0.0);
        b.bess = s;
      }
      m.buses.push_back(std::move(b));
    }
    // default market placement: the root bus only
    if (!any_market_key) {
      for (Bus& b : m.buses)
        if (b.is_root) b.is_market_node = true;
    }

    for (const json& lj : j.value("lines", json::array())) {
      Line l;
      l.from = lj.at("from").get<int>();
      l.to = lj.at("to").get<int>();
      l.r = lj.at("r").get<Real>();
      l.x = lj.at("x").get<Real>();
      m.lines.push_back(l);
    }

    validate_network(m);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("network config: ") + e.what());
  }
}

NetworkModel load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str(),
                       std::filesystem::path(path).parent_path().string());
}

namespace {

json profile_to_json(const Profile& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

}  // namespace

std::string network_to_json(const NetworkModel& m) {
  json j;
  j["schema_version"] = 1;
  j["base"] = {{"mva", m.base.mva}, {"kv", m.base.kv}};
  const TariffAndPolicy& p = m.policy;
  j["policy"] = {
      {"time_steps", p.time_steps},
      {"time_step_hours", p.time_step_hours},
      {"buy_price", profile_to_json(p.buy_price)},
      {"sell_price", profile_to_json(p.sell_price)},
      {"market_loss_factor", p.market_loss_factor},
      {"loss_convention",
       p.loss_convention == LossConvention::Literal ? "literal" : "physical"},
      {"curtail_fraction_max", p.curtail_fraction_max},
      {"curtail_penalty", p.curtail_penalty},
      {"one_time_incentive", p.one_time_incentive},
      {"delta_bus", p.delta_bus},
      {"delta_system", p.delta_system},
      {"v_min", p.v_min},
      {"v_max", p.v_max},
      {"v_root", p.v_root},
      {"terminal_soc_at_least_initial", p.terminal_soc_at_least_initial},
      {"curtail_breakpoints", p.curtail_breakpoints},
  };
  j["buses"] = json::array();
  for (const Bus& b : m.buses) {
    json bj;
    bj["id"] = b.id;
    if (!b.name.empty()) bj["name"] = b.name;
    bj["root"] = b.is_root;
    bj["market"] = b.is_market_node;
    bj["load_p"] = profile_to_json(b.load_p);
    bj["load_q"] = profile_to_json(b.load_q);
    if (b.pv) {
      bj["pv"] = {{"capacity", profile_to_json(b.pv->capacity)},
                  {"generation", profile_to_json(b.pv->generation)}};
    }
    if (b.bess) {
      bj["bess"] = {{"capacity_mwh", b.bess->capacity},
                    {"rate_limit_mw", b.bess->rate_limit},
                    {"efficiency", b.bess->efficiency},
                    {"initial_energy_mwh", b.bess->initial_energy}};
    }
    j["buses"].push_back(std::move(bj));
  }
  j["lines"] = json::array();
  for (const Line& l : m.lines)
    j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"r", l.r}, {"x", l.x}});
  return j.dump(2);
}

}  // namespace gridsure::grid
