#include "wpcn/serialize.hpp"

#include <fstream>
#include <sstream>

namespace wpcn {

namespace {

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

VectorXd vector_from_json(const json& arr) {
  VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr ? rows[0].size() : 0;
  MatrixXd m(nr, nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) m(r, c) = rows[r][c].get<double>();
  return m;
}

json positions_to_json(const std::vector<std::array<double, 2>>& pos) {
  json arr = json::array();
  for (const auto& p : pos) arr.push_back(json::array({p[0], p[1]}));
  return arr;
}

std::vector<std::array<double, 2>> positions_from_json(const json& arr) {
  std::vector<std::array<double, 2>> pos;
  pos.reserve(arr.size());
  for (const auto& p : arr)
    pos.push_back({p[0].get<double>(), p[1].get<double>()});
  return pos;
}

}  // namespace

json instance_to_json(const NetworkInstance& inst) {
  json j;
  j["num_haps"] = inst.num_haps;
  j["num_users"] = inst.num_users;
  j["hap_of"] = inst.hap_of;
  j["uplink_gain"] = matrix_to_json(inst.uplink_gain);
  j["downlink_gain"] = matrix_to_json(inst.downlink_gain);
  j["demand_bits"] = vector_to_json(inst.demand_bits);
  j["battery_init_j"] = vector_to_json(inst.battery_init_j);
  j["battery_cap_j"] = inst.battery_cap_j;
  j["positions"] = {{"users", positions_to_json(inst.user_pos_m)},
                    {"haps", positions_to_json(inst.hap_pos_m)}};
  return j;
}

NetworkInstance instance_from_json(const json& j) {
  NetworkInstance inst;
  inst.num_haps = j.at("num_haps").get<int>();
  inst.num_users = j.at("num_users").get<int>();
  inst.hap_of = j.at("hap_of").get<std::vector<int>>();
  inst.uplink_gain = matrix_from_json(j.at("uplink_gain"));
  inst.downlink_gain = matrix_from_json(j.at("downlink_gain"));
  inst.demand_bits = vector_from_json(j.at("demand_bits"));
  inst.battery_init_j = vector_from_json(j.at("battery_init_j"));
  inst.battery_cap_j = j.at("battery_cap_j").get<double>();
  if (j.contains("positions")) {
    inst.user_pos_m = positions_from_json(j["positions"].at("users"));
    inst.hap_pos_m = positions_from_json(j["positions"].at("haps"));
  }
  inst.validate();
  return inst;
}

json schedule_to_json(const Schedule& sched) {
  json slots = json::array();
  for (const auto& slot : sched.slots) {
    json members = json::array();
    for (std::size_t i = 0; i < slot.members.size(); ++i)
      members.push_back(
          {{"user", slot.members[i]}, {"power_w", slot.power_w[i]}});
    slots.push_back({{"duration_s", slot.duration_s},
                     {"mode", to_string(slot.mode)},
                     {"members", std::move(members)}});
  }
  return {{"mode", to_string(sched.mode)},
          {"slots", std::move(slots)},
          {"total_s", sched.total_s()}};
}

Schedule schedule_from_json(const json& j) {
  Schedule sched;
  sched.mode = rate_mode_from_string(j.at("mode").get<std::string>());
  for (const auto& js : j.at("slots")) {
    Slot slot;
    slot.mode = rate_mode_from_string(js.at("mode").get<std::string>());
    slot.duration_s = js.at("duration_s").get<double>();
    for (const auto& jm : js.at("members")) {
      slot.members.push_back(jm.at("user").get<int>());
      slot.power_w.push_back(jm.at("power_w").get<double>());
    }
    sched.slots.push_back(std::move(slot));
  }
  return sched;
}

json report_to_json(const ValidationReport& r) {
  return {{"valid", r.valid},
          {"each_user_once", r.each_user_once},
          {"one_per_cell", r.one_per_cell},
          {"duration_positive", r.duration_positive},
          {"demand_met", r.demand_met},
          {"snr_ok", r.snr_ok},
          {"pmax_ok", r.pmax_ok},
          {"energy_causal", r.energy_causal},
          {"first_violation", r.first_violation}};
}

json pf_result_to_json(const PfResult& r) {
  json j;
  j["spectral_radius"] = r.spectral_radius;
  j["pmax_ok"] = r.pmax_ok;
  j["energy_ok"] = r.energy_ok;
  if (r.min_power_w)
    j["min_power_w"] = vector_to_json(*r.min_power_w);
  else
    j["min_power_w"] = nullptr;
  return j;
}

json oracle_result_to_json(const OracleResult& r) {
  return {{"best_total_s", r.best_total_s},
          {"best_partition", r.best_partition},
          {"best_order", r.best_order},
          {"evaluated_count", r.evaluated_count}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

}  // namespace wpcn
