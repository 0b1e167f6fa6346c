#pragma once

#include <string>

#include "json.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/sched.hpp"
#include "wpcn/types.hpp"

namespace wpcn {

using json = nlohmann::json;

json instance_to_json(const NetworkInstance& inst);
NetworkInstance instance_from_json(const json& j);

json schedule_to_json(const Schedule& sched);
Schedule schedule_from_json(const json& j);

json report_to_json(const ValidationReport& report);
json pf_result_to_json(const PfResult& result);
json oracle_result_to_json(const OracleResult& result);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace wpcn
