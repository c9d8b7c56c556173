#pragma once

#include <iosfwd>
#include <span>

#include "json.hpp"
#include "ranop/loop.hpp"

namespace ranop {

// One JSON object per record. Interface messages sit under "a1", "e2", "o1".
nlohmann::json record_to_json(const TrajectoryRecord& record);
// Throws ConfigError on a malformed record.
TrajectoryRecord record_from_json(const nlohmann::json& doc);

InterfaceMessage message_from_json(const std::string& interface, const nlohmann::json& doc);

nlohmann::json kpis_to_json(const KpiVector& kpis);

void write_jsonl(std::ostream& out, std::span<const TrajectoryRecord> records);
std::vector<TrajectoryRecord> read_jsonl(std::istream& in);

}  // namespace ranop
