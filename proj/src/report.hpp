#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "trainer.hpp"

namespace randgad {

std::string version_string();

// CSV: node,score[,label]
void write_scores_csv(const ScoreReport& report, const Graph* labeled,
                      const std::string& path);

// CSV: epoch,loss,loss_topo,loss_attr,p_*,r_*,wall_ms
void write_history_csv(const ScoreReport& report, const std::string& path);

nlohmann::json train_config_json(const TrainConfig& cfg);

nlohmann::json summary_json(const ScoreReport& report, const TrainConfig& cfg);

// FNV-1a 64 over the file bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace randgad
