#pragma once

#include "flmgof/harness/study.hpp"
#include "flmgof/hypotest.hpp"

#include "json.hpp"

#include <string>

namespace flmgof {

void to_json(nlohmann::json& j, const TestConfig& c);
void from_json(const nlohmann::json& j, TestConfig& c);
void to_json(nlohmann::json& j, const ScenarioSpec& s);

namespace harness {

void to_json(nlohmann::json& j, const StudyConfig& c);
/// Missing keys keep their defaults; unknown keys raise kParseError.
void from_json(const nlohmann::json& j, StudyConfig& c);
void to_json(nlohmann::json& j, const PowerRow& r);

/// Throws kIoError when unreadable and kParseError on malformed JSON.
StudyConfig load_study_config(const std::string& path);

} // namespace harness
} // namespace flmgof
