// Copyright 2026 The logitsteer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSONL file formats.
//
//   prompts:      {"prompt": "..."}                       one per line
//   generations:  {"prompt": "...", "continuations": [...], "scores": [...]}
//
// "scores" is present only once a file has been evaluated.

#ifndef LOGITSTEER_RECORDS_IO_HPP_
#define LOGITSTEER_RECORDS_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "logitsteer/error.hpp"
#include "logitsteer/io.hpp"
#include "logitsteer/metrics.hpp"

namespace logitsteer {

struct PromptRecord {
  std::string prompt;
  std::optional<std::string> bucket;
};

namespace detail {

template <class Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ParseError(where + "expected a JSON object");
    try {
      fn(j);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + e.what());
    }
  }
}

}  // namespace detail

inline std::vector<PromptRecord> read_prompts(const std::filesystem::path& path) {
  std::vector<PromptRecord> prompts;
  detail::for_each_json_line(path, [&](const nlohmann::json& j) {
    if (!j.contains("prompt") || !j["prompt"].is_string()) {
      throw ParseError("missing string field \"prompt\"");
    }
    PromptRecord record{j["prompt"].get<std::string>(), std::nullopt};
    if (j.contains("bucket")) record.bucket = j["bucket"].get<std::string>();
    prompts.push_back(std::move(record));
  });
  return prompts;
}

inline std::string prompts_to_jsonl(std::span<const PromptRecord> prompts) {
  std::string out;
  for (const PromptRecord& record : prompts) {
    nlohmann::json j{{"prompt", record.prompt}};
    if (record.bucket) j["bucket"] = *record.bucket;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

inline std::vector<GenerationRecord> read_generations(const std::filesystem::path& path) {
  std::vector<GenerationRecord> records;
  detail::for_each_json_line(path, [&](const nlohmann::json& j) {
    GenerationRecord record;
    if (!j.contains("prompt") || !j["prompt"].is_string()) {
      throw ParseError("missing string field \"prompt\"");
    }
    record.prompt = j["prompt"].get<std::string>();
    if (!j.contains("continuations") || !j["continuations"].is_array()) {
      throw ParseError("missing array field \"continuations\"");
    }
    for (const auto& c : j["continuations"]) {
      if (!c.is_string()) throw ParseError("continuations must be strings");
      record.continuations.push_back(c.get<std::string>());
    }
    if (j.contains("scores")) {
      for (const auto& s : j.at("scores")) {
        if (!s.is_number()) throw ParseError("scores must be numbers");
        const double value = s.get<double>();
        if (!(value >= 0.0 && value <= 1.0)) throw ParseError("scores must lie in [0, 1]");
        record.scores.push_back(value);
      }
      if (record.scores.size() != record.continuations.size()) {
        throw ParseError("scores and continuations differ in length");
      }
    }
    records.push_back(std::move(record));
  });
  return records;
}

inline std::string generations_to_jsonl(std::span<const GenerationRecord> records) {
  std::string out;
  for (const GenerationRecord& record : records) {
    nlohmann::json j{{"prompt", record.prompt}, {"continuations", record.continuations}};
    if (!record.scores.empty()) j["scores"] = record.scores;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace logitsteer

#endif  // LOGITSTEER_RECORDS_IO_HPP_
